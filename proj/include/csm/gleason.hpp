#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "csm/core.hpp"
#include "csm/rng.hpp"

namespace csm::gleason {

/// A candidate frame function: assigns a value to a rank-one projector.
/// Must be safe to call concurrently (the additivity test is parallel).
using ProbabilityAssignment = std::function<double(const Matrix&)>;

/// Haar-distributed random unit vector / orthonormal context (Ginibre matrix
/// QR with the usual phase fix so the distribution is exactly invariant).
Vector random_unit_vector(Eigen::Index dim, rng::Stream& stream);
Context random_context(Eigen::Index dim, rng::Stream& stream);
Context random_context(Eigen::Index dim, std::uint64_t seed);

/// f(P) = tr(rho P): the assignment induced by a density matrix. Validates
/// that rho is Hermitian, positive semidefinite, and unit trace.
ProbabilityAssignment born_assignment(const Matrix& rho);

/// f(P) = tr(rho P)^2: fails additivity in every context unless rho is pure,
/// used as the canonical non-example.
ProbabilityAssignment squared_born_assignment(const Matrix& rho);

/// Checks |sum_n f(P_n) - 1| over many Haar-random contexts. Basis k draws
/// from the child stream derive(seed, k) and writes only its own slot, so the
/// result is bitwise identical at any parallelism degree.
struct FrameTestReport {
  Eigen::Index dim = 0;
  int bases = 0;
  double max_violation = 0.0;
  double mean_violation = 0.0;
  double max_out_of_range = 0.0;   // worst excursion of f below 0 or above 1
  bool additivity_only = false;    // dim 2: no uniqueness claim attaches
  std::vector<double> violations;  // one per basis
};

FrameTestReport additivity_test(const ProbabilityAssignment& f, Eigen::Index dim,
                                int bases, std::uint64_t seed);

/// Serial reference implementation; kept for testing and benchmarks.
FrameTestReport additivity_test_serial(const ProbabilityAssignment& f,
                                       Eigen::Index dim, int bases,
                                       std::uint64_t seed);

/// Least-squares reconstruction of the unique unit-trace Hermitian X with
/// f(P) ~= tr(X P), probed on random rank-one projectors. A large held-out
/// residual means f is not of density form.
struct DensityFit {
  Matrix rho;
  double train_residual = 0.0;     // max abs residual on the fitted probes
  double held_out_residual = 0.0;  // max abs residual on fresh probes
  int probes = 0;
  int attempts = 1;
};

DensityFit fit_density(const ProbabilityAssignment& f, Eigen::Index dim,
                       std::uint64_t seed, int probes = 0);

}  // namespace csm::gleason
