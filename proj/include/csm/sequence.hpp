#pragma once

#include <cstdint>
#include <vector>

#include "csm/core.hpp"

namespace csm::seq {

/// A sequential measurement chain: an initial modality followed by the
/// contexts it is dragged through, projective update after every step.
struct Chain {
  Modality initial;
  std::vector<Context> steps;
};

// Exponential-blowup guards. Full outcome-tuple distributions are stored
// densely; chains beyond these limits raise ChainTooLong.
inline constexpr int kMaxChainSteps = 12;
inline constexpr std::size_t kMaxExactTuples = std::size_t(1) << 24;
inline constexpr std::size_t kMaxSampleTuples = std::size_t(1) << 20;

/// Probabilities over full outcome tuples, flat row-major with step 0 as
/// the most significant digit.
struct OutcomeDistribution {
  int steps = 0;
  Eigen::Index dim = 0;
  std::vector<double> probs;

  std::size_t size() const { return probs.size(); }
  std::size_t index_of(const std::vector<int>& tuple) const;
  std::vector<int> tuple_at(std::size_t flat_index) const;
  double prob(const std::vector<int>& tuple) const;
  double total() const;
};

/// Exact distribution: the probability of a tuple is the product of
/// step-by-step conditional probabilities, the prepared modality after each
/// step being the one obtained.
OutcomeDistribution run_chain_exact(const Chain& chain);

/// Empirical counts per outcome tuple, same flat layout as
/// OutcomeDistribution.
struct SampleCounts {
  int steps = 0;
  Eigen::Index dim = 0;
  std::uint64_t samples = 0;
  std::vector<std::uint64_t> counts;

  std::vector<int> tuple_at(std::size_t flat_index) const;
};

/// Monte Carlo sampler, parallel over trajectories (OpenMP). Trajectory i
/// draws from the child stream derive(seed, i) and counts are merged by
/// integer summation, so the result is bitwise identical for a fixed
/// (seed, samples) at any parallelism degree — including the serial
/// reference below.
SampleCounts sample_chain(const Chain& chain, std::uint64_t samples,
                          std::uint64_t seed);

/// Serial reference implementation; kept for testing and benchmarks.
SampleCounts sample_chain_serial(const Chain& chain, std::uint64_t samples,
                                 std::uint64_t seed);

struct OrderingComparison {
  OutcomeDistribution original;
  OutcomeDistribution permuted;
  double total_variation = 0.0;
};

/// Runs the chain with the given contexts and with the permuted order, and
/// reports the total-variation distance between the two tuple distributions.
OrderingComparison ordering_comparison(const Modality& initial,
                                       const std::vector<Context>& contexts,
                                       const std::vector<int>& permutation);

}  // namespace csm::seq
