#pragma once

#include <string>
#include <vector>

#include "csm/linalg.hpp"

namespace csm {

struct System {
  Eigen::Index dim = 0;  // number of mutually exclusive modalities
  std::string name;
};

/// A complete measurement arrangement: an ordered frame of N mutually
/// orthogonal rank-one projectors summing to identity, plus a classical
/// parameter label (polarizer angle, field direction, ...).
struct Context {
  Eigen::Index dim = 0;
  std::vector<Matrix> projectors;  // ordered; one per outcome
  std::string label;
  std::vector<double> params;  // family parameters, radians where angular
};

/// One certain-and-repeatable answer set: a rank-one projector together with
/// the identity of the context in which it is certain.
struct Modality {
  Matrix projector;
  std::string context_label;
  int outcome_index = 0;
};

struct ContextTransformation {
  Matrix matrix;  // N x N unitary
  std::string label;
};

/// Doubly stochastic matrix of conditional probabilities between two
/// contexts: p(m, n) = probability of outcome m in `to` given outcome n
/// in `from`.
struct TransitionTable {
  std::string from_context;
  std::string to_context;
  RealMatrix p;
};

enum class PairKind { Identical, MutuallyExclusive, Incompatible };

/// Builds a context from an orthonormal basis, order preserved.
/// Throws NonOrthonormalBasis reporting the worst Gram deviation.
Context context_from_basis(const std::vector<Vector>& vectors,
                           std::string label,
                           std::vector<double> params = {},
                           double tol = kDefaultTol);

/// The n-th modality of a context.
Modality modality(const Context& c, int n);

/// Worst violation of the Context invariants: per-projector hermiticity,
/// idempotence and unit trace, pairwise orthogonality, and sum-to-identity.
double context_residual(const Context& c);

/// Conditional probability between modalities: Re tr(Π_a · Π_b). Symmetric
/// in its arguments; clamped to [0, 1] against floating point noise.
double born_probability(const Modality& a, const Modality& b);

TransitionTable transition_table(const Context& c1, const Context& c2);

/// Maps every projector Π -> U Π U†. The modality count never changes.
Context transform_context(const Context& c, const ContextTransformation& g,
                          double tol = kDefaultTol);

/// Identical if the mutual probability is within tol of 1, MutuallyExclusive
/// if within tol of 0, Incompatible otherwise.
PairKind classify_pair(const Modality& a, const Modality& b,
                       double tol = kDefaultTol);

/// Size of the largest pairwise mutually exclusive subset (exact search;
/// capped at 64 modalities). Never exceeds the dimension.
int max_exclusive_set(const std::vector<Modality>& modalities,
                      double tol = kDefaultTol);

/// Equality as sets of projectors, permutation-insensitive.
bool same_context_set(const Context& a, const Context& b,
                      double tol = kDefaultTol);

/// Ordered equality, projector by projector; used for table indexing.
bool same_context_ordered(const Context& a, const Context& b,
                          double tol = kDefaultTol);

}  // namespace csm
