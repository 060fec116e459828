#pragma once

#include <array>
#include <vector>

#include "csm/core.hpp"
#include "csm/spin.hpp"

namespace csm::epr {

/// Two subsystems measured by separated parties. Product ordering is
/// Alice-major throughout: joint index = na * dim_b + nb.
struct CompositeSystem {
  Eigen::Index dim_a = 2;
  Eigen::Index dim_b = 2;
  std::string name;

  Eigen::Index dim() const { return dim_a * dim_b; }
};

/// Whether a joint modality factorizes over the parties or not.
enum class Provenance { Product, Entangled };

struct JointModality {
  Modality modality;
  Provenance provenance = Provenance::Product;
};

/// Kronecker product of two single-party contexts, Alice-major outcomes.
Context product_context(const Context& a, const Context& b);

JointModality product_modality(const Modality& a, const Modality& b);

/// Total-spin basis of two spin-1/2 systems: |S=1,m=1>, |S=1,m=0>,
/// |S=1,m=-1>, |S=0,m=0> in that outcome order.
Context coupled_basis_context();

/// The spin-0 state of two spin-1/2 systems (outcome 3 of the coupled basis).
JointModality singlet_modality();

/// Partial traces over one party, Alice-major ordering.
Matrix partial_trace_a(const Matrix& rho, Eigen::Index dim_a, Eigen::Index dim_b);
Matrix partial_trace_b(const Matrix& rho, Eigen::Index dim_a, Eigen::Index dim_b);

/// Joint outcome probabilities p(na, nb) for one setting pair.
struct BipartiteProbabilityTable {
  Eigen::Index dim_a = 0;
  Eigen::Index dim_b = 0;
  RealMatrix p;  // p(na, nb)
};

BipartiteProbabilityTable joint_table(const Modality& state, const Context& alice,
                                      const Context& bob);

struct Marginals {
  RealVector alice;
  RealVector bob;
};

Marginals marginals(const BipartiteProbabilityTable& table);

/// Conditional tables from a joint table. Throws ConditioningOnNullEvent if
/// a conditioning outcome has probability <= null_tol.
struct Conditionals {
  RealMatrix b_given_a;  // (nb, na)
  RealMatrix a_given_b;  // (na, nb)
};

Conditionals conditionals(const BipartiteProbabilityTable& table,
                          double null_tol = 1e-12);

/// Compares the direct joint probabilities against both sequential
/// factorizations p(a)p(b|a) and p(b)p(a|b), where the conditional comes
/// from projecting the state on the first party's outcome. Branches whose
/// conditioning probability is <= null_tol are skipped and counted.
struct ConsistencyReport {
  double max_deviation = 0.0;
  int skipped = 0;
};

ConsistencyReport check_consistency(const Modality& state, const Context& alice,
                                    const Context& bob, double null_tol = 1e-12);

/// Singlet-specific reduction law: conditioned on one party's outcome, the
/// other party obeys the single-system two-outcome law from the *opposite*
/// modality in the conditioning direction. Requires 2x2. Null branches are
/// skipped and counted.
struct ReductionReport {
  double max_deviation = 0.0;
  int skipped = 0;
};

ReductionReport malus_reduction_check(const Modality& state, const Context& alice,
                                      const Context& bob, double null_tol = 1e-12);

/// Two measurement directions per party plus the four joint tables, in
/// order (a0,b0), (a0,b1), (a1,b0), (a1,b1). Directions lie in the x-z
/// plane at the given polar angles (radians).
struct SettingsFamily {
  std::array<Context, 2> alice;
  std::array<Context, 2> bob;
  std::array<double, 2> alice_angles{};
  std::array<double, 2> bob_angles{};
  std::array<BipartiteProbabilityTable, 4> tables;
};

/// Family of spin-1/2 direction measurements on a joint state.
SettingsFamily settings_family(const Modality& state, double alice0, double alice1,
                               double bob0, double bob1);

/// Family assembled from externally built tables (no contexts attached).
SettingsFamily settings_family(const std::array<BipartiteProbabilityTable, 4>& tables);

/// Max change of either party's marginal when the other party switches
/// settings. Zero (to tolerance) means the family cannot signal.
double check_no_signalling(const SettingsFamily& family);

/// +/-1 correlation of a 2x2 joint table (outcome 0 counts as +1).
double correlation(const BipartiteProbabilityTable& table);

/// E(a_i, b_j) for the four setting pairs, in table order.
std::array<double, 4> correlations(const SettingsFamily& family);

/// CHSH combination: sum of the four correlations minus twice the one at
/// subtracted_term (0..3, table order).
double chsh_value(const std::array<double, 4>& correlations, int subtracted_term);
double chsh_value(const SettingsFamily& family, int subtracted_term);

/// Membership in the correlation polytope of local deterministic strategies,
/// decided by the eight CHSH facets (complete for the 2x2 two-outcome case).
/// Rejects families that are not 2x2 everywhere (WrongScenarioShape) or that
/// signal beyond signal_tol (SignallingInput).
struct PolytopeResult {
  bool local = true;
  double max_abs_chsh = 0.0;
  int argmax_pattern = 0;
  std::array<double, 4> chsh{};
};

PolytopeResult local_polytope_membership(const SettingsFamily& family,
                                         double facet_tol = 1e-9,
                                         double signal_tol = 1e-9);

}  // namespace csm::epr
