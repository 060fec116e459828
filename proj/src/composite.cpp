#include "csm/composite.hpp"

#include <algorithm>
#include <cmath>

#include "csm/errors.hpp"

namespace csm::epr {
namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

void require_bipartite(const Modality& state, const Context& alice,
                       const Context& bob) {
  if (state.projector.rows() != alice.dim * bob.dim)
    throw DimensionMismatch("state dimension is not the product of the parties");
}

// Projector on one party's outcome, embedded in the joint space.
Matrix embed_alice(const Matrix& pa, Eigen::Index dim_b) {
  return kron(pa, Matrix::Identity(dim_b, dim_b));
}

Matrix embed_bob(Eigen::Index dim_a, const Matrix& pb) {
  return kron(Matrix::Identity(dim_a, dim_a), pb);
}

const BipartiteProbabilityTable& family_table(const SettingsFamily& f, int i,
                                              int j) {
  return f.tables[static_cast<std::size_t>(i * 2 + j)];
}

}  // namespace

Context product_context(const Context& a, const Context& b) {
  Context c;
  c.dim = a.dim * b.dim;
  c.projectors.reserve(static_cast<std::size_t>(c.dim));
  for (Eigen::Index na = 0; na < a.dim; ++na)
    for (Eigen::Index nb = 0; nb < b.dim; ++nb)
      c.projectors.push_back(kron(a.projectors[na], b.projectors[nb]));
  c.label = a.label + " (x) " + b.label;
  c.params = a.params;
  c.params.insert(c.params.end(), b.params.begin(), b.params.end());
  return c;
}

JointModality product_modality(const Modality& a, const Modality& b) {
  JointModality j;
  j.modality.projector = kron(a.projector, b.projector);
  j.modality.context_label = a.context_label + " (x) " + b.context_label;
  j.modality.outcome_index =
      a.outcome_index * static_cast<int>(b.projector.rows()) + b.outcome_index;
  j.provenance = Provenance::Product;
  return j;
}

Context coupled_basis_context() {
  const double r = 1.0 / std::sqrt(2.0);
  std::vector<Vector> basis(4, Vector::Zero(4));
  basis[0](0) = 1.0;              // |S=1, m=+1> = |++>
  basis[1](1) = r;                // |S=1, m=0>
  basis[1](2) = r;
  basis[2](3) = 1.0;              // |S=1, m=-1> = |-->
  basis[3](1) = r;                // |S=0, m=0>
  basis[3](2) = -r;
  return context_from_basis(basis, "coupled(S2,Sz)");
}

JointModality singlet_modality() {
  JointModality j;
  j.modality = modality(coupled_basis_context(), 3);
  j.provenance = Provenance::Entangled;
  return j;
}

Matrix partial_trace_a(const Matrix& rho, Eigen::Index dim_a, Eigen::Index dim_b) {
  if (rho.rows() != dim_a * dim_b || rho.cols() != dim_a * dim_b)
    throw DimensionMismatch("density dimension is not dim_a * dim_b");
  Matrix out = Matrix::Zero(dim_b, dim_b);
  for (Eigen::Index i = 0; i < dim_b; ++i)
    for (Eigen::Index j = 0; j < dim_b; ++j)
      for (Eigen::Index a = 0; a < dim_a; ++a)
        out(i, j) += rho(a * dim_b + i, a * dim_b + j);
  return out;
}

Matrix partial_trace_b(const Matrix& rho, Eigen::Index dim_a, Eigen::Index dim_b) {
  if (rho.rows() != dim_a * dim_b || rho.cols() != dim_a * dim_b)
    throw DimensionMismatch("density dimension is not dim_a * dim_b");
  Matrix out = Matrix::Zero(dim_a, dim_a);
  for (Eigen::Index i = 0; i < dim_a; ++i)
    for (Eigen::Index j = 0; j < dim_a; ++j)
      for (Eigen::Index b = 0; b < dim_b; ++b)
        out(i, j) += rho(i * dim_b + b, j * dim_b + b);
  return out;
}

BipartiteProbabilityTable joint_table(const Modality& state, const Context& alice,
                                      const Context& bob) {
  require_bipartite(state, alice, bob);
  BipartiteProbabilityTable t;
  t.dim_a = alice.dim;
  t.dim_b = bob.dim;
  t.p.resize(t.dim_a, t.dim_b);
  for (Eigen::Index na = 0; na < t.dim_a; ++na)
    for (Eigen::Index nb = 0; nb < t.dim_b; ++nb)
      t.p(na, nb) = clamp01(trace_product_re(
          state.projector, kron(alice.projectors[na], bob.projectors[nb])));
  return t;
}

Marginals marginals(const BipartiteProbabilityTable& table) {
  Marginals m;
  m.alice = table.p.rowwise().sum();
  m.bob = table.p.colwise().sum().transpose();
  return m;
}

Conditionals conditionals(const BipartiteProbabilityTable& table, double null_tol) {
  const Marginals m = marginals(table);
  Conditionals c;
  c.b_given_a.resize(table.dim_b, table.dim_a);
  c.a_given_b.resize(table.dim_a, table.dim_b);
  for (Eigen::Index na = 0; na < table.dim_a; ++na) {
    if (m.alice(na) <= null_tol)
      throw ConditioningOnNullEvent("conditioning outcome has zero probability");
    for (Eigen::Index nb = 0; nb < table.dim_b; ++nb)
      c.b_given_a(nb, na) = table.p(na, nb) / m.alice(na);
  }
  for (Eigen::Index nb = 0; nb < table.dim_b; ++nb) {
    if (m.bob(nb) <= null_tol)
      throw ConditioningOnNullEvent("conditioning outcome has zero probability");
    for (Eigen::Index na = 0; na < table.dim_a; ++na)
      c.a_given_b(na, nb) = table.p(na, nb) / m.bob(nb);
  }
  return c;
}

ConsistencyReport check_consistency(const Modality& state, const Context& alice,
                                    const Context& bob, double null_tol) {
  require_bipartite(state, alice, bob);
  const BipartiteProbabilityTable direct = joint_table(state, alice, bob);
  const Matrix& rho = state.projector;

  ConsistencyReport report;
  // Alice first: p(a) p(b | state projected on a).
  for (Eigen::Index na = 0; na < alice.dim; ++na) {
    const Matrix pa_full = embed_alice(alice.projectors[na], bob.dim);
    const double pa = clamp01(trace_product_re(pa_full, rho));
    if (pa <= null_tol) {
      ++report.skipped;
      continue;
    }
    const Matrix collapsed = pa_full * rho * pa_full / pa;
    for (Eigen::Index nb = 0; nb < bob.dim; ++nb) {
      const double sequential =
          pa * clamp01(trace_product_re(embed_bob(alice.dim, bob.projectors[nb]),
                                        collapsed));
      report.max_deviation = std::max(report.max_deviation,
                                      std::abs(sequential - direct.p(na, nb)));
    }
  }
  // Bob first: p(b) p(a | state projected on b).
  for (Eigen::Index nb = 0; nb < bob.dim; ++nb) {
    const Matrix pb_full = embed_bob(alice.dim, bob.projectors[nb]);
    const double pb = clamp01(trace_product_re(pb_full, rho));
    if (pb <= null_tol) {
      ++report.skipped;
      continue;
    }
    const Matrix collapsed = pb_full * rho * pb_full / pb;
    for (Eigen::Index na = 0; na < alice.dim; ++na) {
      const double sequential =
          pb * clamp01(trace_product_re(embed_alice(alice.projectors[na], bob.dim),
                                        collapsed));
      report.max_deviation = std::max(report.max_deviation,
                                      std::abs(sequential - direct.p(na, nb)));
    }
  }
  return report;
}

ReductionReport malus_reduction_check(const Modality& state, const Context& alice,
                                      const Context& bob, double null_tol) {
  require_bipartite(state, alice, bob);
  if (alice.dim != 2 || bob.dim != 2)
    throw DimensionMismatch("reduction law is defined for two spin-1/2 systems");
  const BipartiteProbabilityTable direct = joint_table(state, alice, bob);
  const Marginals m = marginals(direct);

  ReductionReport report;
  // Conditioned on Alice's outcome i, Bob's statistics must match a single
  // system prepared in the opposite modality of Alice's direction.
  for (Eigen::Index i = 0; i < 2; ++i) {
    if (m.alice(i) <= null_tol) {
      ++report.skipped;
      continue;
    }
    const Modality opposite = modality(alice, 1 - i);
    for (Eigen::Index j = 0; j < 2; ++j) {
      const double conditional = direct.p(i, j) / m.alice(i);
      const double single = born_probability(opposite, modality(bob, j));
      report.max_deviation =
          std::max(report.max_deviation, std::abs(conditional - single));
    }
  }
  // Symmetric direction: condition on Bob, check Alice.
  for (Eigen::Index j = 0; j < 2; ++j) {
    if (m.bob(j) <= null_tol) {
      ++report.skipped;
      continue;
    }
    const Modality opposite = modality(bob, 1 - j);
    for (Eigen::Index i = 0; i < 2; ++i) {
      const double conditional = direct.p(i, j) / m.bob(j);
      const double single = born_probability(opposite, modality(alice, i));
      report.max_deviation =
          std::max(report.max_deviation, std::abs(conditional - single));
    }
  }
  return report;
}

SettingsFamily settings_family(const Modality& state, double alice0, double alice1,
                               double bob0, double bob1) {
  SettingsFamily f;
  f.alice_angles = {alice0, alice1};
  f.bob_angles = {bob0, bob1};
  for (int i = 0; i < 2; ++i) {
    f.alice[static_cast<std::size_t>(i)] =
        spin::spin_direction_context({0.5, f.alice_angles[static_cast<std::size_t>(i)], 0.0});
    f.bob[static_cast<std::size_t>(i)] =
        spin::spin_direction_context({0.5, f.bob_angles[static_cast<std::size_t>(i)], 0.0});
  }
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      f.tables[static_cast<std::size_t>(i * 2 + j)] =
          joint_table(state, f.alice[static_cast<std::size_t>(i)],
                      f.bob[static_cast<std::size_t>(j)]);
  return f;
}

SettingsFamily settings_family(const std::array<BipartiteProbabilityTable, 4>& tables) {
  SettingsFamily f;
  f.tables = tables;
  return f;
}

double check_no_signalling(const SettingsFamily& family) {
  for (const BipartiteProbabilityTable& t : family.tables)
    if (t.dim_a != family.tables[0].dim_a || t.dim_b != family.tables[0].dim_b)
      throw DimensionMismatch("family tables disagree on outcome counts");
  double worst = 0.0;
  for (int i = 0; i < 2; ++i) {
    const RealVector a0 = marginals(family_table(family, i, 0)).alice;
    const RealVector a1 = marginals(family_table(family, i, 1)).alice;
    worst = std::max(worst, (a0 - a1).cwiseAbs().maxCoeff());
  }
  for (int j = 0; j < 2; ++j) {
    const RealVector b0 = marginals(family_table(family, 0, j)).bob;
    const RealVector b1 = marginals(family_table(family, 1, j)).bob;
    worst = std::max(worst, (b0 - b1).cwiseAbs().maxCoeff());
  }
  return worst;
}

double correlation(const BipartiteProbabilityTable& table) {
  if (table.dim_a != 2 || table.dim_b != 2)
    throw DimensionMismatch("correlation requires two outcomes per party");
  return table.p(0, 0) - table.p(0, 1) - table.p(1, 0) + table.p(1, 1);
}

std::array<double, 4> correlations(const SettingsFamily& family) {
  std::array<double, 4> e{};
  for (std::size_t k = 0; k < 4; ++k) e[k] = correlation(family.tables[k]);
  return e;
}

double chsh_value(const std::array<double, 4>& correlations, int subtracted_term) {
  if (subtracted_term < 0 || subtracted_term > 3)
    throw Error("chsh subtracted term must be in 0..3");
  double s = 0.0;
  for (double e : correlations) s += e;
  return s - 2.0 * correlations[static_cast<std::size_t>(subtracted_term)];
}

double chsh_value(const SettingsFamily& family, int subtracted_term) {
  return chsh_value(correlations(family), subtracted_term);
}

PolytopeResult local_polytope_membership(const SettingsFamily& family,
                                         double facet_tol, double signal_tol) {
  for (const BipartiteProbabilityTable& t : family.tables)
    if (t.dim_a != 2 || t.dim_b != 2)
      throw WrongScenarioShape("polytope test needs 2 settings x 2 outcomes");
  if (check_no_signalling(family) > signal_tol)
    throw SignallingInput("family marginals depend on the remote setting");

  const std::array<double, 4> e = correlations(family);
  PolytopeResult r;
  for (int k = 0; k < 4; ++k) {
    r.chsh[static_cast<std::size_t>(k)] = chsh_value(e, k);
    const double mag = std::abs(r.chsh[static_cast<std::size_t>(k)]);
    if (mag > r.max_abs_chsh) {
      r.max_abs_chsh = mag;
      r.argmax_pattern = k;
    }
  }
  r.local = r.max_abs_chsh <= 2.0 + facet_tol;
  return r;
}

}  // namespace csm::epr
