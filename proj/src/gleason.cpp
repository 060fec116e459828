#include "csm/gleason.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <cstdio>

#include "csm/errors.hpp"

namespace csm::gleason {
namespace {

void require_dim(Eigen::Index dim) {
  if (dim < 2) throw DimensionMismatch("random contexts need dim >= 2");
}

Matrix ginibre(Eigen::Index dim, rng::Stream& st) {
  Matrix z(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j)
    for (Eigen::Index i = 0; i < dim; ++i)
      z(i, j) = Complex(st.normal(), st.normal());
  return z;
}

// Orthonormal traceless Hermitian basis (generalized Gell-Mann matrices),
// tr(G_a G_b) = delta_ab. Spans everything a unit-trace Hermitian fit needs.
std::vector<Matrix> traceless_hermitian_basis(Eigen::Index dim) {
  std::vector<Matrix> basis;
  basis.reserve(static_cast<std::size_t>(dim * dim - 1));
  const double r = 1.0 / std::sqrt(2.0);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = i + 1; j < dim; ++j) {
      Matrix sym = Matrix::Zero(dim, dim);
      sym(i, j) = r;
      sym(j, i) = r;
      basis.push_back(sym);
      Matrix asym = Matrix::Zero(dim, dim);
      asym(i, j) = Complex(0.0, -r);
      asym(j, i) = Complex(0.0, r);
      basis.push_back(asym);
    }
  for (Eigen::Index l = 1; l < dim; ++l) {
    Matrix diag = Matrix::Zero(dim, dim);
    const double scale = 1.0 / std::sqrt(static_cast<double>(l * (l + 1)));
    for (Eigen::Index k = 0; k < l; ++k) diag(k, k) = scale;
    diag(l, l) = -static_cast<double>(l) * scale;
    basis.push_back(diag);
  }
  return basis;
}

std::vector<Matrix> random_projectors(Eigen::Index dim, int count,
                                      rng::Stream& st) {
  std::vector<Matrix> p;
  p.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) p.push_back(outer(random_unit_vector(dim, st)));
  return p;
}

FrameTestReport additivity_with(const ProbabilityAssignment& f, Eigen::Index dim,
                                int bases, std::uint64_t seed, bool parallel) {
  require_dim(dim);
  if (bases <= 0) throw Error("additivity test needs at least one basis");
  FrameTestReport report;
  report.dim = dim;
  report.bases = bases;
  report.additivity_only = dim < 3;
  report.violations.assign(static_cast<std::size_t>(bases), 0.0);
  std::vector<double> excess(static_cast<std::size_t>(bases), 0.0);

  auto one_basis = [&](int k) {
    const Context c =
        random_context(dim, rng::derive(seed, static_cast<std::uint64_t>(k)));
    double sum = 0.0;
    double worst = 0.0;
    for (const Matrix& proj : c.projectors) {
      const double v = f(proj);
      sum += v;
      worst = std::max({worst, -v, v - 1.0});
    }
    report.violations[static_cast<std::size_t>(k)] = std::abs(sum - 1.0);
    excess[static_cast<std::size_t>(k)] = worst;
  };

  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int k = 0; k < bases; ++k) one_basis(k);
  } else {
    for (int k = 0; k < bases; ++k) one_basis(k);
  }

  double total = 0.0;
  for (std::size_t k = 0; k < report.violations.size(); ++k) {
    report.max_violation = std::max(report.max_violation, report.violations[k]);
    report.max_out_of_range = std::max(report.max_out_of_range, excess[k]);
    total += report.violations[k];
  }
  report.mean_violation = total / static_cast<double>(bases);
  return report;
}

}  // namespace

Vector random_unit_vector(Eigen::Index dim, rng::Stream& stream) {
  require_dim(dim);
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    v(i) = Complex(stream.normal(), stream.normal());
  const double n = v.norm();
  if (n == 0.0) return random_unit_vector(dim, stream);
  return v / n;
}

Context random_context(Eigen::Index dim, rng::Stream& stream) {
  require_dim(dim);
  const Matrix z = ginibre(dim, stream);
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
  const Matrix r = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < dim; ++j) {
    const Complex rjj = r(j, j);
    const double mag = std::abs(rjj);
    if (mag > 0.0) q.col(j) *= rjj / mag;
  }
  std::vector<Vector> basis;
  basis.reserve(static_cast<std::size_t>(dim));
  for (Eigen::Index j = 0; j < dim; ++j) basis.push_back(q.col(j));
  char label[48];
  std::snprintf(label, sizeof label, "haar(dim=%d)", static_cast<int>(dim));
  return context_from_basis(basis, label);
}

Context random_context(Eigen::Index dim, std::uint64_t seed) {
  rng::Stream st(rng::mix64(seed));
  return random_context(dim, st);
}

namespace {

void require_density(const Matrix& rho) {
  if (rho.rows() != rho.cols()) throw NotDensity("density must be square");
  if (max_abs_diff(rho, rho.adjoint()) > kDefaultTol)
    throw NotDensity("density must be Hermitian");
  if (std::abs(trace(rho).real() - 1.0) > kDefaultTol ||
      std::abs(trace(rho).imag()) > kDefaultTol)
    throw NotDensity("density must have unit trace");
  const Eigensystem eig = hermitian_eigensystem(rho);
  if (eig.values.back() < -kDefaultTol)
    throw NotDensity("density must be positive semidefinite");
}

}  // namespace

ProbabilityAssignment born_assignment(const Matrix& rho) {
  require_density(rho);
  return [rho](const Matrix& p) { return trace_product_re(rho, p); };
}

ProbabilityAssignment squared_born_assignment(const Matrix& rho) {
  require_density(rho);
  return [rho](const Matrix& p) {
    const double t = trace_product_re(rho, p);
    return t * t;
  };
}

FrameTestReport additivity_test(const ProbabilityAssignment& f, Eigen::Index dim,
                                int bases, std::uint64_t seed) {
  return additivity_with(f, dim, bases, seed, true);
}

FrameTestReport additivity_test_serial(const ProbabilityAssignment& f,
                                       Eigen::Index dim, int bases,
                                       std::uint64_t seed) {
  return additivity_with(f, dim, bases, seed, false);
}

DensityFit fit_density(const ProbabilityAssignment& f, Eigen::Index dim,
                       std::uint64_t seed, int probes) {
  require_dim(dim);
  if (probes <= 0) probes = static_cast<int>(3 * dim * dim);
  if (probes < dim * dim)
    throw Error("fit_density needs at least dim^2 probes");
  const std::vector<Matrix> basis = traceless_hermitian_basis(dim);
  const int unknowns = static_cast<int>(basis.size());

  rng::Stream st = rng::stream_for(seed, 0);
  constexpr int kMaxAttempts = 5;
  for (int attempt = 1; attempt <= kMaxAttempts; ++attempt) {
    const std::vector<Matrix> train = random_projectors(dim, probes, st);
    RealMatrix a(probes, unknowns);
    RealVector y(probes);
    for (int k = 0; k < probes; ++k) {
      for (int col = 0; col < unknowns; ++col)
        a(k, col) = trace_product_re(basis[static_cast<std::size_t>(col)],
                                     train[static_cast<std::size_t>(k)]);
      y(k) = f(train[static_cast<std::size_t>(k)]) - 1.0 / static_cast<double>(dim);
    }
    Eigen::ColPivHouseholderQR<RealMatrix> solver(a);
    if (solver.rank() < unknowns) continue;  // degenerate probe draw, resample

    const RealVector x = solver.solve(y);
    DensityFit fit;
    fit.probes = probes;
    fit.attempts = attempt;
    fit.rho = Matrix::Identity(dim, dim) / static_cast<double>(dim);
    for (int col = 0; col < unknowns; ++col)
      fit.rho += x(col) * basis[static_cast<std::size_t>(col)];

    for (int k = 0; k < probes; ++k)
      fit.train_residual = std::max(
          fit.train_residual,
          std::abs(f(train[static_cast<std::size_t>(k)]) -
                   trace_product_re(fit.rho, train[static_cast<std::size_t>(k)])));
    const std::vector<Matrix> held_out = random_projectors(dim, probes, st);
    for (const Matrix& p : held_out)
      fit.held_out_residual =
          std::max(fit.held_out_residual,
                   std::abs(f(p) - trace_product_re(fit.rho, p)));
    return fit;
  }
  throw IllConditionedProbes("probe projectors never spanned the operator basis");
}

}  // namespace csm::gleason
