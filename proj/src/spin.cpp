#include "csm/spin.hpp"

#include <cmath>
#include <cstdio>

namespace csm::spin {

namespace {

void require_valid_j(double j) {
  const double two_j = 2.0 * j;
  if (!(j >= 0.5) || std::abs(two_j - std::round(two_j)) > 1e-9) {
    throw InvalidSpin("j must be a half-integer >= 1/2, got " +
                      std::to_string(j));
  }
}

std::string format_label(const char* fmt, double a, double b = 0.0,
                         double c = 0.0) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), fmt, a, b, c);
  return buf;
}

}  // namespace

Context polarization_context(const PolarizerContextSpec& spec) {
  if (!std::isfinite(spec.theta)) {
    throw Error("polarization_context: non-finite angle");
  }
  const double c = std::cos(spec.theta);
  const double s = std::sin(spec.theta);
  Vector h(2), v(2);
  h << Complex(c, 0.0), Complex(s, 0.0);
  v << Complex(-s, 0.0), Complex(c, 0.0);
  return context_from_basis(
      {h, v}, format_label("polarizer(theta=%.9g)", spec.theta),
      {spec.theta});
}

AngularMomentumOps angular_momentum_operators(double j) {
  require_valid_j(j);
  const Eigen::Index n = static_cast<Eigen::Index>(std::lround(2.0 * j)) + 1;

  // basis index k holds m_k = j - k
  Matrix jplus = Matrix::Zero(n, n);
  Matrix jz = Matrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double m = j - static_cast<double>(k);
    jz(k, k) = m;
    if (k > 0) {
      // J+ |j,m> = sqrt(j(j+1) - m(m+1)) |j,m+1>
      jplus(k - 1, k) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
    }
  }
  const Matrix jminus = jplus.adjoint();

  AngularMomentumOps ops;
  ops.jx = 0.5 * (jplus + jminus);
  ops.jy = Complex(0.0, -0.5) * (jplus - jminus);
  ops.jz = jz;
  return ops;
}

Context spin_direction_context(const SpinDirectionSpec& spec) {
  require_valid_j(spec.j);
  if (!std::isfinite(spec.theta) || !std::isfinite(spec.phi)) {
    throw Error("spin_direction_context: non-finite direction");
  }
  const AngularMomentumOps ops = angular_momentum_operators(spec.j);
  const double st = std::sin(spec.theta);
  const Matrix h = st * std::cos(spec.phi) * ops.jx +
                   st * std::sin(spec.phi) * ops.jy +
                   std::cos(spec.theta) * ops.jz;

  // eigenvalues m = j..-j are exactly unit-spaced, so this never degenerates
  const Eigensystem es = hermitian_eigensystem(h);
  return context_from_basis(
      es.vectors,
      format_label("spin(j=%.3g,theta=%.9g,phi=%.9g)", spec.j, spec.theta,
                   spec.phi),
      {spec.j, spec.theta, spec.phi});
}

ContextTransformation rotation_transformation(double j,
                                              const Eigen::Vector3d& axis,
                                              double angle) {
  require_valid_j(j);
  const double norm = axis.norm();
  if (!(norm > 0.0) || !axis.allFinite()) {
    throw Error("rotation_transformation: axis must be a nonzero 3-vector");
  }
  const Eigen::Vector3d n = axis / norm;

  const AngularMomentumOps ops = angular_momentum_operators(j);
  const Matrix generator = n.x() * ops.jx + n.y() * ops.jy + n.z() * ops.jz;
  const Eigensystem es = hermitian_eigensystem(generator);

  const Eigen::Index dim = generator.rows();
  Matrix u = Matrix::Zero(dim, dim);
  for (std::size_t k = 0; k < es.vectors.size(); ++k) {
    const Complex phase = std::exp(Complex(0.0, -angle * es.values[k]));
    u += phase * (es.vectors[k] * es.vectors[k].adjoint());
  }

  ContextTransformation g;
  g.matrix = std::move(u);
  g.label = format_label("rot(axis=(%.4g,%.4g,%.4g)", n.x(), n.y(), n.z()) +
            format_label(",angle=%.9g)", angle);
  return g;
}

}  // namespace csm::spin
