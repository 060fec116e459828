#include "csm/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace csm {

namespace {

void require_same_dims(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionMismatch("matrix dimensions differ: " +
                            std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + " vs " +
                            std::to_string(b.rows()) + "x" +
                            std::to_string(b.cols()));
  }
}

}  // namespace

Complex inner(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw DimensionMismatch("inner: vector lengths differ: " +
                            std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()));
  }
  return a.dot(b);  // Eigen's dot conjugates the first argument
}

Matrix outer(const Vector& a, double tol) {
  const double norm2 = a.squaredNorm();
  if (std::abs(norm2 - 1.0) > tol) {
    throw NotNormalized("outer: vector has squared norm " +
                        std::to_string(norm2) + ", expected 1");
  }
  return a * a.adjoint();
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionMismatch("matmul: inner dimensions differ: " +
                            std::to_string(a.cols()) + " vs " +
                            std::to_string(b.rows()));
  }
  return a * b;
}

Complex trace(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw DimensionMismatch("trace: matrix is " + std::to_string(a.rows()) +
                            "x" + std::to_string(a.cols()) + ", not square");
  }
  return a.trace();
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

bool is_unitary(const Matrix& u, double tol) {
  if (u.rows() != u.cols()) {
    return false;
  }
  const Matrix gram = u.adjoint() * u;
  const Matrix id = Matrix::Identity(u.rows(), u.cols());
  return (gram - id).cwiseAbs().maxCoeff() <= tol;
}

Eigensystem hermitian_eigensystem(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) {
    throw DimensionMismatch("hermitian_eigensystem: matrix not square");
  }
  const double herm_dev = (a - Matrix(a.adjoint())).cwiseAbs().maxCoeff();
  if (herm_dev > tol) {
    throw NotHermitian("hermitian_eigensystem: deviation from A = A† is " +
                       std::to_string(herm_dev));
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
  if (solver.info() != Eigen::Success) {
    throw Error("hermitian_eigensystem: eigensolver did not converge");
  }

  const Eigen::Index n = a.rows();
  Eigensystem out;
  out.values.resize(static_cast<std::size_t>(n));
  out.vectors.resize(static_cast<std::size_t>(n));

  // Eigen returns ascending order; reverse, then fix each vector's gauge.
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = n - 1 - k;
    out.values[static_cast<std::size_t>(k)] = solver.eigenvalues()(src);
    Vector v = solver.eigenvectors().col(src);

    // first significant component made real-positive
    constexpr double kGaugeThreshold = 1e-8;
    Eigen::Index pivot = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(v(i)) > kGaugeThreshold) {
        pivot = i;
        break;
      }
    }
    if (pivot < 0) {
      Eigen::Index imax = 0;
      v.cwiseAbs().maxCoeff(&imax);
      pivot = imax;
    }
    const Complex phase = std::conj(v(pivot)) / std::abs(v(pivot));
    out.vectors[static_cast<std::size_t>(k)] = v * phase;
  }
  return out;
}

double trace_product_re(const Matrix& a, const Matrix& b) {
  require_same_dims(a, b);
  return (a.array() * b.transpose().array()).sum().real();
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_same_dims(a, b);
  return (a - b).cwiseAbs().maxCoeff();
}

bool approx_equal(const Matrix& a, const Matrix& b, double tol) {
  return max_abs_diff(a, b) <= tol;
}

}  // namespace csm
