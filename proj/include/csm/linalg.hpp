#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "csm/errors.hpp"

namespace csm {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Default tolerance for validity checks. All shipped dimensions are <= ~36
/// and well conditioned, so a single default works throughout.
inline constexpr double kDefaultTol = 1e-10;

/// <a|b>, conjugate-linear in the first argument.
Complex inner(const Vector& a, const Vector& b);

/// Rank-one projector |a><a| of a unit vector.
Matrix outer(const Vector& a, double tol = kDefaultTol);

Matrix matmul(const Matrix& a, const Matrix& b);

Complex trace(const Matrix& a);

/// Kronecker product; dimensions multiply.
Matrix kron(const Matrix& a, const Matrix& b);

/// True iff max-entry deviation of U†U from identity is <= tol.
bool is_unitary(const Matrix& u, double tol = kDefaultTol);

struct Eigensystem {
  std::vector<double> values;   // sorted descending
  std::vector<Vector> vectors;  // orthonormal, same order as values
};

/// Eigendecomposition of a Hermitian matrix. Eigenvalues come out descending;
/// each eigenvector's phase is fixed by making its first significant
/// component real and positive, so repeated runs produce identical frames.
Eigensystem hermitian_eigensystem(const Matrix& a, double tol = kDefaultTol);

/// Re tr(A·B) without forming the product: sum_ij A_ij * B_ji.
double trace_product_re(const Matrix& a, const Matrix& b);

double max_abs_diff(const Matrix& a, const Matrix& b);

bool approx_equal(const Matrix& a, const Matrix& b, double tol = kDefaultTol);

}  // namespace csm
