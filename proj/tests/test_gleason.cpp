#include <doctest.h>

#include <cmath>
#include <cstdint>

#include "csm/gleason.hpp"
#include "oracles.hpp"

namespace {

using csm::Complex;
using csm::Matrix;
using csm::Vector;
using namespace csm::gleason;

Matrix random_mixed_density(Eigen::Index dim, std::uint64_t seed) {
  csm::rng::Stream stream = csm::rng::stream_for(seed, 0);
  Matrix rho = Matrix::Zero(dim, dim);
  double total = 0.0;
  for (Eigen::Index k = 0; k < dim; ++k) {
    const double w = stream.uniform01() + 0.1;
    rho += w * csm::outer(random_unit_vector(dim, stream));
    total += w;
  }
  return rho / total;
}

}  // namespace

TEST_CASE("random_unit_vector: unit norm, Haar overlap moments") {
  csm::rng::Stream stream(77);
  const int d = 3, n = 20000;
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const Vector v = random_unit_vector(d, stream);
    if (k < 100) CHECK(std::abs(v.norm() - 1.0) <= 1e-12);
    sum += std::norm(v(0));  // overlap with e0
  }
  const double mean = sum / n;
  const double sigma = std::sqrt(oracles::haar_overlap_var(d) / n);
  CHECK(std::abs(mean - oracles::haar_overlap_mean(d)) <= 5.0 * sigma);
}

TEST_CASE("random_context: valid frames of every dimension, reproducible") {
  for (Eigen::Index dim = 2; dim <= 6; ++dim) {
    const csm::Context a = random_context(dim, static_cast<std::uint64_t>(dim));
    REQUIRE(a.dim == dim);
    REQUIRE(a.projectors.size() == static_cast<std::size_t>(dim));
    CHECK(csm::context_residual(a) <= 1e-12);
    const csm::Context b = random_context(dim, static_cast<std::uint64_t>(dim));
    for (std::size_t k = 0; k < a.projectors.size(); ++k)
      CHECK((a.projectors[k] - b.projectors[k]).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK_THROWS_AS((void)random_context(1, 5), csm::DimensionMismatch);
}

TEST_CASE("born_assignment: evaluates traces, validates the density") {
  const Matrix rho = random_mixed_density(3, 5);
  const ProbabilityAssignment f = born_assignment(rho);
  const csm::Context c = random_context(3, 11);
  for (int n = 0; n < 3; ++n) {
    const double expected = csm::trace_product_re(rho, c.projectors[static_cast<std::size_t>(n)]);
    CHECK(std::abs(f(c.projectors[static_cast<std::size_t>(n)]) - expected) <= 1e-14);
  }
  Matrix not_unit = 2.0 * rho;
  CHECK_THROWS_AS((void)born_assignment(not_unit), csm::NotDensity);
  Matrix negative(2, 2);
  negative << 1.5, 0, 0, -0.5;
  CHECK_THROWS_AS((void)born_assignment(negative), csm::NotDensity);
  Matrix skew(2, 2);
  skew << 0.5, 0.5, -0.5, 0.5;
  CHECK_THROWS_AS((void)born_assignment(skew), csm::NotDensity);
}

TEST_CASE("additivity_test: Born assignments pass at machine precision") {
  for (Eigen::Index dim : {3, 4, 6}) {
    const Matrix rho = random_mixed_density(dim, 21 + static_cast<std::uint64_t>(dim));
    const FrameTestReport r = additivity_test(born_assignment(rho), dim, 200, 99);
    CHECK(r.dim == dim);
    CHECK(r.bases == 200);
    CHECK(r.violations.size() == 200);
    CHECK(r.max_violation <= 1e-12);
    CHECK(r.mean_violation <= r.max_violation);
    CHECK(r.max_out_of_range == 0.0);
    CHECK_FALSE(r.additivity_only);
  }
}

TEST_CASE("additivity_test: squared assignment at maximal mixing misses by 1 - 1/d") {
  for (Eigen::Index dim : {3, 4}) {
    const Matrix mixed = Matrix::Identity(dim, dim) / static_cast<double>(dim);
    const FrameTestReport r = additivity_test(squared_born_assignment(mixed), dim, 50, 7);
    const double expected = 1.0 - 1.0 / static_cast<double>(dim);
    CHECK(std::abs(r.max_violation - expected) <= 1e-12);
    CHECK(std::abs(r.mean_violation - expected) <= 1e-12);
  }
}

TEST_CASE("additivity_test: dimension 2 is flagged additivity-only") {
  const Matrix mixed = Matrix::Identity(2, 2) / 2.0;
  const FrameTestReport r = additivity_test(born_assignment(mixed), 2, 20, 3);
  CHECK(r.additivity_only);
  CHECK(r.max_violation <= 1e-12);
}

TEST_CASE("additivity_test: out-of-range assignments are flagged") {
  const ProbabilityAssignment too_big = [](const Matrix&) { return 1.25; };
  const FrameTestReport r = additivity_test(too_big, 3, 10, 1);
  CHECK(r.max_out_of_range == doctest::Approx(0.25));
  const ProbabilityAssignment negative = [](const Matrix&) { return -0.125; };
  const FrameTestReport r2 = additivity_test(negative, 3, 10, 1);
  CHECK(r2.max_out_of_range == doctest::Approx(0.125));
}

TEST_CASE("additivity_test: same seed bitwise identical, serial matches parallel") {
  const Matrix rho = random_mixed_density(4, 31);
  const ProbabilityAssignment f = born_assignment(rho);
  const FrameTestReport a = additivity_test(f, 4, 100, 2024);
  const FrameTestReport b = additivity_test(f, 4, 100, 2024);
  const FrameTestReport s = additivity_test_serial(f, 4, 100, 2024);
  CHECK(a.violations == b.violations);
  CHECK(a.violations == s.violations);
  CHECK(a.max_violation == s.max_violation);
  CHECK(a.mean_violation == s.mean_violation);
  CHECK_THROWS_AS((void)additivity_test(f, 4, 0, 1), csm::Error);
}

TEST_CASE("fit_density: recovers the density behind a Born assignment") {
  const Matrix rho = random_mixed_density(3, 41);
  const DensityFit fit = fit_density(born_assignment(rho), 3, 555);
  CHECK(csm::max_abs_diff(fit.rho, rho) <= 1e-8);
  CHECK(fit.train_residual <= 1e-10);
  CHECK(fit.held_out_residual <= 1e-10);
  CHECK(fit.probes >= 9);
  CHECK(fit.attempts >= 1);
}

TEST_CASE("fit_density: a squared assignment is flagged by the held-out residual") {
  const Matrix mixed = Matrix::Identity(3, 3) / 3.0;
  const DensityFit fit = fit_density(squared_born_assignment(mixed), 3, 777);
  CHECK(fit.held_out_residual >= 0.05);
}

TEST_CASE("fit_density: needs at least dim^2 probes") {
  const Matrix mixed = Matrix::Identity(3, 3) / 3.0;
  CHECK_THROWS_AS((void)fit_density(born_assignment(mixed), 3, 1, 8), csm::Error);
  // exactly dim^2 probes is legal
  const DensityFit fit = fit_density(born_assignment(mixed), 3, 1, 9);
  CHECK(csm::max_abs_diff(fit.rho, mixed) <= 1e-8);
}
