#include <doctest.h>

#include <cmath>
#include <vector>

#include "csm/core.hpp"
#include "csm/gleason.hpp"
#include "csm/spin.hpp"
#include "oracles.hpp"

namespace {

using csm::Complex;
using csm::Context;
using csm::Matrix;
using csm::Modality;
using csm::PairKind;
using csm::Vector;

const double kRoot2 = std::sqrt(2.0);

Context polarizer(double theta) {
  return csm::spin::polarization_context({theta});
}

Vector vec4(Complex a, Complex b, Complex c, Complex d) {
  Vector v(4);
  v << a, b, c, d;
  return v;
}

Modality hand_modality(const Vector& v, int n) {
  return Modality{csm::outer(v), "hand", n};
}

}  // namespace

TEST_CASE("context_from_basis: order preserved, residual tiny") {
  Vector h(2), v(2);
  h << 1, 0;
  v << 0, 1;
  const Context c = csm::context_from_basis({h, v}, "hv");
  REQUIRE(c.dim == 2);
  REQUIRE(c.projectors.size() == 2);
  CHECK(std::abs(c.projectors[0](0, 0) - Complex(1, 0)) <= 1e-15);
  CHECK(std::abs(c.projectors[1](1, 1) - Complex(1, 0)) <= 1e-15);
  CHECK(csm::context_residual(c) <= 1e-14);
  CHECK(c.label == "hv");
}

TEST_CASE("context_from_basis: non-orthonormal input reports worst deviation") {
  Vector a(2), b(2);
  a << 1, 0;
  b << 1.0 / kRoot2, 1.0 / kRoot2;  // unit but not orthogonal to a
  try {
    (void)csm::context_from_basis({a, b}, "bad");
    FAIL("expected NonOrthonormalBasis");
  } catch (const csm::NonOrthonormalBasis& e) {
    CHECK(e.worst_gram_deviation == doctest::Approx(1.0 / kRoot2).epsilon(1e-12));
  }
  // wrong vector count for the dimension
  CHECK_THROWS_AS((void)csm::context_from_basis({a}, "short"), csm::Error);
}

TEST_CASE("modality: bounds checked, indices recorded") {
  const Context c = polarizer(0.3);
  const Modality m = csm::modality(c, 1);
  CHECK(m.outcome_index == 1);
  CHECK(m.context_label == c.label);
  CHECK_THROWS_AS((void)csm::modality(c, 2), csm::Error);
  CHECK_THROWS_AS((void)csm::modality(c, -1), csm::Error);
}

TEST_CASE("born_probability: H0 against a polarizer at 60 degrees") {
  const Context zero = polarizer(0.0);
  const Context sixty = polarizer(60.0 * oracles::pi / 180.0);
  const double p = csm::born_probability(csm::modality(zero, 0), csm::modality(sixty, 0));
  CHECK(std::abs(p - 0.25) <= 1e-12);  // cos^2(60 deg)
}

TEST_CASE("born_probability: symmetric, in range, Malus over a grid") {
  for (int k = 0; k < 24; ++k) {
    const double a = 2.0 * oracles::pi * k / 24.0;
    const double b = 0.9 * a + 0.2;
    const Modality ma = csm::modality(polarizer(a), 0);
    const Modality mb = csm::modality(polarizer(b), 0);
    const double pab = csm::born_probability(ma, mb);
    const double pba = csm::born_probability(mb, ma);
    CHECK(pab == pba);
    CHECK(pab >= 0.0);
    CHECK(pab <= 1.0);
    CHECK(std::abs(pab - oracles::malus(b - a)) <= 1e-12);
  }
}

TEST_CASE("transition_table: 45-degree relative angle gives the flat table") {
  const auto t = csm::transition_table(polarizer(0.0), polarizer(oracles::pi / 4.0));
  REQUIRE(t.p.rows() == 2);
  REQUIRE(t.p.cols() == 2);
  for (int m = 0; m < 2; ++m)
    for (int n = 0; n < 2; ++n) CHECK(std::abs(t.p(m, n) - 0.5) <= 1e-12);
  CHECK(t.from_context == polarizer(0.0).label);
}

TEST_CASE("transition_table: doubly stochastic for random context pairs") {
  for (Eigen::Index dim = 2; dim <= 6; ++dim) {
    const Context a = csm::gleason::random_context(dim, 100 + static_cast<std::uint64_t>(dim));
    const Context b = csm::gleason::random_context(dim, 200 + static_cast<std::uint64_t>(dim));
    const auto t = csm::transition_table(a, b);
    for (Eigen::Index i = 0; i < dim; ++i) {
      CHECK(std::abs(t.p.row(i).sum() - 1.0) <= 1e-12);
      CHECK(std::abs(t.p.col(i).sum() - 1.0) <= 1e-12);
    }
  }
  CHECK_THROWS_AS((void)csm::transition_table(polarizer(0.0),
                                              csm::gleason::random_context(3, 1)),
                  csm::DimensionMismatch);
}

TEST_CASE("transition_table: p(m,n) conditions on the `from` outcome") {
  // break the symmetry with a third angle so rows/columns differ
  const auto t = csm::transition_table(polarizer(0.0), polarizer(0.3));
  CHECK(std::abs(t.p(0, 0) - oracles::malus(0.3)) <= 1e-12);
  CHECK(std::abs(t.p(1, 0) - (1.0 - oracles::malus(0.3))) <= 1e-12);
}

TEST_CASE("transform_context: unitary images keep the invariants") {
  const Context c = polarizer(0.0);
  const double t = 0.37;
  Matrix u(2, 2);
  u << Complex(std::cos(t), 0), Complex(-std::sin(t), 0), Complex(std::sin(t), 0),
      Complex(std::cos(t), 0);
  const Context moved = csm::transform_context(c, {u, "rot"});
  CHECK(moved.dim == 2);
  CHECK(csm::context_residual(moved) <= 1e-13);
  // the rotated frame is the polarizer at angle t
  CHECK(csm::same_context_ordered(moved, polarizer(t), 1e-12));
  Matrix bad = 1.1 * u;
  CHECK_THROWS_AS((void)csm::transform_context(c, {bad, "scaled"}), csm::NotUnitary);
}

TEST_CASE("classify_pair: identical, exclusive, incompatible") {
  const Context z = polarizer(0.0);
  const Context d = polarizer(oracles::pi / 4.0);
  CHECK(csm::classify_pair(csm::modality(z, 0), csm::modality(z, 0)) ==
        PairKind::Identical);
  CHECK(csm::classify_pair(csm::modality(z, 0), csm::modality(z, 1)) ==
        PairKind::MutuallyExclusive);
  CHECK(csm::classify_pair(csm::modality(z, 0), csm::modality(d, 0)) ==
        PairKind::Incompatible);
}

TEST_CASE("classify_pair: triplet-zero against up-down is incompatible at 1/2") {
  // basis order: uu, ud, du, dd
  const Modality ud = hand_modality(vec4(0, 1, 0, 0), 0);
  const Modality triplet0 =
      hand_modality(vec4(0, 1.0 / kRoot2, 1.0 / kRoot2, 0), 0);
  CHECK(std::abs(csm::born_probability(ud, triplet0) - 0.5) <= 1e-12);
  CHECK(csm::classify_pair(ud, triplet0) == PairKind::Incompatible);
}

TEST_CASE("max_exclusive_set: bounded by dimension") {
  const Context z = polarizer(0.0);
  const Context d = polarizer(oracles::pi / 4.0);
  std::vector<Modality> pool;
  for (int n = 0; n < 2; ++n) {
    pool.push_back(csm::modality(z, n));
    pool.push_back(csm::modality(d, n));
  }
  CHECK(csm::max_exclusive_set(pool) == 2);
  CHECK(csm::max_exclusive_set({csm::modality(z, 0)}) == 1);
  CHECK(csm::max_exclusive_set({}) == 0);
}

TEST_CASE("max_exclusive_set: dim-3 pool across two random frames") {
  const Context a = csm::gleason::random_context(3, 7);
  const Context b = csm::gleason::random_context(3, 8);
  std::vector<Modality> pool;
  for (int n = 0; n < 3; ++n) {
    pool.push_back(csm::modality(a, n));
    pool.push_back(csm::modality(b, n));
  }
  CHECK(csm::max_exclusive_set(pool) == 3);
}

TEST_CASE("max_exclusive_set: refuses pools beyond the bitmask cap") {
  const Context z = polarizer(0.0);
  std::vector<Modality> pool(65, csm::modality(z, 0));
  CHECK_THROWS_AS((void)csm::max_exclusive_set(pool), csm::Error);
}

TEST_CASE("same_context_set vs same_context_ordered") {
  Vector h(2), v(2);
  h << 1, 0;
  v << 0, 1;
  const Context hv = csm::context_from_basis({h, v}, "hv");
  const Context vh = csm::context_from_basis({v, h}, "vh");
  CHECK(csm::same_context_set(hv, vh));
  CHECK_FALSE(csm::same_context_ordered(hv, vh));
  CHECK(csm::same_context_ordered(hv, hv));
  CHECK_FALSE(csm::same_context_set(hv, polarizer(oracles::pi / 4.0)));
}
