#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "csm/sequence.hpp"
#include "csm/spin.hpp"
#include "oracles.hpp"

namespace {

using csm::Context;
using csm::Modality;
using csm::seq::Chain;
using csm::seq::OutcomeDistribution;
using csm::seq::SampleCounts;

const double kDeg = oracles::pi / 180.0;

Context polarizer(double deg) { return csm::spin::polarization_context({deg * kDeg}); }

Chain polarizer_chain(double initial_deg, const std::vector<double>& step_degs) {
  Chain chain;
  chain.initial = csm::modality(polarizer(initial_deg), 0);
  for (double d : step_degs) chain.steps.push_back(polarizer(d));
  return chain;
}

// Oracle tuple distribution for a polarizer chain: the modality angles of a
// context at angle t are {t, t + 90 deg}; steps are Markov with Malus kernels.
std::vector<double> oracle_distribution(double initial_deg,
                                        const std::vector<double>& step_degs) {
  const auto angle = [](double ctx_deg, int outcome) {
    return (ctx_deg + 90.0 * outcome) * kDeg;
  };
  std::vector<double> p0 = {oracles::malus(angle(step_degs[0], 0) - initial_deg * kDeg),
                            oracles::malus(angle(step_degs[0], 1) - initial_deg * kDeg)};
  std::vector<std::vector<std::vector<double>>> kernels;
  for (std::size_t s = 1; s < step_degs.size(); ++s) {
    std::vector<std::vector<double>> t(2, std::vector<double>(2));
    for (int next = 0; next < 2; ++next)
      for (int prev = 0; prev < 2; ++prev)
        t[next][prev] =
            oracles::malus(angle(step_degs[s], next) - angle(step_degs[s - 1], prev));
    kernels.push_back(t);
  }
  return oracles::chain_distribution(p0, kernels);
}

}  // namespace

TEST_CASE("run_chain_exact: 0/45/90 chain transmits a quarter") {
  const OutcomeDistribution d = csm::seq::run_chain_exact(polarizer_chain(0, {0, 45, 90}));
  REQUIRE(d.steps == 3);
  REQUIRE(d.size() == 8);
  CHECK(std::abs(d.prob({0, 0, 0}) - 0.25) <= 1e-12);
  CHECK(std::abs(d.total() - 1.0) <= 1e-12);
}

TEST_CASE("run_chain_exact: crossed polarizers with the diagonal last block everything") {
  const OutcomeDistribution d = csm::seq::run_chain_exact(polarizer_chain(0, {0, 90, 45}));
  CHECK(d.prob({0, 0, 0}) <= 1e-12);
  CHECK(std::abs(d.total() - 1.0) <= 1e-12);
}

TEST_CASE("run_chain_exact: full tuple distribution matches the Markov oracle") {
  const std::vector<double> steps = {10, 55, 20, 80};
  const OutcomeDistribution d = csm::seq::run_chain_exact(polarizer_chain(17, steps));
  const std::vector<double> ref = oracle_distribution(17, steps);
  REQUIRE(d.size() == ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i)
    CHECK(std::abs(d.probs[i] - ref[i]) <= 1e-12);
}

TEST_CASE("OutcomeDistribution: flat index round-trips, step 0 most significant") {
  const OutcomeDistribution d = csm::seq::run_chain_exact(polarizer_chain(0, {0, 45, 90}));
  CHECK(d.index_of({0, 0, 1}) == 1);
  CHECK(d.index_of({1, 0, 0}) == 4);
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(d.index_of(d.tuple_at(i)) == i);
  CHECK_THROWS_AS((void)d.index_of({0, 0}), csm::Error);
  CHECK_THROWS_AS((void)d.index_of({0, 0, 2}), csm::Error);
}

TEST_CASE("chain guards: empty steps, dimension mismatch, length caps") {
  Chain empty;
  empty.initial = csm::modality(polarizer(0), 0);
  CHECK_THROWS_AS((void)csm::seq::run_chain_exact(empty), csm::Error);

  Chain mixed = polarizer_chain(0, {0});
  mixed.steps.push_back(csm::spin::spin_direction_context({1.0, 0.0, 0.0}));
  CHECK_THROWS_AS((void)csm::seq::run_chain_exact(mixed), csm::DimensionMismatch);

  Chain long_chain = polarizer_chain(0, std::vector<double>(13, 0.0));
  CHECK_THROWS_AS((void)csm::seq::run_chain_exact(long_chain), csm::ChainTooLong);

  // 6^8 tuples exceed the sampling cap but not the exact cap
  Chain wide;
  const Context c6 = csm::spin::spin_direction_context({2.5, 0.3, 0.0});
  wide.initial = csm::modality(c6, 0);
  wide.steps.assign(8, c6);
  CHECK_THROWS_AS((void)csm::seq::sample_chain(wide, 10, 1), csm::ChainTooLong);
}

TEST_CASE("sample_chain: deterministic for a seed, counts conserve samples") {
  const Chain chain = polarizer_chain(0, {0, 45, 90});
  const SampleCounts a = csm::seq::sample_chain(chain, 50000, 42);
  const SampleCounts b = csm::seq::sample_chain(chain, 50000, 42);
  const SampleCounts c = csm::seq::sample_chain(chain, 50000, 43);
  REQUIRE(a.counts.size() == 8);
  CHECK(a.counts == b.counts);
  CHECK(a.counts != c.counts);
  std::uint64_t total = 0;
  for (std::uint64_t n : a.counts) total += n;
  CHECK(total == 50000);
}

TEST_CASE("sample_chain: impossible tuples never occur, frequencies near exact") {
  const Chain chain = polarizer_chain(0, {0, 45, 90});
  const OutcomeDistribution d = csm::seq::run_chain_exact(chain);
  const std::uint64_t n = 100000;
  const SampleCounts s = csm::seq::sample_chain(chain, n, 7);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.probs[i] <= 1e-15) {
      CHECK(s.counts[i] == 0);
    } else {
      CHECK(std::abs(oracles::binomial_z(s.counts[i], n, d.probs[i])) <= 5.0);
    }
  }
}

TEST_CASE("sample_chain_serial: bitwise identical to the parallel kernel") {
  const Chain chain = polarizer_chain(5, {35, 70});
  const SampleCounts par = csm::seq::sample_chain(chain, 30000, 99);
  const SampleCounts ser = csm::seq::sample_chain_serial(chain, 30000, 99);
  CHECK(par.counts == ser.counts);
  CHECK(par.samples == ser.samples);
}

TEST_CASE("ordering_comparison: reordering 0/45/90 shifts half the mass") {
  const Modality initial = csm::modality(polarizer(0), 0);
  const std::vector<Context> contexts = {polarizer(0), polarizer(45), polarizer(90)};
  const auto cmp = csm::seq::ordering_comparison(initial, contexts, {0, 2, 1});
  CHECK(std::abs(cmp.total_variation - 0.5) <= 1e-12);
  CHECK(std::abs(cmp.original.total() - 1.0) <= 1e-12);
  CHECK(std::abs(cmp.permuted.total() - 1.0) <= 1e-12);
}

TEST_CASE("ordering_comparison: identity and commuting cases have zero distance") {
  const Modality initial = csm::modality(polarizer(0), 0);
  const std::vector<Context> contexts = {polarizer(0), polarizer(45), polarizer(90)};
  CHECK(csm::seq::ordering_comparison(initial, contexts, {0, 1, 2}).total_variation <=
        1e-15);
  const std::vector<Context> twice = {polarizer(30), polarizer(30)};
  CHECK(csm::seq::ordering_comparison(initial, twice, {1, 0}).total_variation <= 1e-12);
}

TEST_CASE("ordering_comparison: malformed permutations are rejected") {
  const Modality initial = csm::modality(polarizer(0), 0);
  const std::vector<Context> contexts = {polarizer(0), polarizer(45)};
  CHECK_THROWS_AS((void)csm::seq::ordering_comparison(initial, contexts, {0}),
                  csm::InvalidPermutation);
  CHECK_THROWS_AS((void)csm::seq::ordering_comparison(initial, contexts, {0, 0}),
                  csm::InvalidPermutation);
  CHECK_THROWS_AS((void)csm::seq::ordering_comparison(initial, contexts, {0, 2}),
                  csm::InvalidPermutation);
}
