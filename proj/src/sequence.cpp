#include "csm/sequence.hpp"

#include <cmath>
#include <cstddef>

#include "csm/errors.hpp"
#include "csm/rng.hpp"

namespace csm::seq {
namespace {

std::size_t tuple_count(int steps, Eigen::Index dim) {
  std::size_t n = 1;
  for (int t = 0; t < steps; ++t) n *= static_cast<std::size_t>(dim);
  return n;
}

void require_well_formed(const Chain& chain, std::size_t max_tuples) {
  if (chain.steps.empty()) throw Error("chain must have at least one step");
  const Eigen::Index dim = chain.initial.projector.rows();
  for (const Context& c : chain.steps) {
    if (c.dim != dim)
      throw DimensionMismatch("chain step dimension does not match system");
  }
  const int steps = static_cast<int>(chain.steps.size());
  if (steps > kMaxChainSteps ||
      tuple_count(steps, dim) > max_tuples)
    throw ChainTooLong("outcome tuple space too large for chain");
}

// First-step probabilities and the transition table of every later step.
struct ChainTables {
  Eigen::Index dim;
  int steps;
  RealVector p0;
  std::vector<RealMatrix> trans;  // trans[t](m, n): step t outcome m given step t-1 outcome n

  explicit ChainTables(const Chain& chain)
      : dim(chain.steps.front().dim),
        steps(static_cast<int>(chain.steps.size())) {
    p0.resize(dim);
    for (Eigen::Index n = 0; n < dim; ++n)
      p0(n) = born_probability(chain.initial, modality(chain.steps[0], n));
    trans.reserve(steps > 0 ? steps - 1 : 0);
    for (int t = 1; t < steps; ++t)
      trans.push_back(transition_table(chain.steps[t - 1], chain.steps[t]).p);
  }

  double step_prob(int t, int outcome, int prev) const {
    return t == 0 ? p0(outcome) : trans[t - 1](outcome, prev);
  }
};

// Inverse-CDF tables for sampling: column-cumulative sums.
struct ChainSampler {
  Eigen::Index dim;
  int steps;
  RealVector cum0;
  std::vector<RealMatrix> cum;

  explicit ChainSampler(const ChainTables& tables)
      : dim(tables.dim), steps(tables.steps) {
    cum0 = tables.p0;
    for (Eigen::Index n = 1; n < dim; ++n) cum0(n) += cum0(n - 1);
    for (const RealMatrix& t : tables.trans) {
      RealMatrix c = t;
      for (Eigen::Index m = 1; m < dim; ++m) c.row(m) += c.row(m - 1);
      cum.push_back(std::move(c));
    }
  }

  static Eigen::Index pick(const double* cdf, Eigen::Index n, double u) {
    for (Eigen::Index k = 0; k + 1 < n; ++k)
      if (u <= cdf[k]) return k;
    return n - 1;
  }

  std::size_t sample_tuple(rng::Stream& st) const {
    Eigen::Index prev = pick(cum0.data(), dim, st.uniform01());
    std::size_t flat = static_cast<std::size_t>(prev);
    for (int t = 1; t < steps; ++t) {
      const RealMatrix& c = cum[t - 1];
      // column `prev` is contiguous (column-major storage)
      Eigen::Index next = pick(c.data() + prev * dim, dim, st.uniform01());
      flat = flat * static_cast<std::size_t>(dim) + static_cast<std::size_t>(next);
      prev = next;
    }
    return flat;
  }
};

SampleCounts sample_with(const Chain& chain, std::uint64_t samples,
                         std::uint64_t seed, bool parallel) {
  require_well_formed(chain, kMaxSampleTuples);
  if (samples == 0) throw Error("sample_chain requires samples > 0");
  const ChainTables tables(chain);
  const ChainSampler sampler(tables);

  SampleCounts out;
  out.steps = tables.steps;
  out.dim = tables.dim;
  out.samples = samples;
  const std::size_t tuples = tuple_count(out.steps, out.dim);
  out.counts.assign(tuples, 0);

  const long long total = static_cast<long long>(samples);
  if (parallel) {
#pragma omp parallel
    {
      std::vector<std::uint64_t> local(tuples, 0);
#pragma omp for schedule(static)
      for (long long i = 0; i < total; ++i) {
        rng::Stream st = rng::stream_for(seed, static_cast<std::uint64_t>(i));
        ++local[sampler.sample_tuple(st)];
      }
#pragma omp critical
      for (std::size_t k = 0; k < tuples; ++k) out.counts[k] += local[k];
    }
  } else {
    for (long long i = 0; i < total; ++i) {
      rng::Stream st = rng::stream_for(seed, static_cast<std::uint64_t>(i));
      ++out.counts[sampler.sample_tuple(st)];
    }
  }
  return out;
}

std::vector<int> decode_tuple(std::size_t flat, int steps, Eigen::Index dim) {
  std::vector<int> tuple(steps);
  for (int t = steps - 1; t >= 0; --t) {
    tuple[t] = static_cast<int>(flat % static_cast<std::size_t>(dim));
    flat /= static_cast<std::size_t>(dim);
  }
  return tuple;
}

}  // namespace

std::size_t OutcomeDistribution::index_of(const std::vector<int>& tuple) const {
  if (static_cast<int>(tuple.size()) != steps)
    throw DimensionMismatch("outcome tuple length does not match chain");
  std::size_t flat = 0;
  for (int t = 0; t < steps; ++t) {
    if (tuple[t] < 0 || tuple[t] >= dim)
      throw DimensionMismatch("outcome index out of range");
    flat = flat * static_cast<std::size_t>(dim) + static_cast<std::size_t>(tuple[t]);
  }
  return flat;
}

std::vector<int> OutcomeDistribution::tuple_at(std::size_t flat_index) const {
  return decode_tuple(flat_index, steps, dim);
}

double OutcomeDistribution::prob(const std::vector<int>& tuple) const {
  return probs[index_of(tuple)];
}

double OutcomeDistribution::total() const {
  double s = 0.0;
  for (double p : probs) s += p;
  return s;
}

std::vector<int> SampleCounts::tuple_at(std::size_t flat_index) const {
  return decode_tuple(flat_index, steps, dim);
}

OutcomeDistribution run_chain_exact(const Chain& chain) {
  require_well_formed(chain, kMaxExactTuples);
  const ChainTables tables(chain);

  OutcomeDistribution out;
  out.steps = tables.steps;
  out.dim = tables.dim;
  out.probs.assign(tuple_count(out.steps, out.dim), 0.0);

  // Odometer walk in flat order; prefix[t+1] carries the probability of the
  // first t+1 digits so only changed suffixes are recomputed.
  const int steps = out.steps;
  const int n = static_cast<int>(out.dim);
  std::vector<int> digits(steps, 0);
  std::vector<double> prefix(steps + 1, 1.0);
  for (int t = 0; t < steps; ++t)
    prefix[t + 1] = prefix[t] * tables.step_prob(t, 0, 0);

  for (std::size_t flat = 0;; ++flat) {
    out.probs[flat] = prefix[steps];
    int t = steps - 1;
    while (t >= 0 && digits[t] == n - 1) digits[t--] = 0;
    if (t < 0) break;
    ++digits[t];
    for (int u = t; u < steps; ++u)
      prefix[u + 1] =
          prefix[u] * tables.step_prob(u, digits[u], u > 0 ? digits[u - 1] : 0);
  }
  return out;
}

SampleCounts sample_chain(const Chain& chain, std::uint64_t samples,
                          std::uint64_t seed) {
  return sample_with(chain, samples, seed, true);
}

SampleCounts sample_chain_serial(const Chain& chain, std::uint64_t samples,
                                 std::uint64_t seed) {
  return sample_with(chain, samples, seed, false);
}

OrderingComparison ordering_comparison(const Modality& initial,
                                       const std::vector<Context>& contexts,
                                       const std::vector<int>& permutation) {
  const int k = static_cast<int>(contexts.size());
  if (static_cast<int>(permutation.size()) != k)
    throw InvalidPermutation("permutation length does not match context count");
  std::vector<bool> seen(k, false);
  for (int p : permutation) {
    if (p < 0 || p >= k || seen[p])
      throw InvalidPermutation("not a permutation of the context indices");
    seen[p] = true;
  }

  Chain original{initial, contexts};
  Chain permuted{initial, {}};
  permuted.steps.reserve(k);
  for (int p : permutation) permuted.steps.push_back(contexts[p]);

  OrderingComparison cmp;
  cmp.original = run_chain_exact(original);
  cmp.permuted = run_chain_exact(permuted);

  // Align the permuted tuples back onto the original context positions so the
  // distance compares probabilities of the same physical outcome sets.
  std::vector<double> aligned(cmp.original.probs.size(), 0.0);
  for (std::size_t flat = 0; flat < cmp.permuted.probs.size(); ++flat) {
    const std::vector<int> t_perm = cmp.permuted.tuple_at(flat);
    std::vector<int> t_orig(k, 0);
    for (int pos = 0; pos < k; ++pos) t_orig[permutation[pos]] = t_perm[pos];
    aligned[cmp.original.index_of(t_orig)] += cmp.permuted.probs[flat];
  }
  double tv = 0.0;
  for (std::size_t i = 0; i < aligned.size(); ++i)
    tv += std::abs(cmp.original.probs[i] - aligned[i]);
  cmp.total_variation = 0.5 * tv;
  return cmp;
}

}  // namespace csm::seq
