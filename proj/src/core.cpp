#include "csm/core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

namespace csm {

namespace {

void require_same_projector_dims(const Modality& a, const Modality& b,
                                 const char* where) {
  if (a.projector.rows() != b.projector.rows()) {
    throw DimensionMismatch(std::string(where) + ": modality dimensions " +
                            std::to_string(a.projector.rows()) + " vs " +
                            std::to_string(b.projector.rows()));
  }
}

// Bron-Kerbosch with pivoting on a <=64-vertex orthogonality graph.
struct MaxCliqueSearch {
  std::vector<std::uint64_t> adj;
  int best = 0;

  void expand(int r_size, std::uint64_t p) {
    if (p == 0) {
      best = std::max(best, r_size);
      return;
    }
    if (r_size + std::popcount(p) <= best) {
      return;  // bound
    }
    // pivot: vertex of P with most neighbours inside P
    int pivot = -1;
    int pivot_deg = -1;
    for (std::uint64_t m = p; m != 0; m &= m - 1) {
      const int v = std::countr_zero(m);
      const int deg = std::popcount(p & adj[static_cast<std::size_t>(v)]);
      if (deg > pivot_deg) {
        pivot_deg = deg;
        pivot = v;
      }
    }
    std::uint64_t candidates = p & ~adj[static_cast<std::size_t>(pivot)];
    for (std::uint64_t m = candidates; m != 0; m &= m - 1) {
      const int v = std::countr_zero(m);
      const std::uint64_t bit = std::uint64_t(1) << v;
      expand(r_size + 1, p & adj[static_cast<std::size_t>(v)]);
      p &= ~bit;
    }
  }
};

}  // namespace

Context context_from_basis(const std::vector<Vector>& vectors,
                           std::string label, std::vector<double> params,
                           double tol) {
  if (vectors.empty()) {
    throw DimensionMismatch("context_from_basis: empty basis");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(vectors.size());
  for (const Vector& v : vectors) {
    if (v.size() != n) {
      throw DimensionMismatch(
          "context_from_basis: need exactly N vectors of dimension N, got a "
          "vector of dimension " +
          std::to_string(v.size()) + " for N = " + std::to_string(n));
    }
    if (!v.allFinite()) {
      throw Error("context_from_basis: non-finite entry in basis vector");
    }
  }

  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const Complex g = inner(vectors[static_cast<std::size_t>(i)],
                              vectors[static_cast<std::size_t>(j)]);
      const double expected = (i == j) ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(g - Complex(expected, 0.0)));
    }
  }
  if (worst > tol) {
    throw NonOrthonormalBasis(
        "context_from_basis: basis not orthonormal, worst Gram deviation " +
            std::to_string(worst),
        worst);
  }

  Context c;
  c.dim = n;
  c.label = std::move(label);
  c.params = std::move(params);
  c.projectors.reserve(static_cast<std::size_t>(n));
  for (const Vector& v : vectors) {
    c.projectors.push_back(v * v.adjoint());
  }
  return c;
}

Modality modality(const Context& c, int n) {
  if (n < 0 || n >= static_cast<int>(c.projectors.size())) {
    throw DimensionMismatch("modality: outcome index " + std::to_string(n) +
                            " out of range for dimension " +
                            std::to_string(c.dim));
  }
  return Modality{c.projectors[static_cast<std::size_t>(n)], c.label, n};
}

double context_residual(const Context& c) {
  const Eigen::Index n = c.dim;
  if (n <= 0 || c.projectors.size() != static_cast<std::size_t>(n)) {
    return std::numeric_limits<double>::infinity();
  }
  double worst = 0.0;
  Matrix sum = Matrix::Zero(n, n);
  for (std::size_t k = 0; k < c.projectors.size(); ++k) {
    const Matrix& p = c.projectors[k];
    if (p.rows() != n || p.cols() != n || !p.allFinite()) {
      return std::numeric_limits<double>::infinity();
    }
    worst = std::max(worst, max_abs_diff(p, p.adjoint()));
    worst = std::max(worst, max_abs_diff(p * p, p));
    worst = std::max(worst, std::abs(p.trace() - Complex(1.0, 0.0)));
    for (std::size_t l = k + 1; l < c.projectors.size(); ++l) {
      worst = std::max(worst,
                       std::abs(trace_product_re(p, c.projectors[l])));
    }
    sum += p;
  }
  worst = std::max(worst, max_abs_diff(sum, Matrix::Identity(n, n)));
  return worst;
}

double born_probability(const Modality& a, const Modality& b) {
  require_same_projector_dims(a, b, "born_probability");
  const double p = trace_product_re(a.projector, b.projector);
  return std::clamp(p, 0.0, 1.0);
}

TransitionTable transition_table(const Context& c1, const Context& c2) {
  if (c1.dim != c2.dim) {
    throw DimensionMismatch("transition_table: context dimensions " +
                            std::to_string(c1.dim) + " vs " +
                            std::to_string(c2.dim));
  }
  TransitionTable t;
  t.from_context = c1.label;
  t.to_context = c2.label;
  t.p.resize(c2.dim, c1.dim);
  for (Eigen::Index m = 0; m < c2.dim; ++m) {
    for (Eigen::Index n = 0; n < c1.dim; ++n) {
      t.p(m, n) = trace_product_re(c2.projectors[static_cast<std::size_t>(m)],
                                   c1.projectors[static_cast<std::size_t>(n)]);
    }
  }
  return t;
}

Context transform_context(const Context& c, const ContextTransformation& g,
                          double tol) {
  if (g.matrix.rows() != c.dim || g.matrix.cols() != c.dim) {
    throw DimensionMismatch("transform_context: transformation is " +
                            std::to_string(g.matrix.rows()) + "x" +
                            std::to_string(g.matrix.cols()) +
                            " on a context of dimension " +
                            std::to_string(c.dim));
  }
  if (!is_unitary(g.matrix, tol)) {
    throw NotUnitary("transform_context: transformation matrix not unitary");
  }
  Context out;
  out.dim = c.dim;
  out.label = g.label.empty() ? c.label : c.label + " * " + g.label;
  out.params = c.params;
  out.projectors.reserve(c.projectors.size());
  const Matrix gdag = g.matrix.adjoint();
  for (const Matrix& p : c.projectors) {
    out.projectors.push_back(g.matrix * p * gdag);
  }
  return out;
}

PairKind classify_pair(const Modality& a, const Modality& b, double tol) {
  const double p = born_probability(a, b);
  if (p >= 1.0 - tol) {
    return PairKind::Identical;
  }
  if (p <= tol) {
    return PairKind::MutuallyExclusive;
  }
  return PairKind::Incompatible;
}

int max_exclusive_set(const std::vector<Modality>& modalities, double tol) {
  const std::size_t n = modalities.size();
  if (n == 0) {
    return 0;
  }
  if (n > 64) {
    throw Error("max_exclusive_set: more than 64 modalities");
  }
  for (std::size_t i = 1; i < n; ++i) {
    require_same_projector_dims(modalities[0], modalities[i],
                                "max_exclusive_set");
  }
  MaxCliqueSearch search;
  search.adj.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (born_probability(modalities[i], modalities[j]) <= tol) {
        search.adj[i] |= std::uint64_t(1) << j;
        search.adj[j] |= std::uint64_t(1) << i;
      }
    }
  }
  const std::uint64_t all =
      (n == 64) ? ~std::uint64_t(0) : ((std::uint64_t(1) << n) - 1);
  search.expand(0, all);
  return search.best;
}

bool same_context_set(const Context& a, const Context& b, double tol) {
  if (a.dim != b.dim || a.projectors.size() != b.projectors.size()) {
    return false;
  }
  std::vector<bool> used(b.projectors.size(), false);
  for (const Matrix& pa : a.projectors) {
    bool matched = false;
    for (std::size_t j = 0; j < b.projectors.size(); ++j) {
      if (!used[j] && max_abs_diff(pa, b.projectors[j]) <= tol) {
        used[j] = true;
        matched = true;
        break;
      }
    }
    if (!matched) {
      return false;
    }
  }
  return true;
}

bool same_context_ordered(const Context& a, const Context& b, double tol) {
  if (a.dim != b.dim || a.projectors.size() != b.projectors.size()) {
    return false;
  }
  for (std::size_t k = 0; k < a.projectors.size(); ++k) {
    if (max_abs_diff(a.projectors[k], b.projectors[k]) > tol) {
      return false;
    }
  }
  return true;
}

}  // namespace csm
