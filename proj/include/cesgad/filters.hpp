#pragma once

// Spectral encoder: linear multi-hop propagation (no inter-layer
// nonlinearity) through two complementary filters.
//
//   smooth  branch:  Z_{l+1} = P+ Z_l W_l,  P+ = (D+I)^{-1/2} (A+I) (D+I)^{-1/2}
//   sharpen branch:  Z_{l+1} = P- Z_l W_l,  P- = I - alpha D^{-1/2} A D^{-1/2}
//
// The smooth branch adds self-loops (its propagation matrix has spectral
// radius <= 1 and preserves constants on regular graphs); the sharpen branch
// does not (a self-edge cannot carry a cross-class relationship). Both
// operators act on the compressed adjacency directly; no dense matrix is
// formed. Nodes with no incident edge pass their own row through: the
// smooth operator keeps it via the self-loop, the sharpen one via the
// identity term.

#include <cstdint>
#include <string>
#include <vector>

#include "cesgad/error.hpp"
#include "cesgad/graph.hpp"
#include "cesgad/nn.hpp"
#include "cesgad/random.hpp"

namespace cesgad {

// (D+I)^{-1/2} (A+I) (D+I)^{-1/2} x, sparse.
inline Matrix prop_smooth(const EdgeSet& e, const Matrix& x) {
  if (x.rows() != e.num_nodes()) {
    throw data_error("prop_smooth: signal has " + std::to_string(x.rows()) +
                     " rows for a " + std::to_string(e.num_nodes()) +
                     "-node edge set");
  }
  const std::int32_t n = e.num_nodes();
  Vector s(n);
  for (std::int32_t i = 0; i < n; ++i) {
    s[i] = 1.0 / std::sqrt(static_cast<double>(e.degree(i)) + 1.0);
  }
  Matrix out(n, x.cols());
  for (std::int32_t i = 0; i < n; ++i) {
    out.row(i) = (s[i] * s[i]) * x.row(i);
    for (std::int32_t j : e.neighbors(i)) {
      out.row(i) += (s[i] * s[j]) * x.row(j);
    }
  }
  return out;
}

// (I - alpha D^{-1/2} A D^{-1/2}) x, sparse. alpha in [0, 2]; 0 is the
// identity, 1 the normalized Laplacian.
inline Matrix prop_sharpen(const EdgeSet& e, const Matrix& x, double alpha) {
  if (x.rows() != e.num_nodes()) {
    throw data_error("prop_sharpen: signal has " + std::to_string(x.rows()) +
                     " rows for a " + std::to_string(e.num_nodes()) +
                     "-node edge set");
  }
  if (alpha < 0.0 || alpha > 2.0) {
    throw config_error("prop_sharpen: alpha must lie in [0, 2], got " +
                       std::to_string(alpha));
  }
  const std::int32_t n = e.num_nodes();
  Vector s(n);
  for (std::int32_t i = 0; i < n; ++i) {
    const std::int64_t d = e.degree(i);
    s[i] = d > 0 ? 1.0 / std::sqrt(static_cast<double>(d)) : 0.0;
  }
  Matrix out = x;
  for (std::int32_t i = 0; i < n; ++i) {
    for (std::int32_t j : e.neighbors(i)) {
      out.row(i) -= (alpha * s[i] * s[j]) * x.row(j);
    }
  }
  return out;
}

enum class BranchKind { Smooth, Sharpen };

// Per-layer inputs-after-propagation, kept by the forward pass so the
// backward pass can form weight gradients without re-propagating.
struct BranchCache {
  std::vector<Matrix> propagated;
};

namespace detail {
inline Matrix apply_propagation(const EdgeSet& e, const Matrix& x,
                                BranchKind kind, double alpha) {
  return kind == BranchKind::Smooth ? prop_smooth(e, x)
                                    : prop_sharpen(e, x, alpha);
}

inline void check_weight_chain(const std::vector<Matrix>& weights,
                               Eigen::Index in_dim, const char* what) {
  if (weights.empty()) {
    throw config_error(std::string(what) + ": no layer weights");
  }
  Eigen::Index cur = in_dim;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != cur) {
      throw config_error(std::string(what) + ": layer " + std::to_string(l) +
                         " expects " + std::to_string(weights[l].rows()) +
                         " input columns, got " + std::to_string(cur));
    }
    cur = weights[l].cols();
  }
}
}  // namespace detail

// Z = P (P ... (P X W_0) ... W_{L-2}) W_{L-1}, with P chosen by `kind`.
inline Matrix branch_forward(const Matrix& x, const EdgeSet& e,
                             const std::vector<Matrix>& weights,
                             BranchKind kind, double alpha,
                             BranchCache* cache = nullptr) {
  detail::check_weight_chain(weights, x.cols(), "branch_forward");
  if (cache) {
    cache->propagated.clear();
    cache->propagated.reserve(weights.size());
  }
  Matrix a = x;
  for (const Matrix& w : weights) {
    Matrix b = detail::apply_propagation(e, a, kind, alpha);
    if (cache) cache->propagated.push_back(b);
    a = b * w;
  }
  return a;
}

struct BranchGrads {
  std::vector<Matrix> weights;
  Matrix input;  // gradient with respect to the branch input rows
};

// Reverse pass of branch_forward. Both propagation operators are symmetric,
// so transposed propagation is propagation itself.
inline BranchGrads branch_backward(const Matrix& d_out, const EdgeSet& e,
                                   const std::vector<Matrix>& weights,
                                   BranchKind kind, double alpha,
                                   const BranchCache& cache) {
  if (cache.propagated.size() != weights.size()) {
    throw config_error("branch_backward: cache holds " +
                       std::to_string(cache.propagated.size()) +
                       " layers for " + std::to_string(weights.size()) +
                       " weight tensors");
  }
  BranchGrads grads;
  grads.weights.resize(weights.size());
  Matrix da = d_out;
  for (std::size_t l = weights.size(); l-- > 0;) {
    grads.weights[l] = cache.propagated[l].transpose() * da;
    da = detail::apply_propagation(e, Matrix(da * weights[l].transpose()),
                                   kind, alpha);
  }
  grads.input = std::move(da);
  return grads;
}

// ---------------------------------------------------------------------------
// Two-branch encoder over a separated multi-relation graph.

struct HybridModelParams {
  std::int32_t layers = 2;
  std::int32_t hidden = 64;
  double hp_alpha = 1.0;
  // weights[relation][layer]; `high` empty means the sharpen branch is
  // disabled and the embedding carries smooth blocks only.
  std::vector<std::vector<Matrix>> low;
  std::vector<std::vector<Matrix>> high;

  bool has_highpass() const { return !high.empty(); }
  std::int32_t num_relations() const {
    return static_cast<std::int32_t>(low.size());
  }
  std::int32_t embedding_dim() const {
    return (has_highpass() ? 2 : 1) * hidden * num_relations();
  }
};

inline HybridModelParams init_hybrid_params(std::int32_t num_relations,
                                            std::int32_t feat_dim,
                                            std::int32_t layers,
                                            std::int32_t hidden,
                                            double hp_alpha, bool with_highpass,
                                            std::uint64_t seed) {
  if (num_relations < 1) throw config_error("encoder: needs >= 1 relation");
  if (feat_dim < 1) throw config_error("encoder: needs >= 1 feature column");
  if (layers < 1) throw config_error("encoder: layers must be >= 1");
  if (hidden < 1) throw config_error("encoder: hidden width must be >= 1");
  if (!(hp_alpha > 0.0) || hp_alpha > 2.0) {
    throw config_error("encoder: hp_alpha must lie in (0, 2], got " +
                       std::to_string(hp_alpha));
  }
  HybridModelParams p;
  p.layers = layers;
  p.hidden = hidden;
  p.hp_alpha = hp_alpha;
  const auto make_branch = [&](const char* stream, std::int32_t r) {
    std::vector<Matrix> w(layers);
    for (std::int32_t l = 0; l < layers; ++l) {
      Rng rng = make_rng(seed, stream,
                         static_cast<std::uint64_t>(r) * layers + l);
      w[l] = glorot_uniform(l == 0 ? feat_dim : hidden, hidden, rng);
    }
    return w;
  };
  for (std::int32_t r = 0; r < num_relations; ++r) {
    p.low.push_back(make_branch("w-low", r));
  }
  if (with_highpass) {
    for (std::int32_t r = 0; r < num_relations; ++r) {
      p.high.push_back(make_branch("w-high", r));
    }
  }
  return p;
}

// Caches for one hybrid forward: per relation, the smooth branch cache then
// (when the sharpen branch exists) the sharpen branch cache.
struct HybridCache {
  std::vector<BranchCache> branches;
};

namespace detail {
inline void check_separation_shape(const EdgeSeparation& sep,
                                   const HybridModelParams& p,
                                   Eigen::Index n) {
  if (static_cast<std::int32_t>(sep.plus.size()) != p.num_relations()) {
    throw config_error("encoder: params cover " +
                       std::to_string(p.num_relations()) +
                       " relations, separation has " +
                       std::to_string(sep.plus.size()));
  }
  if (p.has_highpass() && sep.minus.size() != sep.plus.size()) {
    throw config_error("encoder: separation is missing heterophilic sets");
  }
  for (std::size_t r = 0; r < sep.plus.size(); ++r) {
    if (sep.plus[r].num_nodes() != n ||
        (p.has_highpass() && sep.minus[r].num_nodes() != n)) {
      throw data_error("encoder: separation node count differs from signal");
    }
  }
}
}  // namespace detail

// Column layout: relations in order; within a relation the smooth block,
// then (if enabled) the sharpen block, each `hidden` wide.
inline Matrix hybrid_forward(const Matrix& x, const EdgeSeparation& sep,
                             const HybridModelParams& p,
                             HybridCache* cache = nullptr) {
  detail::check_separation_shape(sep, p, x.rows());
  const std::int32_t r_count = p.num_relations();
  Matrix z(x.rows(), p.embedding_dim());
  if (cache) cache->branches.clear();
  Eigen::Index col = 0;
  for (std::int32_t r = 0; r < r_count; ++r) {
    BranchCache* low_cache = nullptr;
    if (cache) {
      cache->branches.emplace_back();
      low_cache = &cache->branches.back();
    }
    z.middleCols(col, p.hidden) = branch_forward(
        x, sep.plus[r], p.low[r], BranchKind::Smooth, 0.0, low_cache);
    col += p.hidden;
    if (p.has_highpass()) {
      BranchCache* high_cache = nullptr;
      if (cache) {
        cache->branches.emplace_back();
        high_cache = &cache->branches.back();
      }
      z.middleCols(col, p.hidden) =
          branch_forward(x, sep.minus[r], p.high[r], BranchKind::Sharpen,
                         p.hp_alpha, high_cache);
      col += p.hidden;
    }
  }
  return z;
}

struct HybridGrads {
  std::vector<std::vector<Matrix>> low;
  std::vector<std::vector<Matrix>> high;
  Matrix input;
};

inline HybridGrads hybrid_backward(const Matrix& d_z, const Matrix& x,
                                   const EdgeSeparation& sep,
                                   const HybridModelParams& p,
                                   const HybridCache& cache) {
  detail::check_separation_shape(sep, p, x.rows());
  if (d_z.rows() != x.rows() || d_z.cols() != p.embedding_dim()) {
    throw config_error("encoder: upstream gradient shaped " +
                       std::to_string(d_z.rows()) + "x" +
                       std::to_string(d_z.cols()) + ", expected " +
                       std::to_string(x.rows()) + "x" +
                       std::to_string(p.embedding_dim()));
  }
  const std::size_t expected_caches =
      sep.plus.size() * (p.has_highpass() ? 2 : 1);
  if (cache.branches.size() != expected_caches) {
    throw config_error("encoder: cache does not match forward layout");
  }
  HybridGrads grads;
  grads.input = Matrix::Zero(x.rows(), x.cols());
  Eigen::Index col = 0;
  std::size_t slot = 0;
  for (std::int32_t r = 0; r < p.num_relations(); ++r) {
    BranchGrads low = branch_backward(
        Matrix(d_z.middleCols(col, p.hidden)), sep.plus[r], p.low[r],
        BranchKind::Smooth, 0.0, cache.branches[slot++]);
    col += p.hidden;
    grads.low.push_back(std::move(low.weights));
    grads.input += low.input;
    if (p.has_highpass()) {
      BranchGrads high = branch_backward(
          Matrix(d_z.middleCols(col, p.hidden)), sep.minus[r], p.high[r],
          BranchKind::Sharpen, p.hp_alpha, cache.branches[slot++]);
      col += p.hidden;
      grads.high.push_back(std::move(high.weights));
      grads.input += high.input;
    }
  }
  return grads;
}

// Stable flattening order shared by the optimizer and the gradient plumbing:
// all smooth-branch tensors (relation-major, layer order), then all
// sharpen-branch tensors.
inline std::vector<Matrix*> parameter_list(HybridModelParams& p) {
  std::vector<Matrix*> out;
  for (auto& rel : p.low) {
    for (auto& w : rel) out.push_back(&w);
  }
  for (auto& rel : p.high) {
    for (auto& w : rel) out.push_back(&w);
  }
  return out;
}

inline std::vector<Matrix> flatten_grads(HybridGrads& grads) {
  std::vector<Matrix> out;
  for (auto& rel : grads.low) {
    for (auto& w : rel) out.push_back(std::move(w));
  }
  for (auto& rel : grads.high) {
    for (auto& w : rel) out.push_back(std::move(w));
  }
  return out;
}

}  // namespace cesgad
