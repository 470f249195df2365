#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cesgad/error.hpp"

namespace cesgad {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Dense [N x N] forms (adjacency, Laplacians, eigenvector bases) are only
// materialized up to this many nodes; larger requests refuse with a capacity
// error before any allocation happens.
inline constexpr int kDenseCapacity = 5000;

inline void require_dense_capacity(std::int64_t num_nodes, const char* what) {
  if (num_nodes > kDenseCapacity) {
    throw capacity_error(std::string(what) + ": dense form for " +
                         std::to_string(num_nodes) + " nodes exceeds the " +
                         std::to_string(kDenseCapacity) + "-node capacity limit");
  }
}

// Tri-state node label. Unlabeled nodes participate in structure but are
// excluded from label-dependent statistics.
enum class Label : std::int8_t {
  Normal = 0,
  Anomalous = 1,
  Unlabeled = -1,
};

using Edge = std::pair<std::int32_t, std::int32_t>;

inline Edge canonical_edge(std::int32_t a, std::int32_t b) {
  return a < b ? Edge{a, b} : Edge{b, a};
}

// Undirected simple edge set over a fixed node range [0, N).
//
// Invariants established at construction and never mutated afterwards:
//   - edges stored canonically (i < j), sorted lexicographically, no
//     duplicates, no self-loops, endpoints within range;
//   - a CSR view of the symmetric adjacency with sorted neighbor lists;
//   - degree(v) == neighbors(v).size().
class EdgeSet {
 public:
  EdgeSet() = default;

  explicit EdgeSet(std::int32_t num_nodes) {
    if (num_nodes < 0) throw data_error("edge set: negative node count");
    num_nodes_ = num_nodes;
    offsets_.assign(static_cast<std::size_t>(num_nodes) + 1, 0);
  }

  static EdgeSet from_edges(std::int32_t num_nodes, std::vector<Edge> edges) {
    EdgeSet e(num_nodes);
    for (auto& [a, b] : edges) {
      if (a < 0 || b < 0 || a >= num_nodes || b >= num_nodes) {
        throw data_error("edge set: endpoint (" + std::to_string(a) + ", " +
                         std::to_string(b) + ") out of range for " +
                         std::to_string(num_nodes) + " nodes");
      }
      if (a == b) {
        throw data_error("edge set: self-loop at node " + std::to_string(a));
      }
      if (a > b) std::swap(a, b);
    }
    std::sort(edges.begin(), edges.end());
    auto dup = std::adjacent_find(edges.begin(), edges.end());
    if (dup != edges.end()) {
      throw data_error("edge set: duplicate edge (" + std::to_string(dup->first) +
                       ", " + std::to_string(dup->second) + ")");
    }
    e.edges_ = std::move(edges);
    e.build_adjacency();
    return e;
  }

  std::int32_t num_nodes() const { return num_nodes_; }
  std::int64_t num_edges() const { return static_cast<std::int64_t>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }

  std::span<const std::int32_t> neighbors(std::int32_t v) const {
    check_node(v);
    return {adjacency_.data() + offsets_[v],
            static_cast<std::size_t>(offsets_[v + 1] - offsets_[v])};
  }

  std::int32_t degree(std::int32_t v) const {
    check_node(v);
    return static_cast<std::int32_t>(offsets_[v + 1] - offsets_[v]);
  }

  bool has_edge(std::int32_t a, std::int32_t b) const {
    if (a == b) return false;
    check_node(a);
    check_node(b);
    auto nb = neighbors(a);
    return std::binary_search(nb.begin(), nb.end(), b);
  }

 private:
  void check_node(std::int32_t v) const {
    if (v < 0 || v >= num_nodes_) {
      throw data_error("edge set: node " + std::to_string(v) +
                       " out of range for " + std::to_string(num_nodes_) +
                       " nodes");
    }
  }

  void build_adjacency() {
    offsets_.assign(static_cast<std::size_t>(num_nodes_) + 1, 0);
    for (const auto& [a, b] : edges_) {
      ++offsets_[a + 1];
      ++offsets_[b + 1];
    }
    for (std::size_t i = 1; i < offsets_.size(); ++i) offsets_[i] += offsets_[i - 1];
    adjacency_.resize(static_cast<std::size_t>(offsets_.back()));
    std::vector<std::int64_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (const auto& [a, b] : edges_) {
      adjacency_[cursor[a]++] = b;
      adjacency_[cursor[b]++] = a;
    }
    for (std::int32_t v = 0; v < num_nodes_; ++v) {
      std::sort(adjacency_.begin() + offsets_[v], adjacency_.begin() + offsets_[v + 1]);
    }
  }

  std::int32_t num_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::int64_t> offsets_{0};
  std::vector<std::int32_t> adjacency_;
};

// Node set shared by R >= 1 relations, with one feature matrix [N x D] and one
// tri-state label vector. Value semantics; immutable after construction.
class MultiRelationGraph {
 public:
  MultiRelationGraph(std::vector<EdgeSet> relations,
                     std::vector<std::string> relation_names, Matrix features,
                     std::vector<Label> labels)
      : relations_(std::move(relations)),
        relation_names_(std::move(relation_names)),
        features_(std::move(features)),
        labels_(std::move(labels)) {
    if (relations_.empty()) throw data_error("graph: at least one relation required");
    if (relation_names_.size() != relations_.size()) {
      throw data_error("graph: relation name count does not match relation count");
    }
    const std::int32_t n = relations_.front().num_nodes();
    for (const auto& r : relations_) {
      if (r.num_nodes() != n) {
        throw data_error("graph: relations disagree on node count");
      }
    }
    if (features_.rows() != n) {
      throw data_error("graph: feature matrix has " + std::to_string(features_.rows()) +
                       " rows for " + std::to_string(n) + " nodes");
    }
    if (static_cast<std::int64_t>(labels_.size()) != n) {
      throw data_error("graph: label vector has " + std::to_string(labels_.size()) +
                       " entries for " + std::to_string(n) + " nodes");
    }
    for (std::size_t i = 0; i < relation_names_.size(); ++i) {
      for (std::size_t j = i + 1; j < relation_names_.size(); ++j) {
        if (relation_names_[i] == relation_names_[j]) {
          throw data_error("graph: duplicate relation name '" + relation_names_[i] + "'");
        }
      }
    }
  }

  std::int32_t num_nodes() const { return relations_.front().num_nodes(); }
  std::int32_t num_relations() const { return static_cast<std::int32_t>(relations_.size()); }
  std::int32_t feature_dim() const { return static_cast<std::int32_t>(features_.cols()); }

  const EdgeSet& relation(std::int32_t r) const {
    check_relation(r);
    return relations_[r];
  }

  const std::string& relation_name(std::int32_t r) const {
    check_relation(r);
    return relation_names_[r];
  }

  std::int32_t relation_index(const std::string& name) const {
    for (std::size_t r = 0; r < relation_names_.size(); ++r) {
      if (relation_names_[r] == name) return static_cast<std::int32_t>(r);
    }
    throw data_error("graph: unknown relation '" + name + "'");
  }

  const Matrix& features() const { return features_; }
  const std::vector<Label>& labels() const { return labels_; }

  Label label(std::int32_t v) const { return labels_.at(v); }
  bool is_labeled(std::int32_t v) const { return labels_.at(v) != Label::Unlabeled; }

  std::int64_t num_labeled() const {
    std::int64_t c = 0;
    for (Label l : labels_) c += (l != Label::Unlabeled);
    return c;
  }

  std::int64_t num_anomalous() const {
    std::int64_t c = 0;
    for (Label l : labels_) c += (l == Label::Anomalous);
    return c;
  }

 private:
  void check_relation(std::int32_t r) const {
    if (r < 0 || r >= num_relations()) {
      throw data_error("graph: relation index " + std::to_string(r) + " out of range");
    }
  }

  std::vector<EdgeSet> relations_;
  std::vector<std::string> relation_names_;
  Matrix features_;
  std::vector<Label> labels_;
};

// Per-relation split of the observed edges into a homophily-leaning part
// (plus) and a heterophily-leaning part (minus). Together the two parts
// partition the relation's edge set.
struct EdgeSeparation {
  std::vector<EdgeSet> plus;
  std::vector<EdgeSet> minus;
};

// Fraction of v's neighbors in relation r whose label differs from v's.
// Requires v and all of its neighbors to be labeled; v must not be isolated.
inline double node_heterophily(const MultiRelationGraph& g, std::int32_t relation,
                               std::int32_t v) {
  const EdgeSet& e = g.relation(relation);
  auto nb = e.neighbors(v);
  if (nb.empty()) {
    throw data_error("node heterophily: node " + std::to_string(v) +
                     " is isolated in relation '" + g.relation_name(relation) + "'");
  }
  if (!g.is_labeled(v)) {
    throw data_error("node heterophily: node " + std::to_string(v) + " is unlabeled");
  }
  std::int64_t diff = 0;
  for (std::int32_t u : nb) {
    if (!g.is_labeled(u)) {
      throw data_error("node heterophily: neighbor " + std::to_string(u) +
                       " of node " + std::to_string(v) + " is unlabeled");
    }
    diff += (g.label(u) != g.label(v));
  }
  return static_cast<double>(diff) / static_cast<double>(nb.size());
}

// Fraction of relation-r edges, restricted to edges whose both endpoints are
// labeled, that join differently labeled nodes. Requires at least one such
// edge.
inline double graph_heterophily(const MultiRelationGraph& g, std::int32_t relation) {
  const EdgeSet& e = g.relation(relation);
  std::int64_t labeled_edges = 0;
  std::int64_t hetero = 0;
  for (const auto& [a, b] : e.edges()) {
    if (!g.is_labeled(a) || !g.is_labeled(b)) continue;
    ++labeled_edges;
    hetero += (g.label(a) != g.label(b));
  }
  if (labeled_edges == 0) {
    throw data_error("graph heterophily: relation '" + g.relation_name(relation) +
                     "' has no edge with both endpoints labeled");
  }
  return static_cast<double>(hetero) / static_cast<double>(labeled_edges);
}

// Dense symmetrically normalized adjacency. With add_self_loops the matrix is
// (D+I)^{-1/2} (A+I) (D+I)^{-1/2}; without it, D^{-1/2} A D^{-1/2} where
// zero-degree nodes contribute all-zero rows and columns.
inline Matrix normalized_adjacency(const EdgeSet& e, bool add_self_loops) {
  const std::int32_t n = e.num_nodes();
  require_dense_capacity(n, "normalized adjacency");
  Vector inv_sqrt(n);
  for (std::int32_t v = 0; v < n; ++v) {
    const double d = e.degree(v) + (add_self_loops ? 1.0 : 0.0);
    inv_sqrt[v] = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
  }
  Matrix m = Matrix::Zero(n, n);
  for (const auto& [a, b] : e.edges()) {
    const double w = inv_sqrt[a] * inv_sqrt[b];
    m(a, b) = w;
    m(b, a) = w;
  }
  if (add_self_loops) {
    for (std::int32_t v = 0; v < n; ++v) m(v, v) = inv_sqrt[v] * inv_sqrt[v];
  }
  return m;
}

enum class LaplacianForm {
  Regular,     // L = D - A
  Normalized,  // L = I - D^{-1/2} A D^{-1/2}
};

struct LaplacianMatrix {
  Matrix values;
  LaplacianForm form = LaplacianForm::Regular;
};

inline LaplacianMatrix laplacian(const EdgeSet& e, LaplacianForm form) {
  const std::int32_t n = e.num_nodes();
  require_dense_capacity(n, "laplacian");
  Matrix m = Matrix::Zero(n, n);
  if (form == LaplacianForm::Regular) {
    for (const auto& [a, b] : e.edges()) {
      m(a, b) -= 1.0;
      m(b, a) -= 1.0;
      m(a, a) += 1.0;
      m(b, b) += 1.0;
    }
  } else {
    m = -normalized_adjacency(e, /*add_self_loops=*/false);
    for (std::int32_t v = 0; v < n; ++v) m(v, v) += 1.0;
  }
  return {std::move(m), form};
}

// Label vector as a 0/1 signal. Unlabeled nodes are rejected; callers that
// need partial-label handling must mask first.
inline Vector label_signal(const MultiRelationGraph& g) {
  Vector y(g.num_nodes());
  for (std::int32_t v = 0; v < g.num_nodes(); ++v) {
    if (!g.is_labeled(v)) {
      throw data_error("label signal: node " + std::to_string(v) + " is unlabeled");
    }
    y[v] = g.label(v) == Label::Anomalous ? 1.0 : 0.0;
  }
  return y;
}

}  // namespace cesgad
