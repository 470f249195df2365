#pragma once

// Shared fixtures and independent oracles for the test suites. Oracles here
// deliberately recompute results through a different route than the library
// (pair enumeration instead of incremental counters, O(n^2) scans instead of
// rank statistics) so that agreement is evidence, not tautology.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "cesgad/graph.hpp"
#include "cesgad/random.hpp"

namespace testutil {

using cesgad::Edge;
using cesgad::EdgeSet;
using cesgad::Label;
using cesgad::Matrix;
using cesgad::MultiRelationGraph;
using cesgad::Rng;
using cesgad::Vector;

inline std::vector<Label> to_labels(const std::vector<int>& raw) {
  std::vector<Label> out;
  out.reserve(raw.size());
  for (int v : raw) {
    out.push_back(v < 0 ? Label::Unlabeled
                        : (v == 1 ? Label::Anomalous : Label::Normal));
  }
  return out;
}

inline MultiRelationGraph make_graph(std::int32_t n, std::vector<Edge> edges,
                                     std::vector<int> labels,
                                     std::int32_t feat_dim = 0) {
  std::vector<EdgeSet> rels;
  rels.push_back(EdgeSet::from_edges(n, std::move(edges)));
  Matrix x = Matrix::Zero(n, feat_dim);
  return MultiRelationGraph(std::move(rels), {"net"}, std::move(x),
                            to_labels(labels));
}

// Erdos-Renyi style random simple graph with exactly `m` edges.
inline std::vector<Edge> random_edges(std::int32_t n, std::int64_t m, Rng& rng) {
  std::vector<Edge> all;
  for (std::int32_t i = 0; i < n; ++i) {
    for (std::int32_t j = i + 1; j < n; ++j) all.push_back({i, j});
  }
  std::shuffle(all.begin(), all.end(), rng);
  if (m > static_cast<std::int64_t>(all.size())) m = all.size();
  all.resize(m);
  return all;
}

inline std::vector<int> random_binary_labels(std::int32_t n, Rng& rng) {
  std::vector<int> y(n);
  std::uniform_int_distribution<int> coin(0, 1);
  for (auto& v : y) v = coin(rng);
  return y;
}

// Oracle: graph heterophily by full pair enumeration over a dense adjacency
// copy, counting each unordered labeled pair once.
inline double oracle_graph_heterophily(const MultiRelationGraph& g, int r) {
  const auto& e = g.relation(r);
  const std::int32_t n = e.num_nodes();
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  for (const auto& [a, b] : e.edges()) adj[a][b] = adj[b][a] = 1;
  std::int64_t total = 0, hetero = 0;
  for (std::int32_t i = 0; i < n; ++i) {
    for (std::int32_t j = i + 1; j < n; ++j) {
      if (!adj[i][j]) continue;
      if (!g.is_labeled(i) || !g.is_labeled(j)) continue;
      ++total;
      hetero += (g.label(i) != g.label(j));
    }
  }
  return static_cast<double>(hetero) / static_cast<double>(total);
}

// Oracle: pairwise AUC by direct O(n^2) comparison, ties worth one half.
inline double oracle_auc(const std::vector<double>& scores,
                         const std::vector<int>& labels) {
  double wins = 0.0;
  std::int64_t pos = 0, neg = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      ++pos;
      for (std::size_t j = 0; j < labels.size(); ++j) {
        if (labels[j] != 0) continue;
        if (scores[i] > scores[j]) {
          wins += 1.0;
        } else if (scores[i] == scores[j]) {
          wins += 0.5;
        }
      }
    } else {
      ++neg;
    }
  }
  return wins / (static_cast<double>(pos) * static_cast<double>(neg));
}

// Oracle: macro F1 from a confusion matrix assembled by independent counting.
inline double oracle_f1_macro(const std::vector<int>& preds,
                              const std::vector<int>& labels) {
  double sum = 0.0;
  for (int cls : {0, 1}) {
    std::int64_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const bool p = preds[i] == cls;
      const bool t = labels[i] == cls;
      tp += (p && t);
      fp += (p && !t);
      fn += (!p && t);
    }
    const std::int64_t denom = 2 * tp + fp + fn;
    sum += denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
  }
  return sum / 2.0;
}

// Central finite differences of `loss` with respect to every entry of `w`.
inline Matrix finite_difference(std::function<double()> loss, Matrix& w,
                                double step = 1e-5) {
  Matrix grad(w.rows(), w.cols());
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      const double saved = w(i, j);
      w(i, j) = saved + step;
      const double up = loss();
      w(i, j) = saved - step;
      const double down = loss();
      w(i, j) = saved;
      grad(i, j) = (up - down) / (2.0 * step);
    }
  }
  return grad;
}

inline double relative_tensor_error(const Matrix& a, const Matrix& b) {
  const double denom = std::max({a.norm(), b.norm(), 1e-12});
  return (a - b).norm() / denom;
}

}  // namespace testutil
