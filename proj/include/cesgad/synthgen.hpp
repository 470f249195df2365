#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "cesgad/error.hpp"
#include "cesgad/graph.hpp"
#include "cesgad/random.hpp"
#include "cesgad/spectral.hpp"

namespace cesgad {

// Preferential-attachment generator. Starts from m isolated seed nodes; every
// subsequent node attaches m distinct edges to earlier nodes, the first
// attachment uniformly (all seeds), later ones proportionally to degree.
// Yields exactly m * (n - m) edges and a connected graph.
inline MultiRelationGraph barabasi_albert(std::int32_t n, std::int32_t m,
                                          std::uint64_t seed) {
  if (m < 1) throw data_error("barabasi-albert: m must be at least 1");
  if (n <= m) {
    throw data_error("barabasi-albert: need n > m, got n=" + std::to_string(n) +
                     " m=" + std::to_string(m));
  }
  Rng rng = make_rng(seed, "ba");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m) * (n - m));
  // Every edge endpoint is appended here, so sampling an element uniformly
  // samples nodes proportionally to their degree.
  std::vector<std::int32_t> endpoint_pool;
  endpoint_pool.reserve(2 * edges.capacity());
  std::vector<std::int32_t> targets;
  for (std::int32_t t = m; t < n; ++t) {
    targets.clear();
    if (t == m) {
      for (std::int32_t s = 0; s < m; ++s) targets.push_back(s);
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, endpoint_pool.size() - 1);
      while (static_cast<std::int32_t>(targets.size()) < m) {
        const std::int32_t c = endpoint_pool[pick(rng)];
        if (std::find(targets.begin(), targets.end(), c) == targets.end()) {
          targets.push_back(c);
        }
      }
    }
    for (std::int32_t c : targets) {
      edges.push_back(canonical_edge(c, t));
      endpoint_pool.push_back(c);
      endpoint_pool.push_back(t);
    }
  }
  std::vector<EdgeSet> rels;
  rels.push_back(EdgeSet::from_edges(n, std::move(edges)));
  return MultiRelationGraph(std::move(rels), {"net"}, Matrix::Zero(n, 0),
                            std::vector<Label>(n, Label::Unlabeled));
}

// Anomaly injection. Exactly round(anomaly_ratio * N) nodes become anomalous;
// everyone else becomes normal. Features are drawn i.i.d. standard normal and
// anomalous rows are scaled by sigma. Each anomaly then camouflages itself by
// building new edges to uniformly random normal nodes (duplicate picks are
// skipped, not resampled).
//
// The camouflage budget per anomaly is rho * (1 + round(anomaly_ratio *
// escalation)): the baseline rho is escalated with anomaly prevalence, so a
// heavier infestation also means more aggressively camouflaged members. With
// escalation = 0 every anomaly builds exactly rho edges.
struct InjectionConfig {
  double anomaly_ratio = 0.1;  // in [0, 1]
  double sigma = 2.0;          // anomalous feature scale, > 1
  std::int32_t rho = 2;        // baseline camouflage edges per anomaly, >= 0
  double escalation = 20.0;    // prevalence coupling of the budget, >= 0
  std::int32_t feat_dim = 16;  // generated feature columns, >= 1
  std::uint64_t seed = 42;
};

inline std::int32_t camouflage_budget(const InjectionConfig& cfg) {
  return cfg.rho *
         (1 + static_cast<std::int32_t>(
                  std::llround(cfg.anomaly_ratio * cfg.escalation)));
}

inline MultiRelationGraph inject_anomalies(const MultiRelationGraph& g,
                                           const InjectionConfig& cfg) {
  if (cfg.anomaly_ratio < 0.0 || cfg.anomaly_ratio > 1.0) {
    throw data_error("inject: anomaly ratio must lie in [0, 1]");
  }
  if (cfg.sigma <= 1.0) {
    throw data_error("inject: feature noise scale must exceed 1");
  }
  if (cfg.rho < 0) throw data_error("inject: rho must be non-negative");
  if (cfg.escalation < 0.0) throw data_error("inject: escalation must be non-negative");
  if (cfg.feat_dim < 1) throw data_error("inject: feature dimension must be positive");
  for (Label l : g.labels()) {
    if (l != Label::Unlabeled) {
      throw data_error("inject: graph is already labeled");
    }
  }
  const std::int32_t n = g.num_nodes();
  const std::int32_t num_anomalous =
      static_cast<std::int32_t>(std::llround(cfg.anomaly_ratio * n));

  // Labels: a seeded shuffle; the first round(alpha*N) positions turn
  // anomalous. For a fixed seed the anomaly sets are nested across ratios.
  std::vector<std::int32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  {
    Rng rng = make_rng(cfg.seed, "inject-labels");
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::vector<Label> labels(n, Label::Normal);
  for (std::int32_t i = 0; i < num_anomalous; ++i) {
    labels[order[i]] = Label::Anomalous;
  }

  // Features: one row per node in node order, so the draw for node v does not
  // depend on the anomaly ratio; anomalous rows are scaled afterwards.
  Matrix features(n, cfg.feat_dim);
  {
    Rng rng = make_rng(cfg.seed, "inject-features");
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::int32_t v = 0; v < n; ++v) {
      for (std::int32_t d = 0; d < cfg.feat_dim; ++d) features(v, d) = gauss(rng);
      if (labels[v] == Label::Anomalous) features.row(v) *= cfg.sigma;
    }
  }

  std::vector<std::int32_t> normals;
  normals.reserve(n - num_anomalous);
  for (std::int32_t v = 0; v < n; ++v) {
    if (labels[v] == Label::Normal) normals.push_back(v);
  }
  std::vector<std::int32_t> anomalies;
  anomalies.reserve(num_anomalous);
  for (std::int32_t v = 0; v < n; ++v) {
    if (labels[v] == Label::Anomalous) anomalies.push_back(v);
  }

  const std::int32_t budget = camouflage_budget(cfg);
  std::vector<EdgeSet> rels;
  std::vector<std::string> names;
  for (std::int32_t r = 0; r < g.num_relations(); ++r) {
    std::vector<Edge> edges = g.relation(r).edges();
    std::unordered_set<std::int64_t> present;
    present.reserve(edges.size() * 2);
    auto key = [n](const Edge& e) {
      return static_cast<std::int64_t>(e.first) * n + e.second;
    };
    for (const auto& e : edges) present.insert(key(e));
    if (!normals.empty() && budget > 0) {
      Rng rng = make_rng(cfg.seed, "inject-rewire", static_cast<std::uint64_t>(r));
      std::uniform_int_distribution<std::size_t> pick(0, normals.size() - 1);
      for (std::int32_t a : anomalies) {
        for (std::int32_t t = 0; t < budget; ++t) {
          const std::int32_t u = normals[pick(rng)];
          const Edge e = canonical_edge(a, u);
          if (present.contains(key(e))) continue;
          present.insert(key(e));
          edges.push_back(e);
        }
      }
    }
    rels.push_back(EdgeSet::from_edges(n, std::move(edges)));
    names.push_back(g.relation_name(r));
  }
  return MultiRelationGraph(std::move(rels), std::move(names),
                            std::move(features), std::move(labels));
}

// One table row of the energy-shift experiment.
struct ShiftRow {
  double alpha = 0.0;
  std::uint64_t seed = 0;
  double eta_features = 0.0;   // low-quarter energy share of the features
  double eta_labels = 0.0;     // low-quarter energy share of the label signal
  double s_high_labels = 0.0;  // label high-frequency area, 0 when no anomaly
  double heterophily = 0.0;    // graph heterophily of the injected graph
};

// Generates one preferential-attachment graph per seed, injects anomalies at
// every ratio in the grid, and measures where the spectral energy of the
// feature and label signals sits. All spectral quantities use the regular
// Laplacian; the split index is the ceiling quarter of the spectrum. For a
// fixed seed the base graph is shared across the grid, so rows are paired.
inline std::vector<ShiftRow> spectral_shift_experiment(
    std::int32_t n, std::int32_t m, const std::vector<double>& alpha_grid,
    const InjectionConfig& base_cfg, std::int32_t num_seeds,
    std::uint64_t base_seed) {
  if (alpha_grid.empty()) {
    throw data_error("shift experiment: empty anomaly-ratio grid");
  }
  if (num_seeds < 1) {
    throw data_error("shift experiment: need at least one seed");
  }
  std::vector<ShiftRow> rows;
  rows.reserve(alpha_grid.size() * num_seeds);
  const std::int64_t k = default_split_index(n);
  for (std::int32_t s = 0; s < num_seeds; ++s) {
    const std::uint64_t cell_seed = derive_seed(base_seed, "shift-cell", s);
    const MultiRelationGraph base = barabasi_albert(n, m, cell_seed);
    for (double alpha : alpha_grid) {
      InjectionConfig cfg = base_cfg;
      cfg.anomaly_ratio = alpha;
      cfg.seed = cell_seed;
      const MultiRelationGraph g = inject_anomalies(base, cfg);
      const auto dec = eigendecompose(laplacian(g.relation(0), LaplacianForm::Regular));
      ShiftRow row;
      row.alpha = alpha;
      row.seed = cell_seed;
      row.eta_features = pooled_energy_ratio(dec, g.features(), k);
      const Vector y = label_signal(g);
      if (y.sum() == 0.0) {
        // No anomaly: the label signal is identically zero, its spectral
        // quantities are reported as zero by convention in this table only.
        row.eta_labels = 0.0;
        row.s_high_labels = 0.0;
      } else {
        row.eta_labels = energy_ratio(graph_fourier_transform(dec, y), k);
        row.s_high_labels = label_high_freq_area(g.relation(0), y);
      }
      row.heterophily = graph_heterophily(g, 0);
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace cesgad
