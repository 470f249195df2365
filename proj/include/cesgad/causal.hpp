#pragma once

// Counterfactual edge separation.
//
// A node pair's treatment records whether the pair is homophily-consistent:
// connected nodes of the same class, or disconnected nodes of different
// classes. For each labeled candidate pair the most similar pair under the
// opposite treatment supplies a counterfactual outcome; an edge classifier
// trained on both views then routes every observed edge into a homophilic
// set (kept for smoothing) or a heterophilic set (kept for sharpening).

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cesgad/error.hpp"
#include "cesgad/graph.hpp"
#include "cesgad/nn.hpp"
#include "cesgad/random.hpp"
#include "cesgad/spectral.hpp"

namespace cesgad {

struct PairSample {
  std::int32_t i = 0;  // canonical: i < j
  std::int32_t j = 0;
  std::int8_t treatment = 0;  // 1 iff (edge and same label) or (non-edge and different label)
  std::int8_t outcome = 0;    // 1 iff the pair is an observed edge
};

// Candidate pairs, unique and sorted by (i, j). Only pairs whose endpoints
// are both labeled participate.
struct TreatmentAssignment {
  std::vector<PairSample> pairs;
};

// Raw features with the first k_se nontrivial Laplacian eigenvector
// coordinates appended column-wise (eigenvectors 2 .. k_se+1 of the regular
// Laplacian of relation r, deterministic sign convention).
inline Matrix structural_encoding(const MultiRelationGraph& g, std::int32_t r,
                                  std::int32_t k_se) {
  if (k_se < 0) throw config_error("structural_encoding: k_se must be >= 0");
  const Matrix& x = g.features();
  if (k_se == 0) return x;
  if (k_se > g.num_nodes() - 1) {
    throw config_error("structural_encoding: k_se = " + std::to_string(k_se) +
                       " exceeds N - 1 = " +
                       std::to_string(g.num_nodes() - 1));
  }
  const SpectralDecomposition dec = eigendecompose(
      laplacian(g.relation(r), LaplacianForm::Regular));
  Matrix out(x.rows(), x.cols() + k_se);
  out.leftCols(x.cols()) = x;
  out.rightCols(k_se) = dec.eigenvectors.middleCols(1, k_se);
  return out;
}

inline TreatmentAssignment assign_treatment(const MultiRelationGraph& g,
                                            std::int32_t r,
                                            std::int32_t nonedge_samples,
                                            std::uint64_t seed) {
  if (nonedge_samples < 0) {
    throw config_error("assign_treatment: nonedge sample count must be >= 0");
  }
  const EdgeSet& e = g.relation(r);
  const std::int32_t n = g.num_nodes();

  std::vector<std::int32_t> labeled;
  for (std::int32_t v = 0; v < n; ++v) {
    if (g.is_labeled(v)) labeled.push_back(v);
  }

  const auto same_label = [&](std::int32_t a, std::int32_t b) {
    return g.label(a) == g.label(b);
  };

  TreatmentAssignment ta;
  std::unordered_set<std::int64_t> taken;
  const auto key = [n](std::int32_t a, std::int32_t b) {
    return static_cast<std::int64_t>(a) * n + b;
  };

  for (const auto& [a, b] : e.edges()) {
    if (!g.is_labeled(a) || !g.is_labeled(b)) continue;
    ta.pairs.push_back({a, b, static_cast<std::int8_t>(same_label(a, b)), 1});
    taken.insert(key(a, b));
  }

  if (labeled.size() >= 2 && nonedge_samples > 0) {
    Rng rng = make_rng(seed, "treat-nonedge");
    std::uniform_int_distribution<std::size_t> pick(0, labeled.size() - 1);
    for (std::int32_t v : labeled) {
      std::int32_t found = 0;
      // Bounded retries keep dense graphs from spinning forever.
      for (std::int32_t attempt = 0;
           found < nonedge_samples && attempt < nonedge_samples * 20;
           ++attempt) {
        const std::int32_t u = labeled[pick(rng)];
        if (u == v || e.has_edge(v, u)) continue;
        const auto [a, b] = canonical_edge(v, u);
        if (!taken.insert(key(a, b)).second) continue;
        ta.pairs.push_back(
            {a, b, static_cast<std::int8_t>(!same_label(a, b)), 0});
        ++found;
      }
    }
  }

  if (ta.pairs.empty()) {
    throw data_error("assign_treatment: relation has no labeled node pair");
  }
  std::sort(ta.pairs.begin(), ta.pairs.end(),
            [](const PairSample& a, const PairSample& b) {
              return a.i != b.i ? a.i < b.i : a.j < b.j;
            });
  return ta;
}

namespace detail {
// Similarity of two candidate pairs: negated endpoint distances in the
// structural encoding, matched positionally (i with a, j with b).
inline double pair_score(const Matrix& xt, const PairSample& q,
                         const PairSample& c) {
  return -(xt.row(q.i) - xt.row(c.i)).norm() -
         (xt.row(q.j) - xt.row(c.j)).norm();
}
}  // namespace detail

// Exact maximizer of the pair-similarity score over candidates with the
// opposite treatment; score ties resolve to the lowest (a, b) pair, which is
// the first one in the assignment's sorted order.
inline std::size_t find_counterfactual(std::size_t query, const Matrix& xt,
                                       const TreatmentAssignment& ta) {
  if (query >= ta.pairs.size()) {
    throw config_error("find_counterfactual: query index out of range");
  }
  const PairSample& q = ta.pairs[query];
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_index = ta.pairs.size();
  for (std::size_t c = 0; c < ta.pairs.size(); ++c) {
    if (ta.pairs[c].treatment == q.treatment) continue;
    const double score = detail::pair_score(xt, q, ta.pairs[c]);
    if (score > best) {
      best = score;
      best_index = c;
    }
  }
  if (best_index == ta.pairs.size()) {
    throw data_error(
        "find_counterfactual: no candidate with the opposite treatment");
  }
  return best_index;
}

// match_index[k]: candidate index whose outcome serves as pair k's
// counterfactual target.
struct CounterfactualMatch {
  std::vector<std::size_t> match_index;
};

inline CounterfactualMatch match_counterfactuals(
    const Matrix& xt, const TreatmentAssignment& ta) {
  CounterfactualMatch cf;
  cf.match_index.resize(ta.pairs.size());

  // All scores decompose over per-node distances, so a node-distance table
  // makes every query linear in the candidate count. Falls back to direct
  // evaluation (identical arithmetic) when the table would be too large.
  const std::int32_t n = static_cast<std::int32_t>(xt.rows());
  if (n <= 3000) {
    std::vector<char> used(n, 0);
    for (const auto& p : ta.pairs) used[p.i] = used[p.j] = 1;
    Matrix dist = Matrix::Zero(n, n);
    for (std::int32_t a = 0; a < n; ++a) {
      if (!used[a]) continue;
      for (std::int32_t b = 0; b < n; ++b) {
        if (used[b]) dist(a, b) = (xt.row(a) - xt.row(b)).norm();
      }
    }
    for (std::size_t q = 0; q < ta.pairs.size(); ++q) {
      const PairSample& qp = ta.pairs[q];
      double best = -std::numeric_limits<double>::infinity();
      std::size_t best_index = ta.pairs.size();
      for (std::size_t c = 0; c < ta.pairs.size(); ++c) {
        if (ta.pairs[c].treatment == qp.treatment) continue;
        const double score =
            -dist(qp.i, ta.pairs[c].i) - dist(qp.j, ta.pairs[c].j);
        if (score > best) {
          best = score;
          best_index = c;
        }
      }
      if (best_index == ta.pairs.size()) {
        throw data_error(
            "match_counterfactuals: no candidate with the opposite treatment");
      }
      cf.match_index[q] = best_index;
    }
  } else {
    for (std::size_t q = 0; q < ta.pairs.size(); ++q) {
      cf.match_index[q] = find_counterfactual(q, xt, ta);
    }
  }
  return cf;
}

// ---------------------------------------------------------------------------
// Edge classifier: symmetrized pair input (z_i + z_j) || |z_i - z_j| || t,
// one hidden layer, sigmoid output.

struct EdgeClassifierParams {
  Matrix w1;  // [2 d_z + 1, hidden]
  Matrix b1;  // [1, hidden]
  Matrix w2;  // [hidden, 1]
  Matrix b2;  // [1, 1]
};

// Hidden layer gets a variance-preserving draw; the output layer starts at
// zero so the untouched classifier scores every pair exactly one half.
inline EdgeClassifierParams init_edge_classifier(std::int32_t d_z,
                                                 std::int32_t hidden,
                                                 std::uint64_t seed) {
  if (d_z < 1) throw config_error("edge classifier: d_z must be >= 1");
  if (hidden < 1) throw config_error("edge classifier: hidden must be >= 1");
  Rng rng = make_rng(seed, "edge-clf-init");
  EdgeClassifierParams p;
  p.w1 = glorot_uniform(2 * d_z + 1, hidden, rng);
  p.b1 = Matrix::Zero(1, hidden);
  p.w2 = Matrix::Zero(hidden, 1);
  p.b2 = Matrix::Zero(1, 1);
  return p;
}

namespace detail {
inline Eigen::RowVectorXd pair_input(const Matrix& z, std::int32_t i,
                                     std::int32_t j, double t) {
  const Eigen::Index d = z.cols();
  Eigen::RowVectorXd u(2 * d + 1);
  u.head(d) = z.row(i) + z.row(j);
  u.segment(d, d) = (z.row(i) - z.row(j)).cwiseAbs();
  u[2 * d] = t;
  return u;
}
}  // namespace detail

inline double edge_score(const EdgeClassifierParams& p, const Matrix& z,
                         std::int32_t i, std::int32_t j, double t) {
  const Eigen::RowVectorXd u = detail::pair_input(z, i, j, t);
  const Eigen::RowVectorXd h = (u * p.w1 + p.b1).cwiseMax(0.0);
  return sigmoid((h * p.w2)(0, 0) + p.b2(0, 0));
}

// Factual inputs for every candidate pair followed by the counterfactual
// inputs (flipped treatment) in the same order.
inline Matrix edge_training_inputs(const Matrix& z,
                                   const TreatmentAssignment& ta,
                                   const CounterfactualMatch& cf) {
  if (cf.match_index.size() != ta.pairs.size()) {
    throw config_error("edge classifier: counterfactual table size mismatch");
  }
  const std::size_t m = ta.pairs.size();
  Matrix u(2 * m, 2 * z.cols() + 1);
  for (std::size_t k = 0; k < m; ++k) {
    const PairSample& p = ta.pairs[k];
    u.row(static_cast<Eigen::Index>(k)) =
        detail::pair_input(z, p.i, p.j, p.treatment);
    u.row(static_cast<Eigen::Index>(m + k)) =
        detail::pair_input(z, p.i, p.j, 1.0 - p.treatment);
  }
  return u;
}

inline Vector edge_training_targets(const TreatmentAssignment& ta,
                                    const CounterfactualMatch& cf) {
  if (cf.match_index.size() != ta.pairs.size()) {
    throw config_error("edge classifier: counterfactual table size mismatch");
  }
  const std::size_t m = ta.pairs.size();
  Vector y(2 * m);
  for (std::size_t k = 0; k < m; ++k) {
    y[static_cast<Eigen::Index>(k)] = ta.pairs[k].outcome;
    y[static_cast<Eigen::Index>(m + k)] =
        ta.pairs[cf.match_index[k]].outcome;
  }
  return y;
}

// Mean binary cross-entropy of the classifier over prepared inputs.
inline double edge_classifier_loss(const EdgeClassifierParams& p,
                                   const Matrix& u, const Vector& y) {
  if (u.rows() != y.size() || u.rows() == 0) {
    throw config_error("edge classifier: input/target shape mismatch");
  }
  const Matrix h = (u * p.w1).rowwise() + p.b1.row(0);
  const Matrix hr = h.cwiseMax(0.0);
  double loss = 0.0;
  for (Eigen::Index k = 0; k < u.rows(); ++k) {
    const double logit = (hr.row(k) * p.w2)(0, 0) + p.b2(0, 0);
    const double prob =
        std::min(1.0 - 1e-12, std::max(1e-12, sigmoid(logit)));
    loss -= y[k] * std::log(prob) + (1.0 - y[k]) * std::log(1.0 - prob);
  }
  return loss / static_cast<double>(u.rows());
}

struct EdgeTrainConfig {
  std::int32_t hidden = 32;  // h_g
  // The routing signal is an interaction effect (treatment x pair features),
  // which the classifier picks up only after the dominant main effects are
  // fit; the budget below is what that takes on graphs in the 10^3 range.
  std::int32_t epochs = 500;
  double lr = 0.03;
  std::uint64_t seed = 42;
};

// Full-batch training against factual and counterfactual targets, equally
// weighted. Deterministic given the seed.
inline EdgeClassifierParams train_edge_classifier(
    const Matrix& z, const TreatmentAssignment& ta,
    const CounterfactualMatch& cf, const EdgeTrainConfig& cfg) {
  if (cfg.epochs < 1) throw config_error("edge classifier: epochs must be >= 1");
  bool has_pos = false, has_neg = false;
  for (const auto& p : ta.pairs) {
    (p.outcome ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) {
    throw data_error(
        "edge classifier: factual outcomes cover only one class");
  }

  const Matrix u = edge_training_inputs(z, ta, cf);
  const Vector y = edge_training_targets(ta, cf);
  const double m = static_cast<double>(u.rows());

  EdgeClassifierParams p = init_edge_classifier(
      static_cast<std::int32_t>(z.cols()), cfg.hidden, cfg.seed);
  AdamOptimizer opt(cfg.lr);
  opt.register_parameter(&p.w1);
  opt.register_parameter(&p.b1);
  opt.register_parameter(&p.w2);
  opt.register_parameter(&p.b2);

  for (std::int32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const Matrix pre = (u * p.w1).rowwise() + p.b1.row(0);
    const Matrix h = pre.cwiseMax(0.0);
    Vector dlogit(u.rows());
    for (Eigen::Index k = 0; k < u.rows(); ++k) {
      const double logit = (h.row(k) * p.w2)(0, 0) + p.b2(0, 0);
      dlogit[k] = (sigmoid(logit) - y[k]) / m;
    }
    const Matrix dh =
        (dlogit * p.w2.transpose()).cwiseProduct(relu_mask(pre));
    std::vector<Matrix> grads(4);
    grads[0] = u.transpose() * dh;
    grads[1] = dh.colwise().sum();
    grads[2] = h.transpose() * dlogit;
    grads[3] = Matrix::Constant(1, 1, dlogit.sum());
    opt.step(grads);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Routing.

// Routes each observed edge by comparing the classifier's edge probability
// under both treatments; ties go to the homophilic side.
inline std::pair<EdgeSet, EdgeSet> separate_edges(const EdgeSet& e,
                                                  const EdgeClassifierParams& p,
                                                  const Matrix& z) {
  if (z.rows() != e.num_nodes()) {
    throw data_error("separate_edges: embedding rows differ from node count");
  }
  std::vector<Edge> plus, minus;
  for (const auto& [a, b] : e.edges()) {
    const double p_plus = edge_score(p, z, a, b, 1.0);
    const double p_minus = edge_score(p, z, a, b, 0.0);
    (p_plus >= p_minus ? plus : minus).push_back({a, b});
  }
  return {EdgeSet::from_edges(e.num_nodes(), plus),
          EdgeSet::from_edges(e.num_nodes(), minus)};
}

// Ground-truth routing: same-label edges are homophilic. Edges with an
// unlabeled endpoint are rejected, since they have no defined side.
inline EdgeSeparation label_separation(const MultiRelationGraph& g) {
  EdgeSeparation sep;
  for (std::int32_t r = 0; r < g.num_relations(); ++r) {
    std::vector<Edge> plus, minus;
    for (const auto& [a, b] : g.relation(r).edges()) {
      if (!g.is_labeled(a) || !g.is_labeled(b)) {
        throw data_error(
            "label_separation: edge with unlabeled endpoint has no side");
      }
      (g.label(a) == g.label(b) ? plus : minus).push_back({a, b});
    }
    sep.plus.push_back(EdgeSet::from_edges(g.num_nodes(), plus));
    sep.minus.push_back(EdgeSet::from_edges(g.num_nodes(), minus));
  }
  return sep;
}

// Fraction of labeled-endpoint edges of relation r that `sep` routes to the
// side their labels dictate.
inline double routing_agreement(const EdgeSeparation& sep,
                                const MultiRelationGraph& g, std::int32_t r) {
  const EdgeSet& plus = sep.plus.at(r);
  std::int64_t total = 0, agree = 0;
  for (const auto& [a, b] : g.relation(r).edges()) {
    if (!g.is_labeled(a) || !g.is_labeled(b)) continue;
    ++total;
    const bool predicted_homo = plus.has_edge(a, b);
    const bool actual_homo = g.label(a) == g.label(b);
    agree += predicted_homo == actual_homo;
  }
  if (total == 0) {
    throw data_error("routing_agreement: no labeled-endpoint edges");
  }
  return static_cast<double>(agree) / static_cast<double>(total);
}

// ---------------------------------------------------------------------------
// Full separation stage.

struct SeparationConfig {
  std::int32_t k_se = 8;
  std::int32_t d_z = 32;
  std::int32_t h_g = 32;
  std::int32_t nonedge_samples = 5;
  std::int32_t edge_epochs = 500;
  double edge_lr = 0.03;
  std::uint64_t seed = 42;
};

struct SeparationResult {
  EdgeSeparation separation;
  std::vector<EdgeClassifierParams> classifiers;  // per relation
  std::vector<Matrix> embeddings;                 // per relation, [N x d_z]
};

// Column z-scores; constant columns become zero instead of dividing by a
// vanishing spread.
inline Matrix standardize_columns(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  const double n = static_cast<double>(x.rows());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double mean = x.col(c).mean();
    const double var = (x.col(c).array() - mean).square().sum() / n;
    const double sd = std::sqrt(var);
    if (sd < 1e-12) {
      out.col(c).setZero();
    } else {
      out.col(c) = (x.col(c).array() - mean) / sd;
    }
  }
  return out;
}

// Per relation: encode structure, standardize, project to d_z, assign
// treatments, match counterfactuals, train the edge classifier, and route
// every observed edge.
//
// By default the pair embedding is a seeded linear projection of the
// standardized structural encoding. A refinement pass may instead supply one
// externally computed embedding per relation (for example the blocks of an
// already trained node encoder); those are standardized and used in place of
// the projection, while treatment assignment and matching are unchanged.
inline SeparationResult run_separation(
    const MultiRelationGraph& g, const SeparationConfig& cfg,
    const std::vector<Matrix>* node_embeddings = nullptr) {
  if (cfg.d_z < 1) throw config_error("separation: d_z must be >= 1");
  if (node_embeddings &&
      static_cast<std::int32_t>(node_embeddings->size()) != g.num_relations()) {
    throw config_error("separation: got " +
                       std::to_string(node_embeddings->size()) +
                       " embeddings for " + std::to_string(g.num_relations()) +
                       " relations");
  }
  SeparationResult res;
  for (std::int32_t r = 0; r < g.num_relations(); ++r) {
    const Matrix xt =
        standardize_columns(structural_encoding(g, r, cfg.k_se));

    Matrix z;
    if (node_embeddings) {
      const Matrix& e = (*node_embeddings)[r];
      if (e.rows() != g.num_nodes() || e.cols() < 1) {
        throw config_error("separation: embedding for relation " +
                           std::to_string(r) + " is shaped " +
                           std::to_string(e.rows()) + "x" +
                           std::to_string(e.cols()));
      }
      z = standardize_columns(e);
    } else {
      Rng proj_rng = make_rng(cfg.seed, "sep-proj", r);
      const Matrix w_proj = glorot_uniform(xt.cols(), cfg.d_z, proj_rng);
      z = xt * w_proj;
    }

    const TreatmentAssignment ta = assign_treatment(
        g, r, cfg.nonedge_samples, derive_seed(cfg.seed, "sep-nonedge", r));
    const CounterfactualMatch cf = match_counterfactuals(xt, ta);

    EdgeTrainConfig tc;
    tc.hidden = cfg.h_g;
    tc.epochs = cfg.edge_epochs;
    tc.lr = cfg.edge_lr;
    tc.seed = derive_seed(cfg.seed, "sep-train", r);
    EdgeClassifierParams params = train_edge_classifier(z, ta, cf, tc);

    auto [plus, minus] = separate_edges(g.relation(r), params, z);
    res.separation.plus.push_back(std::move(plus));
    res.separation.minus.push_back(std::move(minus));
    res.classifiers.push_back(std::move(params));
    res.embeddings.push_back(z);
  }
  return res;
}

}  // namespace cesgad
