#pragma once

// Node classification on top of the spectral encoder: stratified splits,
// a two-layer softmax head, full-batch adaptive-moment training with
// best-validation selection, and evaluation metrics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cesgad/error.hpp"
#include "cesgad/filters.hpp"
#include "cesgad/graph.hpp"
#include "cesgad/metrics.hpp"
#include "cesgad/nn.hpp"
#include "cesgad/random.hpp"

namespace cesgad {

// ---------------------------------------------------------------------------
// Splits.

enum class SplitTag : std::int8_t { Train = 0, Val = 1, Test = 2, Excluded = -1 };

struct SplitRatios {
  double train = 0.4;
  double val = 0.2;
  double test = 0.4;
};

struct SplitAssignment {
  std::vector<SplitTag> tag;
  std::uint64_t seed = 0;

  std::vector<std::int32_t> ids(SplitTag want) const {
    std::vector<std::int32_t> out;
    for (std::size_t v = 0; v < tag.size(); ++v) {
      if (tag[v] == want) out.push_back(static_cast<std::int32_t>(v));
    }
    return out;
  }
  std::int64_t count(SplitTag want) const {
    std::int64_t c = 0;
    for (SplitTag t : tag) c += t == want;
    return c;
  }
};

// Stratified seeded split of the labeled nodes. Validation and test sizes
// round down per class; the remainder stays in training. Unlabeled nodes are
// excluded.
inline SplitAssignment split_nodes(const MultiRelationGraph& g,
                                   SplitRatios ratios, std::uint64_t seed) {
  if (!(ratios.train > 0.0) || !(ratios.val > 0.0) || !(ratios.test > 0.0)) {
    throw config_error("split: every ratio must be positive");
  }
  if (std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw config_error("split: ratios must sum to 1");
  }

  SplitAssignment split;
  split.seed = seed;
  split.tag.assign(g.num_nodes(), SplitTag::Excluded);

  for (int cls = 0; cls <= 1; ++cls) {
    std::vector<std::int32_t> members;
    for (std::int32_t v = 0; v < g.num_nodes(); ++v) {
      if (g.is_labeled(v) &&
          g.label(v) == (cls ? Label::Anomalous : Label::Normal)) {
        members.push_back(v);
      }
    }
    if (members.size() < 5) {
      throw data_error("split: class " + std::to_string(cls) + " has only " +
                       std::to_string(members.size()) +
                       " labeled nodes, needs at least 5");
    }
    Rng rng = make_rng(seed, "split", static_cast<std::uint64_t>(cls));
    std::shuffle(members.begin(), members.end(), rng);
    const auto n = members.size();
    const std::size_t n_val =
        static_cast<std::size_t>(ratios.val * static_cast<double>(n));
    const std::size_t n_test =
        static_cast<std::size_t>(ratios.test * static_cast<double>(n));
    for (std::size_t k = 0; k < n; ++k) {
      split.tag[members[k]] = k < n_val            ? SplitTag::Val
                              : k < n_val + n_test ? SplitTag::Test
                                                   : SplitTag::Train;
    }
  }
  return split;
}

// ---------------------------------------------------------------------------
// Loss.

// Binary cross-entropy summed over the given anomaly probabilities, with a
// 1e-12 clamp before the logarithms.
inline double cross_entropy_loss(const Vector& probabilities,
                                 const std::vector<int>& labels) {
  if (probabilities.size() == 0) {
    throw data_error("cross_entropy: no training nodes");
  }
  if (static_cast<std::size_t>(probabilities.size()) != labels.size()) {
    throw data_error("cross_entropy: probability/label length mismatch");
  }
  double loss = 0.0;
  for (Eigen::Index k = 0; k < probabilities.size(); ++k) {
    const double p =
        std::min(1.0 - 1e-12, std::max(1e-12, probabilities[k]));
    loss -= labels[k] == 1 ? std::log(p) : std::log(1.0 - p);
  }
  return loss;
}

// ---------------------------------------------------------------------------
// Classification head.

struct ClassifierHead {
  Matrix w1;  // [in_dim, hidden]
  Matrix b1;  // [1, hidden]
  Matrix w2;  // [hidden, 2]
  Matrix b2;  // [1, 2]
};

// Hidden layer Glorot; output layer zero, so an untrained head predicts the
// uniform distribution for every node.
inline ClassifierHead init_head(std::int32_t in_dim, std::int32_t hidden,
                                std::uint64_t seed) {
  if (in_dim < 1) throw config_error("head: input width must be >= 1");
  if (hidden < 1) throw config_error("head: hidden width must be >= 1");
  Rng rng = make_rng(seed, "head-init");
  ClassifierHead head;
  head.w1 = glorot_uniform(in_dim, hidden, rng);
  head.b1 = Matrix::Zero(1, hidden);
  head.w2 = Matrix::Zero(hidden, 2);
  head.b2 = Matrix::Zero(1, 2);
  return head;
}

struct ModelCaches {
  HybridCache encoder;
  Matrix head_in;
  Matrix pre1;
  Matrix h1;
};

// For the ablated model every observed edge feeds the smoothing branch and
// the sharpening branch disappears.
inline EdgeSeparation effective_separation(const MultiRelationGraph& g,
                                           const EdgeSeparation& sep,
                                           bool use_highpass) {
  if (use_highpass) return sep;
  EdgeSeparation full;
  for (std::int32_t r = 0; r < g.num_relations(); ++r) {
    full.plus.push_back(g.relation(r));
  }
  return full;
}

inline Matrix model_logits(const Matrix& x, const EdgeSeparation& sep,
                           const HybridModelParams& encoder,
                           const ClassifierHead& head, bool residual,
                           ModelCaches* caches = nullptr) {
  const Matrix z =
      hybrid_forward(x, sep, encoder, caches ? &caches->encoder : nullptr);
  Matrix h_in(x.rows(), z.cols() + (residual ? x.cols() : 0));
  h_in.leftCols(z.cols()) = z;
  if (residual) h_in.rightCols(x.cols()) = x;
  if (head.w1.rows() != h_in.cols()) {
    throw config_error("head: input width " + std::to_string(h_in.cols()) +
                       " does not match weights (" +
                       std::to_string(head.w1.rows()) + ")");
  }
  const Matrix pre1 = (h_in * head.w1).rowwise() + head.b1.row(0);
  const Matrix h1 = pre1.cwiseMax(0.0);
  Matrix logits = (h1 * head.w2).rowwise() + head.b2.row(0);
  if (caches) {
    caches->head_in = h_in;
    caches->pre1 = pre1;
    caches->h1 = h1;
  }
  return logits;
}

struct ModelGrads {
  HybridGrads encoder;
  Matrix head_w1, head_b1, head_w2, head_b2;
};

inline ModelGrads model_backward(const Matrix& d_logits, const Matrix& x,
                                 const EdgeSeparation& sep,
                                 const HybridModelParams& encoder,
                                 const ClassifierHead& head, bool residual,
                                 const ModelCaches& caches) {
  ModelGrads grads;
  grads.head_w2 = caches.h1.transpose() * d_logits;
  grads.head_b2 = d_logits.colwise().sum();
  const Matrix dh1 =
      (d_logits * head.w2.transpose()).cwiseProduct(relu_mask(caches.pre1));
  grads.head_w1 = caches.head_in.transpose() * dh1;
  grads.head_b1 = dh1.colwise().sum();
  const Matrix dh_in = dh1 * head.w1.transpose();
  const Matrix dz = dh_in.leftCols(dh_in.cols() -
                                   (residual ? x.cols() : 0));
  grads.encoder = hybrid_backward(dz, x, sep, encoder, caches.encoder);
  return grads;
}

// ---------------------------------------------------------------------------
// Training.

struct TrainConfig {
  std::int32_t layers = 2;
  std::int32_t hidden = 64;
  std::int32_t head_hidden = 64;
  double hp_alpha = 1.0;
  double lr = 0.01;
  double weight_decay = 5e-4;
  std::int32_t epochs = 200;
  bool residual_features = true;
  bool use_highpass = true;
  bool class_weight = false;
  std::uint64_t seed = 42;
};

struct LossCurvePoint {
  std::int32_t epoch = 0;
  double train_loss = 0.0;
  double val_f1 = 0.0;
};

struct TrainedModel {
  HybridModelParams encoder;
  ClassifierHead head;
  bool residual = true;
  bool use_highpass = true;
  std::vector<LossCurvePoint> curve;
  std::int32_t best_epoch = 0;
  double best_val_f1 = 0.0;
};

namespace detail {
inline std::vector<int> subset_labels(const MultiRelationGraph& g,
                                      const std::vector<std::int32_t>& ids) {
  std::vector<int> y;
  y.reserve(ids.size());
  for (std::int32_t v : ids) {
    y.push_back(g.label(v) == Label::Anomalous ? 1 : 0);
  }
  return y;
}

inline std::vector<int> argmax_predictions(const Matrix& logits,
                                           const std::vector<std::int32_t>& ids) {
  std::vector<int> preds;
  preds.reserve(ids.size());
  for (std::int32_t v : ids) {
    preds.push_back(logits(v, 1) > logits(v, 0) ? 1 : 0);
  }
  return preds;
}
}  // namespace detail

// Full-batch training. The recorded curve holds epochs+1 rows: row e
// describes the parameters entering epoch e (so row 0 is the untouched
// model), and the final row the parameters after the last update. The
// returned model carries the snapshot with the best validation F1
// (earliest epoch on ties).
inline TrainedModel train_model(const MultiRelationGraph& g,
                                const EdgeSeparation& sep,
                                const TrainConfig& cfg,
                                const SplitAssignment& split) {
  if (cfg.epochs < 1) throw config_error("train: epochs must be >= 1");
  if (!(cfg.weight_decay >= 0.0)) {
    throw config_error("train: weight decay must be >= 0");
  }
  if (g.feature_dim() < 1) {
    throw data_error("train: graph has no feature columns");
  }

  const EdgeSeparation eff = effective_separation(g, sep, cfg.use_highpass);
  const std::vector<std::int32_t> train_ids = split.ids(SplitTag::Train);
  const std::vector<std::int32_t> val_ids = split.ids(SplitTag::Val);
  if (train_ids.empty()) throw data_error("train: empty training split");
  const std::vector<int> train_y = detail::subset_labels(g, train_ids);
  const std::vector<int> val_y = detail::subset_labels(g, val_ids);
  if (std::count(train_y.begin(), train_y.end(), 1) == 0 ||
      std::count(train_y.begin(), train_y.end(), 0) == 0) {
    throw data_error("train: training split lacks one of the classes");
  }

  // Optional inverse-frequency weighting of the per-node loss terms.
  std::vector<double> node_weight(train_ids.size(), 1.0);
  if (cfg.class_weight) {
    const double n_pos =
        static_cast<double>(std::count(train_y.begin(), train_y.end(), 1));
    const double n_neg = static_cast<double>(train_y.size()) - n_pos;
    const double total = static_cast<double>(train_y.size());
    for (std::size_t k = 0; k < train_ids.size(); ++k) {
      node_weight[k] = train_y[k] == 1 ? total / (2.0 * n_pos)
                                       : total / (2.0 * n_neg);
    }
  }

  TrainedModel model;
  model.residual = cfg.residual_features;
  model.use_highpass = cfg.use_highpass;
  model.encoder = init_hybrid_params(
      g.num_relations(), g.feature_dim(), cfg.layers, cfg.hidden,
      cfg.hp_alpha, cfg.use_highpass, derive_seed(cfg.seed, "encoder"));
  model.head = init_head(
      model.encoder.embedding_dim() +
          (cfg.residual_features ? g.feature_dim() : 0),
      cfg.head_hidden, derive_seed(cfg.seed, "head"));

  AdamOptimizer opt(cfg.lr);
  for (Matrix* w : parameter_list(model.encoder)) {
    opt.register_parameter(w, cfg.weight_decay);
  }
  opt.register_parameter(&model.head.w1, cfg.weight_decay);
  opt.register_parameter(&model.head.b1);
  opt.register_parameter(&model.head.w2, cfg.weight_decay);
  opt.register_parameter(&model.head.b2);

  HybridModelParams best_encoder = model.encoder;
  ClassifierHead best_head = model.head;
  double best_f1 = -1.0;
  std::int32_t best_epoch = 0;

  for (std::int32_t epoch = 0; epoch <= cfg.epochs; ++epoch) {
    ModelCaches caches;
    const Matrix logits = model_logits(g.features(), eff, model.encoder,
                                       model.head, cfg.residual_features,
                                       &caches);
    const Matrix probs = softmax_rows(logits);

    Vector train_p(train_ids.size());
    for (std::size_t k = 0; k < train_ids.size(); ++k) {
      train_p[static_cast<Eigen::Index>(k)] = probs(train_ids[k], 1);
    }
    double loss = 0.0;
    for (std::size_t k = 0; k < train_ids.size(); ++k) {
      const double p = std::min(1.0 - 1e-12,
                                std::max(1e-12, train_p[static_cast<Eigen::Index>(k)]));
      loss -= node_weight[k] *
              (train_y[k] == 1 ? std::log(p) : std::log(1.0 - p));
    }

    double val_f1 = 0.0;
    if (!val_ids.empty()) {
      val_f1 = f1_macro(detail::argmax_predictions(logits, val_ids), val_y);
    }
    model.curve.push_back({epoch, loss, val_f1});

    if (val_f1 > best_f1) {
      best_f1 = val_f1;
      best_epoch = epoch;
      best_encoder = model.encoder;
      best_head = model.head;
    }

    if (epoch == cfg.epochs) break;

    Matrix d_logits = Matrix::Zero(logits.rows(), 2);
    for (std::size_t k = 0; k < train_ids.size(); ++k) {
      const std::int32_t v = train_ids[k];
      d_logits(v, 0) = node_weight[k] * (probs(v, 0) - (train_y[k] == 0));
      d_logits(v, 1) = node_weight[k] * (probs(v, 1) - (train_y[k] == 1));
    }
    ModelGrads grads =
        model_backward(d_logits, g.features(), eff, model.encoder, model.head,
                       cfg.residual_features, caches);
    std::vector<Matrix> flat = flatten_grads(grads.encoder);
    flat.push_back(std::move(grads.head_w1));
    flat.push_back(std::move(grads.head_b1));
    flat.push_back(std::move(grads.head_w2));
    flat.push_back(std::move(grads.head_b2));
    opt.step(flat);
  }

  model.encoder = std::move(best_encoder);
  model.head = std::move(best_head);
  model.best_epoch = best_epoch;
  model.best_val_f1 = best_f1;
  return model;
}

// ---------------------------------------------------------------------------
// Evaluation.

struct EvalReport {
  double f1 = 0.0;
  double auc_score = 0.0;
  ConfusionCounts confusion;
  std::int64_t evaluated = 0;
};

// Anomaly probabilities for every node under the trained model.
inline Vector model_scores(const MultiRelationGraph& g,
                           const EdgeSeparation& sep,
                           const TrainedModel& model) {
  const EdgeSeparation eff =
      effective_separation(g, sep, model.use_highpass);
  const Matrix logits = model_logits(g.features(), eff, model.encoder,
                                     model.head, model.residual);
  const Matrix probs = softmax_rows(logits);
  return probs.col(1);
}

inline EvalReport evaluate_model(const MultiRelationGraph& g,
                                 const EdgeSeparation& sep,
                                 const TrainedModel& model,
                                 const SplitAssignment& split, SplitTag tag) {
  const std::vector<std::int32_t> ids = split.ids(tag);
  if (ids.empty()) throw data_error("evaluate: empty node subset");
  const Vector scores = model_scores(g, sep, model);

  std::vector<int> y = detail::subset_labels(g, ids);
  std::vector<int> preds;
  std::vector<double> s;
  preds.reserve(ids.size());
  s.reserve(ids.size());
  for (std::int32_t v : ids) {
    preds.push_back(scores[v] > 0.5 ? 1 : 0);
    s.push_back(scores[v]);
  }

  EvalReport report;
  report.f1 = f1_macro(preds, y);
  report.auc_score = auc(s, y);
  report.confusion = confusion_counts(preds, y);
  report.evaluated = static_cast<std::int64_t>(ids.size());
  return report;
}

}  // namespace cesgad
