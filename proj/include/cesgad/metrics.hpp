#pragma once

// Binary classification metrics: macro-averaged F1 and ranking AUC.
//
// Both are written so that results on integer-valued confusion counts are
// exactly reproducible: every intermediate is either an integer or a
// half-integer below 2^52, so the final divisions are the only roundings.

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "cesgad/error.hpp"

namespace cesgad {

// counts[actual][predicted], classes 0 (normal) and 1 (anomalous).
struct ConfusionCounts {
  std::array<std::array<std::int64_t, 2>, 2> counts{{{0, 0}, {0, 0}}};

  std::int64_t total() const {
    return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
  }
};

inline ConfusionCounts confusion_counts(const std::vector<int>& predictions,
                                        const std::vector<int>& labels) {
  if (predictions.size() != labels.size()) {
    throw data_error("confusion: predictions and labels differ in length (" +
                     std::to_string(predictions.size()) + " vs " +
                     std::to_string(labels.size()) + ")");
  }
  ConfusionCounts cc;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int p = predictions[i];
    const int y = labels[i];
    if ((p != 0 && p != 1) || (y != 0 && y != 1)) {
      throw data_error("confusion: entries must be 0 or 1");
    }
    ++cc.counts[y][p];
  }
  return cc;
}

// Unweighted mean of the per-class F1 scores over {0, 1}. A class whose
// F1 denominator (2TP + FP + FN) is empty contributes 0.
inline double f1_macro(const std::vector<int>& predictions,
                       const std::vector<int>& labels) {
  if (labels.empty()) throw data_error("f1_macro: empty input");
  const ConfusionCounts cc = confusion_counts(predictions, labels);
  double sum = 0.0;
  for (int cls : {0, 1}) {
    const std::int64_t tp = cc.counts[cls][cls];
    const std::int64_t fp = cc.counts[1 - cls][cls];
    const std::int64_t fn = cc.counts[cls][1 - cls];
    const std::int64_t denom = 2 * tp + fp + fn;
    sum += denom == 0
               ? 0.0
               : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
  }
  return sum / 2.0;
}

// Ranking AUC: the probability that a uniformly random positive outranks a
// uniformly random negative, ties credited one half. Computed through the
// rank-sum identity with midranks for tied blocks, which equals pairwise
// counting exactly (every rank is a half-integer, so no rounding occurs
// before the final division).
inline double auc(const std::vector<double>& scores,
                  const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw data_error("auc: scores and labels differ in length (" +
                     std::to_string(scores.size()) + " vs " +
                     std::to_string(labels.size()) + ")");
  }
  std::int64_t pos = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw data_error("auc: labels must be 0 or 1");
    }
    pos += labels[i];
  }
  const std::int64_t neg = static_cast<std::int64_t>(labels.size()) - pos;
  if (pos == 0 || neg == 0) {
    throw data_error("auc: needs at least one positive and one negative");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  // Walk tied blocks; every index in a block receives the block midrank.
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) {
      ++j;
    }
    // Ranks are 1-based: block spans ranks i+1 .. j+1.
    const double midrank = 0.5 * static_cast<double>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] == 1) pos_rank_sum += midrank;
    }
    i = j + 1;
  }

  const double above_expected =
      pos_rank_sum -
      static_cast<double>(pos) * static_cast<double>(pos + 1) / 2.0;
  return above_expected / (static_cast<double>(pos) * static_cast<double>(neg));
}

}  // namespace cesgad
