#include "cade/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "cade/error.hpp"

namespace cade {

Counts pooled_counts(std::span<const std::vector<int>> predicted,
                     std::span<const std::vector<int>> truth) {
  if (predicted.size() != truth.size()) {
    throw ShapeError("micro_f1: " + std::to_string(predicted.size()) + " predictions for " +
                     std::to_string(truth.size()) + " nodes");
  }
  Counts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    std::vector<int> p(predicted[i].begin(), predicted[i].end());
    std::vector<int> t(truth[i].begin(), truth[i].end());
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    std::vector<int> both;
    std::set_intersection(p.begin(), p.end(), t.begin(), t.end(), std::back_inserter(both));
    c.tp += both.size();
    c.fp += p.size() - both.size();
    c.fn += t.size() - both.size();
  }
  return c;
}

double f1_from_counts(const Counts& c) {
  const double denom = 2.0 * static_cast<double>(c.tp) + static_cast<double>(c.fp + c.fn);
  return denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(c.tp) / denom;
}

double micro_f1(std::span<const std::vector<int>> predicted, std::span<const std::vector<int>> truth) {
  return f1_from_counts(pooled_counts(predicted, truth));
}

namespace {

std::vector<std::size_t> order_by_score(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ShapeError("scores and labels differ in length");
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  return idx;
}

void require_both_classes(std::size_t pos, std::size_t neg) {
  if (pos == 0 || neg == 0) throw ConfigError("ranking metric needs positive and negative items");
}

}  // namespace

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  const auto idx = order_by_score(scores, labels);
  std::size_t pos = 0;
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (labels[idx[k]]) {
        rank_sum += mid_rank;
        ++pos;
      }
    }
    i = j;
  }
  const std::size_t neg = idx.size() - pos;
  require_both_classes(pos, neg);
  const double p = static_cast<double>(pos);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

double average_precision(std::span<const double> scores, std::span<const int> labels) {
  auto idx = order_by_score(scores, labels);
  std::reverse(idx.begin(), idx.end());
  std::size_t total_pos = 0;
  for (int l : labels) total_pos += l ? 1 : 0;
  require_both_classes(total_pos, labels.size() - total_pos);
  double ap = 0.0, prev_recall = 0.0;
  std::size_t tp = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      tp += labels[idx[j]] ? 1 : 0;
      ++j;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(j);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

}  // namespace cade
