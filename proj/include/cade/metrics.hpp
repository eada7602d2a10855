#pragma once

#include <span>
#include <vector>

namespace cade {

struct Counts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

// Micro-averaged F1 from per-node predicted and true class sets, pooling
// TP/FP/FN over all classes. Returns 0 when nothing is predicted or true.
double micro_f1(std::span<const std::vector<int>> predicted, std::span<const std::vector<int>> truth);
Counts pooled_counts(std::span<const std::vector<int>> predicted,
                     std::span<const std::vector<int>> truth);
double f1_from_counts(const Counts& c);

// Area under the ROC curve from the Mann-Whitney rank statistic; ties count
// one half. Throws ConfigError without at least one positive and negative.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

// Average precision: sum over distinct score thresholds of
// (recall_k - recall_{k-1}) * precision_k, tied scores grouped.
double average_precision(std::span<const double> scores, std::span<const int> labels);

}  // namespace cade
