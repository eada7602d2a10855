#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cade/matrix.hpp"

namespace cade {

struct ProbeConfig {
  double learning_rate = 0.01;
  std::size_t epochs = 300;
  double l2 = 0.0;
  std::uint64_t seed = 0;
};

// One-vs-rest logistic regression on standardized inputs.
struct ProbeModel {
  Matrix weight;  // [d x classes]
  Matrix bias;    // [1 x classes]
  Matrix mean;    // [1 x d], training-set statistics
  Matrix scale;   // [1 x d], 1 / stddev (1 for constant columns)

  // Logits [n x classes].
  Matrix logits(const Matrix& x) const;
};

// `targets` holds 0/1 per (row, class). Full-batch Adam on the mean binary
// cross-entropy.
ProbeModel train_probe(const Matrix& x, const Matrix& targets, const ProbeConfig& cfg);

// Argmax class for single-label problems, every class with sigmoid >= 0.5
// for multi-label ones.
std::vector<std::vector<int>> predict_classes(const ProbeModel& probe, const Matrix& x,
                                              bool multi_label);

Matrix gather(const Matrix& m, std::span<const std::uint32_t> rows);

}  // namespace cade
