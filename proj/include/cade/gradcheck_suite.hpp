#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cade/grad_check.hpp"

namespace cade {

struct GradCheckEntry {
  std::string name;
  GradCheckResult result;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double worst = 0.0;
  std::string worst_name;
};

// Central-difference checks on tiny frozen instances: every tape op, the
// single-encoder objective through SAGB (mean and max pooling), and the
// multi-aggregating objective with attention. Trees and negatives are fixed
// per instance.
GradCheckReport run_gradcheck_suite(std::uint64_t seed = 7);

}  // namespace cade
