#pragma once

#include <functional>
#include <span>
#include <string>

#include "cade/autodiff.hpp"

namespace cade {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string parameter;  // location of the worst coordinate
  std::size_t row = 0;
  std::size_t col = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t coordinates = 0;
};

// Builds the scalar loss on a fresh tape from the current parameter values.
// Must be deterministic (all sampling frozen).
using LossBuilder = std::function<ad::Value(ad::Tape&)>;

struct GradCheckOptions {
  double epsilon = 1e-5;
  // Relative error is |a - n| / max(|a|, |n|, denominator_floor), so
  // gradients far below the floor are compared in absolute terms.
  double denominator_floor = 1e-4;
};

double relative_error(double analytic, double numeric, double floor);

// Central differences (f(p+e) - f(p-e)) / 2e for every coordinate of every
// parameter, against the tape's analytic gradient. Parameter gradients are
// left zeroed on return.
GradCheckResult grad_check(const LossBuilder& loss, std::span<ad::Parameter* const> params,
                           const GradCheckOptions& options = {});

// Central-difference gradient of a scalar function of one matrix.
Matrix numeric_gradient(const std::function<double()>& f, Matrix& x, double epsilon = 1e-5);

}  // namespace cade
