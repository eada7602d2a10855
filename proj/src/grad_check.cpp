#include "cade/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cade {

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

namespace {

double evaluate(const LossBuilder& loss) {
  ad::Tape tape;
  return loss(tape).scalar();
}

}  // namespace

GradCheckResult grad_check(const LossBuilder& loss, std::span<ad::Parameter* const> params,
                           const GradCheckOptions& options) {
  for (ad::Parameter* p : params) p->zero_grad();
  {
    ad::Tape tape;
    ad::Value l = loss(tape);
    tape.backward(l);
  }
  std::vector<Matrix> analytic;
  for (ad::Parameter* p : params) analytic.push_back(p->grad());
  for (ad::Parameter* p : params) p->zero_grad();

  GradCheckResult result;
  result.max_rel_error = -1.0;
  const double eps = options.epsilon;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Matrix& value = params[k]->value();
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value[i];
      value[i] = saved + eps;
      const double plus = evaluate(loss);
      value[i] = saved - eps;
      const double minus = evaluate(loss);
      value[i] = saved;
      const double numeric = (plus - minus) / (2.0 * eps);
      const double err = relative_error(analytic[k][i], numeric, options.denominator_floor);
      ++result.coordinates;
      if (err > result.max_rel_error || std::isnan(err)) {
        result.max_rel_error = std::isnan(err) ? std::numeric_limits<double>::infinity() : err;
        result.parameter = params[k]->name();
        result.row = i / std::max<std::size_t>(1, value.cols());
        result.col = i % std::max<std::size_t>(1, value.cols());
        result.analytic = analytic[k][i];
        result.numeric = numeric;
      }
    }
  }
  if (result.max_rel_error < 0) result.max_rel_error = 0.0;
  return result;
}

Matrix numeric_gradient(const std::function<double()>& f, Matrix& x, double epsilon) {
  Matrix g(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + epsilon;
    const double plus = f();
    x[i] = saved - epsilon;
    const double minus = f();
    x[i] = saved;
    g[i] = (plus - minus) / (2.0 * epsilon);
  }
  return g;
}

}  // namespace cade
