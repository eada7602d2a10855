#include "cade/probe.hpp"

#include <cmath>

#include "cade/error.hpp"
#include "cade/training.hpp"

namespace cade {

namespace {

Matrix standardize(const Matrix& x, const Matrix& mean, const Matrix& scale) {
  Matrix out = x;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) = (out(r, c) - mean[c]) * scale[c];
  return out;
}

}  // namespace

Matrix ProbeModel::logits(const Matrix& x) const {
  if (x.cols() != weight.rows()) {
    throw ShapeError("probe expects " + std::to_string(weight.rows()) + " columns, got " +
                     std::to_string(x.cols()));
  }
  Matrix s = matmul(standardize(x, mean, scale), weight);
  for (std::size_t r = 0; r < s.rows(); ++r)
    for (std::size_t c = 0; c < s.cols(); ++c) s(r, c) += bias[c];
  return s;
}

ProbeModel train_probe(const Matrix& x, const Matrix& targets, const ProbeConfig& cfg) {
  if (x.rows() == 0) throw DataError("probe has no training rows");
  if (targets.rows() != x.rows()) throw ShapeError("probe targets do not match inputs");
  const std::size_t n = x.rows(), d = x.cols(), k = targets.cols();

  ProbeModel p;
  p.mean = Matrix(1, d);
  p.scale = Matrix(1, d);
  for (std::size_t c = 0; c < d; ++c) {
    double m = 0.0;
    for (std::size_t r = 0; r < n; ++r) m += x(r, c);
    m /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t r = 0; r < n; ++r) var += (x(r, c) - m) * (x(r, c) - m);
    var /= static_cast<double>(n);
    p.mean[c] = m;
    p.scale[c] = var > 1e-24 ? 1.0 / std::sqrt(var) : 1.0;
  }
  const Matrix xs = standardize(x, p.mean, p.scale);
  Matrix negated(n, k);
  for (std::size_t i = 0; i < targets.size(); ++i) negated[i] = 1.0 - targets[i];

  Rng rng = substream(cfg.seed, "probe");
  Matrix w0(d, k);
  for (double& w : w0.values()) w = 0.01 * rng.normal();
  ad::Parameter w("probe.W", std::move(w0));
  ad::Parameter b("probe.b", Matrix(1, k));
  Adam adam({&w, &b}, {cfg.learning_rate});
  const double inv = 1.0 / static_cast<double>(n * k);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    w.zero_grad();
    b.zero_grad();
    ad::Tape tape;
    ad::Value s = ad::add(ad::matmul(tape.constant(xs), tape.parameter(w)), tape.parameter(b));
    ad::Value pos = ad::sum(ad::elementwise_mul(tape.constant(targets), ad::log_sigmoid(s)));
    ad::Value neg = ad::sum(ad::elementwise_mul(tape.constant(negated),
                                                ad::log_sigmoid(ad::scale(s, -1.0))));
    ad::Value loss = ad::scale(ad::add(pos, neg), -inv);
    if (cfg.l2 > 0.0) {
      ad::Value wv = tape.parameter(w);
      loss = ad::add(loss, ad::scale(ad::dot(wv, wv), 0.5 * cfg.l2));
    }
    tape.backward(loss);
    adam.step();
  }
  p.weight = w.value();
  p.bias = b.value();
  return p;
}

std::vector<std::vector<int>> predict_classes(const ProbeModel& probe, const Matrix& x,
                                              bool multi_label) {
  const Matrix s = probe.logits(x);
  std::vector<std::vector<int>> out(s.rows());
  for (std::size_t r = 0; r < s.rows(); ++r) {
    if (multi_label) {
      for (std::size_t c = 0; c < s.cols(); ++c)
        if (s(r, c) >= 0.0) out[r].push_back(static_cast<int>(c));  // sigmoid >= 0.5
    } else {
      std::size_t best = 0;
      for (std::size_t c = 1; c < s.cols(); ++c)
        if (s(r, c) > s(r, best)) best = c;
      out[r].push_back(static_cast<int>(best));
    }
  }
  return out;
}

Matrix gather(const Matrix& m, std::span<const std::uint32_t> rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= m.rows()) throw ShapeError("row " + std::to_string(rows[i]) + " out of range");
    const auto src = m.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace cade
