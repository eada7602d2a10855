// Straight-line reference computations for tests. Nothing here goes through
// the tape or the batched encoder; the tree is walked through parent links.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "cade/model.hpp"

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

inline Mat to_mat(const cade::Matrix& m) {
  Mat out(m.rows(), Vec(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
  return out;
}

inline double act(double x, cade::Activation a) {
  switch (a) {
    case cade::Activation::kRelu: return x > 0.0 ? x : 0.0;
    case cade::Activation::kSigmoid: return 1.0 / (1.0 + std::exp(-x));
    case cade::Activation::kIdentity: return x;
  }
  return x;
}

// x (row) times M
inline Vec vec_mat(const Vec& x, const Mat& M) {
  Vec y(M.empty() ? 0 : M[0].size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) y[j] += x[i] * M[i][j];
  return y;
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct Sagb {
  const cade::EncoderConfig& cfg;
  const cade::EncoderWeights& w;
  const cade::GlobalBias* bias;
  const cade::Graph& g;
  const cade::NeighborhoodTree& tree;

  // Representation of the i-th node at depth t after `layer` layers.
  Vec h(std::size_t layer, std::size_t t, std::size_t i) const {
    const cade::NodeId id = tree.layers[t][i].id;
    if (layer == 0) {
      const auto row = g.features().row(id);
      return Vec(row.begin(), row.end());
    }
    const auto& lw = w.layers[layer - 1];
    Vec self = h(layer - 1, t, i);
    Mat kids;
    for (std::size_t j = 0; j < tree.layers[t + 1].size(); ++j)
      if (tree.layers[t + 1][j].parent == static_cast<std::int32_t>(i)) kids.push_back(h(layer - 1, t + 1, j));
    Vec agg(self.size(), 0.0);
    if (cfg.aggregator == cade::Aggregator::kMean) {
      for (const Vec& k : kids)
        for (std::size_t c = 0; c < agg.size(); ++c) agg[c] += k[c] / static_cast<double>(kids.size());
    } else {
      const Mat P = to_mat(lw.pool_weight.value());
      const auto pb = lw.pool_bias.value();
      for (std::size_t n = 0; n < kids.size(); ++n) {
        Vec z = vec_mat(kids[n], P);
        for (std::size_t c = 0; c < z.size(); ++c) {
          z[c] = act(z[c] + pb[c], cfg.pool_activation);
          agg[c] = n == 0 ? z[c] : std::max(agg[c], z[c]);
        }
      }
    }
    Vec cat = self;
    cat.insert(cat.end(), agg.begin(), agg.end());
    Vec out = vec_mat(cat, to_mat(lw.weight.value()));
    for (double& x : out) x = act(x, layer < cfg.depth() ? cfg.activation : cfg.output_activation);
    if (layer < cfg.depth() && bias && bias->row(id) >= 0) {
      const auto b = bias->table.value().row(static_cast<std::size_t>(bias->row(id)));
      for (std::size_t c = 0; c < out.size(); ++c) out[c] += b[c];
    }
    return out;
  }

  Vec embed() const {
    Vec z = h(cfg.depth(), 0, 0);
    if (cfg.normalize_output) {
      const double n = std::sqrt(dot(z, z));
      for (double& x : z) x /= std::max(n, 1e-12);
    }
    return z;
  }
};

inline Vec sagb(const cade::EncoderConfig& cfg, const cade::EncoderWeights& w,
                const cade::GlobalBias* bias, const cade::Graph& g, const cade::NeighborhoodTree& t) {
  return Sagb{cfg, w, bias, g, t}.embed();
}

struct Fused {
  Mat S;
  Vec a_v, a_vp, z_v, z_vp;
};

// attention empty -> dot-product similarity
inline Fused fuse(const Mat& Hv, const Mat& Hvp, const Vec& attention = {}) {
  const std::size_t K = Hv.size();
  const std::size_t d = Hv[0].size();
  Fused f;
  f.S.assign(K, Vec(K, 0.0));
  double mx = -INFINITY;
  for (std::size_t i = 0; i < K; ++i) {
    for (std::size_t j = 0; j < K; ++j) {
      double s = 0.0;
      if (attention.empty()) {
        s = dot(Hv[i], Hvp[j]);
      } else {
        for (std::size_t c = 0; c < d; ++c) s += attention[c] * Hv[i][c] + attention[d + c] * Hvp[j][c];
      }
      f.S[i][j] = s;
      mx = std::max(mx, s);
    }
  }
  double total = 0.0;
  for (auto& row : f.S)
    for (double& s : row) total += (s = std::exp(s - mx));
  for (auto& row : f.S)
    for (double& s : row) s /= total;
  f.a_v.assign(K, 0.0);
  f.a_vp.assign(K, 0.0);
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = 0; j < K; ++j) {
      f.a_v[i] += f.S[i][j];
      f.a_vp[j] += f.S[i][j];
    }
  f.z_v.assign(d, 0.0);
  f.z_vp.assign(d, 0.0);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t c = 0; c < d; ++c) {
      f.z_v[c] += f.a_v[k] * Hv[k][c];
      f.z_vp[c] += f.a_vp[k] * Hvp[k][c];
    }
  return f;
}

inline double log_sigmoid(double x) { return -std::log1p(std::exp(-x)); }

inline double loss_ms(const Vec& zv, const Vec& zvp, const Mat& negs) {
  double l = -log_sigmoid(dot(zv, zvp));
  for (const Vec& n : negs) l -= log_sigmoid(-dot(zv, n));
  return l;
}

}  // namespace oracle
