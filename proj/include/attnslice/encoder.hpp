// Copyright 2026 The attnslice Authors
// SPDX-License-Identifier: Apache-2.0
//
// Bidirectional GRU encoder with additive contextual attention and a sigmoid
// read-out, plus hand-derived reverse-mode gradients. Everything runs in
// double precision so gradients can be checked against finite differences.

#ifndef ATTNSLICE_ENCODER_HPP
#define ATTNSLICE_ENCODER_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "attnslice/common.hpp"
#include "attnslice/matrix.hpp"
#include "attnslice/rng.hpp"

namespace attnslice {

/// Gate parameters for one scan direction. W_* act on the input frame,
/// U_* on the previous hidden state.
struct GruDirParams {
  Matrix wz, uz;
  Vec bz;
  Matrix wr, ur;
  Vec br;
  Matrix wh, uh;
  Vec bh;
};

struct EncoderParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::size_t attn_dim = 0;

  GruDirParams fwd, bwd;
  Matrix wa;  // attn_dim x 2*hidden_dim
  Vec ba;     // attn_dim
  Vec ua;     // attn_dim, the learned context vector
  Vec wo;     // 2*hidden_dim
  Vec bo;     // single element

  /// Every learnable vector in a fixed traversal order; optimizer state and
  /// serialization rely on this order being stable.
  std::vector<Vec*> flat() {
    std::vector<Vec*> out;
    for (GruDirParams* d : {&fwd, &bwd}) {
      out.push_back(&d->wz.a);
      out.push_back(&d->uz.a);
      out.push_back(&d->bz);
      out.push_back(&d->wr.a);
      out.push_back(&d->ur.a);
      out.push_back(&d->br);
      out.push_back(&d->wh.a);
      out.push_back(&d->uh.a);
      out.push_back(&d->bh);
    }
    out.push_back(&wa.a);
    out.push_back(&ba);
    out.push_back(&ua);
    out.push_back(&wo);
    out.push_back(&bo);
    return out;
  }

  std::vector<const Vec*> flat() const {
    auto vecs = const_cast<EncoderParams*>(this)->flat();
    return {vecs.begin(), vecs.end()};
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const Vec* v : flat()) n += v->size();
    return n;
  }

  void fill(double value) {
    for (Vec* v : flat()) std::fill(v->begin(), v->end(), value);
  }
};

namespace detail {

inline Matrix glorot(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (double& v : m.a) v = rng.uniform(-limit, limit);
  return m;
}

inline GruDirParams init_direction(std::size_t input, std::size_t hidden, Rng& rng) {
  GruDirParams d;
  d.wz = glorot(hidden, input, rng);
  d.uz = glorot(hidden, hidden, rng);
  d.bz = Vec(hidden, 0.0);
  d.wr = glorot(hidden, input, rng);
  d.ur = glorot(hidden, hidden, rng);
  d.br = Vec(hidden, 0.0);
  d.wh = glorot(hidden, input, rng);
  d.uh = glorot(hidden, hidden, rng);
  d.bh = Vec(hidden, 0.0);
  return d;
}

}  // namespace detail

inline EncoderParams init_encoder(std::size_t input_dim, std::size_t hidden_dim,
                                  std::size_t attn_dim, Rng& rng) {
  EncoderParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.attn_dim = attn_dim;
  p.fwd = detail::init_direction(input_dim, hidden_dim, rng);
  p.bwd = detail::init_direction(input_dim, hidden_dim, rng);
  p.wa = detail::glorot(attn_dim, 2 * hidden_dim, rng);
  p.ba = Vec(attn_dim, 0.0);
  p.ua = detail::glorot(attn_dim, 1, rng).a;
  p.wo = detail::glorot(1, 2 * hidden_dim, rng).a;
  p.bo = Vec(1, 0.0);
  return p;
}

/// Same-shaped zero gradients for a parameter set.
inline EncoderParams zeros_like(const EncoderParams& p) {
  EncoderParams g = p;
  g.fill(0.0);
  return g;
}

/// Per-direction activations kept for the backward pass, stored by frame
/// index regardless of scan order.
struct DirCache {
  Matrix z, r, c, h;  // each T x H
};

struct EncoderCache {
  DirCache fwd, bwd;
  Matrix s;   // T x A, the tanh layer inside the attention scorer
  Vec alpha;  // T, attention weights
  Vec v;      // 2H, attention-pooled state
  double logit = 0.0;
  double p = 0.5;
};

namespace detail {

/// Runs one GRU direction over the frames of x in the order given by
/// step_of_frame (+1 forward scan, -1 backward scan).
inline void scan_direction(const GruDirParams& d, const Matrix& x, int direction, DirCache& cache) {
  const std::size_t T = x.rows;
  const std::size_t H = d.bz.size();
  cache.z = Matrix(T, H);
  cache.r = Matrix(T, H);
  cache.c = Matrix(T, H);
  cache.h = Matrix(T, H);

  Vec h_prev(H, 0.0), az(H), ar(H), ac(H), rh(H);
  for (std::size_t k = 0; k < T; ++k) {
    const std::size_t t = direction > 0 ? k : T - 1 - k;
    const double* xt = x.row(t);

    matvec(d.wz, xt, az.data(), false);
    matvec(d.uz, h_prev.data(), az.data(), true);
    matvec(d.wr, xt, ar.data(), false);
    matvec(d.ur, h_prev.data(), ar.data(), true);
    for (std::size_t i = 0; i < H; ++i) {
      az[i] = sigmoid(az[i] + d.bz[i]);
      ar[i] = sigmoid(ar[i] + d.br[i]);
      rh[i] = ar[i] * h_prev[i];
    }
    matvec(d.wh, xt, ac.data(), false);
    matvec(d.uh, rh.data(), ac.data(), true);

    double* z = cache.z.row(t);
    double* r = cache.r.row(t);
    double* c = cache.c.row(t);
    double* h = cache.h.row(t);
    for (std::size_t i = 0; i < H; ++i) {
      z[i] = az[i];
      r[i] = ar[i];
      c[i] = std::tanh(ac[i] + d.bh[i]);
      h[i] = (1.0 - z[i]) * h_prev[i] + z[i] * c[i];
      h_prev[i] = h[i];
    }
  }
}

}  // namespace detail

/// Full forward pass; fills the cache and returns the positive-class
/// probability.
inline double encoder_forward(const EncoderParams& p, const Matrix& x, EncoderCache& cache) {
  if (x.cols != p.input_dim) throw DataError("encoder input width mismatch");
  if (x.rows == 0) throw DataError("encoder input is empty");
  const std::size_t T = x.rows;
  const std::size_t H = p.hidden_dim;
  const std::size_t A = p.attn_dim;

  detail::scan_direction(p.fwd, x, +1, cache.fwd);
  detail::scan_direction(p.bwd, x, -1, cache.bwd);

  cache.s = Matrix(T, A);
  Vec scores(T);
  Vec g(2 * H);
  for (std::size_t t = 0; t < T; ++t) {
    const double* hf = cache.fwd.h.row(t);
    const double* hb = cache.bwd.h.row(t);
    std::copy(hf, hf + H, g.begin());
    std::copy(hb, hb + H, g.begin() + static_cast<std::ptrdiff_t>(H));
    double* s = cache.s.row(t);
    matvec(p.wa, g.data(), s, false);
    for (std::size_t i = 0; i < A; ++i) s[i] = std::tanh(s[i] + p.ba[i]);
    scores[t] = dot(s, p.ua.data(), A);
  }

  // Softmax with the usual max shift.
  double mx = scores[0];
  for (double v : scores) mx = std::max(mx, v);
  cache.alpha.assign(T, 0.0);
  double denom = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    cache.alpha[t] = std::exp(scores[t] - mx);
    denom += cache.alpha[t];
  }
  for (double& a : cache.alpha) a /= denom;

  cache.v.assign(2 * H, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    const double a = cache.alpha[t];
    const double* hf = cache.fwd.h.row(t);
    const double* hb = cache.bwd.h.row(t);
    for (std::size_t i = 0; i < H; ++i) {
      cache.v[i] += a * hf[i];
      cache.v[H + i] += a * hb[i];
    }
  }

  cache.logit = dot(cache.v, p.wo) + p.bo[0];
  cache.p = sigmoid(cache.logit);
  return cache.p;
}

inline double encoder_forward(const EncoderParams& p, const Matrix& x) {
  EncoderCache cache;
  return encoder_forward(p, x, cache);
}

/// Binary cross entropy on a probability; clamped away from the poles.
inline double bce_loss(double p, int y) {
  const double q = std::clamp(p, 1e-12, 1.0 - 1e-12);
  return y ? -std::log(q) : -std::log1p(-q);
}

/// The same loss computed from the cached logit, stable at any magnitude.
inline double bce_loss_from_logit(const EncoderCache& cache, int y) {
  return softplus(cache.logit) - static_cast<double>(y) * cache.logit;
}

namespace detail {

/// Reverse-mode pass for one direction. dh holds dL/dh_t by frame index on
/// entry and is consumed; parameter gradients are accumulated into g.
inline void backprop_direction(const GruDirParams& d, const Matrix& x, int direction,
                               const DirCache& cache, Matrix& dh, GruDirParams& g) {
  const std::size_t T = x.rows;
  const std::size_t H = d.bz.size();

  Vec carry(H, 0.0);  // dL/dh_prev flowing to the previous processed step
  Vec dz(H), dc(H), daz(H), dar(H), dac(H), drh(H), dhp(H), rh(H);
  Vec h_prev(H);
  for (std::size_t k = T; k-- > 0;) {
    const std::size_t t = direction > 0 ? k : T - 1 - k;
    const std::size_t prev = direction > 0 ? t - 1 : t + 1;
    const bool has_prev = direction > 0 ? t > 0 : t + 1 < T;
    if (has_prev) {
      const double* hp = cache.h.row(prev);
      std::copy(hp, hp + H, h_prev.begin());
    } else {
      std::fill(h_prev.begin(), h_prev.end(), 0.0);
    }

    const double* z = cache.z.row(t);
    const double* r = cache.r.row(t);
    const double* c = cache.c.row(t);
    double* dht = dh.row(t);
    for (std::size_t i = 0; i < H; ++i) dht[i] += carry[i];

    for (std::size_t i = 0; i < H; ++i) {
      dz[i] = dht[i] * (c[i] - h_prev[i]);
      dc[i] = dht[i] * z[i];
      dac[i] = dc[i] * (1.0 - c[i] * c[i]);
      daz[i] = dz[i] * z[i] * (1.0 - z[i]);
      dhp[i] = dht[i] * (1.0 - z[i]);
      rh[i] = r[i] * h_prev[i];
    }
    matvec_t(d.uh, dac.data(), drh.data(), false);
    for (std::size_t i = 0; i < H; ++i) {
      const double dr = drh[i] * h_prev[i];
      dar[i] = dr * r[i] * (1.0 - r[i]);
      dhp[i] += drh[i] * r[i];
    }
    matvec_t(d.uz, daz.data(), dhp.data(), true);
    matvec_t(d.ur, dar.data(), dhp.data(), true);

    const double* xt = x.row(t);
    outer_add(g.wz, daz.data(), xt);
    outer_add(g.wr, dar.data(), xt);
    outer_add(g.wh, dac.data(), xt);
    outer_add(g.uz, daz.data(), h_prev.data());
    outer_add(g.ur, dar.data(), h_prev.data());
    outer_add(g.uh, dac.data(), rh.data());
    for (std::size_t i = 0; i < H; ++i) {
      g.bz[i] += daz[i];
      g.br[i] += dar[i];
      g.bh[i] += dac[i];
    }

    carry = dhp;
  }
}

}  // namespace detail

/// Accumulates dBCE(p, y)/dparams into grads. Call once per sequence after
/// encoder_forward filled the cache for the same input.
inline void encoder_backward(const EncoderParams& p, const Matrix& x, const EncoderCache& cache,
                             int y, EncoderParams& grads) {
  const std::size_t T = x.rows;
  const std::size_t H = p.hidden_dim;
  const std::size_t A = p.attn_dim;

  const double dlogit = cache.p - static_cast<double>(y);
  axpy(dlogit, cache.v, grads.wo);
  grads.bo[0] += dlogit;

  // dL/dv, then through the attention pooling and scorer.
  Vec dv(2 * H);
  for (std::size_t i = 0; i < 2 * H; ++i) dv[i] = dlogit * p.wo[i];

  Vec dalpha(T, 0.0);
  Matrix dh_fwd(T, H), dh_bwd(T, H);
  for (std::size_t t = 0; t < T; ++t) {
    const double* hf = cache.fwd.h.row(t);
    const double* hb = cache.bwd.h.row(t);
    double acc = 0.0;
    for (std::size_t i = 0; i < H; ++i) acc += dv[i] * hf[i] + dv[H + i] * hb[i];
    dalpha[t] = acc;
    const double a = cache.alpha[t];
    double* df = dh_fwd.row(t);
    double* db = dh_bwd.row(t);
    for (std::size_t i = 0; i < H; ++i) {
      df[i] = a * dv[i];
      db[i] = a * dv[H + i];
    }
  }

  double mean = 0.0;
  for (std::size_t t = 0; t < T; ++t) mean += cache.alpha[t] * dalpha[t];

  Vec ds(A), da(A), g(2 * H), dg(2 * H);
  for (std::size_t t = 0; t < T; ++t) {
    const double de = cache.alpha[t] * (dalpha[t] - mean);
    const double* s = cache.s.row(t);
    for (std::size_t i = 0; i < A; ++i) {
      grads.ua[i] += de * s[i];
      ds[i] = de * p.ua[i];
      da[i] = ds[i] * (1.0 - s[i] * s[i]);
      grads.ba[i] += da[i];
    }
    const double* hf = cache.fwd.h.row(t);
    const double* hb = cache.bwd.h.row(t);
    std::copy(hf, hf + H, g.begin());
    std::copy(hb, hb + H, g.begin() + static_cast<std::ptrdiff_t>(H));
    outer_add(grads.wa, da.data(), g.data());
    matvec_t(p.wa, da.data(), dg.data(), false);
    double* df = dh_fwd.row(t);
    double* db = dh_bwd.row(t);
    for (std::size_t i = 0; i < H; ++i) {
      df[i] += dg[i];
      db[i] += dg[H + i];
    }
  }

  detail::backprop_direction(p.fwd, x, +1, cache.fwd, dh_fwd, grads.fwd);
  detail::backprop_direction(p.bwd, x, -1, cache.bwd, dh_bwd, grads.bwd);
}

}  // namespace attnslice

#endif  // ATTNSLICE_ENCODER_HPP
