#include "gbpinn/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>

#include "kernel_math.hpp"

namespace gbpinn {

namespace {

constexpr int L = kLanes;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInvSqrt2 = 0.7071067811865476;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

// Rows processed per pass over the input block. Each row adds C lane-wide
// accumulators, so wider channel layouts take fewer rows to stay inside the
// vector register file.
template <int C>
constexpr int row_block() {
  return C <= 2 ? 8 : C == 3 ? 6 : C == 4 ? 5 : 4;
}

// z[j] = b[j] (value channel) + W[j,:] . in, all channels in lockstep, for
// rows j0 .. j0+JB-1. Blocking rows keeps the FMA chains independent and
// streams the input block once per JB rows instead of once per row. Each
// accumulator still sums in ascending-i order, so the result is identical to
// the JB=1 path.
template <int C, int JB>
void affine_forward_rows(const double* W, const double* b, const double* in,
                         double* z, int nin, int j0) {
  constexpr int CL = C * L;
  double acc[JB][CL];
  for (int r = 0; r < JB; ++r) {
    for (int l = 0; l < L; ++l) acc[r][l] = b[j0 + r];
    for (int i = L; i < CL; ++i) acc[r][i] = 0.0;
  }
  for (int i = 0; i < nin; ++i) {
    const double* ai = in + std::size_t(i) * CL;
    for (int r = 0; r < JB; ++r) {
      const double w = W[std::size_t(j0 + r) * nin + i];
      for (int c = 0; c < CL; ++c) acc[r][c] += w * ai[c];
    }
  }
  for (int r = 0; r < JB; ++r)
    std::memcpy(z + std::size_t(j0 + r) * CL, acc[r], sizeof(acc[r]));
}

template <int C>
void affine_forward(const double* W, const double* b, const double* in,
                    double* z, int nin, int nout) {
  constexpr int JB = row_block<C>();
  int j = 0;
  for (; j + JB <= nout; j += JB)
    affine_forward_rows<C, JB>(W, b, in, z, nin, j);
  for (; j < nout; ++j) affine_forward_rows<C, 1>(W, b, in, z, nin, j);
}

// wgrad rows j0 .. j0+JB-1 += Zbar . At, contracting over the channel-lane
// axis. At is the input block transposed to (CL x nin), so the inner loop is
// a vertical FMA over eight consecutive inputs with no horizontal
// reductions; every wgrad slot accumulates in ascending (channel, lane)
// order.
template <int C, int JB>
void wgrad_rows(const double* zbar, const double* At, double* wgrad, int nin,
                int j0) {
  using detail::v8df;
  constexpr int CL = C * L;
  const double* zb[JB];
  double* wg[JB];
  for (int r = 0; r < JB; ++r) zb[r] = zbar + std::size_t(j0 + r) * CL;
  for (int r = 0; r < JB; ++r) wg[r] = wgrad + std::size_t(j0 + r) * nin;
  int i = 0;
  for (; i + L <= nin; i += L) {
    v8df acc[JB];
    for (int r = 0; r < JB; ++r) acc[r] = detail::vload8(wg[r] + i);
    for (int k = 0; k < CL; ++k) {
      const v8df at = detail::vload8(At + std::size_t(k) * nin + i);
      for (int r = 0; r < JB; ++r) acc[r] += detail::vsplat8(zb[r][k]) * at;
    }
    for (int r = 0; r < JB; ++r) detail::vstore8(wg[r] + i, acc[r]);
  }
  for (; i < nin; ++i) {
    for (int r = 0; r < JB; ++r) {
      double s = wg[r][i];
      for (int k = 0; k < CL; ++k)
        s += zb[r][k] * At[std::size_t(k) * nin + i];
      wg[r][i] = s;
    }
  }
}

// abar_in += W^T . Zbar for rows j0 .. j0+JB-1: every abar slot receives its
// row contributions in ascending-j order.
template <int C, int JB>
void abar_rows(const double* W, const double* zbar, double* abar_in, int nin,
               int j0) {
  using detail::v8df;
  constexpr int CL = C * L;
  v8df zb[JB][C];
  for (int r = 0; r < JB; ++r)
    for (int c = 0; c < C; ++c)
      zb[r][c] = detail::vload8(zbar + std::size_t(j0 + r) * CL + c * L);
  for (int i = 0; i < nin; ++i) {
    double* ab = abar_in + std::size_t(i) * CL;
    v8df acc[C];
    for (int c = 0; c < C; ++c) acc[c] = detail::vload8(ab + c * L);
    for (int r = 0; r < JB; ++r) {
      const v8df w = detail::vsplat8(W[std::size_t(j0 + r) * nin + i]);
      for (int c = 0; c < C; ++c) acc[c] += w * zb[r][c];
    }
    for (int c = 0; c < C; ++c) detail::vstore8(ab + c * L, acc[c]);
  }
}

// Accumulates weight/bias gradients for one layer and, unless this is the
// first layer, the adjoint of the layer input (which the caller has zeroed).
// `At` is scratch for the transposed input block, CL x nin.
template <int C>
void affine_backward(const double* W, const double* zbar, const double* a_in,
                     double* wgrad, double* bgrad, double* abar_in, double* At,
                     int nin, int nout) {
  constexpr int CL = C * L;
  for (int i = 0; i < nin; ++i)
    for (int k = 0; k < CL; ++k)
      At[std::size_t(k) * nin + i] = a_in[std::size_t(i) * CL + k];
  for (int j = 0; j < nout; ++j)
    bgrad[j] += detail::hsum8(zbar + std::size_t(j) * CL);
  constexpr int JW = 4;
  int j = 0;
  for (; j + JW <= nout; j += JW) wgrad_rows<C, JW>(zbar, At, wgrad, nin, j);
  for (; j < nout; ++j) wgrad_rows<C, 1>(zbar, At, wgrad, nin, j);
  if (abar_in) {
    constexpr int JB = row_block<C>();
    j = 0;
    for (; j + JB <= nout; j += JB) abar_rows<C, JB>(W, zbar, abar_in, nin, j);
    for (; j < nout; ++j) abar_rows<C, 1>(W, zbar, abar_in, nin, j);
  }
}

using AffineFwd = void (*)(const double*, const double*, const double*,
                           double*, int, int);
using AffineBwd = void (*)(const double*, const double*, const double*,
                           double*, double*, double*, double*, int, int);

AffineFwd pick_forward(int c) {
  switch (c) {
    case 1: return affine_forward<1>;
    case 2: return affine_forward<2>;
    case 3: return affine_forward<3>;
    case 4: return affine_forward<4>;
    case 5: return affine_forward<5>;
  }
  throw std::logic_error("unsupported channel count");
}

AffineBwd pick_backward(int c) {
  switch (c) {
    case 1: return affine_backward<1>;
    case 2: return affine_backward<2>;
    case 3: return affine_backward<3>;
    case 4: return affine_backward<4>;
    case 5: return affine_backward<5>;
  }
  throw std::logic_error("unsupported channel count");
}

double reduce_period_k(double x) {
  double r = x - kTwoPi * std::floor(x / kTwoPi);
  if (r >= kTwoPi) r -= kTwoPi;
  if (r < 0.0) r = 0.0;
  return r;
}

}  // namespace

StageEvaluator::StageEvaluator(NetworkSpec spec, ChannelLayout layout)
    : spec_(std::move(spec)), layout_(layout) {
  spec_.validate();
  if (layout_.dim != spec_.input_dim)
    throw std::invalid_argument("channel layout does not match input dim");
  channels_ = layout_.channels();
  n_layers_ = static_cast<int>(spec_.hidden.size()) + 1;

  const std::size_t CL = std::size_t(channels_) * L;
  feats_.assign(std::size_t(spec_.feature_dim()) * CL, 0.0);
  z_.resize(n_layers_);
  a_.resize(n_layers_ - 1);
  abar_.resize(n_layers_ - 1);
  cdf_.resize(n_layers_ - 1);
  pdf_.resize(n_layers_ - 1);
  for (int l = 0; l < n_layers_ - 1; ++l) {
    const std::size_t w = spec_.hidden[l];
    z_[l].assign(w * CL, 0.0);
    a_[l].assign(w * CL, 0.0);
    abar_[l].assign(w * CL, 0.0);
    cdf_[l].assign(w * L, 0.0);
    pdf_[l].assign(w * L, 0.0);
  }
  z_[n_layers_ - 1].assign(CL, 0.0);
  seeds_.assign(CL, 0.0);
  int max_fan_in = spec_.feature_dim();
  for (int w : spec_.hidden) max_fan_in = std::max(max_fan_in, w);
  atrans_.assign(std::size_t(max_fan_in) * CL, 0.0);
}

void StageEvaluator::forward_chunk(const ParameterStore& params,
                                   const double* xlanes) {
  const int C = channels_;
  const std::size_t CL = std::size_t(C) * L;
  const int dim = spec_.input_dim;

  // Embedded features with their input derivatives.
  std::fill(feats_.begin(), feats_.end(), 0.0);
  double* F = feats_.data();
  switch (spec_.embedding) {
    case Embedding::kNone: {
      for (int k = 0; k < dim; ++k) {
        double* f = F + std::size_t(k) * CL;
        for (int l = 0; l < L; ++l) f[l] = xlanes[k * L + l];
        const int d1 = layout_.d1_channel(k);
        if (d1 >= 0)
          for (int l = 0; l < L; ++l) f[d1 * L + l] = 1.0;
      }
      break;
    }
    case Embedding::kFourier: {
      const int na = static_cast<int>(spec_.frequencies.size()) * dim;
      double theta[L], cosv[L], sinv[L];
      for (int fi = 0; fi < static_cast<int>(spec_.frequencies.size()); ++fi) {
        const double w = kTwoPi * spec_.frequencies[fi];
        for (int k = 0; k < dim; ++k) {
          for (int l = 0; l < L; ++l) theta[l] = w * xlanes[k * L + l];
          detail::vcos8(theta, cosv);
          detail::vsin8(theta, sinv);
          double* fc = F + std::size_t(fi * dim + k) * CL;
          double* fs = F + std::size_t(na + fi * dim + k) * CL;
          for (int l = 0; l < L; ++l) fc[l] = cosv[l];
          for (int l = 0; l < L; ++l) fs[l] = sinv[l];
          const int d1 = layout_.d1_channel(k);
          if (d1 >= 0) {
            for (int l = 0; l < L; ++l) fc[d1 * L + l] = -w * sinv[l];
            for (int l = 0; l < L; ++l) fs[d1 * L + l] = w * cosv[l];
          }
          const int d2 = layout_.d2_channel(k);
          if (d2 >= 0) {
            const double w2 = w * w;
            for (int l = 0; l < L; ++l) fc[d2 * L + l] = -w2 * cosv[l];
            for (int l = 0; l < L; ++l) fs[d2 * L + l] = -w2 * sinv[l];
          }
        }
      }
      break;
    }
    case Embedding::kPeriodic: {
      double r[L], sr[L], cr[L];
      for (int l = 0; l < L; ++l) r[l] = reduce_period_k(xlanes[l]);
      detail::vsin8(r, sr);
      detail::vcos8(r, cr);
      double* f0 = F;
      double* f1 = F + CL;
      double* f2 = F + 2 * CL;
      const int d1x = layout_.d1_channel(0);
      const int d2x = layout_.d2_channel(0);
      const int d1t = layout_.d1_channel(1);
      for (int l = 0; l < L; ++l) f0[l] = sr[l];
      for (int l = 0; l < L; ++l) f1[l] = cr[l];
      for (int l = 0; l < L; ++l) f2[l] = xlanes[L + l];
      if (d1x >= 0) {
        for (int l = 0; l < L; ++l) f0[d1x * L + l] = cr[l];
        for (int l = 0; l < L; ++l) f1[d1x * L + l] = -sr[l];
      }
      if (d2x >= 0) {
        for (int l = 0; l < L; ++l) f0[d2x * L + l] = -sr[l];
        for (int l = 0; l < L; ++l) f1[d2x * L + l] = -cr[l];
      }
      if (d1t >= 0)
        for (int l = 0; l < L; ++l) f2[d1t * L + l] = 1.0;
      break;
    }
  }

  // Layer sweep.
  const AffineFwd fwd = pick_forward(C);
  const double* in = feats_.data();
  for (int l = 0; l < n_layers_; ++l) {
    const auto& lay = params.layers[l];
    fwd(params.weights(l), params.biases(l), in, z_[l].data(), lay.fan_in,
        lay.fan_out);
    if (l == n_layers_ - 1) break;

    // GeLU with exact derivative channels.
    double* zl = z_[l].data();
    double* al = a_[l].data();
    double* Phi = cdf_[l].data();
    double* phi = pdf_[l].data();
    for (int j = 0; j < lay.fan_out; ++j) {
      const double* zj = zl + std::size_t(j) * CL;
      double* aj = al + std::size_t(j) * CL;
      double* Pj = Phi + std::size_t(j) * L;
      double* pj = phi + std::size_t(j) * L;
      double arg[L], e[L], q[L], ex[L];
      for (int l2 = 0; l2 < L; ++l2) arg[l2] = zj[l2] * kInvSqrt2;
      detail::verf8(arg, e);
      for (int l2 = 0; l2 < L; ++l2) q[l2] = -0.5 * zj[l2] * zj[l2];
      detail::vexp8(q, ex);
      for (int l2 = 0; l2 < L; ++l2) Pj[l2] = 0.5 * (1.0 + e[l2]);
      for (int l2 = 0; l2 < L; ++l2) pj[l2] = kInvSqrt2Pi * ex[l2];
      for (int l2 = 0; l2 < L; ++l2) aj[l2] = zj[l2] * Pj[l2];
      if (C > 1) {
        double g1[L], g2[L];
        for (int l2 = 0; l2 < L; ++l2) g1[l2] = Pj[l2] + zj[l2] * pj[l2];
        for (int l2 = 0; l2 < L; ++l2)
          g2[l2] = (2.0 - zj[l2] * zj[l2]) * pj[l2];
        for (int k = 0; k < dim; ++k) {
          const int c1 = layout_.d1_channel(k);
          const int c2 = layout_.d2_channel(k);
          const double* zg = zj + std::size_t(c1) * L;
          double* ag = aj + std::size_t(c1) * L;
          for (int l2 = 0; l2 < L; ++l2) ag[l2] = g1[l2] * zg[l2];
          if (c2 >= 0) {
            const double* zh = zj + std::size_t(c2) * L;
            double* ah = aj + std::size_t(c2) * L;
            for (int l2 = 0; l2 < L; ++l2)
              ah[l2] = g2[l2] * zg[l2] * zg[l2] + g1[l2] * zh[l2];
          }
        }
      }
    }
    in = al;
  }
}

void StageEvaluator::backward_chunk(const ParameterStore& params,
                                    std::span<double> grad) {
  const int C = channels_;
  const std::size_t CL = std::size_t(C) * L;
  const int dim = spec_.input_dim;
  const AffineBwd bwd = pick_backward(C);

  auto wgrad = [&](int l) { return grad.data() + params.layers[l].offset; };
  auto bgrad = [&](int l) {
    const auto& lay = params.layers[l];
    return grad.data() + lay.offset + std::size_t(lay.fan_in) * lay.fan_out;
  };

  // Head has no activation: the seeds are already its pre-activation adjoint.
  {
    const int l = n_layers_ - 1;
    const auto& lay = params.layers[l];
    double* below = abar_[l - 1].data();
    std::fill(abar_[l - 1].begin(), abar_[l - 1].end(), 0.0);
    bwd(params.weights(l), seeds_.data(), a_[l - 1].data(), wgrad(l), bgrad(l),
        below, atrans_.data(), lay.fan_in, lay.fan_out);
  }

  for (int l = n_layers_ - 2; l >= 0; --l) {
    const auto& lay = params.layers[l];
    // Post-activation adjoint -> pre-activation adjoint, in place.
    double* zl = z_[l].data();
    double* abl = abar_[l].data();
    const double* Phi = cdf_[l].data();
    const double* phi = pdf_[l].data();
    for (int j = 0; j < lay.fan_out; ++j) {
      double* ab = abl + std::size_t(j) * CL;
      const double* zj = zl + std::size_t(j) * CL;
      const double* Pj = Phi + std::size_t(j) * L;
      const double* pj = phi + std::size_t(j) * L;
      double g1[L], g2[L], g3[L], acc0[L];
      for (int l2 = 0; l2 < L; ++l2) g1[l2] = Pj[l2] + zj[l2] * pj[l2];
      for (int l2 = 0; l2 < L; ++l2) g2[l2] = (2.0 - zj[l2] * zj[l2]) * pj[l2];
      for (int l2 = 0; l2 < L; ++l2)
        g3[l2] = zj[l2] * (zj[l2] * zj[l2] - 4.0) * pj[l2];
      for (int l2 = 0; l2 < L; ++l2) acc0[l2] = ab[l2] * g1[l2];
      if (C > 1) {
        for (int k = 0; k < dim; ++k) {
          const int c1 = layout_.d1_channel(k);
          const int c2 = layout_.d2_channel(k);
          const double* zg = zj + std::size_t(c1) * L;
          double* ag = ab + std::size_t(c1) * L;
          if (c2 >= 0) {
            const double* zh = zj + std::size_t(c2) * L;
            double* ah = ab + std::size_t(c2) * L;
            for (int l2 = 0; l2 < L; ++l2)
              acc0[l2] += ag[l2] * g2[l2] * zg[l2] +
                          ah[l2] * (g3[l2] * zg[l2] * zg[l2] + g2[l2] * zh[l2]);
            for (int l2 = 0; l2 < L; ++l2)
              ag[l2] = ag[l2] * g1[l2] + 2.0 * ah[l2] * g2[l2] * zg[l2];
            for (int l2 = 0; l2 < L; ++l2) ah[l2] = ah[l2] * g1[l2];
          } else {
            for (int l2 = 0; l2 < L; ++l2) acc0[l2] += ag[l2] * g2[l2] * zg[l2];
            for (int l2 = 0; l2 < L; ++l2) ag[l2] = ag[l2] * g1[l2];
          }
        }
      }
      for (int l2 = 0; l2 < L; ++l2) ab[l2] = acc0[l2];
    }

    double* below = nullptr;
    const double* a_in = feats_.data();
    if (l > 0) {
      std::fill(abar_[l - 1].begin(), abar_[l - 1].end(), 0.0);
      below = abar_[l - 1].data();
      a_in = a_[l - 1].data();
    }
    bwd(params.weights(l), abl, a_in, wgrad(l), bgrad(l), below,
        atrans_.data(), lay.fan_in, lay.fan_out);
  }
}

void StageEvaluator::forward(const ParameterStore& params,
                             std::span<const double> pts, std::size_t n,
                             double* out) {
  if (params.size() != spec_.param_count())
    throw std::invalid_argument("parameter store does not match network spec");
  const int dim = spec_.input_dim;
  const int C = channels_;
  double xlanes[2 * L];
  const double* head = z_[n_layers_ - 1].data();
  for (std::size_t base = 0; base < n; base += L) {
    const int lanes = static_cast<int>(std::min<std::size_t>(L, n - base));
    for (int l = 0; l < L; ++l) {
      const std::size_t i = base + std::min(l, lanes - 1);
      for (int k = 0; k < dim; ++k) xlanes[k * L + l] = pts[i * dim + k];
    }
    forward_chunk(params, xlanes);
    for (int l = 0; l < lanes; ++l)
      for (int c = 0; c < C; ++c) out[(base + l) * C + c] = head[c * L + l];
  }
}

void StageEvaluator::forward_backward(const ParameterStore& params,
                                      std::span<const double> pts,
                                      std::size_t n, const SeedFn& seed,
                                      std::span<double> grad) {
  if (params.size() != spec_.param_count())
    throw std::invalid_argument("parameter store does not match network spec");
  if (grad.size() != params.size())
    throw std::invalid_argument("gradient buffer size mismatch");
  const int dim = spec_.input_dim;
  double xlanes[2 * L];
  const double* head = z_[n_layers_ - 1].data();
  for (std::size_t base = 0; base < n; base += L) {
    const int lanes = static_cast<int>(std::min<std::size_t>(L, n - base));
    for (int l = 0; l < L; ++l) {
      const std::size_t i = base + std::min(l, lanes - 1);
      for (int k = 0; k < dim; ++k) xlanes[k * L + l] = pts[i * dim + k];
    }
    forward_chunk(params, xlanes);
    std::fill(seeds_.begin(), seeds_.end(), 0.0);
    seed(base, lanes, head, seeds_.data());
    backward_chunk(params, grad);
  }
}

}  // namespace gbpinn
