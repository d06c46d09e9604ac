#include "gbpinn/jet.hpp"

namespace gbpinn::ad {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865476;

void check_pair(const Jet2& u, const Jet2& v) {
  if (u.dim != v.dim) throw UsageError("jet dimension mismatch");
  if (u.val.tape != v.val.tape) throw UsageError("jets from different tapes");
}

// out = g(u) given g, g', g'' evaluated at u.val as tape values.
Jet2 compose(const Jet2& u, Value g0, Value g1, Value g2) {
  Jet2 r;
  r.dim = u.dim;
  r.val = g0;
  for (int k = 0; k < u.dim; ++k) {
    r.d1[k] = g1 * u.d1[k];
    r.d2[k] = g2 * (u.d1[k] * u.d1[k]) + g1 * u.d2[k];
  }
  return r;
}

}  // namespace

Jet2 jet_const(Tape& t, Value v, int dim) {
  Jet2 r;
  r.dim = dim;
  r.val = v;
  for (int k = 0; k < dim; ++k) {
    r.d1[k] = t.zero();
    r.d2[k] = t.zero();
  }
  return r;
}

Jet2 jet_const(Tape& t, double v, int dim) {
  return jet_const(t, t.constant(v), dim);
}

Jet2 jet_input(Tape& t, double x, int axis, int dim) {
  if (axis < 0 || axis >= dim || dim > Jet2::kMaxDim)
    throw UsageError("jet_input axis out of range");
  Jet2 r;
  r.dim = dim;
  r.val = t.input(x);
  for (int k = 0; k < dim; ++k) {
    r.d1[k] = (k == axis) ? t.one() : t.zero();
    r.d2[k] = t.zero();
  }
  return r;
}

Jet2 jet_add(const Jet2& u, const Jet2& v) {
  check_pair(u, v);
  Jet2 r;
  r.dim = u.dim;
  r.val = u.val + v.val;
  for (int k = 0; k < u.dim; ++k) {
    r.d1[k] = u.d1[k] + v.d1[k];
    r.d2[k] = u.d2[k] + v.d2[k];
  }
  return r;
}

Jet2 jet_sub(const Jet2& u, const Jet2& v) {
  check_pair(u, v);
  Jet2 r;
  r.dim = u.dim;
  r.val = u.val - v.val;
  for (int k = 0; k < u.dim; ++k) {
    r.d1[k] = u.d1[k] - v.d1[k];
    r.d2[k] = u.d2[k] - v.d2[k];
  }
  return r;
}

Jet2 jet_mul(const Jet2& u, const Jet2& v) {
  check_pair(u, v);
  Jet2 r;
  r.dim = u.dim;
  r.val = u.val * v.val;
  for (int k = 0; k < u.dim; ++k) {
    r.d1[k] = u.d1[k] * v.val + u.val * v.d1[k];
    r.d2[k] = u.d2[k] * v.val + 2.0 * (u.d1[k] * v.d1[k]) + u.val * v.d2[k];
  }
  return r;
}

// From u = w*v: w' = (u' - w v')/v and w'' = (u'' - 2 w' v' - w v'')/v.
Jet2 jet_div(const Jet2& u, const Jet2& v) {
  check_pair(u, v);
  Jet2 r;
  r.dim = u.dim;
  r.val = u.val / v.val;
  for (int k = 0; k < u.dim; ++k) {
    r.d1[k] = (u.d1[k] - r.val * v.d1[k]) / v.val;
    r.d2[k] = (u.d2[k] - 2.0 * (r.d1[k] * v.d1[k]) - r.val * v.d2[k]) / v.val;
  }
  return r;
}

Jet2 jet_neg(const Jet2& u) {
  Jet2 r;
  r.dim = u.dim;
  r.val = -u.val;
  for (int k = 0; k < u.dim; ++k) {
    r.d1[k] = -u.d1[k];
    r.d2[k] = -u.d2[k];
  }
  return r;
}

Jet2 jet_scale(Value w, const Jet2& u) {
  Jet2 r;
  r.dim = u.dim;
  r.val = w * u.val;
  for (int k = 0; k < u.dim; ++k) {
    r.d1[k] = w * u.d1[k];
    r.d2[k] = w * u.d2[k];
  }
  return r;
}

Jet2 jet_shift(const Jet2& u, Value c) {
  Jet2 r = u;
  r.val = u.val + c;
  return r;
}

Jet2 jet_exp(const Jet2& u) {
  Tape& t = *u.val.tape;
  Value e = t.exp(u.val);
  return compose(u, e, e, e);
}

Jet2 jet_sin(const Jet2& u) {
  Tape& t = *u.val.tape;
  Value s = t.sin(u.val);
  Value c = t.cos(u.val);
  return compose(u, s, c, -s);
}

Jet2 jet_cos(const Jet2& u) {
  Tape& t = *u.val.tape;
  Value s = t.sin(u.val);
  Value c = t.cos(u.val);
  return compose(u, c, -s, -c);
}

Jet2 jet_erf(const Jet2& u) {
  Tape& t = *u.val.tape;
  Value g0 = t.erf(u.val);
  // erf'(x) = 2/sqrt(pi) exp(-x^2); erf''(x) = -2x erf'(x).
  Value g1 = 1.1283791670955126 * t.exp(-(u.val * u.val));
  Value g2 = -2.0 * (u.val * g1);
  return compose(u, g0, g1, g2);
}

Jet2 jet_sqrt(const Jet2& u) {
  Tape& t = *u.val.tape;
  Value s = t.sqrt(u.val);
  Value g1 = 0.5 / s;
  Value g2 = -(g1 / (2.0 * u.val));
  return compose(u, s, g1, g2);
}

Jet2 jet_atan(const Jet2& u) {
  Tape& t = *u.val.tape;
  Value g0 = t.atan(u.val);
  Value g1 = 1.0 / (1.0 + u.val * u.val);
  Value g2 = -2.0 * (u.val * (g1 * g1));
  return compose(u, g0, g1, g2);
}

Jet2 jet_pow(const Jet2& u, double p) {
  Tape& t = *u.val.tape;
  Value g0 = t.pow(u.val, p);
  Value g1 = p * t.pow(u.val, p - 1);
  Value g2 = (p * (p - 1)) * t.pow(u.val, p - 2);
  return compose(u, g0, g1, g2);
}

Jet2 jet_gelu(const Jet2& u) {
  Tape& t = *u.val.tape;
  Jet2 e = jet_erf(jet_scale(t.constant(kInvSqrt2), u));
  Jet2 phi = jet_scale(t.constant(0.5), jet_shift(e, t.one()));
  return jet_mul(u, phi);
}

}  // namespace gbpinn::ad
