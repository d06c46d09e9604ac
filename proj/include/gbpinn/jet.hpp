#pragma once

#include <array>

#include "gbpinn/tape.hpp"

namespace gbpinn::ad {

// Second-order forward jet over tape values.
//
// Carries, for each input axis k, the value, first derivative d1[k] and pure
// second derivative d2[k] of an expression with respect to the seeded inputs.
// Mixed partials are not tracked; the PDE operators here only need Laplacians
// and first derivatives. Every coefficient is itself a tape Value, so the
// reverse sweep differentiates any jet component with respect to parameters.
struct Jet2 {
  static constexpr int kMaxDim = 2;

  int dim = 1;
  Value val;
  std::array<Value, kMaxDim> d1;
  std::array<Value, kMaxDim> d2;
};

// Constant in x: all derivative channels zero.
Jet2 jet_const(Tape& t, Value v, int dim);
Jet2 jet_const(Tape& t, double v, int dim);

// Seeds input axis `axis`: d1[axis] = 1, everything else zero.
Jet2 jet_input(Tape& t, double x, int axis, int dim);

Jet2 jet_add(const Jet2& u, const Jet2& v);
Jet2 jet_sub(const Jet2& u, const Jet2& v);
Jet2 jet_mul(const Jet2& u, const Jet2& v);
Jet2 jet_div(const Jet2& u, const Jet2& v);
Jet2 jet_neg(const Jet2& u);

// u scaled by a value with no x-dependence (parameter or constant).
Jet2 jet_scale(Value w, const Jet2& u);
Jet2 jet_shift(const Jet2& u, Value c);

Jet2 jet_exp(const Jet2& u);
Jet2 jet_sin(const Jet2& u);
Jet2 jet_cos(const Jet2& u);
Jet2 jet_erf(const Jet2& u);
Jet2 jet_sqrt(const Jet2& u);
Jet2 jet_atan(const Jet2& u);
Jet2 jet_pow(const Jet2& u, double p);

// GeLU in its exact form x * Phi(x) with Phi the standard normal CDF,
// composed from erf so that all three derivatives used downstream are exact.
Jet2 jet_gelu(const Jet2& u);

}  // namespace gbpinn::ad
