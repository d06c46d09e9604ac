#include "gbpinn/tape.hpp"

#include <cmath>

namespace gbpinn::ad {

namespace {
constexpr double kTwoOverSqrtPi = 1.1283791670955126;  // 2/sqrt(pi)
}

void Tape::reserve(std::size_t n) {
  val_.reserve(n);
  pa_.reserve(n);
  pb_.reserve(n);
  a_.reserve(n);
  b_.reserve(n);
  op_.reserve(n);
}

void Tape::clear() {
  val_.clear();
  pa_.clear();
  pb_.clear();
  a_.clear();
  b_.clear();
  op_.clear();
  zero_ = -1;
  one_ = -1;
}

Value Tape::push(OpKind op, double val, double pa, double pb, std::uint32_t a,
                 std::uint32_t b) {
  val_.push_back(val);
  pa_.push_back(pa);
  pb_.push_back(pb);
  a_.push_back(a);
  b_.push_back(b);
  op_.push_back(op);
  return Value{this, static_cast<std::uint32_t>(val_.size() - 1)};
}

Value Tape::constant(double c) { return push(OpKind::kConst, c, 0, 0, 0, 0); }

Value Tape::input(double x) { return push(OpKind::kInput, x, 0, 0, 0, 0); }

Value Tape::parameter(double v, std::uint32_t slot) {
  return push(OpKind::kParam, v, 0, 0, slot, 0);
}

Value Tape::zero() {
  if (zero_ < 0) zero_ = constant(0.0).idx;
  return Value{this, static_cast<std::uint32_t>(zero_)};
}

Value Tape::one() {
  if (one_ < 0) one_ = constant(1.0).idx;
  return Value{this, static_cast<std::uint32_t>(one_)};
}

Value Tape::add(Value a, Value b) {
  std::uint32_t ia = check(a), ib = check(b);
  return push(OpKind::kAdd, val_[ia] + val_[ib], 1, 1, ia, ib);
}

Value Tape::sub(Value a, Value b) {
  std::uint32_t ia = check(a), ib = check(b);
  return push(OpKind::kSub, val_[ia] - val_[ib], 1, -1, ia, ib);
}

Value Tape::mul(Value a, Value b) {
  std::uint32_t ia = check(a), ib = check(b);
  return push(OpKind::kMul, val_[ia] * val_[ib], val_[ib], val_[ia], ia, ib);
}

Value Tape::div(Value a, Value b) {
  std::uint32_t ia = check(a), ib = check(b);
  const double bv = val_[ib];
  if (bv == 0.0) throw ArithmeticError("division by zero on tape");
  const double inv = 1.0 / bv;
  return push(OpKind::kDiv, val_[ia] * inv, inv, -val_[ia] * inv * inv, ia, ib);
}

Value Tape::neg(Value a) {
  std::uint32_t ia = check(a);
  return push(OpKind::kNeg, -val_[ia], -1, 0, ia, 0);
}

Value Tape::exp(Value a) {
  std::uint32_t ia = check(a);
  const double e = std::exp(val_[ia]);
  return push(OpKind::kExp, e, e, 0, ia, 0);
}

Value Tape::sin(Value a) {
  std::uint32_t ia = check(a);
  return push(OpKind::kSin, std::sin(val_[ia]), std::cos(val_[ia]), 0, ia, 0);
}

Value Tape::cos(Value a) {
  std::uint32_t ia = check(a);
  return push(OpKind::kCos, std::cos(val_[ia]), -std::sin(val_[ia]), 0, ia, 0);
}

Value Tape::erf(Value a) {
  std::uint32_t ia = check(a);
  const double x = val_[ia];
  const double d = kTwoOverSqrtPi * std::exp(-x * x);
  return push(OpKind::kErf, std::erf(x), d, 0, ia, 0);
}

Value Tape::sqrt(Value a) {
  std::uint32_t ia = check(a);
  const double x = val_[ia];
  if (x < 0.0) throw ArithmeticError("sqrt of negative value on tape");
  const double s = std::sqrt(x);
  // Derivative blows up at 0; recorded as inf, caller's domain to avoid.
  return push(OpKind::kSqrt, s, 0.5 / s, 0, ia, 0);
}

Value Tape::atan(Value a) {
  std::uint32_t ia = check(a);
  const double x = val_[ia];
  return push(OpKind::kAtan, std::atan(x), 1.0 / (1.0 + x * x), 0, ia, 0);
}

Value Tape::pow(Value a, double p) {
  std::uint32_t ia = check(a);
  const double x = val_[ia];
  return push(OpKind::kPow, std::pow(x, p), p * std::pow(x, p - 1), 0, ia, 0);
}

std::vector<double> Tape::reverse(Value loss, std::size_t n_slots) const {
  const std::uint32_t root = check(loss);
  std::vector<double> adj(root + 1, 0.0);
  std::vector<double> grad(n_slots, 0.0);
  adj[root] = 1.0;
  for (std::uint32_t i = root + 1; i-- > 0;) {
    const double a = adj[i];
    if (a == 0.0) continue;
    switch (op_[i]) {
      case OpKind::kConst:
      case OpKind::kInput:
        break;
      case OpKind::kParam: {
        const std::uint32_t slot = a_[i];
        if (slot >= n_slots)
          throw UsageError("parameter slot out of range in reverse sweep");
        grad[slot] += a;
        break;
      }
      case OpKind::kAdd:
      case OpKind::kSub:
      case OpKind::kMul:
      case OpKind::kDiv:
        adj[a_[i]] += pa_[i] * a;
        adj[b_[i]] += pb_[i] * a;
        break;
      default:  // unary
        adj[a_[i]] += pa_[i] * a;
        break;
    }
  }
  return grad;
}

}  // namespace gbpinn::ad
