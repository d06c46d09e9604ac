#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace gbpinn::ad {

// Raised when an operation is numerically ill-posed at record time
// (division by zero, sqrt of a negative value).
struct ArithmeticError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Misuse of the API: mixing tapes, gradient of a foreign value, bad slot.
struct UsageError : std::logic_error {
  using std::logic_error::logic_error;
};

enum class OpKind : std::uint8_t {
  kConst,
  kParam,   // trainable leaf; carries a slot index
  kInput,   // input coefficient: a leaf that is data, never differentiated
  kAdd,
  kSub,
  kMul,
  kDiv,
  kNeg,
  kExp,
  kSin,
  kCos,
  kErf,
  kSqrt,
  kAtan,
  kPow,     // constant real exponent
};

class Tape;

// Handle to a node on a specific tape. Cheap to copy; valid for the life of
// the tape. All arithmetic on Values appends nodes eagerly.
struct Value {
  Tape* tape = nullptr;
  std::uint32_t idx = 0;

  double val() const;
};

// Append-only scalar computation tape.
//
// Forward values and local partials are computed eagerly at record time, so a
// reverse sweep is a single pass over the node array. Nodes are stored
// struct-of-arrays. A tape is single-threaded by construction; concurrent use
// requires one tape per thread.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  std::size_t size() const { return val_.size(); }
  void reserve(std::size_t n);
  void clear();

  double value(Value v) const { return val_[check(v)]; }

  Value constant(double c);
  Value input(double x);
  // Slot identifies the gradient entry this parameter maps to. Frozen
  // parameters must be pushed as constants instead; they then receive no
  // gradient entry by construction.
  Value parameter(double v, std::uint32_t slot);

  Value add(Value a, Value b);
  Value sub(Value a, Value b);
  Value mul(Value a, Value b);
  Value div(Value a, Value b);  // throws ArithmeticError if b is zero
  Value neg(Value a);
  Value exp(Value a);
  Value sin(Value a);
  Value cos(Value a);
  Value erf(Value a);
  Value sqrt(Value a);          // throws ArithmeticError if a is negative
  Value atan(Value a);
  Value pow(Value a, double p); // constant exponent

  // Cached constants 0 and 1; jets use them heavily as derivative seeds.
  Value zero();
  Value one();

  // Reverse sweep from `loss`. Returns dloss/dtheta for slots [0, n_slots).
  // Throws UsageError if `loss` lives on another tape or a parameter slot is
  // out of range.
  std::vector<double> reverse(Value loss, std::size_t n_slots) const;

 private:
  friend struct Value;

  std::uint32_t check(Value v) const {
    if (v.tape != this) throw UsageError("value does not belong to this tape");
    return v.idx;
  }
  Value push(OpKind op, double val, double pa, double pb, std::uint32_t a,
             std::uint32_t b);

  std::vector<double> val_;   // forward value
  std::vector<double> pa_;    // d value / d operand a
  std::vector<double> pb_;    // d value / d operand b
  std::vector<std::uint32_t> a_;  // operand index; slot index for kParam
  std::vector<std::uint32_t> b_;
  std::vector<OpKind> op_;
  std::int64_t zero_ = -1;
  std::int64_t one_ = -1;
};

inline double Value::val() const { return tape->value(*this); }

// Operator sugar. Mixed double operands are pushed as constants.
inline Value operator+(Value a, Value b) { return a.tape->add(a, b); }
inline Value operator-(Value a, Value b) { return a.tape->sub(a, b); }
inline Value operator*(Value a, Value b) { return a.tape->mul(a, b); }
inline Value operator/(Value a, Value b) { return a.tape->div(a, b); }
inline Value operator-(Value a) { return a.tape->neg(a); }
inline Value operator+(Value a, double c) { return a + a.tape->constant(c); }
inline Value operator+(double c, Value a) { return a.tape->constant(c) + a; }
inline Value operator-(Value a, double c) { return a - a.tape->constant(c); }
inline Value operator-(double c, Value a) { return a.tape->constant(c) - a; }
inline Value operator*(Value a, double c) { return a * a.tape->constant(c); }
inline Value operator*(double c, Value a) { return a.tape->constant(c) * a; }
inline Value operator/(Value a, double c) { return a / a.tape->constant(c); }
inline Value operator/(double c, Value a) { return a.tape->constant(c) / a; }

}  // namespace gbpinn::ad
