#include "gbpinn/problem.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "gbpinn/rng.hpp"

namespace gbpinn {

namespace {
constexpr double kPi = std::numbers::pi;
}

double PdeProblem::boundary_value(std::span<const double> x) const {
  return exact(x);
}

double PdeProblem::initial_value(std::span<const double> x) const {
  (void)x;
  throw std::logic_error(name_ + " has no initial condition");
}

double PdeProblem::exact(std::span<const double> x) const {
  (void)x;
  throw std::logic_error(name_ + " has no closed-form solution");
}

ad::Jet2 PdeProblem::exact_jet(ad::Tape& t, std::span<const double> x) const {
  (void)t;
  (void)x;
  throw std::logic_error(name_ + " has no closed-form solution");
}

double PdeProblem::feature_distance(std::span<const double> x) const {
  (void)x;
  return std::numeric_limits<double>::infinity();
}

std::vector<double> PdeProblem::sample_interior(std::size_t n,
                                                std::uint64_t seed) const {
  Rng rng(seed);
  std::vector<double> pts;
  pts.reserve(n * dim_);
  double x[2];
  for (std::size_t i = 0; i < n; ++i) {
    for (;;) {
      bool ok = true;
      for (int k = 0; k < dim_; ++k) {
        const double u = rng.uniform();
        if (k == closed_hi_axis_) {
          x[k] = hi_[k] - (hi_[k] - lo_[k]) * u;  // (lo, hi]
        } else {
          x[k] = lo_[k] + (hi_[k] - lo_[k]) * u;  // [lo, hi) and lo rejected
          if (x[k] == lo_[k]) ok = false;
        }
      }
      if (ok && interior_ok(x)) break;
    }
    for (int k = 0; k < dim_; ++k) pts.push_back(x[k]);
  }
  return pts;
}

std::vector<double> PdeProblem::sample_boundary(std::size_t n,
                                                std::uint64_t seed) const {
  if (!has_boundary_)
    throw std::logic_error(name_ + " has no boundary term");
  Rng rng(seed);
  std::vector<double> pts;
  pts.reserve(n * dim_);
  if (dim_ == 1) {
    for (std::size_t i = 0; i < n; ++i)
      pts.push_back(i % 2 == 0 ? lo_[0] : hi_[0]);
    return pts;
  }
  // Four faces in a fixed order, counts as equal as n allows.
  const std::size_t q = n / 4, r = n % 4;
  for (int face = 0; face < 4; ++face) {
    const std::size_t cnt = q + (std::size_t(face) < r ? 1 : 0);
    const int fixed_axis = face / 2;
    const double fixed = (face % 2 == 0) ? lo_[fixed_axis] : hi_[fixed_axis];
    const int free_axis = 1 - fixed_axis;
    for (std::size_t i = 0; i < cnt; ++i) {
      const double v =
          lo_[free_axis] + (hi_[free_axis] - lo_[free_axis]) * rng.uniform();
      double x[2];
      x[fixed_axis] = fixed;
      x[free_axis] = v;
      pts.push_back(x[0]);
      pts.push_back(x[1]);
    }
  }
  return pts;
}

std::vector<double> PdeProblem::sample_initial(std::size_t n,
                                               std::uint64_t seed) const {
  (void)n;
  (void)seed;
  throw std::logic_error(name_ + " has no initial condition");
}

namespace {

// -eps^2 u'' + u = 1, u(0) = u(1) = 0.
class Sp1d final : public PdeProblem {
 public:
  explicit Sp1d(double eps) {
    name_ = "sp1d";
    dim_ = 1;
    lo_ = {0.0, 0.0};
    hi_ = {1.0, 0.0};
    eps_ = eps;
    layout_ = ChannelLayout::full(1);
  }

  ad::Value residual(ad::Tape& t, const ad::Jet2& u,
                     std::span<const double>) const override {
    return t.constant(-eps_ * eps_) * u.d2[0] + u.val - 1.0;
  }

  void residual_channels(const double*, double, const double* ch, double& r,
                         double* dr) const override {
    r = -eps_ * eps_ * ch[2] + ch[0] - 1.0;
    dr[0] = 1.0;
    dr[1] = 0.0;
    dr[2] = -eps_ * eps_;
  }

  double exact(std::span<const double> x) const override {
    const double e = eps_;
    return 1.0 - (std::exp(-x[0] / e) + std::exp((x[0] - 1.0) / e)) /
                     (1.0 + std::exp(-1.0 / e));
  }

  ad::Jet2 exact_jet(ad::Tape& t, std::span<const double> x) const override {
    ad::Jet2 xj = ad::jet_input(t, x[0], 0, 1);
    ad::Jet2 e1 = ad::jet_exp(ad::jet_scale(t.constant(-1.0 / eps_), xj));
    ad::Jet2 e2 = ad::jet_exp(ad::jet_scale(
        t.constant(1.0 / eps_), ad::jet_shift(xj, t.constant(-1.0))));
    const double den = 1.0 + std::exp(-1.0 / eps_);
    ad::Jet2 s = ad::jet_scale(t.constant(-1.0 / den), ad::jet_add(e1, e2));
    return ad::jet_shift(s, t.one());
  }

  double feature_distance(std::span<const double> x) const override {
    return std::min(x[0], 1.0 - x[0]);
  }
};

// -eps Laplacian(u) + u_x = 0 with u = (exp(r1(x-1)) - exp(r2(x-1))) / D *
// sin(pi y); r1, r2 are the roots of eps r^2 - r - eps pi^2 = 0.
class Ej2d final : public PdeProblem {
 public:
  explicit Ej2d(double eps) {
    name_ = "ej2d";
    dim_ = 2;
    lo_ = {0.0, 0.0};
    hi_ = {1.0, 1.0};
    eps_ = eps;
    layout_ = ChannelLayout::full(2);
    const double s = std::sqrt(1.0 + 4.0 * eps * eps * kPi * kPi);
    // r1 = (-1 + s)/(-2 eps) rewritten to avoid the 1 - s cancellation.
    r1_ = -2.0 * eps * kPi * kPi / (1.0 + s);
    r2_ = (1.0 + s) / (2.0 * eps);
    den_ = std::exp(-r1_) - std::exp(-r2_);
  }

  ad::Value residual(ad::Tape& t, const ad::Jet2& u,
                     std::span<const double>) const override {
    return t.constant(-eps_) * (u.d2[0] + u.d2[1]) + u.d1[0];
  }

  void residual_channels(const double*, double, const double* ch, double& r,
                         double* dr) const override {
    r = -eps_ * (ch[3] + ch[4]) + ch[1];
    dr[0] = 0.0;
    dr[1] = 1.0;
    dr[2] = 0.0;
    dr[3] = -eps_;
    dr[4] = -eps_;
  }

  double exact(std::span<const double> x) const override {
    const double g = (std::exp(r1_ * (x[0] - 1.0)) -
                      std::exp(r2_ * (x[0] - 1.0))) /
                     den_;
    return g * std::sin(kPi * x[1]);
  }

  ad::Jet2 exact_jet(ad::Tape& t, std::span<const double> x) const override {
    ad::Jet2 xj = ad::jet_input(t, x[0], 0, 2);
    ad::Jet2 yj = ad::jet_input(t, x[1], 1, 2);
    ad::Jet2 xm1 = ad::jet_shift(xj, t.constant(-1.0));
    ad::Jet2 e1 = ad::jet_exp(ad::jet_scale(t.constant(r1_), xm1));
    ad::Jet2 e2 = ad::jet_exp(ad::jet_scale(t.constant(r2_), xm1));
    ad::Jet2 g = ad::jet_scale(t.constant(1.0 / den_), ad::jet_sub(e1, e2));
    ad::Jet2 s = ad::jet_sin(ad::jet_scale(t.constant(kPi), yj));
    return ad::jet_mul(g, s);
  }

  double feature_distance(std::span<const double> x) const override {
    return 1.0 - x[0];
  }

 private:
  double r1_, r2_, den_;
};

// -eps Laplacian(u) + e^x (sin y, cos y) . grad(u) = f, manufactured so that
// u = atan((1 - |x|)/eps); f comes from pushing the exact solution through
// the operator.
class Interior2d final : public PdeProblem {
 public:
  explicit Interior2d(double eps) {
    name_ = "interior2d";
    dim_ = 2;
    lo_ = {0.0, 0.0};
    hi_ = {1.0, 1.0};
    eps_ = eps;
    layout_ = ChannelLayout::full(2);
  }

  ad::Value residual(ad::Tape& t, const ad::Jet2& u,
                     std::span<const double> x) const override {
    const double a1 = std::exp(x[0]) * std::sin(x[1]);
    const double a2 = std::exp(x[0]) * std::cos(x[1]);
    return t.constant(-eps_) * (u.d2[0] + u.d2[1]) +
           t.constant(a1) * u.d1[0] + t.constant(a2) * u.d1[1] -
           t.constant(interior_aux(x));
  }

  void residual_channels(const double* x, double aux, const double* ch,
                         double& r, double* dr) const override {
    const double a1 = std::exp(x[0]) * std::sin(x[1]);
    const double a2 = std::exp(x[0]) * std::cos(x[1]);
    r = -eps_ * (ch[3] + ch[4]) + a1 * ch[1] + a2 * ch[2] - aux;
    dr[0] = 0.0;
    dr[1] = a1;
    dr[2] = a2;
    dr[3] = -eps_;
    dr[4] = -eps_;
  }

  double interior_aux(std::span<const double> x) const override {
    ad::Tape t;
    ad::Jet2 u = exact_jet(t, x);
    const double a1 = std::exp(x[0]) * std::sin(x[1]);
    const double a2 = std::exp(x[0]) * std::cos(x[1]);
    return -eps_ * (u.d2[0].val() + u.d2[1].val()) + a1 * u.d1[0].val() +
           a2 * u.d1[1].val();
  }

  double exact(std::span<const double> x) const override {
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1]);
    return std::atan((1.0 - r) / eps_);
  }

  ad::Jet2 exact_jet(ad::Tape& t, std::span<const double> x) const override {
    ad::Jet2 xj = ad::jet_input(t, x[0], 0, 2);
    ad::Jet2 yj = ad::jet_input(t, x[1], 1, 2);
    ad::Jet2 r = ad::jet_sqrt(
        ad::jet_add(ad::jet_mul(xj, xj), ad::jet_mul(yj, yj)));
    ad::Jet2 arg = ad::jet_scale(t.constant(1.0 / eps_),
                                 ad::jet_shift(ad::jet_neg(r), t.one()));
    return ad::jet_atan(arg);
  }

  double feature_distance(std::span<const double> x) const override {
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1]);
    return std::abs(1.0 - r);
  }

 protected:
  bool interior_ok(const double* x) const override {
    // The radial derivative is singular at the origin.
    return x[0] * x[0] + x[1] * x[1] >= 1e-24;
  }
};

// u_t = 10 u_xx + 6 u (1 - u), periodic in x, Gaussian bump at t = 0.
class Reaction final : public PdeProblem {
 public:
  Reaction() {
    name_ = "reaction";
    dim_ = 2;
    lo_ = {0.0, 0.0};
    hi_ = {2.0 * kPi, 1.0};
    layout_ = ChannelLayout::with_derivatives(2, 0b01);  // no u_tt channel
    required_embedding_ = Embedding::kPeriodic;
    has_boundary_ = false;
    has_initial_ = true;
    has_exact_ = false;
    closed_hi_axis_ = 1;
  }

  ad::Value residual(ad::Tape& t, const ad::Jet2& u,
                     std::span<const double>) const override {
    return u.d1[1] - t.constant(10.0) * u.d2[0] -
           t.constant(6.0) * (u.val * (1.0 - u.val));
  }

  // Channels: value, u_x, u_t, u_xx.
  void residual_channels(const double*, double, const double* ch, double& r,
                         double* dr) const override {
    r = ch[2] - 10.0 * ch[3] - 6.0 * ch[0] * (1.0 - ch[0]);
    dr[0] = -6.0 + 12.0 * ch[0];
    dr[1] = 0.0;
    dr[2] = 1.0;
    dr[3] = -10.0;
  }

  double initial_value(std::span<const double> x) const override {
    const double s = kPi / 4.0;
    const double d = x[0] - kPi;
    return std::exp(-d * d / (2.0 * s * s));
  }

  std::vector<double> sample_initial(std::size_t n,
                                     std::uint64_t seed) const override {
    Rng rng(seed);
    std::vector<double> pts;
    pts.reserve(n * 2);
    for (std::size_t i = 0; i < n; ++i) {
      pts.push_back(rng.uniform(0.0, 2.0 * kPi));
      pts.push_back(0.0);
    }
    return pts;
  }
};

}  // namespace

std::unique_ptr<PdeProblem> make_sp1d(double eps) {
  if (!(eps > 0.0) || eps >= 1.0)
    throw std::invalid_argument("sp1d needs eps in (0, 1)");
  return std::make_unique<Sp1d>(eps);
}

std::unique_ptr<PdeProblem> make_ej2d(double eps) {
  if (!(eps > 0.0) || eps >= 1.0)
    throw std::invalid_argument("ej2d needs eps in (0, 1)");
  return std::make_unique<Ej2d>(eps);
}

std::unique_ptr<PdeProblem> make_interior2d(double eps) {
  if (!(eps > 0.0) || eps >= 1.0)
    throw std::invalid_argument("interior2d needs eps in (0, 1)");
  return std::make_unique<Interior2d>(eps);
}

std::unique_ptr<PdeProblem> make_reaction() {
  return std::make_unique<Reaction>();
}

std::unique_ptr<PdeProblem> make_problem(const std::string& name, double eps) {
  if (name == "sp1d") return make_sp1d(eps);
  if (name == "ej2d") return make_ej2d(eps);
  if (name == "interior2d") return make_interior2d(eps);
  if (name == "reaction") return make_reaction();
  throw std::invalid_argument("unknown problem '" + name + "'");
}

}  // namespace gbpinn
