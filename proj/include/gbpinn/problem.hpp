#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gbpinn/jet.hpp"
#include "gbpinn/kernel.hpp"
#include "gbpinn/network.hpp"

namespace gbpinn {

// One PDE benchmark: domain, residual operator, boundary/initial data,
// samplers, and (when known) the exact solution.
//
// The residual exists in two forms that the tests pin against each other:
// a tape form used by the reference loss and the oracles, and a raw-channel
// form used by the batched training kernel.
class PdeProblem {
 public:
  virtual ~PdeProblem() = default;

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  double lo(int axis) const { return lo_[axis]; }
  double hi(int axis) const { return hi_[axis]; }
  double eps() const { return eps_; }

  // Derivative channels the residual needs; networks for this problem are
  // evaluated with exactly this layout.
  const ChannelLayout& channel_layout() const { return layout_; }
  // Input embedding the problem requires (periodic problems reject others).
  Embedding required_embedding() const { return required_embedding_; }

  bool has_boundary() const { return has_boundary_; }
  bool has_initial() const { return has_initial_; }
  bool has_exact() const { return has_exact_; }

  // PDE residual of the field described by jet `u` at point x, on tape.
  virtual ad::Value residual(ad::Tape& t, const ad::Jet2& u,
                             std::span<const double> x) const = 0;

  // Same residual from raw channel values (channel_layout() order) plus its
  // partial derivatives with respect to each channel. `aux` carries the
  // per-point precomputed forcing value where the problem has one.
  virtual void residual_channels(const double* x, double aux,
                                 const double* ch, double& r,
                                 double* dr) const = 0;

  // Precomputed per-point data for residual_channels (forcing terms).
  virtual double interior_aux(std::span<const double> x) const {
    (void)x;
    return 0.0;
  }

  virtual double boundary_value(std::span<const double> x) const;
  virtual double initial_value(std::span<const double> x) const;
  virtual double exact(std::span<const double> x) const;
  virtual ad::Jet2 exact_jet(ad::Tape& t, std::span<const double> x) const;

  // Distance to the nearest sharp solution feature (boundary or interior
  // layer); +inf when the problem has none. Used to pick well-conditioned
  // evaluation points.
  virtual double feature_distance(std::span<const double> x) const;

  // Uniform draws, deterministic in seed. Interior points are strictly
  // inside the domain; boundary points lie on the faces with equal counts
  // per face; initial points lie on the t = 0 line.
  std::vector<double> sample_interior(std::size_t n, std::uint64_t seed) const;
  virtual std::vector<double> sample_boundary(std::size_t n,
                                              std::uint64_t seed) const;
  virtual std::vector<double> sample_initial(std::size_t n,
                                             std::uint64_t seed) const;

 protected:
  virtual bool interior_ok(const double* x) const {
    (void)x;
    return true;
  }

  std::string name_;
  int dim_ = 1;
  std::array<double, 2> lo_{0.0, 0.0};
  std::array<double, 2> hi_{1.0, 1.0};
  double eps_ = 0.0;
  ChannelLayout layout_;
  Embedding required_embedding_ = Embedding::kNone;
  bool has_boundary_ = true;
  bool has_initial_ = false;
  bool has_exact_ = true;
  // Axis whose interior samples include the upper endpoint (time axis of
  // evolution problems); -1 for none.
  int closed_hi_axis_ = -1;
};

// -eps^2 u'' + u = 1 on (0,1), u(0) = u(1) = 0. Boundary layers of width eps
// at both ends.
std::unique_ptr<PdeProblem> make_sp1d(double eps);

// -eps (u_xx + u_yy) + u_x = 0 on (0,1)^2 with an exact separable solution;
// exponential outflow layer at x = 1.
std::unique_ptr<PdeProblem> make_ej2d(double eps);

// -eps Laplacian(u) + e^x (sin y, cos y) . grad(u) = f on (0,1)^2, with
// u = atan((1 - |x|)/eps) manufactured via the forcing term; sharp interior
// layer along the unit circle arc.
std::unique_ptr<PdeProblem> make_interior2d(double eps);

// u_t = 10 u_xx + 6 u (1 - u) on (0, 2*pi) x (0, 1], periodic in x, Gaussian
// initial bump. No exact solution; truth comes from the spectral reference.
std::unique_ptr<PdeProblem> make_reaction();

// Factory by config name: "sp1d", "ej2d", "interior2d", "reaction".
// `eps` is ignored by problems that have no perturbation parameter.
std::unique_ptr<PdeProblem> make_problem(const std::string& name, double eps);

}  // namespace gbpinn
