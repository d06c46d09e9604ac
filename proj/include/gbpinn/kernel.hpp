#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "gbpinn/network.hpp"

namespace gbpinn {

inline constexpr int kLanes = 8;

// Which derivative channels a batched evaluation carries per point:
// channel 0 is the value, then d/dx_k for every axis, then d2/dx_k^2 for the
// axes enabled in `d2_mask`. A value-only layout has a single channel.
struct ChannelLayout {
  int dim = 1;
  bool derivatives = false;
  std::uint8_t d2_mask = 0;

  static ChannelLayout value_only(int dim) { return {dim, false, 0}; }
  static ChannelLayout with_derivatives(int dim, std::uint8_t mask) {
    return {dim, true, mask};
  }
  static ChannelLayout full(int dim) {
    return with_derivatives(dim, static_cast<std::uint8_t>((1u << dim) - 1));
  }

  int channels() const {
    if (!derivatives) return 1;
    int c = 1 + dim;
    for (int k = 0; k < dim; ++k)
      if (d2_mask & (1u << k)) ++c;
    return c;
  }
  int d1_channel(int axis) const { return derivatives ? 1 + axis : -1; }
  int d2_channel(int axis) const {
    if (!derivatives || !(d2_mask & (1u << axis))) return -1;
    int c = 1 + dim;
    for (int k = 0; k < axis; ++k)
      if (d2_mask & (1u << k)) ++c;
    return c;
  }
  bool operator==(const ChannelLayout&) const = default;
};

// Fills adjoint seeds for one lane block. `out` and `seeds` are channel-major
// blocks of kLanes doubles per channel; only the first `lanes` entries of a
// channel are valid, the rest are padding. `seeds` arrives zeroed.
using SeedFn = std::function<void(std::size_t base, int lanes,
                                  const double* out, double* seeds)>;

// Batched evaluator for one network: computes value and derivative channels
// for blocks of kLanes points at a time, and optionally the reverse sweep
// that turns per-point adjoint seeds into a parameter gradient.
//
// This is the training hot path. It matches the tape + jet reference
// evaluation to rounding error (the tests pin both paths against each other)
// but runs orders of magnitude faster. All accumulation happens in a fixed
// serial order, so results are deterministic for a given build.
class StageEvaluator {
 public:
  StageEvaluator(NetworkSpec spec, ChannelLayout layout);

  const NetworkSpec& spec() const { return spec_; }
  const ChannelLayout& layout() const { return layout_; }

  // `pts` is point-major (n x dim). Writes n x channels() into `out`.
  void forward(const ParameterStore& params, std::span<const double> pts,
               std::size_t n, double* out);

  // Fused forward + reverse: calls `seed` once per lane block, then
  // accumulates dL/dparams into `grad` (+=). `grad.size()` must equal
  // params.size().
  void forward_backward(const ParameterStore& params,
                        std::span<const double> pts, std::size_t n,
                        const SeedFn& seed, std::span<double> grad);

 private:
  void forward_chunk(const ParameterStore& params, const double* xlanes);
  void backward_chunk(const ParameterStore& params, std::span<double> grad);

  NetworkSpec spec_;
  ChannelLayout layout_;
  int channels_;
  int n_layers_;  // hidden layers + head

  // Per-chunk workspace, indexed [neuron * channels * kLanes].
  std::vector<double> feats_;
  std::vector<std::vector<double>> z_;     // pre-activations per layer
  std::vector<std::vector<double>> a_;     // post-activations per hidden layer
  std::vector<std::vector<double>> abar_;  // adjoints, same shapes as a_
  std::vector<std::vector<double>> cdf_;   // GeLU Phi per hidden neuron-lane
  std::vector<std::vector<double>> pdf_;   // GeLU phi per hidden neuron-lane
  std::vector<double> seeds_;
  std::vector<double> atrans_;  // transposed input block for the reverse sweep
};

}  // namespace gbpinn
