#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gbpinn/jet.hpp"
#include "gbpinn/tape.hpp"

namespace gbpinn {

enum class Embedding : std::uint8_t {
  kNone,      // raw coordinates
  kFourier,   // per-axis cos/sin features at integer frequencies
  kPeriodic,  // (sin x, cos x, t) with range reduction; spatial period 2*pi
};

// Architecture of one network: scalar output, GeLU hidden activations.
struct NetworkSpec {
  int input_dim = 1;
  Embedding embedding = Embedding::kNone;
  std::vector<int> frequencies;  // Fourier only; e.g. 1..10
  std::vector<int> hidden;       // at least one layer, widths >= 1

  // Width of the embedded feature vector feeding the first layer.
  int feature_dim() const;
  std::size_t param_count() const;
  void validate() const;  // throws std::invalid_argument
};

// Flat parameter vector plus the layer layout to index into it.
// Layer l occupies [offset, offset + fan_in*fan_out + fan_out): weights
// row-major (out, in), then biases. `trainable` marks whether the owning
// stage is still being optimized; frozen stores enter tapes as constants.
struct ParameterStore {
  struct Layer {
    std::size_t offset;
    int fan_in;
    int fan_out;
  };

  std::vector<double> values;
  std::vector<Layer> layers;
  bool trainable = true;

  std::size_t size() const { return values.size(); }

  const double* weights(int l) const { return values.data() + layers[l].offset; }
  const double* biases(int l) const {
    const Layer& L = layers[l];
    return values.data() + L.offset + std::size_t(L.fan_in) * L.fan_out;
  }
};

// Xavier-uniform weights (bound sqrt(6/(fan_in+fan_out))), zero biases.
// Deterministic in (spec, seed): same pair gives bitwise-identical values.
ParameterStore xavier_init(const NetworkSpec& spec, std::uint64_t seed);

// Per-axis Fourier features: [cos block | sin block], each block ordered
// frequency-major then axis-minor, angles 2*pi*f*x. Output length
// 2 * dim(x) * |freqs|. Throws std::invalid_argument on an empty list.
void fourier_encode(std::span<const double> x, std::span<const int> freqs,
                    std::vector<double>& out);

// Periodic embedding (sin r, cos r, t) with r = x reduced modulo 2*pi, so
// coordinates an exact period apart embed bitwise identically.
std::array<double, 3> periodic_embed(double x, double t);

// Embedded features for an input point.
void embed_point(const NetworkSpec& spec, std::span<const double> x,
                 std::vector<double>& out);

// Plain double-precision forward pass (no derivatives).
double forward_value(const NetworkSpec& spec, const ParameterStore& params,
                     std::span<const double> x);

// Pushes the store onto a tape: parameter nodes with slots [slot0, ...) when
// trainable, constants otherwise. Returns one Value per scalar parameter.
std::vector<ad::Value> push_parameters(ad::Tape& t, const ParameterStore& p,
                                       std::uint32_t slot0 = 0);

// Full second-order jet of the network output at x, recorded on `t`.
// `params` must come from push_parameters with the same spec.
ad::Jet2 network_jet(ad::Tape& t, const NetworkSpec& spec,
                     std::span<const ad::Value> params,
                     std::span<const double> x);

double gelu(double x);

// Architecture strings used in configs and tables: "[100]*3" is three hidden
// layers of width 100, "F10[50]*2" prepends Fourier features with
// frequencies 1..10, "P[200]*3" the periodic embedding. Groups concatenate:
// "[100][50]" is widths {100, 50}.
NetworkSpec parse_arch(const std::string& s, int input_dim);
std::string format_arch(const NetworkSpec& spec);

}  // namespace gbpinn
