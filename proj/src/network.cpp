#include "gbpinn/network.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gbpinn/rng.hpp"

namespace gbpinn {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInvSqrt2 = 0.7071067811865476;
}  // namespace

int NetworkSpec::feature_dim() const {
  switch (embedding) {
    case Embedding::kNone:
      return input_dim;
    case Embedding::kFourier:
      return 2 * input_dim * static_cast<int>(frequencies.size());
    case Embedding::kPeriodic:
      return 3;
  }
  return 0;
}

std::size_t NetworkSpec::param_count() const {
  std::size_t n = 0;
  int in = feature_dim();
  for (int w : hidden) {
    n += std::size_t(in + 1) * w;
    in = w;
  }
  n += std::size_t(in + 1) * 1;
  return n;
}

void NetworkSpec::validate() const {
  if (input_dim < 1 || input_dim > 2)
    throw std::invalid_argument("network input_dim must be 1 or 2");
  if (hidden.empty())
    throw std::invalid_argument("network needs at least one hidden layer");
  for (int w : hidden)
    if (w < 1) throw std::invalid_argument("hidden width must be positive");
  if (embedding == Embedding::kFourier) {
    if (frequencies.empty())
      throw std::invalid_argument("Fourier embedding needs frequencies");
    for (std::size_t i = 0; i < frequencies.size(); ++i) {
      if (frequencies[i] < 1)
        throw std::invalid_argument("Fourier frequency must be >= 1");
      if (i > 0 && frequencies[i] <= frequencies[i - 1])
        throw std::invalid_argument("frequencies must be strictly increasing");
    }
  } else if (!frequencies.empty()) {
    throw std::invalid_argument("frequencies given without Fourier embedding");
  }
  if (embedding == Embedding::kPeriodic && input_dim != 2)
    throw std::invalid_argument("periodic embedding expects (x, t) input");
}

ParameterStore xavier_init(const NetworkSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  ParameterStore p;
  p.values.reserve(spec.param_count());

  auto push_layer = [&](int in, int out) {
    p.layers.push_back({p.values.size(), in, out});
    const double bound = std::sqrt(6.0 / (in + out));
    for (int i = 0; i < in * out; ++i)
      p.values.push_back(rng.uniform(-bound, bound));
    for (int i = 0; i < out; ++i) p.values.push_back(0.0);
  };

  int in = spec.feature_dim();
  for (int w : spec.hidden) {
    push_layer(in, w);
    in = w;
  }
  push_layer(in, 1);
  return p;
}

void fourier_encode(std::span<const double> x, std::span<const int> freqs,
                    std::vector<double>& out) {
  if (freqs.empty())
    throw std::invalid_argument("fourier_encode: empty frequency list");
  out.clear();
  out.reserve(2 * x.size() * freqs.size());
  for (int f : freqs)
    for (double xi : x) out.push_back(std::cos(kTwoPi * f * xi));
  for (int f : freqs)
    for (double xi : x) out.push_back(std::sin(kTwoPi * f * xi));
}

namespace {
// Reduce x into [0, 2*pi). Exact multiples of the period land on the same
// representable value, e.g. reduce(2*pi) == reduce(0) bitwise.
double reduce_period(double x) {
  double r = x - kTwoPi * std::floor(x / kTwoPi);
  if (r >= kTwoPi) r -= kTwoPi;  // guards against floor rounding at the seam
  if (r < 0.0) r = 0.0;
  return r;
}
}  // namespace

std::array<double, 3> periodic_embed(double x, double t) {
  const double r = reduce_period(x);
  return {std::sin(r), std::cos(r), t};
}

void embed_point(const NetworkSpec& spec, std::span<const double> x,
                 std::vector<double>& out) {
  switch (spec.embedding) {
    case Embedding::kNone:
      out.assign(x.begin(), x.end());
      break;
    case Embedding::kFourier:
      fourier_encode(x, spec.frequencies, out);
      break;
    case Embedding::kPeriodic: {
      auto e = periodic_embed(x[0], x[1]);
      out.assign(e.begin(), e.end());
      break;
    }
  }
}

double gelu(double x) {
  return x * 0.5 * (1.0 + std::erf(x * kInvSqrt2));
}

double forward_value(const NetworkSpec& spec, const ParameterStore& params,
                     std::span<const double> x) {
  std::vector<double> act, next;
  embed_point(spec, x, act);
  const int n_layers = static_cast<int>(params.layers.size());
  for (int l = 0; l < n_layers; ++l) {
    const auto& L = params.layers[l];
    const double* W = params.weights(l);
    const double* b = params.biases(l);
    next.assign(L.fan_out, 0.0);
    for (int j = 0; j < L.fan_out; ++j) {
      double s = b[j];
      const double* row = W + std::size_t(j) * L.fan_in;
      for (int i = 0; i < L.fan_in; ++i) s += row[i] * act[i];
      next[j] = (l + 1 < n_layers) ? gelu(s) : s;
    }
    act.swap(next);
  }
  return act[0];
}

std::vector<ad::Value> push_parameters(ad::Tape& t, const ParameterStore& p,
                                       std::uint32_t slot0) {
  std::vector<ad::Value> vals;
  vals.reserve(p.values.size());
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    vals.push_back(p.trainable
                       ? t.parameter(p.values[i], slot0 + std::uint32_t(i))
                       : t.constant(p.values[i]));
  }
  return vals;
}

namespace {

std::vector<ad::Jet2> embed_jets(ad::Tape& t, const NetworkSpec& spec,
                                 std::span<const double> x) {
  const int dim = spec.input_dim;
  std::vector<ad::Jet2> feats;
  switch (spec.embedding) {
    case Embedding::kNone:
      for (int k = 0; k < dim; ++k)
        feats.push_back(ad::jet_input(t, x[k], k, dim));
      break;
    case Embedding::kFourier: {
      std::vector<ad::Jet2> axes;
      for (int k = 0; k < dim; ++k)
        axes.push_back(ad::jet_input(t, x[k], k, dim));
      std::vector<ad::Jet2> angles;
      for (int f : spec.frequencies)
        for (int k = 0; k < dim; ++k)
          angles.push_back(ad::jet_scale(t.constant(kTwoPi * f), axes[k]));
      for (const auto& a : angles) feats.push_back(ad::jet_cos(a));
      for (const auto& a : angles) feats.push_back(ad::jet_sin(a));
      break;
    }
    case Embedding::kPeriodic: {
      // Differentiating through the reduction: dr/dx = 1 away from seams.
      ad::Jet2 xr = ad::jet_input(t, reduce_period(x[0]), 0, dim);
      feats.push_back(ad::jet_sin(xr));
      feats.push_back(ad::jet_cos(xr));
      feats.push_back(ad::jet_input(t, x[1], 1, dim));
      break;
    }
  }
  return feats;
}

}  // namespace

ad::Jet2 network_jet(ad::Tape& t, const NetworkSpec& spec,
                     std::span<const ad::Value> params,
                     std::span<const double> x) {
  if (params.size() != spec.param_count())
    throw ad::UsageError("parameter count does not match network spec");

  std::vector<ad::Jet2> act = embed_jets(t, spec, x);
  std::vector<ad::Jet2> next;

  std::size_t off = 0;
  int in = spec.feature_dim();
  const int n_layers = static_cast<int>(spec.hidden.size()) + 1;
  for (int l = 0; l < n_layers; ++l) {
    const int out = (l < n_layers - 1) ? spec.hidden[l] : 1;
    next.clear();
    for (int j = 0; j < out; ++j) {
      ad::Value bias = params[off + std::size_t(in) * out + j];
      ad::Jet2 s = ad::jet_const(t, bias, spec.input_dim);
      for (int i = 0; i < in; ++i)
        s = ad::jet_add(s, ad::jet_scale(params[off + std::size_t(j) * in + i],
                                         act[i]));
      next.push_back((l + 1 < n_layers) ? ad::jet_gelu(s) : s);
    }
    act.swap(next);
    off += std::size_t(in + 1) * out;
    in = out;
  }
  return act[0];
}

NetworkSpec parse_arch(const std::string& s, int input_dim) {
  NetworkSpec spec;
  spec.input_dim = input_dim;
  std::size_t i = 0;
  auto fail = [&](const std::string& why) {
    throw std::invalid_argument("bad architecture string '" + s + "': " + why);
  };
  auto read_int = [&]() {
    if (i >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i])))
      fail("expected digit at position " + std::to_string(i));
    long v = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
      v = v * 10 + (s[i] - '0');
      if (v > 1'000'000) fail("number too large");
      ++i;
    }
    return static_cast<int>(v);
  };

  if (i < s.size() && s[i] == 'F') {
    ++i;
    spec.embedding = Embedding::kFourier;
    const int kmax = read_int();
    if (kmax < 1) fail("Fourier order must be positive");
    for (int f = 1; f <= kmax; ++f) spec.frequencies.push_back(f);
  } else if (i < s.size() && s[i] == 'P') {
    ++i;
    spec.embedding = Embedding::kPeriodic;
  }

  while (i < s.size()) {
    if (s[i] != '[') fail("expected '['");
    ++i;
    const int w = read_int();
    if (i >= s.size() || s[i] != ']') fail("expected ']'");
    ++i;
    int rep = 1;
    if (i < s.size() && s[i] == '*') {
      ++i;
      rep = read_int();
      if (rep < 1) fail("repeat count must be positive");
    }
    for (int r = 0; r < rep; ++r) spec.hidden.push_back(w);
  }
  if (spec.hidden.empty()) fail("no hidden layers");
  spec.validate();
  return spec;
}

std::string format_arch(const NetworkSpec& spec) {
  std::string out;
  if (spec.embedding == Embedding::kFourier) {
    for (std::size_t k = 0; k < spec.frequencies.size(); ++k)
      if (spec.frequencies[k] != static_cast<int>(k) + 1)
        throw std::invalid_argument(
            "only contiguous 1..k frequency lists have a string form");
    out += "F" + std::to_string(spec.frequencies.size());
  } else if (spec.embedding == Embedding::kPeriodic) {
    out += "P";
  }
  for (std::size_t i = 0; i < spec.hidden.size();) {
    std::size_t j = i;
    while (j < spec.hidden.size() && spec.hidden[j] == spec.hidden[i]) ++j;
    out += "[" + std::to_string(spec.hidden[i]) + "]";
    if (j - i > 1) out += "*" + std::to_string(j - i);
    i = j;
  }
  return out;
}

}  // namespace gbpinn
