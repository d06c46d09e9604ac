#pragma once

// Hand-rolled cross-checks shared by the suites: central finite differences,
// a straight-line network forward pass, and a few helpers for building nets
// that compute known closed forms exactly. Everything here is deliberately
// naive and independent of the tape/jet/kernel code paths it is used to
// verify.

#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gbpinn/network.hpp"
#include "gbpinn/rng.hpp"

namespace oracle {

using ScalarFn = std::function<double(double)>;

inline double fd1(const ScalarFn& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double fd2(const ScalarFn& f, double x, double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

// || a - b || / (|| b || + tiny), 2-norm over the whole span.
inline double rel_norm(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("rel_norm size");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    num += d * d;
    den += b[i] * b[i];
  }
  return std::sqrt(num) / (std::sqrt(den) + 1e-300);
}

inline double max_abs_diff(std::span<const double> a,
                           std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double naive_gelu(double x) {
  return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0)));
}

// Plain loops-and-std::math forward pass, including the embeddings.
inline double naive_forward(const gbpinn::NetworkSpec& spec,
                            const gbpinn::ParameterStore& p,
                            std::span<const double> x) {
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> act;
  switch (spec.embedding) {
    case gbpinn::Embedding::kNone:
      act.assign(x.begin(), x.end());
      break;
    case gbpinn::Embedding::kFourier:
      for (int f : spec.frequencies)
        for (double xi : x) act.push_back(std::cos(two_pi * f * xi));
      for (int f : spec.frequencies)
        for (double xi : x) act.push_back(std::sin(two_pi * f * xi));
      break;
    case gbpinn::Embedding::kPeriodic: {
      double r = x[0] - two_pi * std::floor(x[0] / two_pi);
      if (r >= two_pi) r -= two_pi;
      if (r < 0.0) r = 0.0;
      act = {std::sin(r), std::cos(r), x[1]};
      break;
    }
  }
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const auto& L = p.layers[l];
    const double* W = p.weights(static_cast<int>(l));
    const double* b = p.biases(static_cast<int>(l));
    std::vector<double> out(static_cast<std::size_t>(L.fan_out));
    for (int j = 0; j < L.fan_out; ++j) {
      double s = b[j];
      for (int i = 0; i < L.fan_in; ++i)
        s += W[static_cast<std::size_t>(j) * L.fan_in + i] * act[i];
      out[static_cast<std::size_t>(j)] =
          l + 1 < p.layers.size() ? naive_gelu(s) : s;
    }
    act = std::move(out);
  }
  return act[0];
}

// Store for a net that computes w . features(x) exactly. Uses the identity
// GeLU(s) - GeLU(-s) = s: one hidden layer of width 2 with pre-activations
// +-(w . features) and a [1, -1] head. spec.hidden must be {2}.
inline gbpinn::ParameterStore passthrough_store(const gbpinn::NetworkSpec& spec,
                                                std::span<const double> w) {
  if (spec.hidden != std::vector<int>{2})
    throw std::invalid_argument("passthrough needs hidden {2}");
  const int f = spec.feature_dim();
  if (static_cast<int>(w.size()) != f)
    throw std::invalid_argument("weight length != feature dim");
  gbpinn::ParameterStore p = gbpinn::xavier_init(spec, 0);
  std::fill(p.values.begin(), p.values.end(), 0.0);
  for (int i = 0; i < f; ++i) {
    p.values[p.layers[0].offset + i] = w[i];
    p.values[p.layers[0].offset + f + i] = -w[i];
  }
  p.values[p.layers[1].offset + 0] = 1.0;
  p.values[p.layers[1].offset + 1] = -1.0;
  return p;
}

inline gbpinn::NetworkSpec random_mlp(gbpinn::Rng& rng, int dim) {
  gbpinn::NetworkSpec spec;
  spec.input_dim = dim;
  const int depth = 1 + static_cast<int>(rng.below(3));
  for (int l = 0; l < depth; ++l)
    spec.hidden.push_back(3 + static_cast<int>(rng.below(8)));
  return spec;
}

inline std::vector<double> random_points(gbpinn::Rng& rng, std::size_t n,
                                         int dim, double lo, double hi) {
  std::vector<double> pts(n * static_cast<std::size_t>(dim));
  for (double& v : pts) v = rng.uniform(lo, hi);
  return pts;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Minimal XML sanity check: angle brackets balance, every opened tag is
// closed in LIFO order. Enough to catch broken SVG emission.
inline bool xml_well_formed(const std::string& s) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '<') {
      ++i;
      continue;
    }
    std::size_t j = s.find('>', i);
    if (j == std::string::npos) return false;
    std::string tag = s.substr(i + 1, j - i - 1);
    i = j + 1;
    if (tag.empty()) return false;
    if (tag[0] == '?' || tag[0] == '!') continue;  // declaration / comment
    if (tag.back() == '/') continue;               // self-closing
    if (tag[0] == '/') {
      if (stack.empty()) return false;
      if (stack.back() != tag.substr(1)) return false;
      stack.pop_back();
    } else {
      stack.push_back(tag.substr(0, tag.find_first_of(" \t\n")));
    }
  }
  return stack.empty();
}

}  // namespace oracle
