#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "gbpinn/network.hpp"
#include "gbpinn/rng.hpp"
#include "oracles.hpp"

using namespace gbpinn;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

TEST_SUITE("network") {

TEST_CASE("xavier init bounds, zero biases, determinism") {
  NetworkSpec spec;
  spec.input_dim = 1;
  spec.hidden = {100, 100};
  ParameterStore p = xavier_init(spec, 42);
  REQUIRE(p.layers.size() == 3);
  CHECK(p.trainable);
  CHECK(p.size() == spec.param_count());

  // The 100 -> 100 layer has bound sqrt(6/200).
  const double bound = std::sqrt(6.0 / 200.0);
  CHECK(bound == doctest::Approx(0.1732).epsilon(1e-3));
  const auto& L = p.layers[1];
  CHECK(L.fan_in == 100);
  CHECK(L.fan_out == 100);
  double max_w = 0.0;
  for (int i = 0; i < 100 * 100; ++i)
    max_w = std::max(max_w, std::abs(p.weights(1)[i]));
  CHECK(max_w <= bound);
  CHECK(max_w > 0.9 * bound);  // the draw actually fills the range
  for (int l = 0; l < 3; ++l)
    for (int j = 0; j < p.layers[l].fan_out; ++j)
      CHECK(p.biases(l)[j] == 0.0);

  ParameterStore q = xavier_init(spec, 42);
  CHECK(p.values == q.values);
  ParameterStore r = xavier_init(spec, 43);
  CHECK(p.values != r.values);
}

TEST_CASE("parameter layout is contiguous") {
  NetworkSpec spec;
  spec.input_dim = 2;
  spec.hidden = {5, 3};
  ParameterStore p = xavier_init(spec, 1);
  std::size_t off = 0;
  for (const auto& L : p.layers) {
    CHECK(L.offset == off);
    off += std::size_t(L.fan_in) * L.fan_out + L.fan_out;
  }
  CHECK(off == p.size());
  CHECK(p.size() == spec.param_count());
}

TEST_CASE("fourier features: reference points") {
  std::vector<double> out;
  {
    const double x = 0.0;
    const int freqs[] = {1, 2};
    fourier_encode(std::span(&x, 1), freqs, out);
    REQUIRE(out.size() == 4);
    CHECK(out[0] == 1.0);
    CHECK(out[1] == 1.0);
    CHECK(out[2] == 0.0);
    CHECK(out[3] == 0.0);
  }
  {
    const double x = 0.25;
    const int freqs[] = {1};
    fourier_encode(std::span(&x, 1), freqs, out);
    REQUIRE(out.size() == 2);
    CHECK(std::abs(out[0]) < 1e-15);  // cos(pi/2)
    CHECK(out[1] == 1.0);             // sin(pi/2)
  }
  {
    // 2D, freq-major then axis-minor, cos block before sin block.
    const double x[] = {0.5, 0.5};
    const int freqs[] = {1, 2};
    fourier_encode(std::span(x, 2), freqs, out);
    REQUIRE(out.size() == 8);
    CHECK(out[0] == doctest::Approx(-1.0).epsilon(1e-15));  // cos(pi)
    CHECK(out[1] == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(out[2] == doctest::Approx(1.0).epsilon(1e-15));   // cos(2 pi)
    CHECK(out[3] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(out[4]) < 1e-15);                        // sin(pi)
    CHECK(std::abs(out[5]) < 1e-15);
    CHECK(std::abs(out[6]) < 1e-14);                        // sin(2 pi)
    CHECK(std::abs(out[7]) < 1e-14);
  }
  {
    const double x = 0.3;
    CHECK_THROWS_AS(fourier_encode(std::span(&x, 1), std::span<const int>(), out),
                    std::invalid_argument);
  }
}

TEST_CASE("fourier feature width") {
  NetworkSpec spec;
  spec.input_dim = 2;
  spec.embedding = Embedding::kFourier;
  spec.frequencies = {1, 2, 3, 4, 5};
  spec.hidden = {4};
  CHECK(spec.feature_dim() == 2 * 2 * 5);
}

TEST_CASE("periodic embedding: reference points and exact periodicity") {
  auto e0 = periodic_embed(0.0, 0.0);
  CHECK(e0[0] == 0.0);
  CHECK(e0[1] == 1.0);
  CHECK(e0[2] == 0.0);

  // One full period lands on the bitwise-identical embedding.
  auto ep = periodic_embed(kTwoPi, 0.4);
  auto eq = periodic_embed(0.0, 0.4);
  CHECK(ep[0] == eq[0]);
  CHECK(ep[1] == eq[1]);
  CHECK(ep[2] == eq[2]);

  auto eh = periodic_embed(std::numbers::pi / 2, 0.3);
  CHECK(eh[0] == 1.0);
  CHECK(std::abs(eh[1]) < 1e-15);
  CHECK(eh[2] == 0.3);

  // Negative arguments reduce into [0, 2 pi).
  auto en = periodic_embed(-1.0, 0.0);
  CHECK(en[0] == doctest::Approx(std::sin(kTwoPi - 1.0)).epsilon(1e-14));
  CHECK(en[1] == doctest::Approx(std::cos(kTwoPi - 1.0)).epsilon(1e-14));
}

TEST_CASE("periodic networks repeat after a period") {
  NetworkSpec spec = parse_arch("P[8]*2", 2);
  ParameterStore p = xavier_init(spec, 5);

  const double a[] = {0.0, 0.7};
  const double b[] = {kTwoPi, 0.7};
  CHECK(forward_value(spec, p, a) == forward_value(spec, p, b));

  // x + 2 pi itself rounds, so away from exact multiples the match is only
  // as tight as that rounding allows.
  Rng rng(17);
  for (int i = 0; i < 20; ++i) {
    const double x[] = {rng.uniform(0.0, kTwoPi), rng.uniform(0.0, 1.0)};
    const double y[] = {x[0] + kTwoPi, x[1]};
    CHECK(forward_value(spec, p, x) ==
          doctest::Approx(forward_value(spec, p, y)).epsilon(1e-12));
  }
}

TEST_CASE("embed_point dispatches to the right embedding") {
  std::vector<double> out;
  NetworkSpec plain;
  plain.input_dim = 2;
  plain.hidden = {3};
  const double x[] = {0.2, 0.9};
  embed_point(plain, x, out);
  CHECK(out == std::vector<double>{0.2, 0.9});

  NetworkSpec four = parse_arch("F3[4]", 1);
  std::vector<double> expect;
  fourier_encode(std::span(x, 1), four.frequencies, expect);
  embed_point(four, std::span(x, 1), out);
  CHECK(out == expect);

  NetworkSpec per = parse_arch("P[4]", 2);
  embed_point(per, x, out);
  auto e = periodic_embed(x[0], x[1]);
  CHECK(out == std::vector<double>{e[0], e[1], e[2]});
}

TEST_CASE("identity-like network: value x, slope 1, curvature 0") {
  NetworkSpec spec;
  spec.input_dim = 1;
  spec.hidden = {2};
  const double w[] = {1.0};
  ParameterStore p = oracle::passthrough_store(spec, w);
  Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    const double x = rng.uniform(-2.0, 2.0);
    CHECK(forward_value(spec, p, std::span(&x, 1)) ==
          doctest::Approx(x).epsilon(1e-13));
    ad::Tape t;
    auto pv = push_parameters(t, p);
    ad::Jet2 u = network_jet(t, spec, pv, std::span(&x, 1));
    CHECK(u.d1[0].val() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::abs(u.d2[0].val()) < 1e-12);
  }
}

TEST_CASE("fourier network reproduces sin(2 pi x) and its derivatives") {
  NetworkSpec spec;
  spec.input_dim = 1;
  spec.embedding = Embedding::kFourier;
  spec.frequencies = {1};
  spec.hidden = {2};
  const double w[] = {0.0, 1.0};  // pick the sin feature
  ParameterStore p = oracle::passthrough_store(spec, w);

  Rng rng(10);
  std::vector<double> d2s, closed;
  for (int i = 0; i < 10; ++i) {
    const double x = rng.uniform(0.0, 1.0);
    ad::Tape t;
    auto pv = push_parameters(t, p);
    ad::Jet2 u = network_jet(t, spec, pv, std::span(&x, 1));
    CHECK(u.val.val() == doctest::Approx(std::sin(kTwoPi * x)).epsilon(1e-12));
    CHECK(u.d1[0].val() ==
          doctest::Approx(kTwoPi * std::cos(kTwoPi * x)).epsilon(1e-10));
    d2s.push_back(u.d2[0].val());
    closed.push_back(-kTwoPi * kTwoPi * std::sin(kTwoPi * x));
  }
  CHECK(oracle::rel_norm(d2s, closed) < 1e-8);
}

TEST_CASE("forward_value agrees with the tape network and the naive oracle") {
  Rng rng(2024);
  std::vector<NetworkSpec> cases = {
      parse_arch("[7]*2", 1),  parse_arch("[5][9]", 2), parse_arch("F4[6]", 1),
      parse_arch("F2[5]*2", 2), parse_arch("P[6]*2", 2),
  };
  for (const auto& spec : cases) {
    ParameterStore p = xavier_init(spec, rng.next_u64());
    for (int i = 0; i < 10; ++i) {
      std::vector<double> x(spec.input_dim);
      for (double& v : x) v = rng.uniform(0.0, 1.0);
      const double direct = forward_value(spec, p, x);
      ad::Tape t;
      auto pv = push_parameters(t, p);
      ad::Jet2 u = network_jet(t, spec, pv, x);
      CHECK(direct == doctest::Approx(u.val.val()).epsilon(1e-12));
      CHECK(direct ==
            doctest::Approx(oracle::naive_forward(spec, p, x)).epsilon(1e-12));
      // All jet channels stay finite.
      for (int k = 0; k < spec.input_dim; ++k) {
        CHECK(std::isfinite(u.d1[k].val()));
        CHECK(std::isfinite(u.d2[k].val()));
      }
    }
  }
}

TEST_CASE("zero parameters give the zero function") {
  NetworkSpec spec = parse_arch("[5]*2", 1);
  ParameterStore p = xavier_init(spec, 0);
  std::fill(p.values.begin(), p.values.end(), 0.0);
  const double x = 0.8;
  CHECK(forward_value(spec, p, std::span(&x, 1)) == 0.0);
}

TEST_CASE("gelu scalar matches its definition") {
  Rng rng(8);
  for (int i = 0; i < 50; ++i) {
    const double x = rng.uniform(-4.0, 4.0);
    CHECK(gelu(x) == doctest::Approx(oracle::naive_gelu(x)).epsilon(1e-15));
  }
  CHECK(gelu(0.0) == 0.0);
}

TEST_CASE("arch strings parse and format") {
  NetworkSpec a = parse_arch("[100]*3", 1);
  CHECK(a.hidden == std::vector<int>{100, 100, 100});
  CHECK(a.embedding == Embedding::kNone);
  CHECK(format_arch(a) == "[100]*3");

  NetworkSpec b = parse_arch("F10[50]*2", 1);
  CHECK(b.embedding == Embedding::kFourier);
  REQUIRE(b.frequencies.size() == 10);
  CHECK(b.frequencies.front() == 1);
  CHECK(b.frequencies.back() == 10);
  CHECK(b.hidden == std::vector<int>{50, 50});
  CHECK(format_arch(b) == "F10[50]*2");

  NetworkSpec c = parse_arch("P[200]*3", 2);
  CHECK(c.embedding == Embedding::kPeriodic);
  CHECK(c.hidden == std::vector<int>{200, 200, 200});
  CHECK(format_arch(c) == "P[200]*3");

  NetworkSpec d = parse_arch("[100][50]", 2);
  CHECK(d.hidden == std::vector<int>{100, 50});
  CHECK(format_arch(d) == "[100][50]");

  NetworkSpec e = parse_arch("[8]*2[16]", 1);
  CHECK(e.hidden == std::vector<int>{8, 8, 16});

  CHECK(format_arch(parse_arch("[512]*6", 1)) == "[512]*6");
}

TEST_CASE("malformed arch strings are rejected") {
  for (const char* s : {"", "100", "[0]", "[10", "[10]x", "F[10]", "F0[10]",
                        "*2", "[10]*", "[10]*0", "[]"}) {
    CAPTURE(s);
    CHECK_THROWS_AS((void)parse_arch(s, 1), std::invalid_argument);
  }
  // Periodic embedding needs a (x, t) input.
  CHECK_THROWS_AS((void)parse_arch("P[10]", 1), std::invalid_argument);
}

TEST_CASE("spec validation") {
  NetworkSpec s;
  s.input_dim = 1;
  s.hidden = {};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.hidden = {4};
  s.input_dim = 3;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.input_dim = 1;
  s.frequencies = {1};  // frequencies without the Fourier embedding
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.embedding = Embedding::kFourier;
  s.frequencies = {};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.frequencies = {2, 2};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.frequencies = {3, 1};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.frequencies = {1, 2, 5};
  CHECK_NOTHROW(s.validate());
}

}  // TEST_SUITE
