#include "gbpinn/reference.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <numbers>
#include <stdexcept>

#include "gbpinn/rng.hpp"

namespace gbpinn {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNu = 10.0;     // diffusion coefficient
constexpr double kGrowth = 6.0;  // logistic growth rate

double initial_bump(double x) {
  const double s = kPi / 4.0;
  const double d = x - kPi;
  return std::exp(-d * d / (2.0 * s * s));
}

using cd = std::complex<double>;

// One spectral solve; returns values on the eval lattice (x-major).
std::vector<double> spectral_solve(std::size_t N, std::size_t steps,
                                   std::size_t eval_nx, std::size_t eval_nt) {
  if ((eval_nt < 2) || steps % (eval_nt - 1) != 0)
    throw std::invalid_argument(
        "time steps must be a multiple of the eval intervals");
  const std::size_t per_snap = steps / (eval_nt - 1);
  const double dt = 1.0 / double(steps);

  std::vector<cd> uhat(N), work(N), k1(N), k2(N), k3(N), k4(N), stage(N);
  std::vector<double> E(N), E2(N), kmode(N);
  for (std::size_t m = 0; m < N; ++m) {
    const double k = (m <= N / 2) ? double(m) : double(m) - double(N);
    kmode[m] = k;
    const double L = -kNu * k * k;
    E[m] = std::exp(L * dt / 2.0);
    E2[m] = std::exp(L * dt);
  }

  fftw_plan fwd = fftw_plan_dft_1d(
      int(N), reinterpret_cast<fftw_complex*>(work.data()),
      reinterpret_cast<fftw_complex*>(work.data()), FFTW_FORWARD,
      FFTW_ESTIMATE);
  fftw_plan bwd = fftw_plan_dft_1d(
      int(N), reinterpret_cast<fftw_complex*>(work.data()),
      reinterpret_cast<fftw_complex*>(work.data()), FFTW_BACKWARD,
      FFTW_ESTIMATE);

  // F(uhat) = fft(6 u (1-u)) / N, evaluated pointwise in physical space.
  auto nonlinear = [&](const std::vector<cd>& in, std::vector<cd>& out) {
    std::memcpy(work.data(), in.data(), N * sizeof(cd));
    fftw_execute(bwd);  // unnormalized inverse: physical u values
    for (std::size_t j = 0; j < N; ++j) {
      const cd u = work[j];
      work[j] = kGrowth * u * (1.0 - u);
    }
    fftw_execute(fwd);
    const double inv = 1.0 / double(N);
    for (std::size_t m = 0; m < N; ++m) out[m] = work[m] * inv;
  };

  // Initial condition in spectral space.
  for (std::size_t j = 0; j < N; ++j)
    work[j] = initial_bump(2.0 * kPi * double(j) / double(N));
  fftw_execute(fwd);
  for (std::size_t m = 0; m < N; ++m) uhat[m] = work[m] / double(N);

  std::vector<double> out(eval_nx * eval_nt);
  auto snapshot = [&](std::size_t it) {
    for (std::size_t ie = 0; ie < eval_nx; ++ie) {
      const double x = 2.0 * kPi * double(ie) / double(eval_nx - 1);
      cd s = 0.0;
      for (std::size_t m = 0; m < N; ++m)
        s += uhat[m] * std::exp(cd(0.0, kmode[m] * x));
      out[ie * eval_nt + it] = s.real();
    }
  };

  snapshot(0);
  for (std::size_t s = 0; s < steps; ++s) {
    nonlinear(uhat, k1);
    for (std::size_t m = 0; m < N; ++m)
      stage[m] = E[m] * (uhat[m] + (dt / 2.0) * k1[m]);
    nonlinear(stage, k2);
    for (std::size_t m = 0; m < N; ++m)
      stage[m] = E[m] * uhat[m] + (dt / 2.0) * k2[m];
    nonlinear(stage, k3);
    for (std::size_t m = 0; m < N; ++m)
      stage[m] = E2[m] * uhat[m] + dt * (E[m] * k3[m]);
    nonlinear(stage, k4);
    for (std::size_t m = 0; m < N; ++m)
      uhat[m] = E2[m] * uhat[m] +
                (dt / 6.0) * (E2[m] * k1[m] + 2.0 * E[m] * (k2[m] + k3[m]) +
                              k4[m]);
    if ((s + 1) % per_snap == 0) snapshot((s + 1) / per_snap);
  }

  fftw_destroy_plan(fwd);
  fftw_destroy_plan(bwd);
  return out;
}

double rel_l2_root(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    num += d * d;
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

}  // namespace

ReferenceGrid solve_reaction_reference(const ReferenceOptions& opt) {
  if (opt.solver_nx < 256 || opt.solver_steps < 1000)
    throw std::invalid_argument(
        "reference resolution below the trusted minimum (256 modes, 1000 steps)");
  if (opt.eval_nx < 2 || opt.eval_nt < 2)
    throw std::invalid_argument("evaluation lattice too small");

  std::vector<double> base =
      spectral_solve(opt.solver_nx, opt.solver_steps, opt.eval_nx, opt.eval_nt);

  if (opt.verify) {
    const std::vector<double> finer_x = spectral_solve(
        2 * opt.solver_nx, opt.solver_steps, opt.eval_nx, opt.eval_nt);
    const std::vector<double> finer_t = spectral_solve(
        opt.solver_nx, 2 * opt.solver_steps, opt.eval_nx, opt.eval_nt);
    const double dx = rel_l2_root(base, finer_x);
    const double dt = rel_l2_root(base, finer_t);
    if (dx > 1e-6)
      throw std::runtime_error(
          "reference not converged in space: doubling modes moved the "
          "solution by " +
          std::to_string(dx));
    if (dt > 1e-8)
      throw std::runtime_error(
          "reference not converged in time: halving the step moved the "
          "solution by " +
          std::to_string(dt));
    double lo = base[0], hi = base[0];
    for (double v : base) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (lo <= 0.0 || hi > 1.0 + 1e-9)
      throw std::runtime_error("reference violates the (0, 1] solution range");
  }

  ReferenceGrid g;
  g.nx = opt.eval_nx;
  g.nt = opt.eval_nt;
  g.solver_nx = opt.solver_nx;
  g.solver_steps = opt.solver_steps;
  g.values = std::move(base);
  return g;
}

namespace {
constexpr char kMagic[8] = {'G', 'B', 'R', 'D', 'R', 'E', 'F', '1'};
}

void save_reference(const ReferenceGrid& g, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot write " + path);
  const std::uint64_t dims[4] = {g.nx, g.nt, g.solver_nx, g.solver_steps};
  const std::uint64_t checksum =
      fnv1a64(g.values.data(), g.values.size() * sizeof(double));
  bool ok = std::fwrite(kMagic, 1, 8, f) == 8 &&
            std::fwrite(dims, sizeof(dims), 1, f) == 1 &&
            std::fwrite(&checksum, sizeof(checksum), 1, f) == 1 &&
            std::fwrite(g.values.data(), sizeof(double), g.values.size(), f) ==
                g.values.size();
  ok = (std::fclose(f) == 0) && ok;
  if (!ok) throw std::runtime_error("short write to " + path);
}

ReferenceGrid load_reference(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw std::runtime_error("cannot read " + path);
  char magic[8];
  std::uint64_t dims[4];
  std::uint64_t checksum = 0;
  ReferenceGrid g;
  bool ok = std::fread(magic, 1, 8, f) == 8 &&
            std::memcmp(magic, kMagic, 8) == 0 &&
            std::fread(dims, sizeof(dims), 1, f) == 1 &&
            std::fread(&checksum, sizeof(checksum), 1, f) == 1;
  if (ok) {
    g.nx = dims[0];
    g.nt = dims[1];
    g.solver_nx = dims[2];
    g.solver_steps = dims[3];
    g.values.resize(g.nx * g.nt);
    ok = std::fread(g.values.data(), sizeof(double), g.values.size(), f) ==
         g.values.size();
  }
  std::fclose(f);
  if (!ok) throw std::runtime_error("corrupt reference file " + path);
  if (fnv1a64(g.values.data(), g.values.size() * sizeof(double)) != checksum)
    throw std::runtime_error("reference checksum mismatch in " + path);
  return g;
}

std::string reference_cache_name(const ReferenceOptions& opt) {
  return "reaction_ref_n" + std::to_string(opt.solver_nx) + "_s" +
         std::to_string(opt.solver_steps) + "_e" + std::to_string(opt.eval_nx) +
         "x" + std::to_string(opt.eval_nt) + ".bin";
}

ReferenceGrid reference_with_cache(const ReferenceOptions& opt,
                                   const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::string path = (fs::path(dir) / reference_cache_name(opt)).string();
  if (fs::exists(path)) {
    try {
      ReferenceGrid g = load_reference(path);
      if (g.nx == opt.eval_nx && g.nt == opt.eval_nt &&
          g.solver_nx == opt.solver_nx && g.solver_steps == opt.solver_steps)
        return g;
    } catch (const std::runtime_error&) {
      // fall through to recompute
    }
  }
  ReferenceGrid g = solve_reaction_reference(opt);
  save_reference(g, path);
  return g;
}

}  // namespace gbpinn
