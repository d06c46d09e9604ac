#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace gbpinn {

// High-accuracy solution of the reaction-diffusion benchmark on a fixed
// space-time lattice. x covers [0, 2*pi] inclusive (the last column repeats
// the first physically), t covers [0, 1].
struct ReferenceGrid {
  std::size_t nx = 0;  // evaluation points in x
  std::size_t nt = 0;  // evaluation points in t
  std::size_t solver_nx = 0;     // spectral modes used
  std::size_t solver_steps = 0;  // time steps used
  std::vector<double> values;    // nx * nt, x-major

  double value(std::size_t ix, std::size_t it) const {
    return values[ix * nt + it];
  }
};

struct ReferenceOptions {
  std::size_t solver_nx = 512;
  std::size_t solver_steps = 2000;
  std::size_t eval_nx = 256;
  std::size_t eval_nt = 101;
  // Re-solve at doubled resolution / halved step and require agreement
  // (1e-6 and 1e-8 relative) before accepting the grid.
  bool verify = true;
};

// Fourier collocation in x with exact integrating-factor treatment of the
// diffusion term and classical RK4 on the reaction term (Lawson scheme).
// Deterministic; throws std::runtime_error if a verification gate fails.
ReferenceGrid solve_reaction_reference(const ReferenceOptions& opt);

void save_reference(const ReferenceGrid& g, const std::string& path);
ReferenceGrid load_reference(const std::string& path);  // validates checksum

// File name is the full solver key, so differently configured grids never
// collide in the cache directory.
std::string reference_cache_name(const ReferenceOptions& opt);

// Loads a previously computed grid when present and consistent, otherwise
// solves (with verification) and saves. Returns the grid either way.
ReferenceGrid reference_with_cache(const ReferenceOptions& opt,
                                   const std::string& dir);

}  // namespace gbpinn
