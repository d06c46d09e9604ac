#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gbpinn/problem.hpp"
#include "gbpinn/reference.hpp"
#include "gbpinn/training.hpp"

namespace gbpinn {

// Both flavors of the relative L2 error over a point set:
//   ratio = sum((p-t)^2) / sum(t^2)      (the squared form)
//   root  = sqrt(ratio)
// Reports carry both; `ratio` is the headline number.
struct RelL2 {
  double ratio = 0.0;
  double root = 0.0;
};

// Throws std::invalid_argument on length mismatch, empty input, or an
// identically zero truth vector (the ratio is undefined there).
RelL2 relative_l2(std::span<const double> pred, std::span<const double> truth);

// Tensor-product evaluation lattice over the problem domain, endpoints
// included exactly. Point order is row-major with the last axis fastest.
struct EvalGrid {
  std::vector<std::size_t> shape;
  std::vector<std::vector<double>> axes;
  std::vector<double> pts;  // n x dim
  std::size_t n = 0;
};

EvalGrid make_eval_grid(const PdeProblem& p,
                        std::span<const std::size_t> shape);

struct GridEval {
  EvalGrid grid;
  std::vector<double> pred;
  std::vector<double> truth;
  RelL2 rel;
};

// Evaluates the ensemble against the problem's truth on the lattice.
// Problems without a closed form take their truth from `ref`, which must
// cover the same lattice; passing a mismatched or missing reference throws.
GridEval eval_on_grid(const EnsembleModel& model, const PdeProblem& p,
                      std::span<const std::size_t> shape,
                      const ReferenceGrid* ref = nullptr);

}  // namespace gbpinn
