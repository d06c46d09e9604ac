#include "gbpinn/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace gbpinn {

RelL2 relative_l2(std::span<const double> pred,
                  std::span<const double> truth) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("relative_l2: length mismatch");
  if (pred.empty()) throw std::invalid_argument("relative_l2: empty input");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - truth[i];
    num += d * d;
    den += truth[i] * truth[i];
  }
  if (den == 0.0)
    throw std::invalid_argument("relative_l2: truth is identically zero");
  RelL2 r;
  r.ratio = num / den;
  r.root = std::sqrt(r.ratio);
  return r;
}

EvalGrid make_eval_grid(const PdeProblem& p,
                        std::span<const std::size_t> shape) {
  if (shape.size() != std::size_t(p.dim()))
    throw std::invalid_argument("grid shape rank does not match problem dim");
  EvalGrid g;
  g.shape.assign(shape.begin(), shape.end());
  g.n = 1;
  for (int k = 0; k < p.dim(); ++k) {
    const std::size_t nk = shape[k];
    if (nk < 2) throw std::invalid_argument("grid axis needs >= 2 points");
    g.n *= nk;
    std::vector<double> ax(nk);
    const double lo = p.lo(k), hi = p.hi(k);
    for (std::size_t i = 0; i < nk; ++i)
      ax[i] = (i == nk - 1) ? hi : lo + (hi - lo) * double(i) / double(nk - 1);
    g.axes.push_back(std::move(ax));
  }
  g.pts.resize(g.n * p.dim());
  if (p.dim() == 1) {
    for (std::size_t i = 0; i < g.n; ++i) g.pts[i] = g.axes[0][i];
  } else {
    const std::size_t n1 = g.shape[1];
    for (std::size_t i0 = 0; i0 < g.shape[0]; ++i0)
      for (std::size_t i1 = 0; i1 < n1; ++i1) {
        const std::size_t i = i0 * n1 + i1;
        g.pts[2 * i] = g.axes[0][i0];
        g.pts[2 * i + 1] = g.axes[1][i1];
      }
  }
  return g;
}

GridEval eval_on_grid(const EnsembleModel& model, const PdeProblem& p,
                      std::span<const std::size_t> shape,
                      const ReferenceGrid* ref) {
  GridEval ge;
  ge.grid = make_eval_grid(p, shape);
  const std::size_t n = ge.grid.n;

  ge.pred.assign(n, 0.0);
  if (!model.empty())
    ensemble_channels(model, ChannelLayout::value_only(p.dim()), ge.grid.pts,
                      n, ge.pred.data());

  ge.truth.resize(n);
  if (p.has_exact()) {
    for (std::size_t i = 0; i < n; ++i)
      ge.truth[i] = p.exact(
          {ge.grid.pts.data() + i * p.dim(), std::size_t(p.dim())});
  } else {
    if (!ref)
      throw std::invalid_argument(p.name() +
                                  " needs a reference grid for evaluation");
    if (ref->nx != ge.grid.shape[0] || ref->nt != ge.grid.shape[1])
      throw std::invalid_argument("reference grid shape mismatch");
    // Same row-major (x-major) layout on both sides.
    ge.truth = ref->values;
  }

  ge.rel = relative_l2(ge.pred, ge.truth);
  return ge;
}

}  // namespace gbpinn
