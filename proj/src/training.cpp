#include "gbpinn/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>

#include "gbpinn/rng.hpp"

namespace gbpinn {

double lr_at(const LrSchedule& s, long step) {
  if (step < 0) throw std::invalid_argument("negative step");
  if (s.decay_period <= 0) throw std::invalid_argument("decay period must be positive");
  const long k = step / s.decay_period;
  double f = 1.0;
  for (long i = 0; i < k; ++i) f *= s.decay_rate;
  return s.base * f;
}

double EnsembleModel::value(std::span<const double> x) const {
  double s = 0.0;
  for (const auto& st : stages) s += st.rho * forward_value(st.net, st.params, x);
  return s;
}

void ensemble_channels(const EnsembleModel& model, const ChannelLayout& layout,
                       std::span<const double> pts, std::size_t n,
                       double* out) {
  const int C = layout.channels();
  std::fill(out, out + n * C, 0.0);
  if (n == 0) return;
  std::vector<double> tmp(n * C);
  for (const auto& st : model.stages) {
    StageEvaluator ev(st.net, layout);
    ev.forward(st.params, pts, n, tmp.data());
    for (std::size_t i = 0; i < n * C; ++i) out[i] += st.rho * tmp[i];
  }
}

EnsembleJetField::EnsembleJetField(ad::Tape& t, const EnsembleModel& model)
    : model_(model) {
  if (model.stages.empty())
    throw ad::UsageError("cannot build a field from an empty ensemble");
  int trainable = 0;
  for (const auto& st : model.stages) trainable += st.params.trainable;
  if (trainable > 1)
    throw ad::UsageError("at most one ensemble stage may be trainable");
  for (const auto& st : model.stages)
    params_.push_back(push_parameters(t, st.params));
}

ad::Jet2 EnsembleJetField::eval(ad::Tape& t,
                                std::span<const double> x) const {
  ad::Jet2 acc;
  bool first = true;
  for (std::size_t m = 0; m < model_.stages.size(); ++m) {
    const auto& st = model_.stages[m];
    ad::Jet2 h = network_jet(t, st.net, params_[m], x);
    ad::Jet2 term = ad::jet_scale(t.constant(st.rho), h);
    acc = first ? term : ad::jet_add(acc, term);
    first = false;
  }
  return acc;
}

LossBatches draw_batches(const PdeProblem& p, const BatchSizes& sizes,
                         std::uint64_t seed, int stage_index) {
  LossBatches b;
  if (sizes.interior > 0) {
    b.interior =
        p.sample_interior(sizes.interior, derive_seed(seed, "interior", stage_index));
    b.interior_aux.resize(sizes.interior);
    for (std::size_t i = 0; i < sizes.interior; ++i)
      b.interior_aux[i] =
          p.interior_aux({b.interior.data() + i * p.dim(), std::size_t(p.dim())});
  }
  if (sizes.boundary > 0) {
    b.boundary =
        p.sample_boundary(sizes.boundary, derive_seed(seed, "boundary", stage_index));
    b.boundary_data.resize(sizes.boundary);
    for (std::size_t i = 0; i < sizes.boundary; ++i)
      b.boundary_data[i] =
          p.boundary_value({b.boundary.data() + i * p.dim(), std::size_t(p.dim())});
  }
  if (sizes.initial > 0) {
    b.initial =
        p.sample_initial(sizes.initial, derive_seed(seed, "initial", stage_index));
    b.initial_data.resize(sizes.initial);
    for (std::size_t i = 0; i < sizes.initial; ++i)
      b.initial_data[i] =
          p.initial_value({b.initial.data() + i * p.dim(), std::size_t(p.dim())});
  }
  return b;
}

ad::Value pinn_loss(ad::Tape& t, const PdeProblem& p, const JetField& f,
                    const LossBatches& b, const LossWeights& w) {
  const int d = p.dim();
  if (w.residual != 0.0 && b.interior.empty())
    throw std::invalid_argument("residual weight set but no interior batch");
  if (w.boundary != 0.0 && b.boundary.empty())
    throw std::invalid_argument("boundary weight set but no boundary batch");
  if (w.initial != 0.0 && b.initial.empty())
    throw std::invalid_argument("initial weight set but no initial batch");
  ad::Value total = t.constant(0.0);
  if (w.residual != 0.0 && !b.interior.empty()) {
    const std::size_t n = b.interior.size() / d;
    ad::Value s = t.constant(0.0);
    for (std::size_t i = 0; i < n; ++i) {
      std::span<const double> x{b.interior.data() + i * d, std::size_t(d)};
      ad::Jet2 u = f.eval(t, x);
      ad::Value r = p.residual(t, u, x);
      s = s + r * r;
    }
    total = total + t.constant(w.residual / double(n)) * s;
  }
  if (w.boundary != 0.0 && !b.boundary.empty()) {
    const std::size_t n = b.boundary.size() / d;
    ad::Value s = t.constant(0.0);
    for (std::size_t i = 0; i < n; ++i) {
      std::span<const double> x{b.boundary.data() + i * d, std::size_t(d)};
      ad::Jet2 u = f.eval(t, x);
      ad::Value r = u.val - t.constant(b.boundary_data[i]);
      s = s + r * r;
    }
    total = total + t.constant(w.boundary / double(n)) * s;
  }
  if (w.initial != 0.0 && !b.initial.empty()) {
    const std::size_t n = b.initial.size() / d;
    ad::Value s = t.constant(0.0);
    for (std::size_t i = 0; i < n; ++i) {
      std::span<const double> x{b.initial.data() + i * d, std::size_t(d)};
      ad::Jet2 u = f.eval(t, x);
      ad::Value r = u.val - t.constant(b.initial_data[i]);
      s = s + r * r;
    }
    total = total + t.constant(w.initial / double(n)) * s;
  }
  return total;
}

void adam_step(AdamState& st, ParameterStore& params,
               std::span<const double> grad, double lr) {
  if (!params.trainable)
    throw std::logic_error("adam_step on frozen parameters");
  const std::size_t n = params.size();
  if (grad.size() != n) throw std::invalid_argument("gradient size mismatch");
  if (st.m.empty()) {
    st.m.assign(n, 0.0);
    st.v.assign(n, 0.0);
  }
  if (st.m.size() != n) throw std::invalid_argument("Adam state size mismatch");

  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  st.t += 1;
  const double bc1 = 1.0 - std::pow(b1, double(st.t));
  const double bc2 = 1.0 - std::pow(b2, double(st.t));
  double* th = params.values.data();
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    st.m[i] = b1 * st.m[i] + (1.0 - b1) * g;
    st.v[i] = b2 * st.v[i] + (1.0 - b2) * g * g;
    const double mhat = st.m[i] / bc1;
    const double vhat = st.v[i] / bc2;
    th[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

namespace {

void validate_stage(const PdeProblem& p, const TrainPlan& plan,
                    int stage_index, const EnsembleModel& model) {
  if (stage_index < 0 || std::size_t(stage_index) >= plan.stages.size())
    throw std::invalid_argument("stage index outside the plan");
  if (model.stages.size() != std::size_t(stage_index))
    throw std::invalid_argument("stages must be trained in order");
  for (const auto& st : model.stages)
    if (st.params.trainable)
      throw std::logic_error("prior stages must be frozen");

  const StageSpec& ss = plan.stages[stage_index];
  ss.net.validate();
  if (ss.net.input_dim != p.dim())
    throw std::invalid_argument("network input dim does not match problem");
  if (!(ss.rho > 0.0))
    throw std::invalid_argument("stage weight rho must be positive");
  if (ss.steps < 0) throw std::invalid_argument("negative step count");

  if (p.required_embedding() == Embedding::kPeriodic &&
      ss.net.embedding != Embedding::kPeriodic)
    throw std::invalid_argument(
        "problem is periodic in x; use the periodic embedding");
  if (p.required_embedding() == Embedding::kNone &&
      ss.net.embedding == Embedding::kPeriodic)
    throw std::invalid_argument("periodic embedding on an aperiodic problem");

  const LossWeights& w = plan.weights;
  const BatchSizes& bs = plan.batch;
  if (w.residual != 0.0 && bs.interior == 0)
    throw std::invalid_argument("residual term needs interior points");
  if (w.boundary != 0.0 && (!p.has_boundary() || bs.boundary == 0))
    throw std::invalid_argument("boundary term needs boundary points");
  if (bs.boundary > 0 && !p.has_boundary())
    throw std::invalid_argument("problem has no boundary term");
  if (w.initial != 0.0 && (!p.has_initial() || bs.initial == 0))
    throw std::invalid_argument("initial term needs initial points");
  if (bs.initial > 0 && !p.has_initial())
    throw std::invalid_argument("problem has no initial condition");
}

}  // namespace

StageResult train_stage(const PdeProblem& p, const TrainPlan& plan,
                        int stage_index, EnsembleModel& model) {
  validate_stage(p, plan, stage_index, model);
  const StageSpec& ss = plan.stages[stage_index];
  const LossWeights& w = plan.weights;
  const int d = p.dim();
  const double rho = ss.rho;

  BatchSizes sizes = plan.batch;
  if (w.residual == 0.0) sizes.interior = 0;
  if (w.boundary == 0.0) sizes.boundary = 0;
  if (w.initial == 0.0) sizes.initial = 0;
  LossBatches b = draw_batches(p, sizes, plan.seed, stage_index);
  const std::size_t ni = sizes.interior, nb = sizes.boundary, n0 = sizes.initial;

  // Prior stages contribute fixed channel values at the fixed batches;
  // compute them once.
  const ChannelLayout lay = p.channel_layout();
  const ChannelLayout vlay = ChannelLayout::value_only(d);
  const int C = lay.channels();
  std::vector<double> prior_int(ni * C, 0.0), prior_b(nb, 0.0), prior_0(n0, 0.0);
  if (!model.empty()) {
    if (ni) ensemble_channels(model, lay, b.interior, ni, prior_int.data());
    if (nb) ensemble_channels(model, vlay, b.boundary, nb, prior_b.data());
    if (n0) ensemble_channels(model, vlay, b.initial, n0, prior_0.data());
  }

  ParameterStore params =
      xavier_init(ss.net, derive_seed(plan.seed, "init", stage_index));
  StageEvaluator ev(ss.net, lay);
  StageEvaluator evv(ss.net, vlay);
  AdamState adam;
  std::vector<double> grad(params.size(), 0.0);
  std::vector<double> res_i(ni), res_b(nb), res_0(n0);

  // Adjoint seed scales: d(mean sq)/d(channel) through the rho-weighted sum.
  const double ci = ni ? 2.0 * w.residual / double(ni) * rho : 0.0;
  const double cb = nb ? 2.0 * w.boundary / double(nb) * rho : 0.0;
  const double c0 = n0 ? 2.0 * w.initial / double(n0) * rho : 0.0;

  SeedFn int_cb = [&](std::size_t base, int lanes, const double* out,
                      double* seeds) {
    double tot[8], dr[8];
    for (int l = 0; l < lanes; ++l) {
      const std::size_t idx = base + l;
      for (int c = 0; c < C; ++c)
        tot[c] = prior_int[idx * C + c] + rho * out[c * kLanes + l];
      double r;
      p.residual_channels(b.interior.data() + idx * d, b.interior_aux[idx],
                          tot, r, dr);
      res_i[idx] = r;
      const double s = ci * r;
      for (int c = 0; c < C; ++c) seeds[c * kLanes + l] = s * dr[c];
    }
  };
  SeedFn bnd_cb = [&](std::size_t base, int lanes, const double* out,
                      double* seeds) {
    for (int l = 0; l < lanes; ++l) {
      const std::size_t idx = base + l;
      const double delta =
          prior_b[idx] + rho * out[l] - b.boundary_data[idx];
      res_b[idx] = delta;
      seeds[l] = cb * delta;
    }
  };
  SeedFn ic_cb = [&](std::size_t base, int lanes, const double* out,
                     double* seeds) {
    for (int l = 0; l < lanes; ++l) {
      const std::size_t idx = base + l;
      const double delta = prior_0[idx] + rho * out[l] - b.initial_data[idx];
      res_0[idx] = delta;
      seeds[l] = c0 * delta;
    }
  };

  StageResult result;
  result.trace.reserve(ss.steps);
  const auto t0 = std::chrono::steady_clock::now();
  for (long step = 0; step < ss.steps; ++step) {
    const double lr = lr_at(plan.lr, step);
    std::fill(grad.begin(), grad.end(), 0.0);
    if (ni) ev.forward_backward(params, b.interior, ni, int_cb, grad);
    if (nb) evv.forward_backward(params, b.boundary, nb, bnd_cb, grad);
    if (n0) evv.forward_backward(params, b.initial, n0, ic_cb, grad);

    double loss = 0.0;
    if (ni) {
      double s = 0.0;
      for (std::size_t i = 0; i < ni; ++i) s += res_i[i] * res_i[i];
      loss += w.residual / double(ni) * s;
    }
    if (nb) {
      double s = 0.0;
      for (std::size_t i = 0; i < nb; ++i) s += res_b[i] * res_b[i];
      loss += w.boundary / double(nb) * s;
    }
    if (n0) {
      double s = 0.0;
      for (std::size_t i = 0; i < n0; ++i) s += res_0[i] * res_0[i];
      loss += w.initial / double(n0) * s;
    }
    if (!std::isfinite(loss))
      throw TrainError("non-finite loss at stage " + std::to_string(stage_index) +
                           ", step " + std::to_string(step),
                       stage_index, step, loss);

    adam_step(adam, params, grad, lr);
    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
    result.trace.push_back({step, loss, lr, ms});
    result.final_loss = loss;
    if (plan.on_step) plan.on_step(stage_index, result.trace.back());
  }

  params.trainable = false;
  model.stages.push_back({ss.net, std::move(params), rho});
  return result;
}

BoostResult run_boosting(const PdeProblem& p, const TrainPlan& plan,
                         EnsembleModel& model) {
  if (plan.stages.empty()) throw std::invalid_argument("plan has no stages");
  if (!model.empty())
    throw std::invalid_argument("run_boosting expects an empty model");
  BoostResult r;
  for (int si = 0; si < static_cast<int>(plan.stages.size()); ++si)
    r.stages.push_back(train_stage(p, plan, si, model));
  return r;
}

}  // namespace gbpinn
