#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gbpinn/kernel.hpp"
#include "gbpinn/network.hpp"
#include "gbpinn/problem.hpp"

namespace gbpinn {

// Training aborted because the loss left the finite range.
struct TrainError : std::runtime_error {
  TrainError(const std::string& msg, int stage, long step, double loss)
      : std::runtime_error(msg), stage(stage), step(step), loss(loss) {}
  int stage;
  long step;
  double loss;
};

struct StageSpec {
  NetworkSpec net;
  double rho = 1.0;   // contribution weight of this stage in the sum
  long steps = 0;
};

struct LossWeights {
  double residual = 1.0;
  double boundary = 0.0;
  double initial = 0.0;
};

struct BatchSizes {
  std::size_t interior = 0;
  std::size_t boundary = 0;
  std::size_t initial = 0;
};

// Step-decayed learning rate: base * rate^floor(step/period).
struct LrSchedule {
  double base = 1e-3;
  double decay_rate = 0.95;
  long decay_period = 10000;
};

double lr_at(const LrSchedule& s, long step);

struct StepRecord {
  long step;
  double loss;
  double lr;
  double wall_ms;  // since stage start; informational, not deterministic
};

struct TrainPlan {
  std::vector<StageSpec> stages;
  LossWeights weights;
  BatchSizes batch;
  LrSchedule lr;
  std::uint64_t seed = 0;
  // Observer for progress reporting; (stage index, record) after each step.
  // Has no effect on the computation.
  std::function<void(int, const StepRecord&)> on_step;
};

// One frozen member of the additive model.
struct EnsembleStage {
  NetworkSpec net;
  ParameterStore params;
  double rho = 1.0;
};

// f(x) = sum_m rho_m h_m(x), summed in stage order.
struct EnsembleModel {
  std::vector<EnsembleStage> stages;

  double value(std::span<const double> x) const;
  bool empty() const { return stages.empty(); }
};

// Sum of stage channel outputs (rho-weighted) over a batch of points;
// out is n x layout.channels(), accumulated in stage order.
void ensemble_channels(const EnsembleModel& model, const ChannelLayout& layout,
                       std::span<const double> pts, std::size_t n,
                       double* out);

// A differentiable field on a tape; lets the reference loss run over either
// an ensemble or a closed-form solution.
struct JetField {
  virtual ~JetField() = default;
  virtual ad::Jet2 eval(ad::Tape& t, std::span<const double> x) const = 0;
};

// Ensemble as a tape field. At most one stage store may be trainable; its
// parameters get gradient slots [0, size), every other store enters as
// constants.
class EnsembleJetField : public JetField {
 public:
  EnsembleJetField(ad::Tape& t, const EnsembleModel& model);
  ad::Jet2 eval(ad::Tape& t, std::span<const double> x) const override;

 private:
  const EnsembleModel& model_;
  std::vector<std::vector<ad::Value>> params_;
};

// Closed-form solution as a field (for loss sanity checks).
class ExactField : public JetField {
 public:
  explicit ExactField(const PdeProblem& p) : p_(p) {}
  ad::Jet2 eval(ad::Tape& t, std::span<const double> x) const override {
    return p_.exact_jet(t, x);
  }

 private:
  const PdeProblem& p_;
};

// Fixed point sets (and their precomputed data) a stage trains on.
struct LossBatches {
  std::vector<double> interior;       // n_i x dim
  std::vector<double> interior_aux;   // n_i forcing values
  std::vector<double> boundary;       // n_b x dim
  std::vector<double> boundary_data;  // n_b Dirichlet targets
  std::vector<double> initial;        // n_0 x dim
  std::vector<double> initial_data;   // n_0 targets
};

LossBatches draw_batches(const PdeProblem& p, const BatchSizes& sizes,
                         std::uint64_t seed, int stage_index);

// Reference composite loss on a tape:
//   w_e mean(residual^2) + w_b mean((f - g)^2) + w_0 mean((f - h)^2),
// each mean over its fixed batch, summed in index order. Differentiable in
// the trainable stage via Tape::reverse.
ad::Value pinn_loss(ad::Tape& t, const PdeProblem& p, const JetField& f,
                    const LossBatches& b, const LossWeights& w);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long t = 0;
};

// One Adam update (beta1 0.9, beta2 0.999, eps 1e-8, bias-corrected).
// Throws if the store is frozen.
void adam_step(AdamState& st, ParameterStore& params,
               std::span<const double> grad, double lr);

struct StageResult {
  std::vector<StepRecord> trace;
  double final_loss = 0.0;
};

// Trains stage `stage_index` of the plan against the frozen model and
// appends the result to it. The model must contain exactly the prior stages,
// all frozen. Aborts with TrainError on a non-finite loss.
StageResult train_stage(const PdeProblem& p, const TrainPlan& plan,
                        int stage_index, EnsembleModel& model);

struct BoostResult {
  std::vector<StageResult> stages;
};

// Runs every stage in order on an empty model.
BoostResult run_boosting(const PdeProblem& p, const TrainPlan& plan,
                         EnsembleModel& model);

}  // namespace gbpinn
