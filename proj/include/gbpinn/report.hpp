#pragma once

#include <string>
#include <vector>

#include "gbpinn/config.hpp"
#include "gbpinn/metrics.hpp"
#include "gbpinn/training.hpp"

namespace gbpinn {

struct StageReport {
  StageConfig stage;
  double final_loss = 0.0;
  RelL2 rel;  // cumulative ensemble error after this stage
};

struct RunReport {
  RunConfig config;
  std::vector<StageReport> stages;
  GridEval final_grid;
  std::vector<std::vector<StepRecord>> traces;  // per stage, per step
  double wall_ms = 0.0;
};

struct RunDeps {
  // Where reaction reference grids are cached across runs.
  std::string reference_dir = "reference_cache";
  // Forwarded to TrainPlan::on_step for progress reporting.
  std::function<void(int, const StepRecord&)> on_step;
};

// Full experiment: boosting stages in order, grid evaluation after each.
RunReport run_experiment(const RunConfig& cfg, const RunDeps& deps = {});

// Writes into `dir` (created if needed):
//   config.echo   echoed canonical config
//   errors.csv    grid coords, pred, truth, |err| per evaluation node,
//                 %.17g, byte-identical across reruns
//   stages.csv    per-stage error table
//   summary.json  deterministic results only (no timings)
//   run_meta.json wall-clock timings
//   trace.jsonl   one record per optimizer step
//   *.svg         loss curve, per-stage error, solution views
void write_run_outputs(const std::string& dir, const RunReport& report);

// {"error": {"kind": ..., "message": ...}} for tooling.
std::string error_json(const std::string& kind, const std::string& message);

struct AblationOutcome {
  RunConfig config;
  bool ok = false;
  std::string error;
  std::vector<StageReport> stages;
};

struct AblationReport {
  RunConfig base;
  std::vector<AblationOutcome> rows;
};

// Trains one run per row. Row i's stage j uses weight 2^-j and the step
// budget of the base config's first stage. A row that fails is recorded and
// does not stop the sweep.
AblationReport run_ablation(const RunConfig& base,
                            const std::vector<std::vector<std::string>>& rows,
                            const RunDeps& deps = {});

void write_ablation_outputs(const std::string& dir, const AblationReport& rep);

}  // namespace gbpinn
