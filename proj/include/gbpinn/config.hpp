#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gbpinn/problem.hpp"
#include "gbpinn/training.hpp"

namespace gbpinn {

struct StageConfig {
  std::string arch;  // e.g. "[100]*3", "F10[50]*2", "P[200]*3"
  double rho = 1.0;
  long steps = 0;

  bool operator==(const StageConfig&) const = default;
};

// Complete description of one experiment. Serializes to a canonical JSON
// document: parse(dump(c)) == c, unknown keys are rejected, and the dump is
// byte-stable so it can be hashed.
struct RunConfig {
  std::string problem;  // sp1d | ej2d | interior2d | reaction
  double epsilon = 0.0;  // perturbation parameter; unused for reaction
  std::uint64_t seed = 0;
  std::vector<StageConfig> stages;
  LossWeights weights;
  BatchSizes batch;
  LrSchedule optimizer;
  std::vector<std::size_t> eval_grid;
  std::vector<std::string> notes;  // free-form remarks, round-tripped

  void validate() const;  // throws std::invalid_argument

  bool operator==(const RunConfig&) const;
};

RunConfig parse_config(const std::string& json_text);
std::string dump_config(const RunConfig& c);

// FNV-1a over the canonical dump; stable key for caching runs.
std::uint64_t config_hash(const RunConfig& c);
std::string config_hash_hex(const RunConfig& c);

// Built-in experiment configurations, one per benchmark.
RunConfig preset(const std::string& name);
std::vector<std::string> preset_names();

// Multiplies every stage's step count (min 1 per stage); used for
// reduced-budget reruns of the presets.
void scale_steps(RunConfig& c, double factor);

std::unique_ptr<PdeProblem> make_problem(const RunConfig& c);
TrainPlan make_plan(const RunConfig& c);

}  // namespace gbpinn
