#include "gbpinn/config.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "gbpinn/rng.hpp"

namespace gbpinn {

using ojson = nlohmann::ordered_json;

bool RunConfig::operator==(const RunConfig& o) const {
  return problem == o.problem && epsilon == o.epsilon && seed == o.seed &&
         stages == o.stages && weights.residual == o.weights.residual &&
         weights.boundary == o.weights.boundary &&
         weights.initial == o.weights.initial &&
         batch.interior == o.batch.interior &&
         batch.boundary == o.batch.boundary &&
         batch.initial == o.batch.initial &&
         optimizer.base == o.optimizer.base &&
         optimizer.decay_rate == o.optimizer.decay_rate &&
         optimizer.decay_period == o.optimizer.decay_period &&
         eval_grid == o.eval_grid && notes == o.notes;
}

void RunConfig::validate() const {
  const bool is_reaction = (problem == "reaction");
  if (problem != "sp1d" && problem != "ej2d" && problem != "interior2d" &&
      !is_reaction)
    throw std::invalid_argument("unknown problem '" + problem + "'");
  if (!is_reaction && !(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument(problem + " needs epsilon in (0, 1)");
  if (stages.empty()) throw std::invalid_argument("config has no stages");
  const int dim = (problem == "sp1d") ? 1 : 2;
  for (const auto& s : stages) {
    if (!(s.rho > 0.0)) throw std::invalid_argument("stage rho must be > 0");
    if (s.steps < 0) throw std::invalid_argument("negative stage steps");
    parse_arch(s.arch, dim);  // throws on malformed strings
  }
  if (weights.residual < 0 || weights.boundary < 0 || weights.initial < 0)
    throw std::invalid_argument("loss weights must be non-negative");
  if (optimizer.base <= 0 || optimizer.decay_rate <= 0 ||
      optimizer.decay_period <= 0)
    throw std::invalid_argument("bad optimizer settings");
  if (eval_grid.size() != std::size_t(dim))
    throw std::invalid_argument("eval_grid rank must match the problem");
  for (std::size_t n : eval_grid)
    if (n < 2) throw std::invalid_argument("eval_grid axes need >= 2 points");
}

namespace {

void check_keys(const ojson& j, const std::set<std::string>& allowed,
                const std::string& ctx) {
  if (!j.is_object())
    throw std::invalid_argument("config: " + ctx + " must be an object");
  for (const auto& item : j.items())
    if (!allowed.contains(item.key()))
      throw std::invalid_argument("config: unknown key '" + item.key() +
                                  "' in " + ctx);
}

template <typename T>
T require(const ojson& j, const std::string& key, const std::string& ctx) {
  if (!j.contains(key))
    throw std::invalid_argument("config: missing key '" + key + "' in " + ctx);
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config: bad value for '" + key + "' in " +
                                ctx + ": " + e.what());
  }
}

template <typename T>
T optional(const ojson& j, const std::string& key, const std::string& ctx,
           T fallback) {
  if (!j.contains(key)) return fallback;
  return require<T>(j, key, ctx);
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  ojson j;
  try {
    j = ojson::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") +
                                e.what());
  }
  check_keys(j,
             {"problem", "epsilon", "seed", "stages", "weights", "batch",
              "optimizer", "eval_grid", "notes"},
             "config");

  RunConfig c;
  c.problem = require<std::string>(j, "problem", "config");
  const bool is_reaction = (c.problem == "reaction");
  if (is_reaction) {
    if (j.contains("epsilon"))
      throw std::invalid_argument(
          "config: reaction has no perturbation parameter");
  } else {
    c.epsilon = require<double>(j, "epsilon", "config");
  }
  c.seed = optional<std::uint64_t>(j, "seed", "config", 0);

  if (!j.contains("stages") || !j.at("stages").is_array())
    throw std::invalid_argument("config: 'stages' must be an array");
  for (const auto& js : j.at("stages")) {
    check_keys(js, {"arch", "rho", "steps"}, "stage");
    StageConfig s;
    s.arch = require<std::string>(js, "arch", "stage");
    s.rho = require<double>(js, "rho", "stage");
    s.steps = require<long>(js, "steps", "stage");
    c.stages.push_back(std::move(s));
  }

  if (j.contains("weights")) {
    const auto& jw = j.at("weights");
    check_keys(jw, {"residual", "boundary", "initial"}, "weights");
    c.weights.residual = optional<double>(jw, "residual", "weights", 1.0);
    c.weights.boundary = optional<double>(jw, "boundary", "weights", 0.0);
    c.weights.initial = optional<double>(jw, "initial", "weights", 0.0);
  }
  if (j.contains("batch")) {
    const auto& jb = j.at("batch");
    check_keys(jb, {"interior", "boundary", "initial"}, "batch");
    c.batch.interior = optional<std::size_t>(jb, "interior", "batch", 0);
    c.batch.boundary = optional<std::size_t>(jb, "boundary", "batch", 0);
    c.batch.initial = optional<std::size_t>(jb, "initial", "batch", 0);
  }
  if (j.contains("optimizer")) {
    const auto& jo = j.at("optimizer");
    check_keys(jo, {"learning_rate", "decay_rate", "decay_period"},
               "optimizer");
    c.optimizer.base = optional<double>(jo, "learning_rate", "optimizer", 1e-3);
    c.optimizer.decay_rate =
        optional<double>(jo, "decay_rate", "optimizer", 0.95);
    c.optimizer.decay_period =
        optional<long>(jo, "decay_period", "optimizer", 10000);
  }
  c.eval_grid = require<std::vector<std::size_t>>(j, "eval_grid", "config");
  c.notes = optional<std::vector<std::string>>(j, "notes", "config", {});

  c.validate();
  return c;
}

std::string dump_config(const RunConfig& c) {
  c.validate();
  ojson j;
  j["problem"] = c.problem;
  if (c.problem != "reaction") j["epsilon"] = c.epsilon;
  j["seed"] = c.seed;
  j["stages"] = ojson::array();
  for (const auto& s : c.stages)
    j["stages"].push_back(
        ojson{{"arch", s.arch}, {"rho", s.rho}, {"steps", s.steps}});
  j["weights"] = ojson{{"residual", c.weights.residual},
                       {"boundary", c.weights.boundary},
                       {"initial", c.weights.initial}};
  j["batch"] = ojson{{"interior", c.batch.interior},
                     {"boundary", c.batch.boundary},
                     {"initial", c.batch.initial}};
  j["optimizer"] = ojson{{"learning_rate", c.optimizer.base},
                         {"decay_rate", c.optimizer.decay_rate},
                         {"decay_period", c.optimizer.decay_period}};
  j["eval_grid"] = c.eval_grid;
  if (!c.notes.empty()) j["notes"] = c.notes;
  return j.dump(2) + "\n";
}

std::uint64_t config_hash(const RunConfig& c) {
  return fnv1a64(dump_config(c));
}

std::string config_hash_hex(const RunConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(config_hash(c)));
  return buf;
}

RunConfig preset(const std::string& name) {
  RunConfig c;
  c.problem = name;
  auto add = [&](const std::string& arch, int i, long steps) {
    c.stages.push_back({arch, std::pow(0.5, i), steps});
  };
  if (name == "sp1d") {
    c.epsilon = 1e-4;
    const char* archs[] = {"[50]",    "[100]",   "[100]*2",
                           "[100]*3", "[100]*2", "F10[50]*2"};
    for (int i = 0; i < 6; ++i) add(archs[i], i, 10000);
    c.weights = {1.0, 10.0, 0.0};
    c.batch = {10000, 2, 0};
    c.eval_grid = {1001};
  } else if (name == "ej2d") {
    c.epsilon = 1e-3;
    const char* archs[] = {"[50]",    "[100]",   "[100]*2",
                           "[100]*3", "[100]*2", "F50[100]*2"};
    for (int i = 0; i < 6; ++i) add(archs[i], i, 20000);
    c.weights = {1.0, 10000.0, 0.0};
    c.batch = {10000, 5000, 0};
    c.eval_grid = {256, 256};
    c.notes = {"boundary batch read as 5000"};
  } else if (name == "interior2d") {
    c.epsilon = 1e-4;
    const char* archs[] = {"[200]*3", "[100]*3", "[100]*2", "F5[50]*2"};
    for (int i = 0; i < 4; ++i) add(archs[i], i, 20000);
    c.weights = {1.0, 10000.0, 0.0};
    c.batch = {10000, 5000, 0};
    c.eval_grid = {256, 256};
  } else if (name == "reaction") {
    const char* archs[] = {"P[200]*3", "P[100]*3", "P[100]*2"};
    for (int i = 0; i < 3; ++i) add(archs[i], i, 20000);
    c.weights = {1.0, 0.0, 1000.0};
    c.batch = {20000, 0, 1000};
    c.eval_grid = {256, 101};
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  c.validate();
  return c;
}

std::vector<std::string> preset_names() {
  return {"sp1d", "ej2d", "interior2d", "reaction"};
}

void scale_steps(RunConfig& c, double factor) {
  if (!(factor > 0.0)) throw std::invalid_argument("steps scale must be > 0");
  for (auto& s : c.stages)
    s.steps = std::max<long>(1, std::lround(double(s.steps) * factor));
}

std::unique_ptr<PdeProblem> make_problem(const RunConfig& c) {
  c.validate();
  return make_problem(c.problem, c.epsilon);
}

TrainPlan make_plan(const RunConfig& c) {
  c.validate();
  const int dim = (c.problem == "sp1d") ? 1 : 2;
  TrainPlan plan;
  for (const auto& s : c.stages)
    plan.stages.push_back({parse_arch(s.arch, dim), s.rho, s.steps});
  plan.weights = c.weights;
  plan.batch = c.batch;
  plan.lr = c.optimizer;
  plan.seed = c.seed;
  return plan;
}

}  // namespace gbpinn
