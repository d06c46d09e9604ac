#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "gbpinn/config.hpp"
#include "gbpinn/report.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

gbpinn::RunConfig load_config(const std::string& preset_name,
                              const std::string& config_file,
                              std::uint64_t seed, bool seed_given,
                              double steps_scale) {
  if (preset_name.empty() == config_file.empty())
    throw std::invalid_argument("pass exactly one of --preset / --config");
  gbpinn::RunConfig cfg = preset_name.empty()
                              ? gbpinn::parse_config(slurp(config_file))
                              : gbpinn::preset(preset_name);
  if (seed_given) cfg.seed = seed;
  if (steps_scale != 1.0) gbpinn::scale_steps(cfg, steps_scale);
  return cfg;
}

gbpinn::RunDeps make_deps(const std::string& ref_dir, long progress_every) {
  gbpinn::RunDeps deps;
  deps.reference_dir = ref_dir;
  if (progress_every > 0) {
    deps.on_step = [progress_every](int stage, const gbpinn::StepRecord& r) {
      if ((r.step + 1) % progress_every == 0)
        std::fprintf(stderr, "stage %d step %ld loss %.6e lr %.3e (%.1fs)\n",
                     stage, r.step + 1, r.loss, r.lr, r.wall_ms / 1000.0);
    };
  }
  return deps;
}

void print_stage_table(const std::vector<gbpinn::StageReport>& stages) {
  std::printf("%-5s %-14s %-9s %-8s %-13s %-13s\n", "stage", "arch", "rho",
              "steps", "error_ratio", "error_sqrt");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const auto& s = stages[i];
    std::printf("%-5zu %-14s %-9.5g %-8ld %-13.6e %-13.6e\n", i,
                s.stage.arch.c_str(), s.stage.rho, s.stage.steps, s.rel.ratio,
                s.rel.root);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient-boosted physics-informed network solver"};
  app.require_subcommand(1);

  std::string preset_name, config_file, out_dir, ref_dir = "reference_cache";
  std::uint64_t seed = 0;
  double steps_scale = 1.0;
  long progress_every = 1000;

  auto* run = app.add_subcommand("run", "Train one boosted model");
  run->add_option("--preset", preset_name,
                  "Built-in configuration (sp1d, ej2d, interior2d, reaction)");
  run->add_option("--config", config_file, "Configuration JSON file");
  auto* seed_opt = run->add_option("--seed", seed, "Override the seed");
  run->add_option("--steps-scale", steps_scale,
                  "Scale every stage's step budget");
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--reference-dir", ref_dir, "Reference grid cache");
  run->add_option("--progress-every", progress_every,
                  "Progress print interval in steps (0 = quiet)");

  std::string ab_problem, rows_file;
  auto* abl = app.add_subcommand("ablation", "Architecture sweep");
  abl->add_option("--problem", ab_problem, "Base preset name")->required();
  abl->add_option("--rows", rows_file, "JSON file with stage architecture rows")
      ->required();
  auto* ab_seed_opt = abl->add_option("--seed", seed, "Override the seed");
  abl->add_option("--steps-scale", steps_scale,
                  "Scale the per-stage step budget");
  abl->add_option("--out", out_dir, "Output directory")->required();
  abl->add_option("--reference-dir", ref_dir, "Reference grid cache");
  abl->add_option("--progress-every", progress_every,
                  "Progress print interval in steps (0 = quiet)");

  std::size_t ref_modes = 512, ref_steps = 2000;
  auto* refc = app.add_subcommand("reference",
                                  "Build the reaction reference grid");
  std::string ref_problem = "reaction";
  refc->add_option("--problem", ref_problem, "Problem name (reaction)");
  refc->add_option("--modes", ref_modes, "Spectral modes");
  refc->add_option("--steps", ref_steps, "Time steps");
  refc->add_option("--out", out_dir, "Cache directory")->required();

  std::string preset_to_show;
  auto* pres = app.add_subcommand("preset", "Print a preset configuration");
  pres->add_option("name", preset_to_show, "Preset name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << gbpinn::error_json("usage", e.what());
    return 2;
  }

  try {
    if (run->parsed()) {
      gbpinn::RunConfig cfg = load_config(preset_name, config_file, seed,
                                          !seed_opt->empty(), steps_scale);
      std::printf("problem %s, %zu stages, seed %llu, config %s\n",
                  cfg.problem.c_str(), cfg.stages.size(),
                  static_cast<unsigned long long>(cfg.seed),
                  gbpinn::config_hash_hex(cfg).c_str());
      gbpinn::RunReport rep =
          gbpinn::run_experiment(cfg, make_deps(ref_dir, progress_every));
      gbpinn::write_run_outputs(out_dir, rep);
      print_stage_table(rep.stages);
      std::printf("final error: ratio %.6e, sqrt %.6e (%.1fs)\nwrote %s\n",
                  rep.stages.back().rel.ratio, rep.stages.back().rel.root,
                  rep.wall_ms / 1000.0, out_dir.c_str());
    } else if (abl->parsed()) {
      gbpinn::RunConfig base = gbpinn::preset(ab_problem);
      if (!ab_seed_opt->empty()) base.seed = seed;
      if (steps_scale != 1.0) gbpinn::scale_steps(base, steps_scale);

      nlohmann::json jr = nlohmann::json::parse(slurp(rows_file));
      if (!jr.is_object() || !jr.contains("rows") || jr.size() != 1)
        throw std::invalid_argument(
            "rows file must be {\"rows\": [[arch, ...], ...]}");
      auto rows = jr.at("rows").get<std::vector<std::vector<std::string>>>();

      gbpinn::AblationReport rep =
          gbpinn::run_ablation(base, rows, make_deps(ref_dir, progress_every));
      gbpinn::write_ablation_outputs(out_dir, rep);
      for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        const auto& r = rep.rows[i];
        if (r.ok)
          std::printf("row %zu: ratio %.6e sqrt %.6e\n", i,
                      r.stages.back().rel.ratio, r.stages.back().rel.root);
        else
          std::printf("row %zu: failed: %s\n", i, r.error.c_str());
      }
      std::printf("wrote %s\n", out_dir.c_str());
    } else if (refc->parsed()) {
      if (ref_problem != "reaction")
        throw std::invalid_argument("only reaction has a reference solver");
      gbpinn::ReferenceOptions opt;
      opt.solver_nx = ref_modes;
      opt.solver_steps = ref_steps;
      gbpinn::ReferenceGrid g = gbpinn::reference_with_cache(opt, out_dir);
      std::printf("reference grid %zux%zu (modes %zu, steps %zu) at %s/%s\n",
                  g.nx, g.nt, g.solver_nx, g.solver_steps, out_dir.c_str(),
                  gbpinn::reference_cache_name(opt).c_str());
    } else if (pres->parsed()) {
      std::fputs(gbpinn::dump_config(gbpinn::preset(preset_to_show)).c_str(),
                 stdout);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << gbpinn::error_json("usage", e.what());
    return 2;
  } catch (const gbpinn::TrainError& e) {
    std::cerr << gbpinn::error_json("training", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::cerr << gbpinn::error_json("runtime", e.what());
    return 1;
  }
  return 0;
}
