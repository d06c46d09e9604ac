#include "gbpinn/report.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "gbpinn/svg.hpp"

namespace gbpinn {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string g17(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.17g", v);
  return b;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("short write to " + path.string());
}

}  // namespace

RunReport run_experiment(const RunConfig& cfg, const RunDeps& deps) {
  cfg.validate();
  auto problem = make_problem(cfg);
  TrainPlan plan = make_plan(cfg);
  plan.on_step = deps.on_step;

  ReferenceGrid ref;
  const ReferenceGrid* refp = nullptr;
  if (!problem->has_exact()) {
    ReferenceOptions opt;
    opt.eval_nx = cfg.eval_grid[0];
    opt.eval_nt = cfg.eval_grid[1];
    ref = reference_with_cache(opt, deps.reference_dir);
    refp = &ref;
  }

  RunReport rep;
  rep.config = cfg;
  const auto t0 = std::chrono::steady_clock::now();
  EnsembleModel model;
  for (int si = 0; si < static_cast<int>(plan.stages.size()); ++si) {
    StageResult res = train_stage(*problem, plan, si, model);
    GridEval ge = eval_on_grid(model, *problem, cfg.eval_grid, refp);
    StageReport sr;
    sr.stage = cfg.stages[si];
    sr.final_loss = res.final_loss;
    sr.rel = ge.rel;
    rep.stages.push_back(sr);
    rep.traces.push_back(std::move(res.trace));
    if (si + 1 == static_cast<int>(plan.stages.size()))
      rep.final_grid = std::move(ge);
  }
  rep.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  return rep;
}

namespace {

ojson stages_json(const std::vector<StageReport>& stages) {
  ojson arr = ojson::array();
  for (const auto& s : stages) {
    arr.push_back(ojson{{"arch", s.stage.arch},
                        {"rho", s.stage.rho},
                        {"steps", s.stage.steps},
                        {"error_ratio", s.rel.ratio},
                        {"error_root", s.rel.root},
                        {"final_loss", s.final_loss}});
  }
  return arr;
}

void write_plots(const fs::path& dir, const RunReport& rep) {
  // Loss over the concatenated step axis, thinned for drawing.
  std::vector<double> xs, loss;
  std::size_t total = 0;
  for (const auto& tr : rep.traces) total += tr.size();
  const std::size_t stride = std::max<std::size_t>(1, total / 2048);
  std::size_t global = 0;
  for (const auto& tr : rep.traces)
    for (const auto& rec : tr) {
      if (global % stride == 0) {
        xs.push_back(double(global));
        loss.push_back(rec.loss);
      }
      ++global;
    }
  if (!xs.empty())
    write_file(dir / "training_loss.svg",
               svg_line_chart(rep.config.problem + ": training loss", "step",
                              xs, {{"loss", loss}}, true));

  std::vector<double> sidx, ratio, root;
  for (std::size_t i = 0; i < rep.stages.size(); ++i) {
    sidx.push_back(double(i));
    ratio.push_back(rep.stages[i].rel.ratio);
    root.push_back(rep.stages[i].rel.root);
  }
  write_file(dir / "stage_error.svg",
             svg_line_chart(rep.config.problem + ": error by stage", "stage",
                            sidx, {{"ratio", ratio}, {"sqrt", root}}, true));

  const auto& ge = rep.final_grid;
  if (ge.grid.shape.size() == 1) {
    std::vector<double> err(ge.pred.size());
    for (std::size_t i = 0; i < err.size(); ++i)
      err[i] = std::abs(ge.pred[i] - ge.truth[i]);
    write_file(dir / "solution.svg",
               svg_line_chart(rep.config.problem + ": solution", "x",
                              ge.grid.axes[0],
                              {{"predicted", ge.pred}, {"exact", ge.truth}}));
    write_file(dir / "solution_error.svg",
               svg_line_chart(rep.config.problem + ": |error|", "x",
                              ge.grid.axes[0], {{"abs error", err}}, true));
  } else if (ge.grid.shape.size() == 2) {
    std::vector<double> err(ge.pred.size());
    for (std::size_t i = 0; i < err.size(); ++i)
      err[i] = std::abs(ge.pred[i] - ge.truth[i]);
    write_file(
        dir / "solution.svg",
        svg_heatmaps(rep.config.problem + ": solution", ge.grid.shape,
                     {ge.grid.axes[0].front(), ge.grid.axes[0].back()},
                     {ge.grid.axes[1].front(), ge.grid.axes[1].back()},
                     {{"predicted", ge.pred},
                      {"truth", ge.truth},
                      {"abs error", err}}));
  }
}

}  // namespace

void write_run_outputs(const std::string& dir, const RunReport& rep) {
  fs::create_directories(dir);
  const fs::path d(dir);

  write_file(d / "config.echo", dump_config(rep.config));

  // Pointwise table over the evaluation grid.
  const auto& ge = rep.final_grid;
  const std::size_t dim = ge.grid.shape.size();
  std::string csv;
  csv.reserve(ge.grid.n * 80);
  for (std::size_t a = 0; a < dim; ++a) csv += "x" + std::to_string(a) + ",";
  csv += "pred,truth,abs_err\n";
  for (std::size_t i = 0; i < ge.grid.n; ++i) {
    for (std::size_t a = 0; a < dim; ++a)
      csv += g17(ge.grid.pts[i * dim + a]) + ",";
    csv += g17(ge.pred[i]) + "," + g17(ge.truth[i]) + "," +
           g17(std::abs(ge.pred[i] - ge.truth[i])) + "\n";
  }
  write_file(d / "errors.csv", csv);

  std::string stages_csv =
      "stage,arch,rho,steps,error_ratio,error_root,final_loss\n";
  for (std::size_t i = 0; i < rep.stages.size(); ++i) {
    const auto& s = rep.stages[i];
    stages_csv += std::to_string(i) + "," + s.stage.arch + "," +
                  g17(s.stage.rho) + "," + std::to_string(s.stage.steps) +
                  "," + g17(s.rel.ratio) + "," + g17(s.rel.root) + "," +
                  g17(s.final_loss) + "\n";
  }
  write_file(d / "stages.csv", stages_csv);

  ojson summary;
  summary["problem"] = rep.config.problem;
  summary["config_hash"] = config_hash_hex(rep.config);
  summary["stages"] = stages_json(rep.stages);
  if (!rep.stages.empty()) {
    summary["error_ratio"] = rep.stages.back().rel.ratio;
    summary["error_root"] = rep.stages.back().rel.root;
  }
  write_file(d / "summary.json", summary.dump(2) + "\n");

  ojson meta;
  meta["wall_ms"] = rep.wall_ms;
  ojson stage_ms = ojson::array();
  for (const auto& tr : rep.traces)
    stage_ms.push_back(tr.empty() ? 0.0 : tr.back().wall_ms);
  meta["stage_wall_ms"] = stage_ms;
  write_file(d / "run_meta.json", meta.dump(2) + "\n");

  std::string jsonl;
  jsonl.reserve(1 << 20);
  for (std::size_t si = 0; si < rep.traces.size(); ++si)
    for (const auto& rec : rep.traces[si]) {
      jsonl += "{\"stage\":" + std::to_string(si) +
               ",\"step\":" + std::to_string(rec.step) + ",\"loss\":" +
               g17(rec.loss) + ",\"lr\":" + g17(rec.lr) + ",\"wall_ms\":" +
               g17(rec.wall_ms) + "}\n";
    }
  write_file(d / "trace.jsonl", jsonl);

  write_plots(d, rep);
}

std::string error_json(const std::string& kind, const std::string& message) {
  ojson j;
  j["error"] = ojson{{"kind", kind}, {"message", message}};
  return j.dump() + "\n";
}

AblationReport run_ablation(const RunConfig& base,
                            const std::vector<std::vector<std::string>>& rows,
                            const RunDeps& deps) {
  base.validate();
  if (rows.empty()) throw std::invalid_argument("ablation needs rows");
  const long steps = base.stages.front().steps;

  AblationReport rep;
  rep.base = base;
  for (const auto& row : rows) {
    AblationOutcome out;
    RunConfig cfg = base;
    cfg.stages.clear();
    for (std::size_t i = 0; i < row.size(); ++i)
      cfg.stages.push_back({row[i], std::pow(0.5, double(i)), steps});
    out.config = cfg;
    try {
      RunReport rr = run_experiment(cfg, deps);
      out.stages = rr.stages;
      out.ok = true;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
    rep.rows.push_back(std::move(out));
  }
  return rep;
}

void write_ablation_outputs(const std::string& dir,
                            const AblationReport& rep) {
  fs::create_directories(dir);
  const fs::path d(dir);

  std::string csv = "row,architectures,stages,error_ratio,error_root,status\n";
  ojson arr = ojson::array();
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& r = rep.rows[i];
    std::string archs;
    for (std::size_t k = 0; k < r.config.stages.size(); ++k)
      archs += (k ? "+" : "") + r.config.stages[k].arch;
    if (r.ok) {
      const auto& last = r.stages.back();
      csv += std::to_string(i) + "," + archs + "," +
             std::to_string(r.config.stages.size()) + "," +
             g17(last.rel.ratio) + "," + g17(last.rel.root) + ",ok\n";
    } else {
      std::string msg = r.error;
      for (auto& ch : msg)
        if (ch == ',' || ch == '\n') ch = ';';
      csv += std::to_string(i) + "," + archs + "," +
             std::to_string(r.config.stages.size()) + ",,," + msg + "\n";
    }
    ojson jr;
    jr["architectures"] = archs;
    jr["ok"] = r.ok;
    if (r.ok) {
      // Failed rows carry configs that do not validate, so only rows that
      // ran get the cache key.
      jr["config_hash"] = config_hash_hex(r.config);
      jr["stages"] = stages_json(r.stages);
      jr["error_ratio"] = r.stages.back().rel.ratio;
      jr["error_root"] = r.stages.back().rel.root;
    } else {
      jr["error"] = r.error;
    }
    arr.push_back(std::move(jr));
  }
  write_file(d / "table.csv", csv);

  ojson j;
  j["problem"] = rep.base.problem;
  j["rows"] = std::move(arr);
  write_file(d / "ablation.json", j.dump(2) + "\n");
}

}  // namespace gbpinn
