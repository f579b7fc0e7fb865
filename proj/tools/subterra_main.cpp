#include <cstdio>
#include <exception>
#include <fstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "subterra/pipeline.hpp"

namespace {

using subterra::pipeline::RunConfig;

struct CommonOpts {
  std::string config_path;
  std::string scenario = "all";
  int rep = 0;
  // Optional overrides.
  std::uint64_t seed = 0;
  bool seed_set = false;
  int replications = 0;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_rep) {
  cmd->add_option("--config", opts.config_path, "Run configuration JSON")
      ->required()
      ->envname("SUBTERRA_CONFIG");
  cmd->add_option("--scenario", opts.scenario, "Scenario: bc|shu|whu|whu-b|all")
      ->envname("SUBTERRA_SCENARIO");
  if (with_rep) cmd->add_option("--rep", opts.rep, "Replication index (0-based)");
  cmd->add_option_function<std::uint64_t>(
         "--seed", [&opts](const std::uint64_t& s) { opts.seed = s; opts.seed_set = true; },
         "Master seed override")
      ->envname("SUBTERRA_SEED");
  cmd->add_option("--replications", opts.replications, "Replication count override")
      ->envname("SUBTERRA_REPLICATIONS");
  cmd->add_option("--out", opts.out_dir, "Output directory override")->envname("SUBTERRA_OUT");
}

RunConfig load_config(const CommonOpts& opts) {
  RunConfig cfg = RunConfig::from_json_file(opts.config_path);
  if (opts.seed_set) cfg.seed = opts.seed;
  if (opts.replications > 0) cfg.replications = opts.replications;
  if (!opts.out_dir.empty()) cfg.output_dir = opts.out_dir;
  if (opts.scenario != "all") cfg.scenarios = {subterra::scenario::parse_scenario(opts.scenario)};
  return cfg;
}

subterra::scenario::ScenarioKind single_scenario(const CommonOpts& opts) {
  if (opts.scenario == "all")
    throw std::runtime_error("this subcommand needs --scenario bc|shu|whu|whu-b");
  return subterra::scenario::parse_scenario(opts.scenario);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"subterra: urban freight simulation with an underground shuttle stage"};
  app.require_subcommand(1);

  CommonOpts generate_opts, plan_opts, simulate_opts, shuttle_opts, report_opts, run_opts;

  auto* cmd_generate = app.add_subcommand("generate", "Build the city network and synthetic demand");
  add_common(cmd_generate, generate_opts, false);

  auto* cmd_plan = app.add_subcommand("plan", "Scenario plans and per-carrier VRP solutions");
  add_common(cmd_plan, plan_opts, true);

  auto* cmd_simulate = app.add_subcommand("simulate", "Execute tours on the time-dependent network");
  add_common(cmd_simulate, simulate_opts, true);

  auto* cmd_shuttle = app.add_subcommand("shuttle", "Stage two: derive, plan and run shuttle shipments");
  add_common(cmd_shuttle, shuttle_opts, true);

  auto* cmd_report = app.add_subcommand("report", "KPI report for one replication (and the mean when complete)");
  add_common(cmd_report, report_opts, true);

  auto* cmd_run = app.add_subcommand("run", "Full pipeline for every scenario and replication");
  add_common(cmd_run, run_opts, false);

  std::string base_path, variant_path, compare_out;
  auto* cmd_compare = app.add_subcommand("compare", "Deltas between two KPI reports");
  cmd_compare->add_option("--base", base_path, "Baseline kpi json")->required();
  cmd_compare->add_option("--variant", variant_path, "Variant kpi json")->required();
  cmd_compare->add_option("--out", compare_out, "Write deltas as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    namespace pl = subterra::pipeline;
    if (cmd_generate->parsed()) {
      pl::stage_generate(load_config(generate_opts));
    } else if (cmd_plan->parsed()) {
      pl::stage_plan(load_config(plan_opts), single_scenario(plan_opts), plan_opts.rep);
    } else if (cmd_simulate->parsed()) {
      pl::stage_simulate(load_config(simulate_opts), single_scenario(simulate_opts),
                         simulate_opts.rep);
    } else if (cmd_shuttle->parsed()) {
      pl::stage_shuttle(load_config(shuttle_opts), single_scenario(shuttle_opts), shuttle_opts.rep);
    } else if (cmd_report->parsed()) {
      RunConfig cfg = load_config(report_opts);
      auto kind = single_scenario(report_opts);
      pl::stage_report(cfg, kind, report_opts.rep);
      if (pl::write_scenario_mean(cfg, kind))
        std::printf("[subterra] stage=mean scenario=%s file=%s\n",
                    subterra::scenario::scenario_name(kind),
                    pl::Paths{cfg.output_dir}.mean_file(kind).c_str());
    } else if (cmd_run->parsed()) {
      return pl::run_all(load_config(run_opts));
    } else if (cmd_compare->parsed()) {
      auto base = subterra::kpi::load_report(base_path);
      auto variant = subterra::kpi::load_report(variant_path);
      auto deltas = subterra::kpi::compare(base, variant);
      nlohmann::ordered_json doc;
      doc["base"] = base.scenario;
      doc["variant"] = variant.scenario;
      for (const auto& [field, d] : deltas) {
        nlohmann::ordered_json jd{{"base", d.base}, {"variant", d.variant}, {"delta", d.delta}};
        if (d.pct_defined) jd["pct"] = d.pct;
        else jd["pct"] = nullptr;
        doc["fields"][field] = jd;
        std::printf("[subterra] compare %s: %s -> %s (%+.6g", field.c_str(),
                    subterra::format_double(d.base).c_str(),
                    subterra::format_double(d.variant).c_str(), d.delta);
        if (d.pct_defined) std::printf(", %.1f%%", d.pct);
        std::printf(")\n");
      }
      if (!compare_out.empty()) {
        std::ofstream f(compare_out, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + compare_out);
        f << doc.dump(2) << "\n";
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "[subterra] error: %s\n", e.what());
    return 1;
  }
  return 0;
}
