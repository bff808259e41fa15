#include <CLI11.hpp>

#include <iostream>

#include "roi_nbv/commands.hpp"
#include "roi_nbv/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ROI-aware next-best-view planner simulation"};
  app.require_subcommand(1);

  roi_nbv::RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a single trial and write trial.csv, final map and clusters");
  run_cmd->add_option("--scenario", run.scenario, "Scenario YAML file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", run.seed, "Planner seed");
  run_cmd->add_option("--out-dir", run.out_dir, "Output directory (defaults to the scenario's output.dir)");
  run_cmd->add_option("--snapshot-interval-s", run.snapshot_interval_s, "Metric snapshot interval in seconds");

  roi_nbv::BatchArgs batch;
  auto* batch_cmd = app.add_subcommand("batch", "Run repeated trials for several planner variants");
  batch_cmd->add_option("--scenario", batch.scenario, "Scenario YAML file")->required()->check(CLI::ExistingFile);
  batch_cmd->add_option("--seed", batch.base_seed, "Base seed; trial i uses seed + i");
  batch_cmd->add_option("--trials", batch.trials, "Trials per variant")->check(CLI::PositiveNumber);
  batch_cmd->add_option("--variants", batch.variants,
                        "Comma-separated subset of combined-uu,combined-up,explo-uu,explo-up");
  batch_cmd->add_option("--jobs", batch.jobs, "Worker threads")->check(CLI::PositiveNumber);
  batch_cmd->add_option("--out-dir", batch.out_dir, "Output directory (defaults to the scenario's output.dir)");
  batch_cmd->add_option("--snapshot-interval-s", batch.snapshot_interval_s, "Metric snapshot interval in seconds");

  std::string map_path;
  std::string truth_path;
  auto* eval_cmd = app.add_subcommand("eval", "Recompute metrics for a saved map");
  eval_cmd->add_option("map", map_path, "Map file written by run")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("truth", truth_path, "fruit_gt.txt written by run or export-scene")
      ->required()
      ->check(CLI::ExistingFile);

  std::string export_scenario;
  std::optional<std::string> export_out;
  auto* export_cmd = app.add_subcommand("export-scene", "Write the ground-truth scene as a map plus fruit boxes");
  export_cmd->add_option("--scenario", export_scenario, "Scenario YAML file")->required()->check(CLI::ExistingFile);
  export_cmd->add_option("--out-dir", export_out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) roi_nbv::cmd_run(run, std::cout);
    if (*batch_cmd) roi_nbv::cmd_batch(batch, std::cout);
    if (*eval_cmd) roi_nbv::cmd_eval(map_path, truth_path, std::cout);
    if (*export_cmd) roi_nbv::cmd_export_scene(export_scenario, export_out, std::cout);
  } catch (const roi_nbv::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
