#include "roi_nbv/commands.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "roi_nbv/error.hpp"
#include "roi_nbv/trial_io.hpp"

namespace roi_nbv {

namespace fs = std::filesystem;

Variant parse_variant(const std::string& name) {
  if (name == "combined-uu") return {name, PlannerMode::Combined, UtilityType::Unobserved};
  if (name == "combined-up") return {name, PlannerMode::Combined, UtilityType::Proximity};
  if (name == "explo-uu") return {name, PlannerMode::ExplorationOnly, UtilityType::Unobserved};
  if (name == "explo-up") return {name, PlannerMode::ExplorationOnly, UtilityType::Proximity};
  throw ConfigError("unknown variant '" + name + "' (expected combined-uu, combined-up, explo-uu, explo-up)");
}

std::vector<Variant> parse_variants(const std::string& comma_separated) {
  std::vector<Variant> out;
  std::stringstream ss(comma_separated);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_variant(item));
  }
  if (out.empty()) throw ConfigError("no variants given");
  return out;
}

BatchResult run_batch(const ScenarioConfig& scenario, const GroundTruthScene& scene,
                      const std::vector<Variant>& variants, const BatchOptions& options) {
  if (options.trials == 0) throw ConfigError("batch: trial count must be >= 1");
  BatchResult result;
  result.scenario = scenario.name;
  result.base_seed = options.base_seed;
  for (const auto& v : variants) {
    result.variants.push_back({v, std::vector<TrialSummary>(options.trials)});
    if (options.out_dir) fs::create_directories(fs::path(*options.out_dir) / v.name);
  }

  const Environment env = make_environment(scenario, scene);
  const std::size_t total = variants.size() * options.trials;
  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;
  std::exception_ptr failure;

  auto worker = [&] {
    while (true) {
      const std::size_t job = next.fetch_add(1);
      if (job >= total) return;
      const std::size_t vi = job / options.trials;
      const std::size_t ti = job % options.trials;
      try {
        PlannerConfig cfg = scenario.planner;
        cfg.mode = variants[vi].mode;
        cfg.eval.util_type = variants[vi].util_type;
        const std::uint64_t seed = options.base_seed + ti;
        TrialLog log = run_trial(env, cfg, seed);

        TrialSummary& s = result.variants[vi].trials[ti];
        s.seed = seed;
        s.final_metrics = *log.rows.back().metrics;
        s.contract_issues = check_trial_contract(log, env.workspace, cfg);
        s.moves = log.moves;
        s.final_elapsed = log.final_elapsed;
        if (options.out_dir) {
          write_trial_csv(log, (fs::path(*options.out_dir) / variants[vi].name / fmt::format("trial_{}.csv", seed)).string());
        }
        if (options.on_trial) {
          std::lock_guard lock(progress_mutex);
          options.on_trial(variants[vi], cfg, log);
        }
        if (options.progress != nullptr) {
          std::lock_guard lock(progress_mutex);
          *options.progress << fmt::format("[{}/{}] {} seed {}: detected {} covered {} moves {}\n", job + 1, total,
                                           variants[vi].name, seed, s.final_metrics.detected_rois,
                                           format_optional(s.final_metrics.covered_roi_volume), s.moves)
                            << std::flush;
        }
      } catch (...) {
        std::lock_guard lock(progress_mutex);
        if (!failure) failure = std::current_exception();
        next.store(total);
      }
    }
  };

  const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, total));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return result;
}

std::vector<double> metric_values(const VariantResult& variant, const std::string& metric) {
  std::vector<double> out;
  for (const auto& t : variant.trials) {
    const MetricReport& m = t.final_metrics;
    if (metric == "detected_rois") {
      out.push_back(static_cast<double>(m.detected_rois));
    } else if (metric == "covered_roi_volume") {
      if (m.covered_roi_volume) out.push_back(*m.covered_roi_volume);
    } else if (metric == "volume_accuracy") {
      if (m.volume_accuracy) out.push_back(*m.volume_accuracy);
    } else if (metric == "center_distance") {
      if (m.center_distance) out.push_back(*m.center_distance);
    } else {
      throw InvalidInput("unknown metric '" + metric + "'");
    }
  }
  return out;
}

std::vector<MetricComparison> compare_variants(const BatchResult& result) {
  std::vector<MetricComparison> out;
  for (const std::string metric : {"covered_roi_volume", "detected_rois"}) {
    for (std::size_t i = 0; i < result.variants.size(); ++i) {
      for (std::size_t j = i + 1; j < result.variants.size(); ++j) {
        const auto a = metric_values(result.variants[i], metric);
        const auto b = metric_values(result.variants[j], metric);
        MetricComparison c{metric, result.variants[i].variant.name, result.variants[j].variant.name};
        if (!a.empty() && !b.empty()) {
          c.p_a_greater = mann_whitney_u_one_sided(a, b).p_value;
          c.p_b_greater = mann_whitney_u_one_sided(b, a).p_value;
        }
        out.push_back(c);
      }
    }
  }
  return out;
}

void write_batch_summary(const BatchResult& result, const std::string& out_dir) {
  using nlohmann::ordered_json;
  static const char* kMetrics[] = {"detected_rois", "covered_roi_volume", "volume_accuracy", "center_distance"};
  ordered_json doc;
  doc["scenario"] = result.scenario;
  doc["base_seed"] = result.base_seed;
  doc["trials"] = result.variants.empty() ? 0 : result.variants.front().trials.size();
  ordered_json variants = ordered_json::array();
  std::string table = fmt::format("{:<14}", "variant");
  for (const char* m : kMetrics) table += fmt::format(" {:>24}", m);
  table += "\n";
  for (const auto& v : result.variants) {
    ordered_json jv;
    jv["name"] = v.variant.name;
    jv["mode"] = to_string(v.variant.mode);
    jv["util_type"] = to_string(v.variant.util_type);
    table += fmt::format("{:<14}", v.variant.name);
    for (const char* m : kMetrics) {
      const auto values = metric_values(v, m);
      const SampleStats s = sample_stats(values);
      jv["metrics"][m] = {{"mean", s.mean}, {"std", s.stddev}, {"n", s.n}, {"values", values}};
      table += fmt::format(" {:>24}", fmt::format("{:.4g} +- {:.3g}", s.mean, s.stddev));
    }
    table += "\n";
    variants.push_back(jv);
  }
  doc["variants"] = variants;
  ordered_json comps = ordered_json::array();
  table += "\none-sided Mann-Whitney U p-values\n";
  for (const auto& c : compare_variants(result)) {
    comps.push_back({{"metric", c.metric}, {"a", c.a}, {"b", c.b}, {"p_a_greater", c.p_a_greater},
                     {"p_b_greater", c.p_b_greater}});
    table += fmt::format("{:<20} {} > {}: p = {:.4g}   {} > {}: p = {:.4g}\n", c.metric, c.a, c.b, c.p_a_greater, c.b,
                         c.a, c.p_b_greater);
  }
  doc["comparisons"] = comps;

  fs::create_directories(out_dir);
  std::ofstream(fs::path(out_dir) / "summary.json") << doc.dump(2) << '\n';
  std::ofstream(fs::path(out_dir) / "summary.txt") << table;
}

namespace {

ScenarioConfig load_with_overrides(const std::string& path, const std::optional<double>& snapshot_interval) {
  ScenarioConfig cfg = load_scenario(path);
  if (snapshot_interval) {
    if (!(*snapshot_interval > 0.0)) throw ConfigError("--snapshot-interval-s must be > 0");
    cfg.planner.snapshot_interval_s = *snapshot_interval;
  }
  return cfg;
}

}  // namespace

void cmd_run(const RunArgs& args, std::ostream& log) {
  const ScenarioConfig cfg = load_with_overrides(args.scenario, args.snapshot_interval_s);
  const fs::path out = args.out_dir.value_or(cfg.output_dir);
  fs::create_directories(out);
  const GroundTruthScene scene = generate_scene(cfg.scene, cfg.scene_seed);
  const Environment env = make_environment(cfg, scene);
  const TrialLog trial = run_trial(env, cfg.planner, args.seed);

  write_trial_csv(trial, (out / "trial.csv").string());
  save_map(*trial.final_map, (out / "final_map.roimap").string());
  write_fruit_truth(scene, (out / "fruit_gt.txt").string());
  const auto clusters = cluster_rois(*trial.final_map);
  write_cluster_report(clusters, scene.fruits(), (out / "clusters.txt").string());

  const MetricReport& m = *trial.rows.back().metrics;
  log << fmt::format("{}: {} moves in {} iterations; detected {}/{} fruits, covered ROI volume {}\n", cfg.name,
                     trial.moves, trial.iterations, m.detected_rois, scene.fruits().size(),
                     format_optional(m.covered_roi_volume));
  log << "wrote " << (out / "trial.csv").string() << '\n';
}

void cmd_batch(const BatchArgs& args, std::ostream& log) {
  const ScenarioConfig cfg = load_with_overrides(args.scenario, args.snapshot_interval_s);
  const auto variants = parse_variants(args.variants);
  const std::string out = args.out_dir.value_or(cfg.output_dir);
  const GroundTruthScene scene = generate_scene(cfg.scene, cfg.scene_seed);
  BatchOptions opts;
  opts.trials = args.trials;
  opts.base_seed = args.base_seed;
  opts.jobs = args.jobs;
  opts.out_dir = out;
  opts.progress = &log;
  const BatchResult result = run_batch(cfg, scene, variants, opts);
  write_batch_summary(result, out);
  std::ifstream summary(fs::path(out) / "summary.txt");
  log << summary.rdbuf();
}

void cmd_eval(const std::string& map_path, const std::string& truth_path, std::ostream& out) {
  const RoiMap map = load_map(map_path);
  const FruitTruthFile truth = read_fruit_truth(truth_path);
  if (map.resolution() != truth.resolution) {
    throw ConfigError(fmt::format("resolution mismatch: map {} m, ground truth {} m", map.resolution(),
                                  truth.resolution));
  }
  const auto clusters = cluster_rois(map);
  const MetricReport report = compute_metrics(clusters, truth.fruits, map.resolution());
  out << "detected_rois,covered_roi_volume,volume_accuracy,center_distance\n" << format_metric_cells(report) << '\n';
}

void cmd_export_scene(const std::string& scenario, const std::optional<std::string>& out_dir, std::ostream& log) {
  const ScenarioConfig cfg = load_scenario(scenario);
  const fs::path out = out_dir.value_or(cfg.output_dir);
  fs::create_directories(out);
  const GroundTruthScene scene = generate_scene(cfg.scene, cfg.scene_seed);
  save_map(scene_to_map(scene, cfg.map), (out / "scene.roimap").string());
  write_fruit_truth(scene, (out / "fruit_gt.txt").string());
  log << fmt::format("{}: {} voxels, {} fruits -> {}\n", cfg.name, scene.voxels().size(), scene.fruits().size(),
                     out.string());
}

}  // namespace roi_nbv
