#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "roi_nbv/scenario.hpp"

namespace roi_nbv {

/// A planner configuration under comparison (e.g. combined sampling with the
/// unobserved-voxel utility).
struct Variant {
  std::string name;
  PlannerMode mode = PlannerMode::Combined;
  UtilityType util_type = UtilityType::Unobserved;
};

/// Accepts combined-uu, combined-up, explo-uu, explo-up.
Variant parse_variant(const std::string& name);
std::vector<Variant> parse_variants(const std::string& comma_separated);

struct TrialSummary {
  std::uint64_t seed = 0;
  MetricReport final_metrics;
  std::vector<std::string> contract_issues;
  std::size_t moves = 0;
  double final_elapsed = 0.0;
};

struct VariantResult {
  Variant variant;
  std::vector<TrialSummary> trials;
};

struct BatchResult {
  std::string scenario;
  std::uint64_t base_seed = 0;
  std::vector<VariantResult> variants;
};

struct BatchOptions {
  std::size_t trials = 20;
  std::uint64_t base_seed = 0;
  std::size_t jobs = 1;
  std::optional<std::string> out_dir;  ///< per-trial CSVs go to <out_dir>/<variant>/
  std::ostream* progress = nullptr;
  /// Called once per finished trial, serialized across workers.
  std::function<void(const Variant&, const PlannerConfig&, const TrialLog&)> on_trial;
};

/// Runs trials x variants with seeds base_seed + i. Trials run on up to
/// `jobs` worker threads; results are ordered by variant then trial index.
BatchResult run_batch(const ScenarioConfig& scenario, const GroundTruthScene& scene,
                      const std::vector<Variant>& variants, const BatchOptions& options);

struct MetricComparison {
  std::string metric;
  std::string a;
  std::string b;
  double p_a_greater = 0.5;
  double p_b_greater = 0.5;
};

/// Pairwise one-sided Mann-Whitney tests on covered_roi_volume and detected_rois.
std::vector<MetricComparison> compare_variants(const BatchResult& result);

/// Per-metric values across the trials of one variant. Metrics undefined in a
/// trial (no matched fruit) are skipped.
std::vector<double> metric_values(const VariantResult& variant, const std::string& metric);

void write_batch_summary(const BatchResult& result, const std::string& out_dir);

// Command entry points. They throw ConfigError / FormatError on bad input.
struct RunArgs {
  std::string scenario;
  std::uint64_t seed = 0;
  std::optional<std::string> out_dir;
  std::optional<double> snapshot_interval_s;
};
void cmd_run(const RunArgs& args, std::ostream& log);

struct BatchArgs {
  std::string scenario;
  std::string variants = "combined-uu,combined-up,explo-uu,explo-up";
  std::size_t trials = 20;
  std::uint64_t base_seed = 0;
  std::size_t jobs = 1;
  std::optional<std::string> out_dir;
  std::optional<double> snapshot_interval_s;
};
void cmd_batch(const BatchArgs& args, std::ostream& log);

/// Re-evaluates a saved map against a fruit ground-truth sidecar and prints
/// the metric header and values.
void cmd_eval(const std::string& map_path, const std::string& truth_path, std::ostream& out);

void cmd_export_scene(const std::string& scenario, const std::optional<std::string>& out_dir, std::ostream& log);

}  // namespace roi_nbv
