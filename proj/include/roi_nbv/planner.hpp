#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "roi_nbv/analysis.hpp"
#include "roi_nbv/gain.hpp"
#include "roi_nbv/rng.hpp"
#include "roi_nbv/sampling.hpp"
#include "roi_nbv/sensor_sim.hpp"
#include "roi_nbv/voxel_map.hpp"

namespace roi_nbv {

enum class PlannerMode : std::uint8_t { Combined, ExplorationOnly };

const char* to_string(PlannerMode mode);

struct PlannerConfig {
  std::size_t n_vps = 100;  ///< candidates per family and iteration
  PlannerMode mode = PlannerMode::Combined;
  EvalParams eval;
  int ray_rows = 15;
  int ray_cols = 20;
  SampleRange sample_range;
  double budget_s = 180.0;  ///< simulated seconds
  double move_speed = 0.25;  ///< m/s
  double per_view_overhead_s = 1.0;
  double failed_move_penalty_s = 0.1;
  double idle_iteration_s = 1.0;  ///< charged when an iteration ends without a move
  double snapshot_interval_s = 5.0;
  double fp_rate = 0.0;
  double fn_rate = 0.0;

  void validate() const;
};

/// Everything a trial needs besides the planner settings.
struct Environment {
  const GroundTruthScene* scene = nullptr;
  CameraModel camera;
  Region workspace;
  Region sampling;
  MapParams map_params;
  HsiThresholds hsi;
  ViewPose start;
};

struct PlannerState {
  ViewPose pose;
  double elapsed = 0.0;
  RoiMap map;
  Rng rng;
  std::size_t iteration = 0;
};

struct MoveAttempt {
  bool success = false;
  double time_cost = 0.0;
};

/// Stand-in for motion planning: a pose is reachable iff it lies in the
/// workspace; moving costs distance / speed plus a fixed per-view overhead,
/// a failed attempt costs the re-plan penalty.
MoveAttempt attempt_move(const ViewPose& from, const ViewPose& to, const Region& workspace,
                         const PlannerConfig& config);

struct IterationOutcome {
  bool moved = false;
  bool budget_exhausted = false;  ///< a move was found but would end after the budget
  std::optional<Candidate> chosen;
  double max_roi_utility = std::numeric_limits<double>::quiet_NaN();  ///< NaN without ROI candidates
  double time_cost = 0.0;
  std::size_t failed_attempts = 0;
  std::size_t roi_candidates = 0;
  std::size_t exploration_candidates = 0;
};

/// Render at the state's pose, label, add noise and insert into the map.
void observe(PlannerState& state, const Environment& env, const PlannerConfig& config);

/// One pass of the viewpoint selection loop: sample both families, evaluate,
/// pick the ROI family if its best utility exceeds the threshold (Combined
/// mode) and pop candidates best-first until a move succeeds or the best left
/// is not above the threshold. `on_arrival(time)` runs right before the new
/// observation is inserted.
IterationOutcome plan_iteration(PlannerState& state, const Environment& env, const PlannerConfig& config,
                                const RayGrid& rays, const std::function<void(double)>& on_arrival = {});

enum class LogKind : std::uint8_t { Initial, Roi, Exploration, Snapshot, Final };

const char* to_string(LogKind kind);

struct LogRow {
  double time = 0.0;
  LogKind kind = LogKind::Snapshot;
  double utility = std::numeric_limits<double>::quiet_NaN();
  double max_roi_utility = std::numeric_limits<double>::quiet_NaN();
  Vec3 position = Vec3::Zero();
  std::size_t known_voxels = 0;
  std::size_t roi_voxels = 0;
  std::optional<MetricReport> metrics;
};

struct TrialLog {
  std::vector<LogRow> rows;
  std::optional<RoiMap> final_map;
  double final_elapsed = 0.0;
  double max_iteration_cost = 0.0;
  std::size_t iterations = 0;
  std::size_t moves = 0;
};

MetricReport snapshot_metrics(const RoiMap& map, const GroundTruthScene& scene);

/// Full closed-loop trial: initial observation at the start pose, then
/// iterations until the simulated budget is spent. Deterministic in
/// (env, config, seed).
TrialLog run_trial(const Environment& env, const PlannerConfig& config, std::uint64_t seed);

/// Checks the logged trial against the planner's contract; returns a list of
/// violations (empty when the trial is consistent).
std::vector<std::string> check_trial_contract(const TrialLog& log, const Region& workspace,
                                              const PlannerConfig& config);

}  // namespace roi_nbv
