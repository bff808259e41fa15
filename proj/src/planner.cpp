#include "roi_nbv/planner.hpp"

#include <algorithm>
#include <cmath>

#include "roi_nbv/error.hpp"

namespace roi_nbv {

const char* to_string(PlannerMode mode) { return mode == PlannerMode::Combined ? "combined" : "exploration_only"; }

const char* to_string(LogKind kind) {
  switch (kind) {
    case LogKind::Initial:
      return "initial";
    case LogKind::Roi:
      return "roi";
    case LogKind::Exploration:
      return "exploration";
    case LogKind::Snapshot:
      return "snapshot";
    case LogKind::Final:
      return "final";
  }
  return "?";
}

void PlannerConfig::validate() const {
  eval.validate();
  if (!(budget_s >= 0.0)) throw ConfigError("planner: budget_s must be >= 0");
  if (!(move_speed > 0.0)) throw ConfigError("planner: move_speed must be > 0");
  if (!(per_view_overhead_s >= 0.0) || !(failed_move_penalty_s >= 0.0)) {
    throw ConfigError("planner: time costs must be >= 0");
  }
  if (!(idle_iteration_s > 0.0)) throw ConfigError("planner: idle_iteration_s must be > 0");
  if (!(snapshot_interval_s > 0.0)) throw ConfigError("planner: snapshot_interval_s must be > 0");
  if (ray_rows <= 0 || ray_cols <= 0) throw ConfigError("planner: ray grid must be non-empty");
  if (!(sample_range.d_min >= 0.0 && sample_range.d_min < sample_range.d_max)) {
    throw ConfigError("planner: need 0 <= sample d_min < d_max");
  }
  if (!(fp_rate >= 0.0 && fp_rate <= 1.0 && fn_rate >= 0.0 && fn_rate <= 1.0)) {
    throw ConfigError("planner: noise rates must lie in [0, 1]");
  }
}

MoveAttempt attempt_move(const ViewPose& from, const ViewPose& to, const Region& workspace,
                         const PlannerConfig& config) {
  if (!workspace.contains(to.position)) return {false, config.failed_move_penalty_s};
  return {true, move_cost(from, to) / config.move_speed + config.per_view_overhead_s};
}

void observe(PlannerState& state, const Environment& env, const PlannerConfig& config) {
  const RenderedImage image = render(*env.scene, env.camera, state.pose);
  LabeledCloud cloud = cloud_from_render(image, env.camera, state.pose, state.map.resolution(), env.hsi);
  const std::uint64_t noise_seed = state.rng.next_u64();
  if (config.fp_rate > 0.0 || config.fn_rate > 0.0) {
    cloud = apply_detection_noise(cloud, config.fp_rate, config.fn_rate, noise_seed);
  }
  state.map.insert(cloud);
}

namespace {

// Max-heap order on utility; ties resolved by sampling order.
struct HeapEntry {
  double utility;
  std::size_t index;
};

bool heap_less(const HeapEntry& a, const HeapEntry& b) {
  if (a.utility != b.utility) return a.utility < b.utility;
  return a.index > b.index;
}

std::vector<HeapEntry> make_heap_of(const std::vector<Candidate>& cands) {
  std::vector<HeapEntry> heap;
  heap.reserve(cands.size());
  for (std::size_t i = 0; i < cands.size(); ++i) heap.push_back({cands[i].utility, i});
  std::make_heap(heap.begin(), heap.end(), heap_less);
  return heap;
}

}  // namespace

IterationOutcome plan_iteration(PlannerState& state, const Environment& env, const PlannerConfig& config,
                                const RayGrid& rays, const std::function<void(double)>& on_arrival) {
  IterationOutcome out;
  ++state.iteration;
  const RoiMap& map = state.map;
  const std::uint64_t roi_seed = state.rng.next_u64();
  const std::uint64_t expl_seed = state.rng.next_u64();

  std::vector<Candidate> roi_vps;
  if (config.mode == PlannerMode::Combined) {
    const auto targets = find_roi_frontiers(map, env.sampling);
    roi_vps = sample_candidates(targets, map, env.workspace, config.n_vps, config.sample_range,
                                CandidateKind::RoiTargeted, roi_seed);
  }
  const auto expl_targets = find_exploration_frontiers(map, env.sampling);
  std::vector<Candidate> expl_vps = sample_candidates(expl_targets, map, env.workspace, config.n_vps,
                                                      config.sample_range, CandidateKind::Exploration, expl_seed);

  std::optional<RoiDistanceField> field;
  if (config.eval.util_type == UtilityType::Proximity) field.emplace(map, config.eval.max_dist);
  const RoiDistanceField* field_ptr = field ? &*field : nullptr;
  std::optional<StateGrid> grid;
  if (!roi_vps.empty() || !expl_vps.empty()) grid = StateGrid::build(map);
  const StateGrid* grid_ptr = grid ? &*grid : nullptr;
  evaluate(roi_vps, map, state.pose, rays, config.eval, field_ptr, grid_ptr);
  evaluate(expl_vps, map, state.pose, rays, config.eval, field_ptr, grid_ptr);
  out.roi_candidates = roi_vps.size();
  out.exploration_candidates = expl_vps.size();

  auto roi_heap = make_heap_of(roi_vps);
  auto expl_heap = make_heap_of(expl_vps);
  if (!roi_heap.empty()) out.max_roi_utility = roi_heap.front().utility;

  const double threshold = config.eval.utility_threshold;
  const bool use_roi = !roi_heap.empty() && roi_heap.front().utility > threshold;
  auto& heap = use_roi ? roi_heap : expl_heap;
  const auto& family = use_roi ? roi_vps : expl_vps;

  double spent = 0.0;
  while (!heap.empty() && heap.front().utility > threshold) {
    std::pop_heap(heap.begin(), heap.end(), heap_less);
    const Candidate& cand = family[heap.back().index];
    heap.pop_back();

    const MoveAttempt move = attempt_move(state.pose, cand.pose, env.workspace, config);
    spent += move.time_cost;
    if (!move.success) {
      ++out.failed_attempts;
      continue;
    }
    out.chosen = cand;
    break;
  }

  if (!out.chosen) {
    spent += config.idle_iteration_s;
    state.elapsed += spent;
    out.time_cost = spent;
    return out;
  }

  const double arrival = state.elapsed + spent;
  out.time_cost = spent;
  state.elapsed = arrival;
  if (arrival > config.budget_s) {
    // The move cannot complete inside the budget; its observation is dropped.
    out.budget_exhausted = true;
    return out;
  }
  state.pose = out.chosen->pose;
  if (on_arrival) on_arrival(arrival);
  observe(state, env, config);
  out.moved = true;
  return out;
}

MetricReport snapshot_metrics(const RoiMap& map, const GroundTruthScene& scene) {
  const auto clusters = cluster_rois(map);
  return compute_metrics(clusters, scene.fruits(), map.resolution());
}

TrialLog run_trial(const Environment& env, const PlannerConfig& config, std::uint64_t seed) {
  if (env.scene == nullptr) throw InvalidInput("run_trial: environment has no scene");
  config.validate();
  const RayGrid rays(env.camera, config.ray_rows, config.ray_cols);
  PlannerState state{env.start, 0.0, RoiMap(env.scene->resolution(), env.map_params), Rng(seed), 0};
  TrialLog log;

  auto make_row = [&](double time, LogKind kind) {
    LogRow row;
    row.time = time;
    row.kind = kind;
    row.position = state.pose.position;
    row.known_voxels = state.map.count_known();
    row.roi_voxels = state.map.count_roi();
    return row;
  };

  std::size_t next_mark = 0;
  auto mark_time = [&](std::size_t k) { return static_cast<double>(k) * config.snapshot_interval_s; };
  // Snapshot marks strictly before `t` see the map as it is now.
  auto emit_snapshots = [&](double t, bool inclusive) {
    while (mark_time(next_mark) <= config.budget_s &&
           (mark_time(next_mark) < t || (inclusive && mark_time(next_mark) <= t))) {
      LogRow row = make_row(mark_time(next_mark), LogKind::Snapshot);
      row.metrics = snapshot_metrics(state.map, *env.scene);
      log.rows.push_back(std::move(row));
      ++next_mark;
    }
  };

  observe(state, env, config);
  log.rows.push_back(make_row(0.0, LogKind::Initial));

  while (state.elapsed < config.budget_s) {
    const IterationOutcome it = plan_iteration(state, env, config, rays, [&](double t) { emit_snapshots(t, false); });
    ++log.iterations;
    log.max_iteration_cost = std::max(log.max_iteration_cost, it.time_cost);
    if (!it.moved) continue;
    ++log.moves;
    emit_snapshots(state.elapsed, true);
    LogRow row = make_row(state.elapsed, it.chosen->kind == CandidateKind::RoiTargeted ? LogKind::Roi
                                                                                       : LogKind::Exploration);
    row.utility = it.chosen->utility;
    row.max_roi_utility = it.max_roi_utility;
    log.rows.push_back(std::move(row));
  }
  log.final_elapsed = state.elapsed;

  emit_snapshots(config.budget_s, true);
  LogRow final_row = make_row(config.budget_s, LogKind::Final);
  final_row.metrics = snapshot_metrics(state.map, *env.scene);
  log.rows.push_back(std::move(final_row));
  log.final_map = std::move(state.map);
  return log;
}

std::vector<std::string> check_trial_contract(const TrialLog& log, const Region& workspace,
                                              const PlannerConfig& config) {
  std::vector<std::string> issues;
  double last_time = 0.0;
  double last_move_time = -1.0;
  std::size_t last_known = 0;
  for (std::size_t i = 0; i < log.rows.size(); ++i) {
    const LogRow& row = log.rows[i];
    const std::string where = "row " + std::to_string(i) + ": ";
    if (row.time < last_time) issues.push_back(where + "timestamp decreases");
    if (row.time > config.budget_s) issues.push_back(where + "timestamp beyond budget");
    last_time = row.time;
    if (row.known_voxels < last_known) issues.push_back(where + "known voxel count decreased");
    last_known = row.known_voxels;

    const bool move = row.kind == LogKind::Roi || row.kind == LogKind::Exploration;
    if (!move) continue;
    if (!workspace.contains(row.position)) issues.push_back(where + "executed pose outside workspace");
    if (!(row.time > last_move_time)) issues.push_back(where + "time not strictly increasing across moves");
    last_move_time = row.time;
    if (row.kind == LogKind::Exploration && config.mode == PlannerMode::Combined &&
        row.max_roi_utility > config.eval.utility_threshold) {
      issues.push_back(where + "exploration move while ROI utility above threshold");
    }
    if (row.kind == LogKind::Roi && config.mode == PlannerMode::ExplorationOnly) {
      issues.push_back(where + "ROI move in exploration-only mode");
    }
    if (!(row.utility > config.eval.utility_threshold)) issues.push_back(where + "executed utility not above threshold");
  }
  if (log.final_elapsed > config.budget_s + log.max_iteration_cost + 1e-9) {
    issues.push_back("elapsed time exceeds budget plus one iteration cost");
  }
  return issues;
}

}  // namespace roi_nbv
