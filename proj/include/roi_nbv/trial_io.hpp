#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "roi_nbv/analysis.hpp"
#include "roi_nbv/planner.hpp"
#include "roi_nbv/sensor_sim.hpp"

namespace roi_nbv {

/// Trial CSV columns, in order. Metric cells are empty on rows without a
/// metric snapshot (moves) and when a metric is undefined.
inline constexpr const char* kTrialCsvHeader =
    "time,kind,utility,known_voxels,roi_voxels,detected_rois,covered_roi_volume,volume_accuracy,center_distance,"
    "max_roi_utility,x,y,z";

void write_trial_csv(const TrialLog& log, std::ostream& out);
void write_trial_csv(const TrialLog& log, const std::string& path);

/// Shortest round-trip decimal form; empty for NaN / absent.
std::string format_number(double value);
std::string format_optional(const std::optional<double>& value);

/// "detected_rois,covered_roi_volume,volume_accuracy,center_distance" cells,
/// formatted exactly like the trial CSV.
std::string format_metric_cells(const MetricReport& report);

struct FruitTruthFile {
  double resolution = 0.0;
  std::vector<FruitTruth> fruits;  ///< voxel lists are not stored
};

/// Text sidecar: a "resolution <m>" line, then one line per fruit:
/// id cx cy cz min_x min_y min_z max_x max_y max_z ('#' starts a comment).
void write_fruit_truth(const GroundTruthScene& scene, const std::string& path);
FruitTruthFile read_fruit_truth(const std::string& path);

/// Human-readable cluster list with ground-truth matches.
void write_cluster_report(std::span<const FruitCluster> clusters, std::span<const FruitTruth> truth,
                          const std::string& path);

}  // namespace roi_nbv
