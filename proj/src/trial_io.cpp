#include "roi_nbv/trial_io.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "roi_nbv/error.hpp"

namespace roi_nbv {

std::string format_number(double value) {
  if (std::isnan(value)) return {};
  return fmt::format("{}", value);
}

std::string format_optional(const std::optional<double>& value) {
  return value ? format_number(*value) : std::string{};
}

std::string format_metric_cells(const MetricReport& r) {
  return fmt::format("{},{},{},{}", r.detected_rois, format_optional(r.covered_roi_volume),
                     format_optional(r.volume_accuracy), format_optional(r.center_distance));
}

void write_trial_csv(const TrialLog& log, std::ostream& out) {
  out << kTrialCsvHeader << '\n';
  for (const auto& row : log.rows) {
    const std::string metrics = row.metrics ? format_metric_cells(*row.metrics) : std::string(",,,");
    out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", format_number(row.time), to_string(row.kind),
                       format_number(row.utility), row.known_voxels, row.roi_voxels, metrics,
                       format_number(row.max_roi_utility), format_number(row.position.x()),
                       format_number(row.position.y()), format_number(row.position.z()));
  }
}

void write_trial_csv(const TrialLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  write_trial_csv(log, out);
}

void write_fruit_truth(const GroundTruthScene& scene, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out << "# fruit ground truth: id centroid_xyz box_min_xyz box_max_xyz (meters)\n";
  out << "resolution " << format_number(scene.resolution()) << '\n';
  for (const auto& f : scene.fruits()) {
    out << fmt::format("{} {} {} {} {} {} {} {} {} {}\n", f.id, format_number(f.centroid.x()),
                       format_number(f.centroid.y()), format_number(f.centroid.z()), format_number(f.box.min.x()),
                       format_number(f.box.min.y()), format_number(f.box.min.z()), format_number(f.box.max.x()),
                       format_number(f.box.max.y()), format_number(f.box.max.z()));
  }
}

FruitTruthFile read_fruit_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  FruitTruthFile file;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    if (line.rfind("resolution", 0) == 0) {
      std::string word;
      ss >> word >> file.resolution;
      if (!ss || !(file.resolution > 0.0)) throw FormatError(path + ":" + std::to_string(lineno) + ": bad resolution");
      continue;
    }
    FruitTruth f;
    ss >> f.id >> f.centroid.x() >> f.centroid.y() >> f.centroid.z() >> f.box.min.x() >> f.box.min.y() >>
        f.box.min.z() >> f.box.max.x() >> f.box.max.y() >> f.box.max.z();
    if (!ss) throw FormatError(path + ":" + std::to_string(lineno) + ": expected 10 fields");
    file.fruits.push_back(f);
  }
  if (!(file.resolution > 0.0)) throw FormatError(path + ": missing resolution line");
  return file;
}

void write_cluster_report(std::span<const FruitCluster> clusters, std::span<const FruitTruth> truth,
                          const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  const auto matches = match_clusters(clusters, truth);
  std::vector<const ClusterMatch*> by_cluster(clusters.size(), nullptr);
  for (const auto& m : matches) by_cluster[m.detected_index] = &m;
  out << "# cluster voxels centroid_xyz box_min_xyz box_max_xyz volume_m3 matched_fruit distance_m\n";
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    const auto& c = clusters[i];
    const ClusterMatch* m = by_cluster[i];
    out << fmt::format("{} {} {} {} {} {} {} {} {} {} {} {} {} {}\n", i, c.voxels.size(), format_number(c.centroid.x()),
                       format_number(c.centroid.y()), format_number(c.centroid.z()), format_number(c.box.min.x()),
                       format_number(c.box.min.y()), format_number(c.box.min.z()), format_number(c.box.max.x()),
                       format_number(c.box.max.y()), format_number(c.box.max.z()), format_number(c.volume),
                       m ? std::to_string(m->fruit_id) : std::string("-"), m ? format_number(m->distance) : "-");
  }
}

}  // namespace roi_nbv
