#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "disctrans/geodesic.hpp"
#include "disctrans/io.hpp"

namespace disctrans {

struct ReportScalar {
  std::string name;
  double value = 0.0;
  /// Threshold or tolerance the value is judged against; 0 when informative.
  double tolerance = 0.0;
};

struct ExperimentReport {
  std::string id;
  Json inputs = Json::object();
  std::vector<ReportScalar> scalars;
  std::vector<std::string> artifacts;
  bool passed = false;
  bool skipped = false;
  std::string note;

  double scalar(const std::string& name) const;
  Json to_json() const;
};

struct ExperimentConfig {
  SolveConfig solve;
  std::string mean = "log";
  /// Relative tolerance for the locality comparison.
  double locality_tol = 0.02;
  /// Artifacts (report JSON, CSV curves) go here when set.
  std::optional<std::filesystem::path> output_dir;
};

/// K3 from the first to the second vertex. Throws Errc::AssumptionViolated
/// for means without boundary growth.
ExperimentReport experiment_triangle(const ExperimentConfig& config);
ExperimentReport experiment_triangle(const ExperimentConfig& config, const Vector& mu0, const Vector& mu1);

/// cycle(5) with a path(3) tail glued at its first vertex.
ExperimentReport experiment_dead_end(const ExperimentConfig& config);
ExperimentReport experiment_dead_end(const ExperimentConfig& config, const Vector& mu0, const Vector& mu1);

ExperimentReport experiment_locality(const std::string& label, const MarkovTriple& triple, const SubsetMask& subset,
                                     const Vector& mu0, const Vector& mu1, const ExperimentConfig& config);
/// Presets "cycle9", "grid", "k3".
ExperimentReport experiment_locality(const std::string& preset, const ExperimentConfig& config);

/// Runs the named experiments, concurrently when `parallel`; order preserved.
std::vector<ExperimentReport> run_experiments(const std::vector<std::string>& names, const ExperimentConfig& config,
                                              bool parallel);

}  // namespace disctrans
