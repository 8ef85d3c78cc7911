#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wfboot/bootstrap.hpp"
#include "wfboot_cli/config.hpp"
#include "wfboot_cli/csv.hpp"

namespace wfboot::cli {

inline constexpr const char* kToolVersion = "0.3.0";

enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitRuntime = 3 };

/// Worker count: explicit value if positive, else $WFBOOT_THREADS, else the
/// hardware concurrency.
unsigned resolve_threads(unsigned requested);

struct SimulateOptions {
  std::string config_path;
  std::string out_dir = "results";
  std::vector<std::string> overrides;
  unsigned threads = 0;
  std::optional<int> replications;
  std::optional<std::string> sizes;
};

/// Loads the config, applies convenience flags and --set overrides.
SimulationPlan load_plan(const std::string& config_path, const std::vector<std::string>& overrides,
                         std::optional<int> replications = std::nullopt,
                         std::optional<std::string> sizes = std::nullopt);

/// Runs every design cell of the plan in-process.
std::vector<PanelResult> run_plan(const SimulationPlan& plan, unsigned threads);

int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err);

struct EstimateOptions {
  std::string data_dir;
  int factors = 0;
  int bootstrap_B = 0;
  int jackknife_S = 0;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string out_dir;
};

struct EstimateReport {
  PCEstimate pc;
  AugmentedFit fit;
  std::optional<Vector> bcb_h;
  std::optional<BootstrapStatistics> bootstrap;
  std::optional<Vector> bcjk;
};

/// Fixes each factor's sign so the largest-magnitude loading is positive.
PCEstimate orient_factors(PCEstimate pc);

/// Estimation on observed data: delta_hat plus the optional corrections
/// targeting delta0 (identity-rotation bootstrap, panel-split jackknife).
EstimateReport estimate_from_data(const PanelData& panel, const Vector& y, const Matrix& W,
                                  const EstimateOptions& opts);

/// Reads X.csv, y.csv and (optionally) W.csv from a directory.
struct DataFiles {
  PanelData panel;
  Vector y;
  Matrix W;
};
DataFiles read_data_dir(const std::string& dir);

int cmd_estimate(const EstimateOptions& opts, std::ostream& out, std::ostream& err);

struct ReportOptions {
  std::string records_path;
  std::string coordinate;
  std::vector<std::string> estimators;
  std::vector<std::string> targets;
  std::string out_dir;
};

int cmd_report(const ReportOptions& opts, std::ostream& out, std::ostream& err);

struct ExportOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string size;
  int replication = 0;
  int panel = 0;
  std::string out_dir;
};

/// Writes the sample a given replication would draw as X.csv, y.csv, W.csv
/// plus delta0.csv, in the layout `estimate` reads.
int cmd_export_sample(const ExportOptions& opts, std::ostream& out, std::ostream& err);

/// Regenerates the sample of (panel, size, replication) exactly as the
/// experiment runner does.
GeneratedSample replication_sample(const SimulationPlan& plan, int panel, PanelSize size,
                                   int replication);

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace wfboot::cli
