#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wfboot/experiment.hpp"

namespace wfboot::cli {

/// Reals in result files: 12 significant digits.
std::string format_real(double value);

/// Results of one design cell.
struct PanelResult {
  std::string label;
  ExperimentResult result;
  int r = 0;
};

/// panel,T,N,estimator,target,coordinate,mean_bias,mc_stderr,R_effective
std::string bias_records_csv(const std::vector<PanelResult>& panels);

/// panel,T,N,replication,estimator,target,coordinate,deviation
/// Failed replications are omitted.
std::string deviations_csv(const std::vector<PanelResult>& panels);

/// Headerless numeric CSV, one row per time period. Throws ValidationError
/// naming the file, row and column of a non-numeric or missing cell.
Matrix read_matrix_csv(const std::string& path);

/// Writes the shortest decimal form that reads back to the same double.
void write_matrix_csv(const std::string& path, const Matrix& m);

struct RecordRow {
  std::string panel;
  int T = 0;
  int N = 0;
  std::string estimator;
  std::string target;
  std::string coordinate;
  double mean_bias = 0.0;
  std::optional<double> mc_stderr;
  int R_effective = 0;
};

std::vector<RecordRow> read_bias_records(const std::string& path);

void write_text_file(const std::string& path, const std::string& body);

}  // namespace wfboot::cli
