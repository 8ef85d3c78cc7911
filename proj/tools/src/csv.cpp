#include "wfboot_cli/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "wfboot_cli/config.hpp"

namespace wfboot::cli {

std::string format_real(double value) { return fmt::format("{:.12g}", value); }

std::string bias_records_csv(const std::vector<PanelResult>& panels) {
  std::string out = "panel,T,N,estimator,target,coordinate,mean_bias,mc_stderr,R_effective\n";
  for (const auto& panel : panels) {
    for (const auto& rec : panel.result.records) {
      out += fmt::format("{},{},{},{},{},{},{},{},{}\n", panel.label, rec.size.T, rec.size.N,
                         to_string(rec.estimator), to_string(rec.target), rec.coordinate_label,
                         format_real(rec.mean_bias),
                         rec.mc_stderr ? format_real(*rec.mc_stderr) : std::string{},
                         rec.R_effective);
    }
  }
  return out;
}

std::string deviations_csv(const std::vector<PanelResult>& panels) {
  std::string out = "panel,T,N,replication,estimator,target,coordinate,deviation\n";
  for (const auto& panel : panels) {
    for (const auto& rep : panel.result.replications) {
      if (rep.failed) continue;
      for (const auto& dev : rep.deviations) {
        for (Index c = 0; c < dev.value.size(); ++c) {
          out += fmt::format("{},{},{},{},{},{},{},{}\n", panel.label, rep.size.T, rep.size.N,
                             rep.rep_index, to_string(dev.estimator), to_string(dev.target),
                             coordinate_name(static_cast<int>(c), panel.r),
                             format_real(dev.value(c)));
        }
      }
    }
  }
  return out;
}

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    std::size_t col = 0;
    for (const auto& cell : split(line, ',')) {
      ++col;
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size())
        throw ValidationError(fmt::format("{}: non-numeric cell at row {}, column {} ('{}')", path,
                                          lineno, col, cell));
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ValidationError(fmt::format("{}: row {} has {} columns, expected {}", path, lineno,
                                        row.size(), rows.front().size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError(path + ": file is empty");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return m;
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::string body;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) body += ',';
      body += fmt::format("{}", m(i, j));
    }
    body += '\n';
  }
  write_text_file(path, body);
}

std::vector<RecordRow> read_bias_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path + ": missing header");
  const auto header = split(line, ',');
  const std::vector<std::string> expected = {"panel", "T", "N", "estimator", "target",
                                             "coordinate", "mean_bias", "mc_stderr", "R_effective"};
  if (header != expected) throw ValidationError(path + ": unexpected header '" + line + "'");

  std::vector<RecordRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    const std::string where = fmt::format("{}:{}", path, lineno);
    if (cells.size() != expected.size()) throw ValidationError(where + ": wrong number of fields");
    RecordRow row;
    row.panel = cells[0];
    row.T = static_cast<int>(parse_int(cells[1], where));
    row.N = static_cast<int>(parse_int(cells[2], where));
    row.estimator = cells[3];
    row.target = cells[4];
    row.coordinate = cells[5];
    row.mean_bias = parse_double(cells[6], where);
    if (!cells[7].empty()) row.mc_stderr = parse_double(cells[7], where);
    row.R_effective = static_cast<int>(parse_int(cells[8], where));
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out << body;
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace wfboot::cli
