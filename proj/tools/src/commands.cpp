#include "wfboot_cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <json.hpp>

#include "wfboot/jackknife.hpp"

namespace fs = std::filesystem;

namespace wfboot::cli {

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("WFBOOT_THREADS")) {
    const auto n = parse_int(env, "WFBOOT_THREADS");
    if (n < 1) throw ConfigError("WFBOOT_THREADS", "must be a positive integer");
    return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

SimulationPlan load_plan(const std::string& config_path, const std::vector<std::string>& overrides,
                         std::optional<int> replications, std::optional<std::string> sizes) {
  KeyValues kv = load_config_file(config_path);
  if (replications) kv["experiment.replications"] = std::to_string(*replications);
  if (sizes) kv["experiment.sizes"] = *sizes;
  apply_overrides(kv, overrides);
  return resolve_plan(kv);
}

std::vector<PanelResult> run_plan(const SimulationPlan& plan, unsigned threads) {
  std::vector<PanelResult> results;
  for (const auto& spec : plan.panels) {
    ExperimentConfig cfg = plan.experiment;
    cfg.dgp = spec.dgp;
    cfg.threads = threads;
    results.push_back({spec.label, run_experiment(cfg), spec.dgp.r});
  }
  return results;
}

namespace {

std::string utc_now() {
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(
                                                  std::chrono::system_clock::now())));
}

}  // namespace

int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream&) {
  const SimulationPlan plan = load_plan(opts.config_path, opts.overrides, opts.replications, opts.sizes);
  const unsigned threads = resolve_threads(opts.threads);
  const std::string started = utc_now();

  const auto panels = run_plan(plan, threads);

  fs::create_directories(opts.out_dir);
  const fs::path dir(opts.out_dir);
  const auto records_path = (dir / "bias_records.csv").string();
  const auto deviations_path = (dir / "replication_deviations.csv").string();
  const auto manifest_path = (dir / "manifest.json").string();
  write_text_file(records_path, bias_records_csv(panels));
  write_text_file(deviations_path, deviations_csv(panels));

  nlohmann::ordered_json manifest;
  manifest["tool_version"] = kToolVersion;
  manifest["config_path"] = opts.config_path;
  manifest["config_digest"] = config_digest(plan);
  manifest["master_seed"] = plan.experiment.master_seed;
  manifest["threads"] = threads;
  manifest["started_at"] = started;
  manifest["finished_at"] = utc_now();
  manifest["panels"] = nlohmann::json::array();
  for (const auto& p : panels) {
    int failed = 0;
    for (const auto& rep : p.result.replications) failed += rep.failed ? 1 : 0;
    manifest["panels"].push_back({{"label", p.label}, {"failed_replications", failed}});
  }
  manifest["outputs"] = {{"bias_records", records_path},
                         {"replication_deviations", deviations_path},
                         {"manifest", manifest_path}};
  manifest["resolved_config"] = canonical_entries(plan);
  write_text_file(manifest_path, manifest.dump(2) + "\n");

  out << "wrote " << records_path << "\n";
  return kExitOk;
}

PCEstimate orient_factors(PCEstimate pc) {
  for (Index k = 0; k < pc.F_hat.cols(); ++k) {
    Index at = 0;
    pc.B_hat.col(k).cwiseAbs().maxCoeff(&at);
    if (pc.B_hat(at, k) < 0.0) {
      pc.B_hat.col(k) *= -1.0;
      pc.F_hat.col(k) *= -1.0;
    }
  }
  return pc;
}

EstimateReport estimate_from_data(const PanelData& panel, const Vector& y, const Matrix& W,
                                  const EstimateOptions& opts) {
  if (opts.factors < 1) throw ValidationError("--factors: must be at least 1");
  if (opts.factors > std::min(panel.T(), panel.N()))
    throw ValidationError(fmt::format("--factors: r={} exceeds min(T, N)={}", opts.factors,
                                      std::min(panel.T(), panel.N())));
  if (y.size() != panel.T()) throw ValidationError("y.csv: row count does not match X.csv");
  if (W.size() > 0 && W.rows() != panel.T()) throw ValidationError("W.csv: row count does not match X.csv");

  EstimateReport rep;
  rep.pc = orient_factors(pc_estimate(panel, opts.factors));
  rep.fit = ols_augmented({y, rep.pc.F_hat, W});
  const unsigned threads = resolve_threads(opts.threads);
  if (opts.bootstrap_B > 0) {
    BootstrapConfig cfg;
    cfg.B = opts.bootstrap_B;
    cfg.seed = opts.seed;
    cfg.threads = threads;
    const BootstrapWorld world = make_bootstrap_world(panel, rep.pc, rep.fit, W);
    rep.bootstrap = bootstrap_distribution(world, cfg, BootstrapKind::Identity);
    rep.bcb_h = bias_correct(rep.fit, *rep.bootstrap, BiasMode::New, panel.T());
  }
  if (opts.jackknife_S > 0) {
    JackknifeConfig cfg;
    cfg.S = opts.jackknife_S;
    cfg.seed = opts.seed;
    cfg.threads = threads;
    rep.bcjk = jackknife_estimate(panel, y, W, rep.pc, rep.fit, cfg).corrected;
  }
  return rep;
}

DataFiles read_data_dir(const std::string& dir) {
  const fs::path base(dir);
  Matrix X = read_matrix_csv((base / "X.csv").string());
  const Matrix y = read_matrix_csv((base / "y.csv").string());
  if (y.cols() != 1) throw ValidationError("y.csv: expected a single column");
  Matrix W;
  if (fs::exists(base / "W.csv")) W = read_matrix_csv((base / "W.csv").string());
  if (y.rows() != X.rows())
    throw ValidationError(fmt::format("dimension mismatch: X.csv has {} rows, y.csv has {}", X.rows(), y.rows()));
  if (W.size() > 0 && W.rows() != X.rows())
    throw ValidationError(fmt::format("dimension mismatch: X.csv has {} rows, W.csv has {}", X.rows(), W.rows()));
  return {PanelData(std::move(X)), y.col(0), std::move(W)};
}

int cmd_estimate(const EstimateOptions& opts, std::ostream& out, std::ostream&) {
  if (opts.factors < 1) throw ValidationError("--factors: must be at least 1");
  const DataFiles data = read_data_dir(opts.data_dir);
  const EstimateReport rep = estimate_from_data(data.panel, data.y, data.W, opts);

  const int r = rep.fit.r;
  std::string body = "estimator,coordinate,value\n";
  auto emit = [&](std::string_view name, const Vector& v) {
    for (Index c = 0; c < v.size(); ++c)
      body += fmt::format("{},{},{}\n", name, coordinate_name(static_cast<int>(c), r), format_real(v(c)));
  };
  emit("raw", rep.fit.delta_hat);
  if (rep.bcb_h) emit("bcb_H", *rep.bcb_h);
  if (rep.bcjk) emit("bcjk", *rep.bcjk);
  out << body;

  if (!opts.out_dir.empty()) {
    fs::create_directories(opts.out_dir);
    write_text_file((fs::path(opts.out_dir) / "estimates.csv").string(), body);
    if (rep.bootstrap) {
      std::string stats;
      for (Index c = 0; c < rep.bootstrap->stats.cols(); ++c)
        stats += (c ? "," : "") + coordinate_name(static_cast<int>(c), r);
      stats += "\n";
      for (Index b = 0; b < rep.bootstrap->stats.rows(); ++b) {
        for (Index c = 0; c < rep.bootstrap->stats.cols(); ++c)
          stats += (c ? "," : "") + format_real(rep.bootstrap->stats(b, c));
        stats += "\n";
      }
      write_text_file((fs::path(opts.out_dir) / "bootstrap_stats.csv").string(), stats);
    }
  }
  return kExitOk;
}

namespace {

std::string valid_names_estimators() {
  std::string s;
  for (Estimator e : kAllEstimators) s += (s.empty() ? "" : ", ") + std::string(to_string(e));
  return s;
}

std::string valid_names_targets() {
  std::string s;
  for (Target t : kAllTargets) s += (s.empty() ? "" : ", ") + std::string(to_string(t));
  return s;
}

std::string sanitize(const std::string& label) {
  std::string out = label;
  for (char& c : out)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  return out;
}

}  // namespace

int cmd_report(const ReportOptions& opts, std::ostream& out, std::ostream& err) {
  for (const auto& e : opts.estimators) {
    if (!parse_estimator(e)) {
      err << "unknown estimator '" << e << "'; valid names: " << valid_names_estimators() << "\n";
      return kExitValidation;
    }
  }
  for (const auto& t : opts.targets) {
    if (!parse_target(t)) {
      err << "unknown target '" << t << "'; valid names: " << valid_names_targets() << "\n";
      return kExitValidation;
    }
  }

  const auto rows = read_bias_records(opts.records_path);
  auto selected = [&](const RecordRow& row) {
    if (!opts.coordinate.empty() && row.coordinate != opts.coordinate) return false;
    if (!opts.estimators.empty() &&
        std::find(opts.estimators.begin(), opts.estimators.end(), row.estimator) == opts.estimators.end())
      return false;
    if (!opts.targets.empty() &&
        std::find(opts.targets.begin(), opts.targets.end(), row.target) == opts.targets.end())
      return false;
    return true;
  };

  std::vector<RecordRow> kept;
  std::copy_if(rows.begin(), rows.end(), std::back_inserter(kept), selected);
  if (!opts.coordinate.empty() && kept.empty() && !rows.empty()) {
    err << "no records for coordinate '" << opts.coordinate << "'\n";
    return kExitValidation;
  }

  const fs::path out_dir = opts.out_dir.empty()
                               ? fs::path(opts.records_path).parent_path() / "plot_data"
                               : fs::path(opts.out_dir);
  fs::create_directories(out_dir);
  std::vector<std::string> panel_order;
  for (const auto& row : kept)
    if (std::find(panel_order.begin(), panel_order.end(), row.panel) == panel_order.end())
      panel_order.push_back(row.panel);
  for (const auto& panel : panel_order) {
    std::string body = "estimator,target,coordinate,T,N,mean_bias,mc_stderr\n";
    for (const auto& row : kept) {
      if (row.panel != panel) continue;
      body += fmt::format("{},{},{},{},{},{},{}\n", row.estimator, row.target, row.coordinate, row.T,
                          row.N, format_real(row.mean_bias),
                          row.mc_stderr ? format_real(*row.mc_stderr) : std::string{});
    }
    write_text_file((out_dir / ("plot_" + sanitize(panel) + ".csv")).string(), body);
  }

  const std::vector<std::string> heads = {"panel", "T", "N", "estimator", "target",
                                          "coordinate", "mean_bias", "mc_stderr", "R"};
  std::vector<std::vector<std::string>> table;
  for (const auto& row : kept)
    table.push_back({row.panel, std::to_string(row.T), std::to_string(row.N), row.estimator,
                     row.target, row.coordinate, fmt::format("{:.6g}", row.mean_bias),
                     row.mc_stderr ? fmt::format("{:.3g}", *row.mc_stderr) : "-",
                     std::to_string(row.R_effective)});
  std::vector<std::size_t> width(heads.size());
  for (std::size_t c = 0; c < heads.size(); ++c) {
    width[c] = heads[c].size();
    for (const auto& line : table) width[c] = std::max(width[c], line[c].size());
  }
  auto print = [&](const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      line += c >= 6 ? fmt::format("{:>{}}", cells[c], width[c]) : fmt::format("{:<{}}", cells[c], width[c]);
      if (c + 1 < cells.size()) line += "  ";
    }
    out << line << "\n";
  };
  print(heads);
  for (const auto& line : table) print(line);
  out << "plot data: " << out_dir.string() << " (" << panel_order.size() << " panel files)\n";
  return kExitOk;
}

GeneratedSample replication_sample(const SimulationPlan& plan, int panel, PanelSize size,
                                   int replication) {
  if (panel < 0 || panel >= static_cast<int>(plan.panels.size()))
    throw ValidationError(fmt::format("--panel: index {} out of range (plan has {} panels)", panel,
                                      plan.panels.size()));
  ExperimentConfig cfg = plan.experiment;
  cfg.dgp = plan.panels[static_cast<std::size_t>(panel)].dgp;
  return replication_sample(cfg, size, replication);
}

int cmd_export_sample(const ExportOptions& opts, std::ostream& out, std::ostream&) {
  const SimulationPlan plan = load_plan(opts.config_path, opts.overrides);
  const auto sizes = opts.size.empty() ? plan.experiment.sizes : parse_sizes(opts.size, "--size");
  const GeneratedSample sample = replication_sample(plan, opts.panel, sizes.front(), opts.replication);

  fs::create_directories(opts.out_dir);
  const fs::path dir(opts.out_dir);
  write_matrix_csv((dir / "X.csv").string(), sample.panel.X());
  write_matrix_csv((dir / "y.csv").string(), sample.y);
  write_matrix_csv((dir / "W.csv").string(), sample.W);
  const DgpConfig& dgp = plan.panels[static_cast<std::size_t>(opts.panel)].dgp;
  Vector delta0(dgp.r + dgp.p);
  delta0 << dgp.gamma0, dgp.beta;
  write_matrix_csv((dir / "delta0.csv").string(), delta0);
  out << "wrote sample to " << dir.string() << "\n";
  return kExitOk;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weak-factor augmented regression: estimation, bootstrap and Monte Carlo"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Run the Monte Carlo experiment described by a config file");
  simulate->add_option("--config", sim.config_path, "Config file")->required();
  simulate->add_option("--set", sim.overrides, "Override a key: section.key=value");
  simulate->add_option("--out", sim.out_dir, "Output directory");
  simulate->add_option("--threads", sim.threads, "Worker threads (default: $WFBOOT_THREADS or all cores)");
  std::optional<int> reps;
  std::optional<std::string> sizes;
  simulate->add_option("--replications", reps, "Shorthand for --set experiment.replications=R");
  simulate->add_option("--sizes", sizes, "Shorthand for --set experiment.sizes=TxN,...");

  EstimateOptions est;
  auto* estimate = app.add_subcommand("estimate", "Estimate the factor-augmented regression on CSV data");
  estimate->add_option("--data", est.data_dir, "Directory holding X.csv, y.csv and optionally W.csv")->required();
  estimate->add_option("--factors", est.factors, "Number of factors r")->required();
  estimate->add_option("--bootstrap", est.bootstrap_B, "Bootstrap draws B for the bcb_H correction (0 = off)");
  estimate->add_option("--jackknife", est.jackknife_S, "Random panel splits S for bcjk (0 = off)");
  estimate->add_option("--seed", est.seed, "Seed for bootstrap and jackknife");
  estimate->add_option("--threads", est.threads, "Worker threads");
  estimate->add_option("--out", est.out_dir, "Also write estimates.csv and bootstrap_stats.csv here");

  ReportOptions rep;
  auto* report = app.add_subcommand("report", "Tabulate bias records and write plot data");
  report->add_option("--records", rep.records_path, "bias_records.csv")->required();
  report->add_option("--coordinate", rep.coordinate, "Coordinate to keep, e.g. gamma_2");
  report->add_option("--estimators", rep.estimators, "Estimators to keep")->delimiter(',');
  report->add_option("--targets", rep.targets, "Targets to keep")->delimiter(',');
  report->add_option("--out", rep.out_dir, "Directory for plot data (default: <records dir>/plot_data)");

  ExportOptions exp;
  auto* export_cmd = app.add_subcommand("export-sample", "Write one simulated sample as estimate-ready CSV files");
  export_cmd->add_option("--config", exp.config_path, "Config file")->required();
  export_cmd->add_option("--set", exp.overrides, "Override a key: section.key=value");
  export_cmd->add_option("--size", exp.size, "Panel size TxN (default: first configured size)");
  export_cmd->add_option("--replication", exp.replication, "Replication index");
  export_cmd->add_option("--panel", exp.panel, "Grid panel index");
  export_cmd->add_option("--out", exp.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    if (*simulate) {
      sim.replications = reps;
      sim.sizes = sizes;
      return cmd_simulate(sim, out, err);
    }
    if (*estimate) return cmd_estimate(est, out, err);
    if (*report) return cmd_report(rep, out, err);
    if (*export_cmd) return cmd_export_sample(exp, out, err);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace wfboot::cli
