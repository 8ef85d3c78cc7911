#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "wfboot_cli/commands.hpp"

using namespace wfboot;
using namespace wfboot::cli;
namespace fs = std::filesystem;

namespace {

const char* kSmallConfig = R"(# test config
[experiment]
sizes = 30x30
replications = 3
master_seed = 5

[dgp]
alphas = 1, 1
d = 0.05, 0.2

[bootstrap]
B = 6

[jackknife]
S = 3
)";

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const fs::path& dir, const std::string& body) {
  const fs::path p = dir / "run.cfg";
  std::ofstream(p) << body;
  return p;
}

struct Cli {
  int code = 0;
  std::string out, err;
};

Cli run(std::vector<std::string> args) {
  args.insert(args.begin(), "wfboot");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  Cli result;
  result.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  result.out = out.str();
  result.err = err.str();
  return result;
}

}  // namespace

TEST(Config, ParsesSectionsCommentsAndOverrides) {
  KeyValues kv = parse_config_text("[dgp]\n alphas = 1, 0.8  # trailing\n\n# note\n[bootstrap]\nB=7\n");
  EXPECT_EQ(kv.at("dgp.alphas"), "1, 0.8");
  EXPECT_EQ(kv.at("bootstrap.B"), "7");
  apply_overrides(kv, {"bootstrap.B=9"});
  EXPECT_EQ(kv.at("bootstrap.B"), "9");
  EXPECT_THROW(apply_overrides(kv, {"novalue"}), ValidationError);
  EXPECT_THROW(parse_config_text("key = 1\n"), ValidationError);
}

TEST(Config, ResolvesPlan) {
  const SimulationPlan plan = resolve_plan(parse_config_text(kSmallConfig));
  ASSERT_EQ(plan.panels.size(), 1u);
  EXPECT_EQ(plan.experiment.sizes, (std::vector<PanelSize>{{30, 30}}));
  EXPECT_EQ(plan.experiment.replications, 3);
  EXPECT_EQ(plan.experiment.bootstrap.B, 6);
  EXPECT_EQ(plan.panels[0].dgp.d, (std::vector<double>{0.05, 0.2}));
}

TEST(Config, MissingAlphasNamesKey) {
  std::string body = kSmallConfig;
  body.replace(body.find("alphas"), std::string("alphas = 1, 1\n").size(), "");
  try {
    resolve_plan(parse_config_text(body));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "dgp.alphas");
    EXPECT_NE(std::string(e.what()).find("alphas"), std::string::npos);
  }
}

TEST(Config, UnknownKeyAndBadValuesRejected) {
  EXPECT_THROW(resolve_plan(parse_config_text(std::string(kSmallConfig) + "[dgp]\nalpha = 1\n")), ConfigError);
  EXPECT_THROW(resolve_plan(parse_config_text(std::string(kSmallConfig) + "[bootstrap]\nB = many\n")), ConfigError);
  EXPECT_THROW(resolve_plan(parse_config_text(std::string(kSmallConfig) + "[experiment]\nsizes = 30by30\n")), ConfigError);
}

TEST(Config, DigestStableUnderReordering) {
  const std::string reordered =
      "[jackknife]\nS = 3\n[bootstrap]\nB = 6\n[dgp]\nd = 0.05,0.2\nalphas = 1,1\n"
      "[experiment]\nmaster_seed = 5\nreplications = 3\nsizes = 30x30\n";
  const auto a = config_digest(resolve_plan(parse_config_text(kSmallConfig)));
  const auto b = config_digest(resolve_plan(parse_config_text(reordered)));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.size(), 64u);
  const auto c = config_digest(resolve_plan(parse_config_text(std::string(kSmallConfig) + "[bootstrap]\nB = 7\n")));
  EXPECT_NE(a, c);
}

TEST(Config, GridExpandsRhoMajor) {
  const std::string body = std::string(kSmallConfig) +
                           "[grid]\nrho_fw = 0 | 0.6\nalphas = 1,1 | 1,0.8 | 0.8,0.6\nd = 0.05,0.2 | 0.2,0.2 | 0.2,0.2\n";
  const SimulationPlan plan = resolve_plan(parse_config_text(body));
  ASSERT_EQ(plan.panels.size(), 6u);
  EXPECT_EQ(plan.panels[0].dgp.rho_fw, 0.0);
  EXPECT_EQ(plan.panels[3].dgp.rho_fw, 0.6);
  EXPECT_EQ(plan.panels[5].dgp.alphas, (std::vector<double>{0.8, 0.6}));
  EXPECT_EQ(plan.panels[4].label, "rho0.6_alpha1-0.8");
}

TEST(Csv, MatrixRoundTripIsExact) {
  const fs::path dir = fixtures::scratch_dir("csv_roundtrip");
  const Matrix M = fixtures::gaussian(7, 3, 4) * 1e-3;
  write_matrix_csv((dir / "m.csv").string(), M);
  EXPECT_EQ(read_matrix_csv((dir / "m.csv").string()), M);
}

TEST(Csv, NonNumericCellNamed) {
  const fs::path dir = fixtures::scratch_dir("csv_bad");
  std::ofstream(dir / "X.csv") << "1,2\n3,abc\n";
  try {
    read_matrix_csv((dir / "X.csv").string());
    FAIL();
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("X.csv"), std::string::npos);
    EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
  }
  std::ofstream(dir / "Y.csv") << "1,2\n3\n";
  EXPECT_THROW(read_matrix_csv((dir / "Y.csv").string()), ValidationError);
}

TEST(Cli, SimulateWritesOutputsAndIsReproducible) {
  const fs::path dir = fixtures::scratch_dir("simulate");
  const fs::path cfg = write_config(dir, kSmallConfig);
  const Cli a = run({"simulate", "--config", cfg.string(), "--out", (dir / "a").string(), "--threads", "1"});
  ASSERT_EQ(a.code, 0) << a.err;
  const Cli b = run({"simulate", "--config", cfg.string(), "--out", (dir / "b").string(), "--threads", "3"});
  ASSERT_EQ(b.code, 0) << b.err;
  for (const char* f : {"bias_records.csv", "replication_deviations.csv"}) {
    const std::string body = read_file(dir / "a" / f);
    EXPECT_FALSE(body.empty());
    EXPECT_EQ(body.back(), '\n');
    EXPECT_EQ(body, read_file(dir / "b" / f)) << f;
  }
  const std::string records = read_file(dir / "a" / "bias_records.csv");
  EXPECT_EQ(records.rfind("panel,T,N,estimator,target,coordinate,mean_bias,mc_stderr,R_effective\n", 0), 0u);
  const std::string manifest = read_file(dir / "a" / "manifest.json");
  EXPECT_NE(manifest.find("config_digest"), std::string::npos);
  EXPECT_NE(manifest.find("master_seed"), std::string::npos);
}

TEST(Cli, SimulateReplicationAndSizeFlags) {
  const fs::path dir = fixtures::scratch_dir("simulate_flags");
  const fs::path cfg = write_config(dir, kSmallConfig);
  const Cli a = run({"simulate", "--config", cfg.string(), "--out", dir.string(), "--replications", "1",
                     "--sizes", "20x25", "--set", "experiment.estimators=raw"});
  ASSERT_EQ(a.code, 0) << a.err;
  const auto rows = read_bias_records((dir / "bias_records.csv").string());
  ASSERT_EQ(rows.size(), 12u);
  EXPECT_EQ(rows[0].T, 20);
  EXPECT_EQ(rows[0].N, 25);
  EXPECT_EQ(rows[0].R_effective, 1);
  EXPECT_FALSE(rows[0].mc_stderr);
}

TEST(Cli, SimulateMissingAlphasExitsWithValidationCode) {
  const fs::path dir = fixtures::scratch_dir("simulate_missing");
  std::string body = kSmallConfig;
  body.replace(body.find("alphas"), std::string("alphas = 1, 1\n").size(), "");
  const fs::path cfg = write_config(dir, body);
  const Cli a = run({"simulate", "--config", cfg.string(), "--out", dir.string()});
  EXPECT_EQ(a.code, 2);
  EXPECT_NE(a.err.find("dgp.alphas"), std::string::npos) << a.err;
  EXPECT_EQ(run({"simulate"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
}

TEST(Cli, ExportThenEstimateRoundTripsBitForBit) {
  const fs::path dir = fixtures::scratch_dir("export");
  const fs::path cfg = write_config(dir, kSmallConfig);
  const Cli ex = run({"export-sample", "--config", cfg.string(), "--replication", "2", "--out", (dir / "data").string()});
  ASSERT_EQ(ex.code, 0) << ex.err;

  const SimulationPlan plan = load_plan(cfg.string(), {});
  const GeneratedSample s = replication_sample(plan, 0, {30, 30}, 2);
  const DataFiles data = read_data_dir((dir / "data").string());
  EXPECT_EQ(data.panel.X(), s.panel.X());
  EXPECT_EQ(data.y, s.y);
  EXPECT_EQ(data.W, s.W);

  EstimateOptions opts;
  opts.factors = 2;
  opts.bootstrap_B = 5;
  opts.jackknife_S = 3;
  opts.seed = 4;
  opts.threads = 1;
  const EstimateReport from_files = estimate_from_data(data.panel, data.y, data.W, opts);
  const EstimateReport in_process = estimate_from_data(s.panel, s.y, s.W, opts);
  EXPECT_EQ(from_files.fit.delta_hat, in_process.fit.delta_hat);
  EXPECT_EQ(*from_files.bcb_h, *in_process.bcb_h);
  EXPECT_EQ(*from_files.bcjk, *in_process.bcjk);

  const Cli est = run({"estimate", "--data", (dir / "data").string(), "--factors", "2", "--bootstrap", "5",
                       "--jackknife", "3", "--seed", "4", "--threads", "1", "--out", (dir / "est").string()});
  ASSERT_EQ(est.code, 0) << est.err;
  EXPECT_NE(est.out.find("bcb_H,gamma_1,"), std::string::npos);
  EXPECT_NE(est.out.find("bcjk,beta_2,"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "est" / "bootstrap_stats.csv"));
}

TEST(Cli, EstimateNoiselessRecoversParameters) {
  const fs::path dir = fixtures::scratch_dir("estimate_noiseless");
  const fs::path cfg = write_config(dir, std::string(kSmallConfig) + "[dgp]\nerror_variance = 0, 0\nsigma_eps2 = 0\n");
  ASSERT_EQ(run({"export-sample", "--config", cfg.string(), "--out", dir.string()}).code, 0);
  const DataFiles data = read_data_dir(dir.string());
  EstimateOptions opts;
  opts.factors = 2;
  // Orientation by largest loading is not the F0 sign, so compare beta and |gamma|.
  const EstimateReport rep = estimate_from_data(data.panel, data.y, data.W, opts);
  EXPECT_LE((rep.fit.beta_hat() - Vector::Ones(2)).norm(), 1e-10);
  EXPECT_LE((rep.fit.gamma_hat().cwiseAbs() - Vector::Ones(2)).norm(), 1e-10);
}

TEST(Cli, EstimateValidation) {
  const fs::path dir = fixtures::scratch_dir("estimate_bad");
  const fs::path cfg = write_config(dir, kSmallConfig);
  ASSERT_EQ(run({"export-sample", "--config", cfg.string(), "--out", dir.string()}).code, 0);
  EXPECT_EQ(run({"estimate", "--data", dir.string(), "--factors", "0"}).code, 2);
  EXPECT_EQ(run({"estimate", "--data", dir.string(), "--factors", "31"}).code, 2);
  std::ofstream(dir / "y.csv") << "1\n2\n";
  const Cli bad = run({"estimate", "--data", dir.string(), "--factors", "2"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("mismatch"), std::string::npos) << bad.err;
}

TEST(Cli, ReportFiltersAndRejectsUnknownNames) {
  const fs::path dir = fixtures::scratch_dir("report");
  const fs::path cfg = write_config(
      dir, std::string(kSmallConfig) +
               "[grid]\nrho_fw = 0 | 0.6\nalphas = 1,1 | 1,0.8 | 0.8,0.6\nd = 0.05,0.2 | 0.2,0.2 | 0.2,0.2\n"
               "[experiment]\nreplications = 2\nestimators = raw, bcjk\n");
  ASSERT_EQ(run({"simulate", "--config", cfg.string(), "--out", dir.string()}).code, 0);
  const std::string records = (dir / "bias_records.csv").string();

  const Cli full = run({"report", "--records", records});
  ASSERT_EQ(full.code, 0) << full.err;
  // Header + 6 panels x (3 + 1) pairings x 4 coordinates + footer.
  EXPECT_EQ(std::count(full.out.begin(), full.out.end(), '\n'), 1 + 6 * 4 * 4 + 1);

  const Cli g2 = run({"report", "--records", records, "--coordinate", "gamma_2", "--out", (dir / "plots").string()});
  ASSERT_EQ(g2.code, 0) << g2.err;
  int files = 0;
  for (const auto& entry : fs::directory_iterator(dir / "plots")) {
    ++files;
    const std::string body = read_file(entry.path());
    EXPECT_EQ(std::count(body.begin(), body.end(), '\n'), 1 + 4);
  }
  EXPECT_EQ(files, 6);

  const Cli bad = run({"report", "--records", records, "--estimators", "raw,nope"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("bcbGP_Hhat"), std::string::npos);
  EXPECT_EQ(run({"report", "--records", records, "--targets", "gamma_star"}).code, 2);
  EXPECT_EQ(run({"report", "--records", (dir / "missing.csv").string()}).code, 2);
}
