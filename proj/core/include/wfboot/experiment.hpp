#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wfboot/bootstrap.hpp"
#include "wfboot/dgp.hpp"
#include "wfboot/jackknife.hpp"

namespace wfboot {

enum class Estimator { Raw, BcbHhat, BcbHq, BcbH, BcbGpHhat, BcbGpHq, Bcjk };
enum class Target { GammaHhat, GammaHq, Gamma0 };

inline constexpr std::array<Estimator, 7> kAllEstimators = {
    Estimator::Raw,       Estimator::BcbHhat,   Estimator::BcbHq, Estimator::BcbH,
    Estimator::BcbGpHhat, Estimator::BcbGpHq,   Estimator::Bcjk};
inline constexpr std::array<Target, 3> kAllTargets = {Target::GammaHhat, Target::GammaHq,
                                                      Target::Gamma0};

std::string_view to_string(Estimator e) noexcept;
std::string_view to_string(Target t) noexcept;
std::optional<Estimator> parse_estimator(std::string_view name) noexcept;
std::optional<Target> parse_target(std::string_view name) noexcept;

/// Targets each estimator's bias is measured against.
std::vector<Target> targets_for(Estimator e);

/// "gamma_1", ..., "gamma_r", "beta_1", ..., "beta_p".
std::string coordinate_name(int index, int r);

struct PanelSize {
  int T = 0;
  int N = 0;
  friend bool operator==(const PanelSize&, const PanelSize&) = default;
};

struct EstimatorSet {
  std::array<bool, 7> enabled{true, true, true, true, true, true, true};

  bool contains(Estimator e) const noexcept { return enabled[static_cast<std::size_t>(e)]; }
  void set(Estimator e, bool on) noexcept { enabled[static_cast<std::size_t>(e)] = on; }
  std::vector<Estimator> list() const;
};

struct ExperimentConfig {
  DgpConfig dgp;
  std::vector<PanelSize> sizes{{50, 50}, {100, 100}, {200, 200}};
  int replications = 1000;
  BootstrapConfig bootstrap;
  JackknifeConfig jackknife;
  EstimatorSet estimators;
  std::uint64_t master_seed = 20240901;
  unsigned threads = 1;
  /// Largest fraction of failed replications tolerated per size.
  double max_failure_fraction = 0.05;

  void validate() const;
};

/// Estimator minus target for one (estimator, target) pairing.
struct Deviation {
  Estimator estimator;
  Target target;
  Vector value;
};

struct ReplicationResult {
  PanelSize size;
  int rep_index = 0;
  bool failed = false;
  std::string error;
  std::vector<Deviation> deviations;
};

/// The sample drawn by replication `rep_index` at `size`.
GeneratedSample replication_sample(const ExperimentConfig& cfg, PanelSize size, int rep_index);

/// One generated sample: PC estimation aligned to F0, rotated targets from
/// the known signals, every enabled estimator, and its deviations.
/// Randomness is derived from (master_seed, size, rep_index) only.
ReplicationResult run_replication(const ExperimentConfig& cfg, PanelSize size, int rep_index);

struct BiasRecord {
  PanelSize size;
  Estimator estimator;
  Target target;
  int coordinate = 0;
  std::string coordinate_label;
  double mean_bias = 0.0;
  std::optional<double> mc_stderr;  // absent when fewer than two replications
  int R_effective = 0;
};

struct ExperimentResult {
  std::vector<BiasRecord> records;
  std::vector<ReplicationResult> replications;
};

/// Replications run in parallel on cfg.threads workers; records are reduced
/// in replication order so the output does not depend on the schedule.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Aggregates replication results (all of one size) into bias records.
std::vector<BiasRecord> aggregate(const ExperimentConfig& cfg, PanelSize size,
                                  const std::vector<ReplicationResult>& reps);

}  // namespace wfboot
