#include "wfboot/experiment.hpp"

#include <cmath>
#include <sstream>

#include "wfboot/parallel.hpp"

namespace wfboot {

std::string_view to_string(Estimator e) noexcept {
  switch (e) {
    case Estimator::Raw: return "raw";
    case Estimator::BcbHhat: return "bcb_Hhat";
    case Estimator::BcbHq: return "bcb_Hq";
    case Estimator::BcbH: return "bcb_H";
    case Estimator::BcbGpHhat: return "bcbGP_Hhat";
    case Estimator::BcbGpHq: return "bcbGP_Hq";
    case Estimator::Bcjk: return "bcjk";
  }
  return "?";
}

std::string_view to_string(Target t) noexcept {
  switch (t) {
    case Target::GammaHhat: return "gamma_Hhat";
    case Target::GammaHq: return "gamma_Hq";
    case Target::Gamma0: return "gamma0";
  }
  return "?";
}

std::optional<Estimator> parse_estimator(std::string_view name) noexcept {
  for (Estimator e : kAllEstimators)
    if (to_string(e) == name) return e;
  return std::nullopt;
}

std::optional<Target> parse_target(std::string_view name) noexcept {
  for (Target t : kAllTargets)
    if (to_string(t) == name) return t;
  return std::nullopt;
}

std::vector<Target> targets_for(Estimator e) {
  switch (e) {
    case Estimator::Raw: return {Target::GammaHhat, Target::GammaHq, Target::Gamma0};
    case Estimator::BcbHhat:
    case Estimator::BcbGpHhat: return {Target::GammaHhat};
    case Estimator::BcbHq:
    case Estimator::BcbGpHq: return {Target::GammaHq};
    case Estimator::BcbH:
    case Estimator::Bcjk: return {Target::Gamma0};
  }
  return {};
}

std::string coordinate_name(int index, int r) {
  if (index < r) return "gamma_" + std::to_string(index + 1);
  return "beta_" + std::to_string(index - r + 1);
}

std::vector<Estimator> EstimatorSet::list() const {
  std::vector<Estimator> out;
  for (Estimator e : kAllEstimators)
    if (contains(e)) out.push_back(e);
  return out;
}

void ExperimentConfig::validate() const {
  if (replications < 1) throw ValidationError("experiment.replications: must be at least 1");
  if (sizes.empty()) throw ValidationError("experiment.sizes: must not be empty");
  if (bootstrap.B < 1) throw ValidationError("bootstrap.B: must be at least 1");
  if (jackknife.S < 1) throw ValidationError("jackknife.S: must be at least 1");
  if (estimators.list().empty()) throw ValidationError("experiment.estimators: at least one must be enabled");
  for (const auto& s : sizes) {
    DgpConfig d = dgp;
    d.T = s.T;
    d.N = s.N;
    d.validate();
  }
}

namespace {

constexpr std::uint64_t kSampleTag = 0x5a;

std::uint64_t replication_seed(const ExperimentConfig& cfg, PanelSize size, int rep,
                               std::uint64_t tag) {
  return derive_seed(cfg.master_seed, {static_cast<std::uint64_t>(size.T),
                                       static_cast<std::uint64_t>(size.N),
                                       static_cast<std::uint64_t>(rep), tag});
}

bool uses_any(const EstimatorSet& set, std::initializer_list<Estimator> es) {
  for (Estimator e : es)
    if (set.contains(e)) return true;
  return false;
}

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      carry_ += (sum_ - t) + x;
    else
      carry_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace

GeneratedSample replication_sample(const ExperimentConfig& cfg, PanelSize size, int rep_index) {
  DgpConfig dgp = cfg.dgp;
  dgp.T = size.T;
  dgp.N = size.N;
  return generate_sample(dgp, replication_seed(cfg, size, rep_index, kSampleTag));
}

ReplicationResult run_replication(const ExperimentConfig& cfg, PanelSize size, int rep_index) {
  ReplicationResult result;
  result.size = size;
  result.rep_index = rep_index;
  try {
    DgpConfig dgp = cfg.dgp;
    dgp.T = size.T;
    dgp.N = size.N;
    const GeneratedSample sample = replication_sample(cfg, size, rep_index);
    const SignalSet& sig = sample.signals;
    const int r = dgp.r, p = dgp.p;
    const Tolerances& tol = dgp.tol;

    const PCEstimate pc = sign_align(pc_estimate(sample.panel, r, tol), sig.F0);
    const AugmentedFit fit = ols_augmented({sample.y, pc.F_hat, sample.W}, tol.max_condition);

    Vector delta_star(r + p), delta0(r + p);
    delta0 << dgp.gamma0, dgp.beta;
    delta_star << sig.H * dgp.gamma0, dgp.beta;
    const TargetVector star{delta_star, TargetKind::DeltaStar};

    const Rotation h_hat = rotation_h_hat(sig.B_star, sig.F_star, pc, tol);
    const Rotation h_q = rotation_hq(pc.F_hat, sig.F_star, RotationKind::HhatQ, tol);
    const Vector delta_h_hat = rotated_target(star, h_hat, p, tol).value;
    const Vector delta_hq = rotated_target(star, h_q, p, tol).value;

    auto target_value = [&](Target t) -> const Vector& {
      switch (t) {
        case Target::GammaHhat: return delta_h_hat;
        case Target::GammaHq: return delta_hq;
        case Target::Gamma0: break;
      }
      return delta0;
    };

    std::vector<BootstrapKind> kinds;
    if (uses_any(cfg.estimators, {Estimator::BcbHhat, Estimator::BcbGpHhat}))
      kinds.push_back(BootstrapKind::TildeH);
    if (uses_any(cfg.estimators, {Estimator::BcbHq, Estimator::BcbGpHq}))
      kinds.push_back(BootstrapKind::TildeHq);
    if (cfg.estimators.contains(Estimator::BcbH)) kinds.push_back(BootstrapKind::Identity);

    std::vector<BootstrapStatistics> boot;
    if (!kinds.empty()) {
      BootstrapConfig bcfg = cfg.bootstrap;
      bcfg.seed = replication_seed(cfg, size, rep_index, static_cast<std::uint64_t>(StreamTag::Bootstrap));
      bcfg.threads = 1;
      bcfg.tol = tol;
      const BootstrapWorld world = make_bootstrap_world(sample.panel, pc, fit, sample.W);
      boot = bootstrap_distributions(world, bcfg, kinds);
    }
    auto stats_for = [&](BootstrapKind k) -> const BootstrapStatistics& {
      for (std::size_t i = 0; i < kinds.size(); ++i)
        if (kinds[i] == k) return boot[i];
      throw Error("internal: bootstrap kind not computed");
    };

    std::optional<Vector> jackknifed;
    if (cfg.estimators.contains(Estimator::Bcjk)) {
      JackknifeConfig jcfg = cfg.jackknife;
      jcfg.seed = replication_seed(cfg, size, rep_index, static_cast<std::uint64_t>(StreamTag::Jackknife));
      jcfg.threads = 1;
      jcfg.tol = tol;
      jackknifed = jackknife_estimate(sample.panel, sample.y, sample.W, pc, fit, jcfg).corrected;
    }

    auto estimate = [&](Estimator e) -> Vector {
      switch (e) {
        case Estimator::Raw: return fit.delta_hat;
        case Estimator::BcbHhat:
          return bias_correct(fit, stats_for(BootstrapKind::TildeH), BiasMode::New, size.T);
        case Estimator::BcbGpHhat:
          return bias_correct(fit, stats_for(BootstrapKind::TildeH), BiasMode::GP, size.T);
        case Estimator::BcbHq:
          return bias_correct(fit, stats_for(BootstrapKind::TildeHq), BiasMode::New, size.T);
        case Estimator::BcbGpHq:
          return bias_correct(fit, stats_for(BootstrapKind::TildeHq), BiasMode::GP, size.T);
        case Estimator::BcbH:
          return bias_correct(fit, stats_for(BootstrapKind::Identity), BiasMode::New, size.T);
        case Estimator::Bcjk: return *jackknifed;
      }
      return fit.delta_hat;
    };

    for (Estimator e : cfg.estimators.list()) {
      const Vector value = estimate(e);
      for (Target t : targets_for(e)) result.deviations.push_back({e, t, value - target_value(t)});
    }
  } catch (const Error& e) {
    result.failed = true;
    result.error = e.what();
    result.deviations.clear();
  }
  return result;
}

std::vector<BiasRecord> aggregate(const ExperimentConfig& cfg, PanelSize size,
                                  const std::vector<ReplicationResult>& reps) {
  const int r = cfg.dgp.r, dim = cfg.dgp.r + cfg.dgp.p;
  std::vector<BiasRecord> records;
  std::size_t slot = 0;
  for (Estimator e : cfg.estimators.list()) {
    for (Target t : targets_for(e)) {
      for (int c = 0; c < dim; ++c) {
        CompensatedSum sum;
        int n = 0;
        for (const auto& rep : reps) {
          if (rep.failed) continue;
          sum.add(rep.deviations[slot].value(c));
          ++n;
        }
        BiasRecord rec{size, e, t, c, coordinate_name(c, r), 0.0, std::nullopt, n};
        if (n > 0) {
          rec.mean_bias = sum.value() / n;
          if (n > 1) {
            CompensatedSum sq;
            for (const auto& rep : reps) {
              if (rep.failed) continue;
              const double dev = rep.deviations[slot].value(c) - rec.mean_bias;
              sq.add(dev * dev);
            }
            rec.mc_stderr = std::sqrt(sq.value() / (n - 1) / n);
          }
        }
        records.push_back(std::move(rec));
      }
      ++slot;
    }
  }
  return records;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult out;
  for (const PanelSize& size : cfg.sizes) {
    const auto R = static_cast<std::size_t>(cfg.replications);
    std::vector<ReplicationResult> reps(R);
    parallel_for(R, cfg.threads,
                 [&](std::size_t i) { reps[i] = run_replication(cfg, size, static_cast<int>(i)); });

    std::size_t failures = 0;
    const ReplicationResult* first_failure = nullptr;
    for (const auto& rep : reps) {
      if (!rep.failed) continue;
      ++failures;
      if (!first_failure) first_failure = &rep;
    }
    if (failures == R ||
        static_cast<double>(failures) > cfg.max_failure_fraction * static_cast<double>(R)) {
      std::ostringstream msg;
      msg << "experiment " << size.T << "x" << size.N << ": " << failures << " of " << R
          << " replications failed; first error: " << first_failure->error;
      throw Error(msg.str());
    }

    auto recs = aggregate(cfg, size, reps);
    out.records.insert(out.records.end(), recs.begin(), recs.end());
    for (auto& rep : reps) out.replications.push_back(std::move(rep));
  }
  return out;
}

}  // namespace wfboot
