#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wfboot/factor_core.hpp"
#include "wfboot/regression.hpp"

namespace wfboot {

enum class MultiplierLaw { Rademacher, StandardNormal };

struct BootstrapConfig {
  int B = 100;
  MultiplierLaw multiplier_law = MultiplierLaw::Rademacher;
  std::uint64_t seed = 0;
  /// Largest fraction of degenerate draws tolerated before the whole
  /// distribution is rejected.
  double max_dropped_fraction = 0.05;
  unsigned threads = 1;
  Tolerances tol{};
};

/// Rotation used to centre each bootstrap statistic.
enum class BootstrapKind { TildeH, TildeHq, Identity };

const char* to_string(BootstrapKind kind) noexcept;

/// Everything the bootstrap world is built from: the PC estimate and OLS fit
/// of the original sample serve as the "true" parameters, and their
/// residuals are the objects being resampled.
struct BootstrapWorld {
  Matrix F_hat;
  Matrix B_hat;
  Matrix E_hat;    // X - F_hat B_hat'
  Vector eps_hat;  // OLS residuals
  Vector delta_hat;
  Matrix W;
  int r = 0;
  int p = 0;

  Index T() const noexcept { return F_hat.rows(); }
  Index N() const noexcept { return B_hat.rows(); }
};

BootstrapWorld make_bootstrap_world(const PanelData& panel, const PCEstimate& pc,
                                    const AugmentedFit& fit, const Matrix& W);

struct WildResample {
  Matrix E_dag;
  Vector eps_dag;
};

/// E_dag(t,i) = s(t,i) E_hat(t,i), eps_dag(t) = w(t) eps_hat(t) with i.i.d.
/// mean-0 variance-1 multipliers; the stream depends only on
/// (cfg.seed, draw_index).
WildResample wild_resample(const Matrix& residuals_E, const Vector& residuals_eps,
                           const BootstrapConfig& cfg, int draw_index);

/// One bootstrap statistic: sqrt(T)(delta_dag - target_dag) and its
/// comparator form sqrt(T) Phi_dag (delta_dag - target_dag).
struct DrawRow {
  Vector stat;
  Vector stat_gp;
};

struct DrawDiagnostics {
  int draw_index = 0;
  int sign_flips = 0;
  bool dropped = false;
  std::string note;
  std::vector<std::string> warnings;
};

/// Outcome of a single draw for several kinds at once. The PC step is shared;
/// each kind only adds its own rotation, so a kind's row never depends on
/// which other kinds were requested.
struct MultiKindDraw {
  std::vector<std::optional<DrawRow>> rows;  // parallel to the requested kinds
  std::vector<std::string> failures;         // empty string when the kind succeeded
  DrawDiagnostics diagnostics;
};

MultiKindDraw bootstrap_draw_kinds(const BootstrapWorld& world, const BootstrapConfig& cfg,
                                   std::span<const BootstrapKind> kinds, int draw_index);

/// Runs one draw for one kind; throws when the draw is degenerate.
DrawRow bootstrap_draw(const BootstrapWorld& world, const BootstrapConfig& cfg,
                       BootstrapKind kind, int draw_index);

/// Same as above with residuals supplied explicitly (for tests that force a
/// particular bootstrap world).
DrawRow bootstrap_draw(const BootstrapWorld& world, const WildResample& noise,
                       BootstrapKind kind, const Tolerances& tol = {},
                       DrawDiagnostics* diagnostics = nullptr);

struct BootstrapStatistics {
  Matrix stats;     // one row per retained draw
  Matrix stats_gp;
  BootstrapKind rotation_kind = BootstrapKind::TildeH;
  std::vector<DrawDiagnostics> meta;  // one entry per draw, retained or not
  int B_requested = 0;

  Index B_effective() const noexcept { return stats.rows(); }
};

/// Repeats the draw for b = 1..B. Throws Error when more than
/// cfg.max_dropped_fraction of the draws are degenerate.
BootstrapStatistics bootstrap_distribution(const BootstrapWorld& world, const BootstrapConfig& cfg,
                                           BootstrapKind kind);

/// Distributions for several kinds computed from one shared set of draws.
/// Element k is identical to bootstrap_distribution(world, cfg, kinds[k]).
std::vector<BootstrapStatistics> bootstrap_distributions(const BootstrapWorld& world,
                                                         const BootstrapConfig& cfg,
                                                         std::span<const BootstrapKind> kinds);

enum class BiasMode { New, GP };

/// delta_hat - mean(rows) / sqrt(T), using the new or the comparator rows.
Vector bias_correct(const AugmentedFit& fit, const BootstrapStatistics& stats, BiasMode mode,
                    Index T);

}  // namespace wfboot
