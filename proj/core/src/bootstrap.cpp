#include "wfboot/bootstrap.hpp"

#include <cmath>
#include <sstream>

#include "wfboot/parallel.hpp"
#include "wfboot/rng.hpp"

namespace wfboot {

const char* to_string(BootstrapKind kind) noexcept {
  switch (kind) {
    case BootstrapKind::TildeH: return "TildeH";
    case BootstrapKind::TildeHq: return "TildeHq";
    case BootstrapKind::Identity: return "Identity";
  }
  return "?";
}

BootstrapWorld make_bootstrap_world(const PanelData& panel, const PCEstimate& pc,
                                    const AugmentedFit& fit, const Matrix& W) {
  if (pc.F_hat.rows() != panel.T() || pc.B_hat.rows() != panel.N())
    throw ValidationError("PC estimate does not belong to this panel");
  if (fit.residuals.size() != panel.T() || fit.r != pc.r)
    throw ValidationError("regression fit does not match the PC estimate");
  BootstrapWorld world;
  world.F_hat = pc.F_hat;
  world.B_hat = pc.B_hat;
  world.E_hat = panel.X() - pc.F_hat * pc.B_hat.transpose();
  world.eps_hat = fit.residuals;
  world.delta_hat = fit.delta_hat;
  world.W = W;
  world.r = pc.r;
  world.p = fit.p;
  return world;
}

WildResample wild_resample(const Matrix& residuals_E, const Vector& residuals_eps,
                           const BootstrapConfig& cfg, int draw_index) {
  if (residuals_E.rows() != residuals_eps.size())
    throw ValidationError("wild_resample: residual dimensions disagree");
  Rng rng = make_stream(cfg.seed, {static_cast<std::uint64_t>(StreamTag::Bootstrap),
                                   static_cast<std::uint64_t>(draw_index)});
  std::normal_distribution<double> normal;
  auto multiplier = [&]() -> double {
    if (cfg.multiplier_law == MultiplierLaw::Rademacher) return (rng() >> 63) ? 1.0 : -1.0;
    return normal(rng);
  };

  WildResample out;
  out.E_dag.resize(residuals_E.rows(), residuals_E.cols());
  for (Index j = 0; j < residuals_E.cols(); ++j)
    for (Index i = 0; i < residuals_E.rows(); ++i) out.E_dag(i, j) = multiplier() * residuals_E(i, j);
  out.eps_dag.resize(residuals_eps.size());
  for (Index t = 0; t < residuals_eps.size(); ++t) out.eps_dag(t) = multiplier() * residuals_eps(t);
  return out;
}

namespace {

struct BootstrapRefit {
  PCEstimate pc;
  AugmentedFit fit;
};

BootstrapRefit refit(const BootstrapWorld& world, const WildResample& noise, const Tolerances& tol,
                     DrawDiagnostics* diagnostics) {
  PanelData x_dag(world.F_hat * world.B_hat.transpose() + noise.E_dag);
  PCEstimate pc = pc_estimate(x_dag, world.r, tol);
  const int flips = count_sign_flips(pc.F_hat, world.F_hat);
  pc = sign_align(std::move(pc), world.F_hat);

  Vector y_dag = world.F_hat * world.delta_hat.head(world.r) + noise.eps_dag;
  if (world.p > 0) y_dag += world.W * world.delta_hat.tail(world.p);
  AugmentedFit fit = ols_augmented({y_dag, pc.F_hat, world.W}, tol.max_condition);

  if (diagnostics) {
    diagnostics->sign_flips = flips;
    diagnostics->warnings.insert(diagnostics->warnings.end(), pc.warnings.begin(), pc.warnings.end());
  }
  return {std::move(pc), std::move(fit)};
}

DrawRow rows_for_kind(const BootstrapWorld& world, const BootstrapRefit& boot, BootstrapKind kind,
                      const Tolerances& tol) {
  const double root_t = std::sqrt(static_cast<double>(world.T()));
  Rotation rot;
  switch (kind) {
    case BootstrapKind::TildeH: {
      // B0'B0 (T^-1 F0'F_dag)(B_dag'B_dag)^-1 with (F0, B0) = (F_hat, B_hat).
      const Matrix bb_dag = boot.pc.B_hat.transpose() * boot.pc.B_hat;
      rot.kind = RotationKind::TildeH;
      rot.M = (world.B_hat.transpose() * world.B_hat) *
              (world.F_hat.transpose() * boot.pc.F_hat / static_cast<double>(world.T())) *
              bb_dag.inverse();
      break;
    }
    case BootstrapKind::TildeHq:
      rot = rotation_hq(boot.pc.F_hat, world.F_hat, RotationKind::TildeHq, tol);
      break;
    case BootstrapKind::Identity:
      rot = Rotation::identity(world.r);
      break;
  }

  const TargetVector target =
      rotated_target({world.delta_hat, TargetKind::Delta0}, rot, world.p, tol);
  const Vector centred = boot.fit.delta_hat - target.value;
  DrawRow row;
  row.stat = root_t * centred;
  if (kind == BootstrapKind::Identity)
    row.stat_gp = row.stat;
  else
    row.stat_gp = root_t * (phi_embed(rot, world.p) * centred);
  return row;
}

}  // namespace

DrawRow bootstrap_draw(const BootstrapWorld& world, const WildResample& noise, BootstrapKind kind,
                       const Tolerances& tol, DrawDiagnostics* diagnostics) {
  const BootstrapRefit boot = refit(world, noise, tol, diagnostics);
  return rows_for_kind(world, boot, kind, tol);
}

DrawRow bootstrap_draw(const BootstrapWorld& world, const BootstrapConfig& cfg, BootstrapKind kind,
                       int draw_index) {
  const WildResample noise = wild_resample(world.E_hat, world.eps_hat, cfg, draw_index);
  return bootstrap_draw(world, noise, kind, cfg.tol);
}

MultiKindDraw bootstrap_draw_kinds(const BootstrapWorld& world, const BootstrapConfig& cfg,
                                   std::span<const BootstrapKind> kinds, int draw_index) {
  MultiKindDraw out;
  out.rows.resize(kinds.size());
  out.failures.assign(kinds.size(), std::string{});
  out.diagnostics.draw_index = draw_index;

  const WildResample noise = wild_resample(world.E_hat, world.eps_hat, cfg, draw_index);
  std::optional<BootstrapRefit> boot;
  try {
    boot = refit(world, noise, cfg.tol, &out.diagnostics);
  } catch (const Error& e) {
    out.diagnostics.dropped = true;
    out.diagnostics.note = e.what();
    for (auto& f : out.failures) f = e.what();
    return out;
  }
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    try {
      out.rows[k] = rows_for_kind(world, *boot, kinds[k], cfg.tol);
    } catch (const Error& e) {
      out.failures[k] = e.what();
    }
  }
  return out;
}

std::vector<BootstrapStatistics> bootstrap_distributions(const BootstrapWorld& world,
                                                         const BootstrapConfig& cfg,
                                                         std::span<const BootstrapKind> kinds) {
  if (cfg.B < 1) throw ValidationError("bootstrap requires B >= 1");
  const auto B = static_cast<std::size_t>(cfg.B);
  std::vector<MultiKindDraw> draws(B);
  parallel_for(B, cfg.threads, [&](std::size_t b) {
    draws[b] = bootstrap_draw_kinds(world, cfg, kinds, static_cast<int>(b) + 1);
  });

  const Index dim = world.r + world.p;
  std::vector<BootstrapStatistics> result(kinds.size());
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    BootstrapStatistics& s = result[k];
    s.rotation_kind = kinds[k];
    s.B_requested = cfg.B;
    Index kept = 0;
    for (const auto& d : draws) kept += d.rows[k].has_value() ? 1 : 0;

    const Index dropped = static_cast<Index>(B) - kept;
    if (static_cast<double>(dropped) > cfg.max_dropped_fraction * static_cast<double>(B)) {
      std::ostringstream msg;
      msg << "bootstrap (" << to_string(kinds[k]) << "): " << dropped << " of " << B
          << " draws were degenerate";
      for (const auto& d : draws)
        if (!d.rows[k]) {
          msg << "; first failure: " << d.failures[k];
          break;
        }
      throw Error(msg.str());
    }

    s.stats.resize(kept, dim);
    s.stats_gp.resize(kept, dim);
    Index row = 0;
    for (const auto& d : draws) {
      DrawDiagnostics diag = d.diagnostics;
      if (d.rows[k]) {
        s.stats.row(row) = d.rows[k]->stat.transpose();
        s.stats_gp.row(row) = d.rows[k]->stat_gp.transpose();
        ++row;
      } else {
        diag.dropped = true;
        if (diag.note.empty()) diag.note = d.failures[k];
      }
      s.meta.push_back(std::move(diag));
    }
  }
  return result;
}

BootstrapStatistics bootstrap_distribution(const BootstrapWorld& world, const BootstrapConfig& cfg,
                                           BootstrapKind kind) {
  const BootstrapKind kinds[] = {kind};
  return std::move(bootstrap_distributions(world, cfg, kinds).front());
}

Vector bias_correct(const AugmentedFit& fit, const BootstrapStatistics& stats, BiasMode mode,
                    Index T) {
  const Matrix& rows = mode == BiasMode::New ? stats.stats : stats.stats_gp;
  if (rows.rows() == 0) throw ValidationError("bias_correct: bootstrap statistics are empty");
  if (rows.cols() != fit.delta_hat.size())
    throw ValidationError("bias_correct: statistic width does not match the fit");
  const Vector average = rows.colwise().sum().transpose() / static_cast<double>(rows.rows());
  return fit.delta_hat - average / std::sqrt(static_cast<double>(T));
}

}  // namespace wfboot
