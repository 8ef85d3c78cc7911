#include "wfboot/jackknife.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <sstream>

#include "wfboot/parallel.hpp"
#include "wfboot/rng.hpp"

namespace wfboot {

ColumnSplit split_ordering(const std::vector<Index>& ordering) {
  const auto N = ordering.size();
  if (N < 2) throw ValidationError("a panel split needs at least two columns");
  const auto half = (N + 1) / 2;
  ColumnSplit split;
  split.first.assign(ordering.begin(), ordering.begin() + static_cast<std::ptrdiff_t>(half));
  split.second.assign(ordering.begin() + static_cast<std::ptrdiff_t>(N - half), ordering.end());
  return split;
}

ColumnSplit random_split(Index N, std::uint64_t seed, int split_index, int attempt) {
  std::vector<Index> ordering(static_cast<std::size_t>(N));
  std::iota(ordering.begin(), ordering.end(), Index{0});
  Rng rng = make_stream(seed, {static_cast<std::uint64_t>(StreamTag::Jackknife),
                               static_cast<std::uint64_t>(split_index),
                               static_cast<std::uint64_t>(attempt)});
  std::shuffle(ordering.begin(), ordering.end(), rng);
  return split_ordering(ordering);
}

Matrix align_columns(const Matrix& factors, const Matrix& reference, std::vector<Index>* permutation) {
  const Index r = reference.cols();
  if (factors.cols() != r || factors.rows() != reference.rows())
    throw ValidationError("align_columns: factor matrices must have the same shape");

  Matrix corr(r, r);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < r; ++j) corr(i, j) = sample_correlation(factors.col(i), reference.col(j));

  std::vector<bool> used_src(static_cast<std::size_t>(r), false);
  std::vector<bool> used_dst(static_cast<std::size_t>(r), false);
  std::vector<Index> source_for(static_cast<std::size_t>(r), -1);
  for (Index step = 0; step < r; ++step) {
    Index best_i = -1, best_j = -1;
    double best = -1.0;
    for (Index j = 0; j < r; ++j) {
      if (used_dst[static_cast<std::size_t>(j)]) continue;
      for (Index i = 0; i < r; ++i) {
        if (used_src[static_cast<std::size_t>(i)]) continue;
        const double a = std::abs(corr(i, j));
        if (a > best) {
          best = a;
          best_i = i;
          best_j = j;
        }
      }
    }
    used_src[static_cast<std::size_t>(best_i)] = true;
    used_dst[static_cast<std::size_t>(best_j)] = true;
    source_for[static_cast<std::size_t>(best_j)] = best_i;
  }

  Matrix aligned(factors.rows(), r);
  for (Index j = 0; j < r; ++j) {
    const Index i = source_for[static_cast<std::size_t>(j)];
    aligned.col(j) = corr(i, j) < 0.0 ? Vector(-factors.col(i)) : Vector(factors.col(i));
  }
  if (permutation) *permutation = std::move(source_for);
  return aligned;
}

namespace {

AugmentedFit half_fit(const PanelData& panel, const std::vector<Index>& columns, const Vector& y,
                      const Matrix& W, const PCEstimate& full, const char* name,
                      const Tolerances& tol) {
  PanelData half(panel.X()(Eigen::all, columns));
  PCEstimate pc;
  try {
    pc = pc_estimate(half, full.r, tol);
  } catch (const DegenerateSpectrumError& e) {
    throw DegenerateSpectrumError(std::string(name) + " half-panel: " + e.what());
  }
  const Matrix aligned = align_columns(pc.F_hat, full.F_hat);
  return ols_augmented({y, aligned, W}, tol.max_condition);
}

}  // namespace

std::pair<AugmentedFit, AugmentedFit> panel_split_once(const PanelData& panel, const Vector& y,
                                                       const Matrix& W, const PCEstimate& full,
                                                       const ColumnSplit& split,
                                                       const Tolerances& tol) {
  const auto check = [&](const std::vector<Index>& cols) {
    for (Index c : cols)
      if (c < 0 || c >= panel.N()) throw ValidationError("panel split index out of range");
  };
  check(split.first);
  check(split.second);
  return {half_fit(panel, split.first, y, W, full, "first", tol),
          half_fit(panel, split.second, y, W, full, "second", tol)};
}

JackknifeResult jackknife_estimate(const PanelData& panel, const Vector& y, const Matrix& W,
                                   const PCEstimate& full, const AugmentedFit& full_fit,
                                   const JackknifeConfig& cfg) {
  if (cfg.S < 1) throw ValidationError("jackknife requires S >= 1");
  const auto S = static_cast<std::size_t>(cfg.S);
  std::vector<Vector> split_means(S);
  std::vector<int> retries(S, 0);

  parallel_for(S, cfg.threads, [&](std::size_t s) {
    for (int attempt = 0;; ++attempt) {
      try {
        const ColumnSplit split = random_split(panel.N(), cfg.seed, static_cast<int>(s), attempt);
        const auto [a, b] = panel_split_once(panel, y, W, full, split, cfg.tol);
        split_means[s] = 0.5 * (a.delta_hat + b.delta_hat);
        retries[s] = attempt;
        return;
      } catch (const Error& e) {
        if (attempt >= cfg.max_retries) {
          std::ostringstream msg;
          msg << "jackknife split " << s + 1 << " failed after " << attempt + 1
              << " attempts: " << e.what();
          throw Error(msg.str());
        }
      }
    }
  });

  JackknifeResult out;
  out.delta_jk = Vector::Zero(full_fit.delta_hat.size());
  for (const auto& m : split_means) out.delta_jk += m;
  out.delta_jk /= static_cast<double>(S);
  out.corrected = 2.0 * full_fit.delta_hat - out.delta_jk;
  out.retries_used = std::accumulate(retries.begin(), retries.end(), 0);
  return out;
}

Vector jackknife_estimate(const PanelData& panel, const Vector& y, const Matrix& W, int r,
                          const JackknifeConfig& cfg) {
  const PCEstimate full = pc_estimate(panel, r, cfg.tol);
  const AugmentedFit fit = ols_augmented({y, full.F_hat, W}, cfg.tol.max_condition);
  return jackknife_estimate(panel, y, W, full, fit, cfg).corrected;
}

}  // namespace wfboot
