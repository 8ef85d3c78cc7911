#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "wfboot/factor_core.hpp"
#include "wfboot/regression.hpp"

namespace wfboot {

struct JackknifeConfig {
  int S = 100;
  std::uint64_t seed = 0;
  /// Fresh permutations tried for a split whose half-panel fails.
  int max_retries = 3;
  unsigned threads = 1;
  Tolerances tol{};
};

/// Column index sets of the two half-panels. Each half holds ceil(N/2)
/// columns; for odd N the two halves share exactly one index.
struct ColumnSplit {
  std::vector<Index> first;
  std::vector<Index> second;
};

/// Halves of a column ordering. For odd N the median position of the
/// ordering goes to both halves.
ColumnSplit split_ordering(const std::vector<Index>& ordering);

/// Uniformly random column reordering split into halves; the permutation
/// depends only on (seed, split_index, attempt).
ColumnSplit random_split(Index N, std::uint64_t seed, int split_index, int attempt = 0);

/// Reorders and sign-flips the columns of `factors` to match `reference`:
/// greedy maximum-|correlation| assignment (ties to the lower index), then a
/// sign fix so every matched pair has non-negative correlation.
/// `permutation[j]` receives the source column placed at position j.
Matrix align_columns(const Matrix& factors, const Matrix& reference,
                     std::vector<Index>* permutation = nullptr);

/// PC factors of each half-panel, aligned to the full-sample factors, each
/// regressed together with W on y.
std::pair<AugmentedFit, AugmentedFit> panel_split_once(const PanelData& panel, const Vector& y,
                                                       const Matrix& W, const PCEstimate& full,
                                                       const ColumnSplit& split,
                                                       const Tolerances& tol = {});

struct JackknifeResult {
  Vector corrected;     // 2 delta_hat - delta_jk
  Vector delta_jk;      // average of the half-panel estimates
  int retries_used = 0;
};

/// Panel-split jackknife around a given full-sample estimate. `full` must be
/// the PC estimate whose column signs `full_fit` was computed with.
JackknifeResult jackknife_estimate(const PanelData& panel, const Vector& y, const Matrix& W,
                                   const PCEstimate& full, const AugmentedFit& full_fit,
                                   const JackknifeConfig& cfg);

/// Convenience form that estimates the full-sample factors itself.
Vector jackknife_estimate(const PanelData& panel, const Vector& y, const Matrix& W, int r,
                          const JackknifeConfig& cfg);

}  // namespace wfboot
