#pragma once

#include "wfboot/factor_core.hpp"

namespace wfboot {

/// Response y (already aligned to the regressor rows) with factor regressors
/// F_reg (T x r) and observed regressors W (T x p, p may be 0).
struct AugmentedData {
  Vector y;
  Matrix F_reg;
  Matrix W;
};

struct AugmentedFit {
  Vector delta_hat;  // (gamma_hat, beta_hat)
  Vector residuals;
  Matrix gram;       // T^-1 Z'Z
  int r = 0;
  int p = 0;

  auto gamma_hat() const { return delta_hat.head(r); }
  auto beta_hat() const { return delta_hat.tail(p); }
};

/// Least squares of y on Z = (F_reg, W). Throws CollinearityError when the
/// Gram matrix condition number exceeds `max_condition`.
AugmentedFit ols_augmented(const AugmentedData& data, double max_condition = 1e12);

enum class TargetKind { DeltaHhat, DeltaHq, Delta0, DeltaStar };

struct TargetVector {
  Vector value;
  TargetKind kind = TargetKind::Delta0;
};

/// Phi_rot^{-1} * delta_ref: the first r coordinates are mapped through
/// M^{-1}, the trailing p coordinates are copied unchanged.
TargetVector rotated_target(const TargetVector& delta_ref, const Rotation& rot, int p,
                            const Tolerances& tol = {});

}  // namespace wfboot
