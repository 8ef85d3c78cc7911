#pragma once

#include <string>
#include <vector>

#include "wfboot/errors.hpp"
#include "wfboot/linalg.hpp"

namespace wfboot {

/// T x N panel of predictors; rows are time periods, columns are units.
class PanelData {
 public:
  /// Throws ValidationError unless T >= 2, N >= 1 and all entries are finite.
  explicit PanelData(Matrix X);

  const Matrix& X() const noexcept { return X_; }
  Index T() const noexcept { return X_.rows(); }
  Index N() const noexcept { return X_.cols(); }

 private:
  Matrix X_;
};

/// Latent signal components together with their canonical (identified)
/// representation: F0 = F_star * H, B0 = B_star * H^{-T},
/// T^{-1} F0'F0 = I and B0'B0 = diag(Lambda).
struct SignalSet {
  Matrix F_star;
  Matrix B_star;
  Matrix F0;
  Matrix B0;
  Matrix H;
  Vector Lambda;
};

/// Principal-component estimate under the normalization T^{-1} F'F = I,
/// B'B diagonal.
struct PCEstimate {
  Matrix F_hat;
  Matrix B_hat;
  Vector Lambda_hat;
  int r = 0;
  std::vector<std::string> warnings;
};

enum class RotationKind { Canonical, Hhat, HhatQ, TildeH, TildeHq, Identity };

const char* to_string(RotationKind kind) noexcept;

struct Rotation {
  Matrix M;
  RotationKind kind = RotationKind::Identity;

  static Rotation identity(Index r);
};

/// F_hat = sqrt(T) x leading r eigenvectors of T^{-1} X X', B_hat = T^{-1} X'F_hat.
///
/// When N < T the N x N cross-product is diagonalised instead; its non-zero
/// spectrum and the implied factors coincide with the T x T problem. Throws
/// DegenerateSpectrumError when fewer than r eigenvalues are non-zero.
/// A relative eigen-gap below Tolerances::eigen_tie among the leading r + 1
/// eigenvalues is recorded in `warnings` and estimation proceeds.
PCEstimate pc_estimate(const PanelData& panel, int r, const Tolerances& tol = {});

/// Canonical rotation H = P V^{-1/2} built from the eigenvectors P of
/// B*'B* (T^{-1} F*'F*), with V = P'(T^{-1}F*'F*)P. Columns are ordered by
/// decreasing eigenvalue and each column sign is chosen so the largest
/// absolute entry of the matching B0 column is positive.
SignalSet canonical_rotation(const Matrix& F_star, const Matrix& B_star,
                             const Tolerances& tol = {});

/// H_hat = B*'B* (T^{-1} F*'F_hat) Lambda_hat^{-1}.
Rotation rotation_h_hat(const Matrix& B_star, const Matrix& F_star, const PCEstimate& pc,
                        const Tolerances& tol = {});

/// H_tilde = B0'B0 (T^{-1} F0'F_hat) Lambda_hat^{-1} = H^{-1} H_hat.
Rotation rotation_h_tilde(const Matrix& B0, const Matrix& F0, const PCEstimate& pc,
                          const Tolerances& tol = {});

/// M = (T^{-1} F_hat'F_ref)^{-1}. Pass kind HhatQ for F_ref = F*, TildeHq
/// for F_ref = F0.
Rotation rotation_hq(const Matrix& F_hat, const Matrix& F_ref, RotationKind kind,
                     const Tolerances& tol = {});

/// Flips columns of F_hat (and B_hat jointly) so each has positive sample
/// correlation with the same column of F_ref. A column with exactly zero
/// correlation keeps its sign and a warning is recorded.
PCEstimate sign_align(PCEstimate pc, const Matrix& F_ref);

/// Number of columns sign_align would flip.
int count_sign_flips(const Matrix& F_hat, const Matrix& F_ref);

/// Block-diagonal embedding [M 0; 0 I_p].
Matrix phi_embed(const Rotation& rot, int p);

/// Sample correlation between two columns; 0 when either is constant.
double sample_correlation(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

}  // namespace wfboot
