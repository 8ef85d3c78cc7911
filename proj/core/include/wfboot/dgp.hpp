#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "wfboot/factor_core.hpp"
#include "wfboot/rng.hpp"

namespace wfboot {

/// Monte Carlo design: signal strengths N^alpha_k scaled by d_k, a true
/// rotation H, heteroskedastic idiosyncratic errors and a factor-augmented
/// regression with observed regressors correlated with the factors.
struct DgpConfig {
  int T = 100;
  int N = 100;
  int r = 2;
  int p = 2;
  std::vector<double> alphas{1.0, 1.0};
  std::vector<double> d{0.05, 0.2};
  Matrix H_true = (Matrix(2, 2) << 1.0, 0.5, 0.5, 2.0).finished();
  double rho_fw = 0.0;
  double sigma_w2 = 1.0;
  double sigma_eps2 = 0.5;
  Vector gamma0 = Vector::Ones(2);
  Vector beta = Vector::Ones(2);
  double error_var_lo = 0.5;
  double error_var_hi = 1.5;
  Tolerances tol{};

  /// Throws ValidationError naming the offending field.
  void validate() const;

  /// Signal eigenvalues d_k N^alpha_k sorted in decreasing order; column k
  /// of B0 is scaled by the k-th largest.
  Vector signal_eigenvalues() const;
};

struct GeneratedSample {
  SignalSet signals;
  PanelData panel;
  Vector y;  // row t holds y_{t+1}
  Matrix W;
  Vector error_sds;
};

/// F0 = sqrt(T) x first r left singular vectors of a T x N standard normal
/// matrix, B0 = first r right singular vectors scaled by Lambda^{1/2},
/// F* = F0 H^{-1}, B* = B0 H'. Singular-value ties are redrawn up to three
/// times.
SignalSet generate_signals(const DgpConfig& cfg, Rng& rng);

/// X = F0 B0' + E with E(t,i) = sigma_i xi(t,i), sigma_i^2 ~ U[lo, hi] drawn
/// once per call. Returns the panel and fills `error_sds` when given.
PanelData generate_panel(const SignalSet& signals, const DgpConfig& cfg, Rng& rng,
                         Vector* error_sds = nullptr);

/// W with an intercept in its last column and
/// w(t,l) = sigma_w [rho f0_t'1 / sqrt(r) + sqrt(1 - rho^2) zeta(t,l)];
/// y_{t+1} = f0_t'gamma0 + w_t'beta + eps_{t+1}.
std::pair<Vector, Matrix> generate_regression(const SignalSet& signals, const DgpConfig& cfg,
                                              Rng& rng);

/// Full sample from independent sub-streams of `seed`.
GeneratedSample generate_sample(const DgpConfig& cfg, std::uint64_t seed);

}  // namespace wfboot
