#include "wfboot/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace wfboot {

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw ValidationError("dgp." + field + ": " + why);
}

}  // namespace

void DgpConfig::validate() const {
  if (r < 1) invalid("r", "must be at least 1");
  if (p < 1) invalid("p", "must be at least 1 (the last regressor is the intercept)");
  if (T < 2 || T < r) invalid("T", "must be at least max(2, r)");
  if (N < r) invalid("N", "must be at least r");
  if (static_cast<int>(alphas.size()) != r) invalid("alphas", "needs exactly r values");
  if (static_cast<int>(d.size()) != r) invalid("d", "needs exactly r values");
  for (int k = 0; k < r; ++k) {
    if (!(alphas[k] > 0.0 && alphas[k] <= 1.0)) invalid("alphas", "values must lie in (0, 1]");
    if (!(d[k] > 0.0)) invalid("d", "values must be positive");
    if (k > 0 && alphas[k] > alphas[k - 1]) invalid("alphas", "must be non-increasing");
    if (k > 0 && alphas[k] == alphas[k - 1] && d[k] == d[k - 1])
      invalid("d", "repeated alphas need different d values for identification");
  }
  if (H_true.rows() != r || H_true.cols() != r) invalid("H_true", "must be r x r");
  if (!(condition_number(H_true) <= tol.max_condition)) invalid("H_true", "must be invertible");
  if (!(rho_fw >= 0.0 && rho_fw < 1.0)) invalid("rho_fw", "must lie in [0, 1)");
  if (!(sigma_w2 > 0.0)) invalid("sigma_w2", "must be positive");
  if (!(sigma_eps2 >= 0.0)) invalid("sigma_eps2", "must be non-negative");
  if (gamma0.size() != r) invalid("gamma0", "needs exactly r values");
  if (beta.size() != p) invalid("beta", "needs exactly p values");
  if (!(error_var_lo >= 0.0 && error_var_hi >= error_var_lo))
    invalid("error_variance", "bounds must satisfy 0 <= lo <= hi");

  const Vector lambda = signal_eigenvalues();
  for (int k = 0; k + 1 < r; ++k)
    if ((lambda(k) - lambda(k + 1)) / lambda(k) < tol.eigen_tie)
      invalid("d", "implied signal eigenvalues d_k N^alpha_k must be distinct");
}

Vector DgpConfig::signal_eigenvalues() const {
  Vector lambda(r);
  for (int k = 0; k < r; ++k) lambda(k) = d[k] * std::pow(static_cast<double>(N), alphas[k]);
  std::sort(lambda.begin(), lambda.end(), std::greater<>());
  return lambda;
}

SignalSet generate_signals(const DgpConfig& cfg, Rng& rng) {
  cfg.validate();
  const Index T = cfg.T, N = cfg.N, r = cfg.r;
  std::normal_distribution<double> normal;

  constexpr int kMaxAttempts = 3;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Matrix A(T, N);
    for (Index j = 0; j < N; ++j)
      for (Index i = 0; i < T; ++i) A(i, j) = normal(rng);

    Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    bool tied = false;
    for (Index k = 0; k < r && k + 1 < sv.size(); ++k)
      if ((sv(k) - sv(k + 1)) / sv(k) < cfg.tol.eigen_tie) tied = true;
    if (tied) continue;

    SignalSet s;
    s.Lambda = cfg.signal_eigenvalues();
    s.F0 = std::sqrt(static_cast<double>(T)) * svd.matrixU().leftCols(r);
    s.B0 = svd.matrixV().leftCols(r) * s.Lambda.cwiseSqrt().asDiagonal();
    s.H = cfg.H_true;
    s.F_star = s.F0 * cfg.H_true.inverse();
    s.B_star = s.B0 * cfg.H_true.transpose();
    return s;
  }
  throw Error("generate_signals: singular values tied in every attempt");
}

PanelData generate_panel(const SignalSet& signals, const DgpConfig& cfg, Rng& rng,
                         Vector* error_sds) {
  const Index T = signals.F0.rows(), N = signals.B0.rows();
  std::uniform_real_distribution<double> uniform(cfg.error_var_lo, cfg.error_var_hi);
  std::normal_distribution<double> normal;

  Vector sds(N);
  for (Index i = 0; i < N; ++i)
    sds(i) = cfg.error_var_hi > cfg.error_var_lo ? std::sqrt(uniform(rng)) : std::sqrt(cfg.error_var_lo);

  Matrix X = signals.F0 * signals.B0.transpose();
  for (Index i = 0; i < N; ++i)
    for (Index t = 0; t < T; ++t) X(t, i) += sds(i) * normal(rng);
  if (error_sds) *error_sds = std::move(sds);
  return PanelData(std::move(X));
}

std::pair<Vector, Matrix> generate_regression(const SignalSet& signals, const DgpConfig& cfg,
                                              Rng& rng) {
  if (cfg.p < 1) throw ValidationError("generate_regression requires p >= 1");
  const Index T = signals.F0.rows(), r = signals.F0.cols(), p = cfg.p;
  std::normal_distribution<double> normal;

  const double sigma_w = std::sqrt(cfg.sigma_w2);
  const double idio = std::sqrt(1.0 - cfg.rho_fw * cfg.rho_fw);
  const Vector common = signals.F0.rowwise().sum() / std::sqrt(static_cast<double>(r));

  Matrix W(T, p);
  W.col(p - 1).setOnes();
  for (Index l = 0; l + 1 < p; ++l)
    for (Index t = 0; t < T; ++t) W(t, l) = sigma_w * (cfg.rho_fw * common(t) + idio * normal(rng));

  const double sigma_eps = std::sqrt(cfg.sigma_eps2);
  Vector y = signals.F0 * cfg.gamma0 + W * cfg.beta;
  for (Index t = 0; t < T; ++t) y(t) += sigma_eps * normal(rng);
  return {std::move(y), std::move(W)};
}

GeneratedSample generate_sample(const DgpConfig& cfg, std::uint64_t seed) {
  Rng signal_rng = make_stream(seed, {static_cast<std::uint64_t>(StreamTag::Signals)});
  Rng panel_rng = make_stream(seed, {static_cast<std::uint64_t>(StreamTag::Panel)});
  Rng reg_rng = make_stream(seed, {static_cast<std::uint64_t>(StreamTag::Regression)});

  SignalSet signals = generate_signals(cfg, signal_rng);
  Vector sds;
  PanelData panel = generate_panel(signals, cfg, panel_rng, &sds);
  auto [y, W] = generate_regression(signals, cfg, reg_rng);
  return {std::move(signals), std::move(panel), std::move(y), std::move(W), std::move(sds)};
}

}  // namespace wfboot
