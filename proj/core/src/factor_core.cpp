#include "wfboot/factor_core.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace wfboot {

double condition_number(const Matrix& m) {
  if (m.rows() == 0) return 1.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

Matrix inverse_sqrt_spd(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  return es.operatorInverseSqrt();
}

PanelData::PanelData(Matrix X) : X_(std::move(X)) {
  if (X_.rows() < 2 || X_.cols() < 1) {
    std::ostringstream msg;
    msg << "panel must have T >= 2 and N >= 1, got " << X_.rows() << "x" << X_.cols();
    throw ValidationError(msg.str());
  }
  if (!X_.allFinite()) throw ValidationError("panel contains non-finite entries");
}

const char* to_string(RotationKind kind) noexcept {
  switch (kind) {
    case RotationKind::Canonical: return "Canonical";
    case RotationKind::Hhat: return "Hhat";
    case RotationKind::HhatQ: return "HhatQ";
    case RotationKind::TildeH: return "TildeH";
    case RotationKind::TildeHq: return "TildeHq";
    case RotationKind::Identity: return "Identity";
  }
  return "?";
}

Rotation Rotation::identity(Index r) { return {Matrix::Identity(r, r), RotationKind::Identity}; }

namespace {

void check_invertible(const Matrix& m, const char* what, const Tolerances& tol) {
  const double cond = condition_number(m);
  if (!(cond <= tol.max_condition)) {
    std::ostringstream msg;
    msg << what << " is singular to working precision (condition number " << cond << ")";
    throw SingularityError(msg.str(), cond);
  }
}

void check_positive(const Vector& lambda_hat) {
  for (Index k = 0; k < lambda_hat.size(); ++k) {
    if (!(lambda_hat(k) > 0.0)) {
      std::ostringstream msg;
      msg << "eigenvalue " << k + 1 << " is not positive (" << lambda_hat(k) << ")";
      throw DegenerateSpectrumError(msg.str());
    }
  }
}

}  // namespace

PCEstimate pc_estimate(const PanelData& panel, int r, const Tolerances& tol) {
  const Matrix& X = panel.X();
  const Index T = panel.T();
  const Index N = panel.N();
  if (r < 1 || r > std::min(T, N)) {
    std::ostringstream msg;
    msg << "number of factors r=" << r << " must lie in [1, min(T, N)=" << std::min(T, N) << "]";
    throw ValidationError(msg.str());
  }

  const bool cross = N < T;
  const Index n = cross ? N : T;
  Matrix gram = Matrix::Zero(n, n);
  if (cross)
    gram.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose(), 1.0 / static_cast<double>(T));
  else
    gram.selfadjointView<Eigen::Lower>().rankUpdate(X, 1.0 / static_cast<double>(T));

  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  if (es.info() != Eigen::Success) throw DegenerateSpectrumError("eigensolver failed to converge");

  // Eigen returns ascending order.
  const Vector values = es.eigenvalues().reverse();
  const Matrix leading = es.eigenvectors().rightCols(r).rowwise().reverse();

  PCEstimate pc;
  pc.r = r;
  const double top = values(0);
  if (!(top > 0.0) || !(values(r - 1) > tol.rank * top)) {
    std::ostringstream msg;
    msg << "degenerate spectrum: fewer than " << r << " non-zero eigenvalues of T^-1 XX'";
    throw DegenerateSpectrumError(msg.str());
  }
  for (int k = 0; k < r; ++k) {
    const double next = (k + 1 < n) ? values(k + 1) : 0.0;
    if ((values(k) - next) / values(k) < tol.eigen_tie) {
      std::ostringstream msg;
      msg << "eigenvalue tie between positions " << k + 1 << " and " << k + 2;
      pc.warnings.push_back(msg.str());
    }
  }

  pc.Lambda_hat = values.head(r);
  if (cross) {
    // F = X v / sqrt(lambda) has T^-1 F'F = I and spans the same eigenspace.
    pc.F_hat = X * leading * pc.Lambda_hat.cwiseSqrt().cwiseInverse().asDiagonal();
  } else {
    pc.F_hat = std::sqrt(static_cast<double>(T)) * leading;
  }
  pc.B_hat = X.transpose() * pc.F_hat / static_cast<double>(T);
  return pc;
}

SignalSet canonical_rotation(const Matrix& F_star, const Matrix& B_star, const Tolerances& tol) {
  const Index T = F_star.rows();
  const Index r = F_star.cols();
  if (B_star.cols() != r || r < 1 || T < 1) throw ValidationError("F_star and B_star must have the same positive column count");

  const Matrix sigma_f = F_star.transpose() * F_star / static_cast<double>(T);
  const Matrix sigma_b = B_star.transpose() * B_star;

  Eigen::SelfAdjointEigenSolver<Matrix> es_f(sigma_f);
  Eigen::SelfAdjointEigenSolver<Matrix> es_b(sigma_b);
  if (!(es_f.eigenvalues()(0) > tol.rank * es_f.eigenvalues()(r - 1)) ||
      !(es_b.eigenvalues()(0) > tol.rank * es_b.eigenvalues()(r - 1)))
    throw IdentificationError("signal covariances must be positive definite");

  // Eigenvectors of sigma_b * sigma_f via the symmetric similarity
  // sigma_f^{1/2} sigma_b sigma_f^{1/2}.
  const Matrix root_f = es_f.operatorSqrt();
  const Matrix root_f_inv = es_f.operatorInverseSqrt();
  Eigen::SelfAdjointEigenSolver<Matrix> es_s(root_f * sigma_b * root_f);
  const Vector lambda = es_s.eigenvalues().reverse();
  const Matrix Q = es_s.eigenvectors().rowwise().reverse();

  for (Index k = 0; k + 1 < r; ++k) {
    if ((lambda(k) - lambda(k + 1)) / lambda(k) < tol.eigen_tie) {
      std::ostringstream msg;
      msg << "signal eigenvalues " << k + 1 << " and " << k + 2
          << " are tied; the canonical rotation is not unique";
      throw IdentificationError(msg.str());
    }
  }

  const Matrix P = root_f_inv * Q;
  const Matrix V = P.transpose() * sigma_f * P;
  Matrix H = P * inverse_sqrt_spd(V);

  Matrix B0 = B_star * H.inverse().transpose();
  for (Index k = 0; k < r; ++k) {
    Index at = 0;
    B0.col(k).cwiseAbs().maxCoeff(&at);
    if (B0(at, k) < 0.0) {
      H.col(k) *= -1.0;
      B0.col(k) *= -1.0;
    }
  }

  SignalSet s;
  s.F_star = F_star;
  s.B_star = B_star;
  s.F0 = F_star * H;
  s.B0 = std::move(B0);
  s.H = std::move(H);
  s.Lambda = lambda;
  return s;
}

namespace {

Rotation data_rotation(const Matrix& B, const Matrix& F, const PCEstimate& pc, RotationKind kind,
                       const Tolerances& tol) {
  check_positive(pc.Lambda_hat);
  const double T = static_cast<double>(F.rows());
  if (F.rows() != pc.F_hat.rows() || F.cols() != pc.r || B.cols() != pc.r)
    throw ValidationError("signal and estimate dimensions disagree");
  Rotation rot;
  rot.kind = kind;
  rot.M = (B.transpose() * B) * (F.transpose() * pc.F_hat / T) *
          pc.Lambda_hat.cwiseInverse().asDiagonal();
  check_invertible(rot.M, to_string(kind), tol);
  return rot;
}

}  // namespace

Rotation rotation_h_hat(const Matrix& B_star, const Matrix& F_star, const PCEstimate& pc,
                        const Tolerances& tol) {
  return data_rotation(B_star, F_star, pc, RotationKind::Hhat, tol);
}

Rotation rotation_h_tilde(const Matrix& B0, const Matrix& F0, const PCEstimate& pc,
                          const Tolerances& tol) {
  return data_rotation(B0, F0, pc, RotationKind::TildeH, tol);
}

Rotation rotation_hq(const Matrix& F_hat, const Matrix& F_ref, RotationKind kind,
                     const Tolerances& tol) {
  if (kind != RotationKind::HhatQ && kind != RotationKind::TildeHq)
    throw ValidationError("rotation_hq produces HhatQ or TildeHq rotations only");
  if (F_hat.rows() != F_ref.rows() || F_hat.cols() != F_ref.cols())
    throw ValidationError("F_hat and F_ref must have the same shape");
  const Matrix cross = F_hat.transpose() * F_ref / static_cast<double>(F_hat.rows());
  check_invertible(cross, "T^-1 F_hat'F_ref", tol);
  return {cross.inverse(), kind};
}

double sample_correlation(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  const Vector ca = a.array() - a.mean();
  const Vector cb = b.array() - b.mean();
  const double denom = std::sqrt(ca.squaredNorm() * cb.squaredNorm());
  if (!(denom > 0.0)) return 0.0;
  return ca.dot(cb) / denom;
}

int count_sign_flips(const Matrix& F_hat, const Matrix& F_ref) {
  int flips = 0;
  for (Index k = 0; k < F_hat.cols(); ++k)
    if (sample_correlation(F_hat.col(k), F_ref.col(k)) < 0.0) ++flips;
  return flips;
}

PCEstimate sign_align(PCEstimate pc, const Matrix& F_ref) {
  if (F_ref.cols() != pc.F_hat.cols() || F_ref.rows() != pc.F_hat.rows())
    throw ValidationError("sign_align: reference factors must match F_hat in shape");
  for (Index k = 0; k < pc.F_hat.cols(); ++k) {
    const double c = sample_correlation(pc.F_hat.col(k), F_ref.col(k));
    if (c < 0.0) {
      pc.F_hat.col(k) *= -1.0;
      pc.B_hat.col(k) *= -1.0;
    } else if (c == 0.0) {
      std::ostringstream msg;
      msg << "zero correlation with reference in column " << k + 1 << "; sign kept";
      pc.warnings.push_back(msg.str());
    }
  }
  return pc;
}

Matrix phi_embed(const Rotation& rot, int p) {
  if (p < 0) throw ValidationError("phi_embed: p must be non-negative");
  const Index r = rot.M.rows();
  Matrix phi = Matrix::Identity(r + p, r + p);
  phi.topLeftCorner(r, r) = rot.M;
  return phi;
}

}  // namespace wfboot
