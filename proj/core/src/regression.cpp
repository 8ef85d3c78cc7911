#include "wfboot/regression.hpp"

#include <limits>
#include <sstream>

namespace wfboot {

AugmentedFit ols_augmented(const AugmentedData& data, double max_condition) {
  const Index T = data.y.size();
  const Index r = data.F_reg.cols();
  const Index p = data.W.size() == 0 ? 0 : data.W.cols();
  if (data.F_reg.rows() != T || (p > 0 && data.W.rows() != T))
    throw ValidationError("regression data row counts disagree");
  if (r + p < 1 || T < r + p) throw ValidationError("too few observations for the regression");
  if (!data.y.allFinite() || !data.F_reg.allFinite() || (p > 0 && !data.W.allFinite()))
    throw ValidationError("regression data contain non-finite entries");

  Matrix Z(T, r + p);
  Z.leftCols(r) = data.F_reg;
  if (p > 0) Z.rightCols(p) = data.W;

  AugmentedFit fit;
  fit.r = static_cast<int>(r);
  fit.p = static_cast<int>(p);
  fit.gram = Z.transpose() * Z / static_cast<double>(T);

  Eigen::SelfAdjointEigenSolver<Matrix> es(fit.gram, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()(0);
  const double hi = es.eigenvalues()(r + p - 1);
  const double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(cond <= max_condition)) {
    std::ostringstream msg;
    msg << "regressors are collinear: Gram condition number " << cond << " exceeds " << max_condition;
    throw CollinearityError(msg.str(), cond);
  }

  const Eigen::LLT<Matrix> llt(fit.gram);
  fit.delta_hat = llt.solve(Z.transpose() * data.y / static_cast<double>(T));
  fit.residuals = data.y - Z * fit.delta_hat;
  return fit;
}

namespace {

TargetKind target_kind_for(RotationKind rot, TargetKind ref) {
  switch (rot) {
    case RotationKind::Hhat:
    case RotationKind::TildeH: return TargetKind::DeltaHhat;
    case RotationKind::HhatQ:
    case RotationKind::TildeHq: return TargetKind::DeltaHq;
    case RotationKind::Canonical: return TargetKind::Delta0;
    case RotationKind::Identity: return ref;
  }
  return ref;
}

}  // namespace

TargetVector rotated_target(const TargetVector& delta_ref, const Rotation& rot, int p,
                            const Tolerances& tol) {
  const Index r = rot.M.rows();
  if (rot.M.cols() != r || delta_ref.value.size() != r + p)
    throw ValidationError("rotated_target: dimensions of rotation and parameter vector disagree");
  TargetVector out{delta_ref.value, target_kind_for(rot.kind, delta_ref.kind)};
  if (rot.kind == RotationKind::Identity) return out;

  const double cond = condition_number(rot.M);
  if (!(cond <= tol.max_condition)) {
    std::ostringstream msg;
    msg << "rotation " << to_string(rot.kind) << " is singular (condition number " << cond << ")";
    throw SingularityError(msg.str(), cond);
  }
  out.value.head(r) = rot.M.partialPivLu().solve(delta_ref.value.head(r));
  return out;
}

}  // namespace wfboot
