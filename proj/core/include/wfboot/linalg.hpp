#pragma once

#include <Eigen/Dense>

namespace wfboot {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Numerical tolerances shared by the estimation routines.
///
/// Gap and rank checks are relative to the leading eigenvalue; the
/// condition-number guard applies to every matrix the library inverts.
struct Tolerances {
  /// (lambda_k - lambda_{k+1}) / lambda_k below this is a tie.
  double eigen_tie = 1e-10;
  /// An eigenvalue below rank * lambda_1 counts as zero.
  double rank = 1e-12;
  /// Largest admissible 2-norm condition number of an inverted matrix.
  double max_condition = 1e12;
};

/// 2-norm condition number of a square matrix (infinity if singular).
double condition_number(const Matrix& m);

/// Symmetric inverse square root of a symmetric positive-definite matrix.
Matrix inverse_sqrt_spd(const Matrix& m);

}  // namespace wfboot
