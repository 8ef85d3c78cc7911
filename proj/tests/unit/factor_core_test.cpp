#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracle.hpp"
#include "wfboot/dgp.hpp"
#include "wfboot/factor_core.hpp"

using namespace wfboot;

namespace {

Matrix pc_normalization_gap(const PCEstimate& pc) {
  const double T = static_cast<double>(pc.F_hat.rows());
  return pc.F_hat.transpose() * pc.F_hat / T - Matrix::Identity(pc.r, pc.r);
}

}  // namespace

TEST(PanelData, RejectsBadShapesAndNonFinite) {
  EXPECT_THROW(PanelData(Matrix(1, 3)), ValidationError);
  EXPECT_THROW(PanelData(Matrix(3, 0)), ValidationError);
  Matrix X = Matrix::Ones(3, 2);
  X(1, 1) = std::nan("");
  EXPECT_THROW(PanelData{X}, ValidationError);
}

TEST(PcEstimate, TwoByOneByHand) {
  // T^-1 X X' = [[.5,-.5],[-.5,.5]]: eigenvalue 1, eigenvector (1,-1)/sqrt(2).
  Matrix X(2, 1);
  X << 1, -1;
  const PCEstimate pc = pc_estimate(PanelData(X), 1);
  ASSERT_EQ(pc.r, 1);
  EXPECT_NEAR(pc.Lambda_hat(0), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(pc.F_hat(0, 0)), 1.0, 1e-14);
  EXPECT_NEAR(pc.F_hat(0, 0), -pc.F_hat(1, 0), 1e-14);
  EXPECT_NEAR(std::abs(pc.B_hat(0, 0)), 1.0, 1e-14);
}

TEST(PcEstimate, MatchesJacobiOracleOnGaussianPanel) {
  const Matrix X = fixtures::gaussian(50, 50, 7);
  const PCEstimate pc = pc_estimate(PanelData(X), 2);
  const oracle::PC ref = oracle::brute_force_pc(X, 2);
  for (int k = 0; k < 2; ++k) EXPECT_NEAR(pc.Lambda_hat(k) / ref.lambda(k), 1.0, 1e-8);
  EXPECT_LE(oracle::sign_free_distance(pc.F_hat, ref.F) / ref.F.norm(), 1e-8);
}

TEST(PcEstimate, WideAndTallPanelsAgreeWithOracle) {
  // N < T goes through the N x N cross-product internally.
  for (auto [T, N] : {std::pair{30, 8}, std::pair{8, 30}}) {
    const Matrix X = fixtures::gaussian(T, N, 11 + T);
    const PCEstimate pc = pc_estimate(PanelData(X), 3);
    const oracle::PC ref = oracle::brute_force_pc(X, 3);
    EXPECT_LE(oracle::sign_free_distance(pc.F_hat, ref.F) / ref.F.norm(), 1e-9) << T << "x" << N;
    EXPECT_LE((pc.Lambda_hat - ref.lambda).norm() / ref.lambda.norm(), 1e-10);
  }
}

TEST(PcEstimate, NormalizationAndOrderingInvariants) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Matrix X = fixtures::gaussian(25, 40, seed);
    const PCEstimate pc = pc_estimate(PanelData(X), 4);
    EXPECT_LE(pc_normalization_gap(pc).norm(), 1e-8);
    Matrix BtB = pc.B_hat.transpose() * pc.B_hat;
    const double biggest = pc.Lambda_hat.maxCoeff();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (i != j) EXPECT_LE(std::abs(BtB(i, j)), 1e-8 * biggest);
    for (int k = 0; k + 1 < 4; ++k) EXPECT_GT(pc.Lambda_hat(k), pc.Lambda_hat(k + 1));
    EXPECT_LE(pc.Lambda_hat.sum(), (X * X.transpose()).trace() / 25.0 * (1 + 1e-12));
  }
}

TEST(PcEstimate, ErrorPaths) {
  const Matrix X = fixtures::gaussian(6, 4, 3);
  EXPECT_THROW(pc_estimate(PanelData(X), 0), ValidationError);
  EXPECT_THROW(pc_estimate(PanelData(X), 5), ValidationError);
  // Rank one panel asked for two factors.
  const Matrix rank_one = fixtures::gaussian(6, 1, 1) * fixtures::gaussian(1, 4, 2);
  EXPECT_THROW(pc_estimate(PanelData(rank_one), 2), DegenerateSpectrumError);
}

TEST(PcEstimate, TiedSpectrumWarns) {
  // Orthogonal columns of equal energy: every eigenvalue of T^-1 X X' is tied.
  Matrix X = Matrix::Zero(4, 3);
  X(0, 0) = X(1, 1) = X(2, 2) = 1.0;
  const PCEstimate pc = pc_estimate(PanelData(X), 2);
  EXPECT_FALSE(pc.warnings.empty());
}

TEST(PcEstimate, NoiselessRecoversSignals) {
  for (int c = 0; c < 3; ++c) {
    const DgpConfig cfg = fixtures::noiseless(fixtures::cell(c, 60, 60));
    const GeneratedSample s = generate_sample(cfg, 100 + c);
    const PCEstimate pc = sign_align(pc_estimate(s.panel, 2), s.signals.F0);
    EXPECT_LE((pc.F_hat - s.signals.F0).norm(), 1e-8 * s.signals.F0.norm());
    EXPECT_LE((pc.Lambda_hat - s.signals.Lambda).norm(), 1e-8 * s.signals.Lambda.norm());
  }
}

TEST(CanonicalRotation, AlreadyCanonicalGivesIdentity) {
  const Matrix U = Eigen::HouseholderQR<Matrix>(fixtures::gaussian(30, 2, 4)).householderQ() *
                   Matrix::Identity(30, 2);
  const Matrix F = std::sqrt(30.0) * U;
  Matrix B = Matrix::Zero(10, 2);
  B(0, 0) = 3.0;
  B(1, 1) = 2.0;
  const SignalSet s = canonical_rotation(F, B);
  EXPECT_LE((s.H.cwiseAbs() - Matrix::Identity(2, 2)).norm(), 1e-12);
}

TEST(CanonicalRotation, RecoversTrueRotation) {
  const DgpConfig cfg = fixtures::cell(0, 80, 80);
  Rng rng(5);
  const SignalSet truth = generate_signals(cfg, rng);
  const SignalSet s = canonical_rotation(truth.F_star, truth.B_star);
  // Same columns up to sign.
  for (int k = 0; k < 2; ++k) {
    const double sgn = s.H(0, k) * truth.H(0, k) < 0 ? -1.0 : 1.0;
    EXPECT_LE((s.H.col(k) * sgn - truth.H.col(k)).norm(), 1e-9);
  }
  EXPECT_LE((s.Lambda - truth.Lambda).norm(), 1e-9 * truth.Lambda.norm());
  const Matrix FtF = s.F0.transpose() * s.F0 / 80.0;
  EXPECT_LE((FtF - Matrix::Identity(2, 2)).norm(), 1e-10);
  const Matrix BtB = s.B0.transpose() * s.B0;
  EXPECT_LE(std::abs(BtB(0, 1)), 1e-9 * BtB(0, 0));
}

TEST(CanonicalRotation, AgreesWithInverseCrossProductForm) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Matrix F = fixtures::gaussian(40, 3, seed);
    const Matrix B = fixtures::gaussian(25, 3, seed + 1000);
    const SignalSet s = canonical_rotation(F, B);
    const Matrix alt = (s.F0.transpose() * F / 40.0).inverse();
    EXPECT_LE((s.H - alt).norm(), 1e-10 * s.H.norm());
  }
}

TEST(CanonicalRotation, SignConventionLargestLoadingPositive) {
  const SignalSet s = canonical_rotation(fixtures::gaussian(30, 2, 8), fixtures::gaussian(12, 2, 9));
  for (int k = 0; k < 2; ++k) {
    Index at = 0;
    s.B0.col(k).cwiseAbs().maxCoeff(&at);
    EXPECT_GT(s.B0(at, k), 0.0);
  }
}

TEST(CanonicalRotation, TiedSignalEigenvaluesRejected) {
  const Matrix U = Eigen::HouseholderQR<Matrix>(fixtures::gaussian(20, 2, 4)).householderQ() *
                   Matrix::Identity(20, 2);
  Matrix B = Matrix::Zero(6, 2);
  B(0, 0) = 2.0;
  B(1, 1) = 2.0;
  EXPECT_THROW(canonical_rotation(std::sqrt(20.0) * U, B), IdentificationError);
}

TEST(Rotations, NoiselessRotationsAreIdentity) {
  const DgpConfig cfg = fixtures::noiseless(fixtures::cell(1, 50, 50));
  const GeneratedSample s = generate_sample(cfg, 21);
  const PCEstimate pc = sign_align(pc_estimate(s.panel, 2), s.signals.F0);
  const Matrix I = Matrix::Identity(2, 2);
  EXPECT_LE((rotation_h_tilde(s.signals.B0, s.signals.F0, pc).M - I).norm(), 1e-8);
  EXPECT_LE((rotation_h_hat(s.signals.B0, s.signals.F0, pc).M - I).norm(), 1e-8);
  EXPECT_LE((rotation_hq(pc.F_hat, s.signals.F0, RotationKind::TildeHq).M - I).norm(), 1e-8);
  // With the starred signals Ĥ is the true rotation.
  EXPECT_LE((rotation_h_hat(s.signals.B_star, s.signals.F_star, pc).M - s.signals.H).norm(), 1e-8);
}

TEST(Rotations, KeyIdentities) {
  for (int c = 0; c < 3; ++c) {
    const GeneratedSample s = generate_sample(fixtures::cell(c, 60, 60), 300 + c);
    const auto& sig = s.signals;
    const PCEstimate pc = sign_align(pc_estimate(s.panel, 2), sig.F0);
    const Rotation hh = rotation_h_hat(sig.B_star, sig.F_star, pc);
    const Rotation ht = rotation_h_tilde(sig.B0, sig.F0, pc);
    EXPECT_EQ(hh.kind, RotationKind::Hhat);
    EXPECT_EQ(ht.kind, RotationKind::TildeH);
    EXPECT_LE((hh.M - sig.H * ht.M).norm(), 1e-10 * hh.M.norm());
    EXPECT_LE((sig.F_star * hh.M - sig.F0 * ht.M).norm(), 1e-9 * sig.F0.norm());

    const Rotation hq = rotation_hq(pc.F_hat, sig.F_star, RotationKind::HhatQ);
    const Rotation htq = rotation_hq(pc.F_hat, sig.F0, RotationKind::TildeHq);
    const Vector gamma0 = Vector::Ones(2);
    const Vector gamma_star = sig.H * gamma0;
    EXPECT_LE((htq.M.inverse() * gamma0 - hq.M.inverse() * gamma_star).norm(), 1e-10);
  }
}

TEST(Rotations, HqOfNormalizedFactorsIsIdentity) {
  const PCEstimate pc = pc_estimate(PanelData(fixtures::gaussian(30, 20, 4)), 2);
  EXPECT_LE((rotation_hq(pc.F_hat, pc.F_hat, RotationKind::HhatQ).M - Matrix::Identity(2, 2)).norm(), 1e-10);
  EXPECT_THROW(rotation_hq(pc.F_hat, pc.F_hat, RotationKind::Hhat), ValidationError);
}

TEST(Rotations, SingularCrossProductThrows) {
  const PCEstimate pc = pc_estimate(PanelData(fixtures::gaussian(30, 20, 4)), 2);
  Matrix ref = pc.F_hat;
  ref.col(1) = ref.col(0);
  EXPECT_THROW(rotation_hq(pc.F_hat, ref, RotationKind::TildeHq), SingularityError);
}

TEST(SignAlign, FlipsOnlyAntiCorrelatedColumns) {
  const PCEstimate pc = pc_estimate(PanelData(fixtures::gaussian(30, 20, 5)), 2);
  PCEstimate flipped = pc;
  flipped.F_hat.col(0) *= -1.0;
  flipped.B_hat.col(0) *= -1.0;
  EXPECT_EQ(count_sign_flips(flipped.F_hat, pc.F_hat), 1);
  const PCEstimate back = sign_align(flipped, pc.F_hat);
  EXPECT_EQ(back.F_hat, pc.F_hat);
  EXPECT_EQ(back.B_hat, pc.B_hat);

  PCEstimate both = pc;
  both.F_hat *= -1.0;
  both.B_hat *= -1.0;
  EXPECT_EQ(sign_align(both, pc.F_hat).F_hat, pc.F_hat);
  EXPECT_EQ(sign_align(pc, pc.F_hat).F_hat, pc.F_hat);
}

TEST(SignAlign, ZeroCorrelationKeepsSignAndWarns) {
  Matrix F(4, 1), ref(4, 1);
  F << 1, -1, 1, -1;
  ref << 1, 1, -1, -1;
  PCEstimate pc{F, Matrix::Ones(3, 1), Vector::Ones(1), 1, {}};
  const PCEstimate out = sign_align(pc, ref);
  EXPECT_EQ(out.F_hat, F);
  EXPECT_FALSE(out.warnings.empty());
}

TEST(PhiEmbed, BlockStructure) {
  EXPECT_EQ(phi_embed(Rotation::identity(2), 2), Matrix::Identity(4, 4));
  Rotation rot{(Matrix(2, 2) << 1, .5, .5, 2).finished(), RotationKind::Canonical};
  EXPECT_EQ(phi_embed(rot, 0), rot.M);
  const Matrix phi = phi_embed(rot, 1);
  Matrix expected = Matrix::Zero(3, 3);
  expected.topLeftCorner(2, 2) = rot.M;
  expected(2, 2) = 1.0;
  EXPECT_EQ(phi, expected);
  EXPECT_THROW(phi_embed(rot, -1), ValidationError);
}
