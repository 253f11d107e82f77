#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "statesel/benchgen.hpp"
#include "statesel/dmdc.hpp"
#include "statesel/error.hpp"
#include "test_support.hpp"

using namespace statesel;
using statesel::testing::random_matrix;
using statesel::testing::random_stable;
using statesel::testing::TempDir;

namespace {

SnapshotSet snapshots_from(const Eigen::MatrixXd& Ad, const Eigen::MatrixXd& Bd, Eigen::Index L, std::mt19937_64& rng) {
  SnapshotSet s;
  s.V = random_matrix(Bd.cols(), L, rng);
  s.X.resize(Ad.rows(), L);
  s.Xp.resize(Ad.rows(), L);
  Eigen::VectorXd x = random_matrix(Ad.rows(), 1, rng);
  for (Eigen::Index k = 0; k < L; ++k) {
    s.X.col(k) = x;
    x = Ad * x + Bd * s.V.col(k);
    s.Xp.col(k) = x;
  }
  return s;
}

double residual(const SnapshotSet& s, const Eigen::MatrixXd& Ad, const Eigen::MatrixXd& Bd) {
  return (s.Xp - Ad * s.X - Bd * s.V).norm();
}

// Classic RK4 on dx/dt = A x + B u with u held.
Eigen::VectorXd rk4(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, Eigen::VectorXd x, const Eigen::VectorXd& u,
                    double h, int steps) {
  auto f = [&](const Eigen::VectorXd& z) -> Eigen::VectorXd { return A * z + B * u; };
  for (int s = 0; s < steps; ++s) {
    const Eigen::VectorXd k1 = f(x);
    const Eigen::VectorXd k2 = f(x + 0.5 * h * k1);
    const Eigen::VectorXd k3 = f(x + 0.5 * h * k2);
    const Eigen::VectorXd k4 = f(x + h * k3);
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

}  // namespace

TEST(TruncatedSvd, ConditionCapDropsTinyValues) {
  const Eigen::MatrixXd d = Eigen::Vector3d(1.0, 1e-3, 1e-12).asDiagonal();
  EXPECT_EQ(truncated_svd(d).rank, 2);
}

TEST(TruncatedSvd, IdentityKeepsEverything) {
  const TruncatedSvd s = truncated_svd(Eigen::MatrixXd::Identity(3, 3));
  EXPECT_EQ(s.rank, 3);
  EXPECT_TRUE(s.sigma.isApprox(Eigen::Vector3d::Ones(), 1e-15));
}

TEST(TruncatedSvd, RankFromFactors) {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd m = random_matrix(10, 4, rng) * random_matrix(4, 40, rng);
  EXPECT_EQ(truncated_svd(m).rank, 4);
}

TEST(TruncatedSvd, TiedValuesStayTogether) {
  const Eigen::MatrixXd d = Eigen::Vector4d(2.0, 1.0, 1.0, 1.0).asDiagonal();
  EXPECT_EQ(truncated_svd(d, {1.5}).rank, 1);
  EXPECT_EQ(truncated_svd(d, {2.5}).rank, 4);
}

TEST(TruncatedSvd, DegenerateInputs) {
  EXPECT_THROW((void)truncated_svd(Eigen::MatrixXd::Zero(3, 4)), Error);
  EXPECT_THROW((void)truncated_svd(Eigen::MatrixXd(0, 0)), Error);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(2, 2);
  bad(0, 1) = std::numeric_limits<double>::infinity();
  try {
    (void)truncated_svd(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateSnapshots);
  }
}

TEST(FitDynamics, RecoversRandomStableSystem) {
  std::mt19937_64 rng(21);
  const Eigen::MatrixXd Ad = random_stable(3, 0.9, rng);
  const Eigen::MatrixXd Bd = random_matrix(3, 1, rng);
  const SnapshotSet s = snapshots_from(Ad, Bd, 200, rng);
  const DynamicsFit fit = fit_dynamics(s);
  EXPECT_LT((fit.Ad - Ad).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((fit.Bd - Bd).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_EQ(fit.rank, 4);
}

TEST(FitDynamics, IdentityDynamics) {
  std::mt19937_64 rng(5);
  SnapshotSet s;
  s.X = random_matrix(2, 60, rng);
  s.Xp = s.X;
  s.V = random_matrix(1, 60, rng);
  const DynamicsFit fit = fit_dynamics(s);
  EXPECT_LT((fit.Ad - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(fit.Bd.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(FitDynamics, MatchesDenseLeastSquares) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    SnapshotSet s;
    s.X = random_matrix(3, 40, rng);
    s.V = random_matrix(2, 40, rng);
    s.Xp = random_matrix(3, 40, rng);
    const DynamicsFit fit = fit_dynamics(s);
    Eigen::MatrixXd omega(5, 40);
    omega << s.X, s.V;
    const Eigen::MatrixXd G = omega.transpose().colPivHouseholderQr().solve(s.Xp.transpose()).transpose();
    const double ref = residual(s, G.leftCols(3), G.rightCols(2));
    EXPECT_NEAR(residual(s, fit.Ad, fit.Bd), ref, 1e-9 * ref);
  }
}

TEST(FitDynamics, LooserTruncationNeverRaisesResidual) {
  std::mt19937_64 rng(13);
  SnapshotSet s;
  Eigen::MatrixXd base = random_matrix(4, 80, rng);
  base.row(3) = base.row(2) + 1e-5 * random_matrix(1, 80, rng);  // nearly collinear
  base.row(1) *= 1e-3;
  s.X = base;
  s.V = random_matrix(1, 80, rng);
  s.Xp = random_matrix(4, 80, rng);
  double last = std::numeric_limits<double>::infinity();
  for (double cap : {1e1, 1e2, 1e3, 1e4, 1e6, 1e9, 1e12}) {
    const DynamicsFit fit = fit_dynamics(s, {cap});
    const double r = residual(s, fit.Ad, fit.Bd);
    EXPECT_LE(r, last * (1 + 1e-12)) << "cap " << cap;
    last = r;
  }
}

TEST(FitOutputMap, ScaledIdentity) {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd X = random_matrix(3, 30, rng);
  EXPECT_LT((fit_output_map(X, 2.0 * X) - 2.0 * Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FitOutputMap, RecoversKnownMap) {
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd X = random_matrix(4, 50, rng);
  const Eigen::MatrixXd C0 = random_matrix(2, 4, rng);
  EXPECT_LT((fit_output_map(X, C0 * X) - C0).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(FitOutputMap, MinimumNormSolution) {
  std::mt19937_64 rng(3);
  // Rank-2 X with three rows: row 2 = row 0 + row 1.
  Eigen::MatrixXd X = random_matrix(3, 40, rng);
  X.row(2) = X.row(0) + X.row(1);
  const Eigen::MatrixXd Y = random_matrix(2, 40, rng);
  const Eigen::MatrixXd Cd = fit_output_map(X, Y);
  const Eigen::RowVector3d null_dir(1.0, 1.0, -1.0);  // null_dir * X == 0
  Eigen::MatrixXd shifted = Cd;
  shifted.row(0) += 0.3 * null_dir;
  EXPECT_NEAR((Y - shifted * X).norm(), (Y - Cd * X).norm(), 1e-9);
  EXPECT_GT(shifted.norm(), Cd.norm());
  EXPECT_LT(std::abs(Cd.row(1).dot(null_dir)), 1e-10);
}

TEST(Rollout, TrivialModels) {
  StateSpaceModel m;
  m.Ad = Eigen::MatrixXd::Zero(2, 2);
  m.Bd = Eigen::MatrixXd::Zero(2, 1);
  m.Cd = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXd V = Eigen::MatrixXd::Ones(1, 5);
  EXPECT_TRUE(rollout(m, Eigen::Vector2d(3, 4), V).X.isZero(0.0));

  m.Ad = Eigen::MatrixXd::Identity(2, 2);
  const RolloutResult r = rollout(m, Eigen::Vector2d(3, 4), V);
  for (Eigen::Index k = 0; k < 5; ++k) EXPECT_EQ(r.X.col(k), Eigen::Vector2d(3, 4));
  EXPECT_TRUE(m.Dd().isZero(0.0));
}

TEST(Rollout, MatchesNaiveLoop) {
  std::mt19937_64 rng(17);
  StateSpaceModel m;
  m.Ad = random_stable(4, 0.95, rng);
  m.Bd = random_matrix(4, 2, rng);
  m.Cd = random_matrix(3, 4, rng);
  const Eigen::VectorXd x0 = random_matrix(4, 1, rng);
  const Eigen::MatrixXd V = random_matrix(2, 50, rng);
  const RolloutResult r = rollout(m, x0, V);
  std::vector<double> x(x0.data(), x0.data() + 4);
  for (int k = 0; k < 50; ++k) {
    std::vector<double> next(4, 0.0);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) next[i] += m.Ad(i, j) * x[j];
      for (int j = 0; j < 2; ++j) next[i] += m.Bd(i, j) * V(j, k);
    }
    x = next;
    for (int i = 0; i < 4; ++i) ASSERT_NEAR(r.X(i, k), x[i], 1e-12);
    for (int o = 0; o < 3; ++o) {
      double y = 0.0;
      for (int j = 0; j < 4; ++j) y += m.Cd(o, j) * x[j];
      ASSERT_NEAR(r.Y(o, k), y, 1e-12);
    }
  }
}

TEST(Rollout, Linearity) {
  std::mt19937_64 rng(18);
  StateSpaceModel m;
  m.Ad = random_stable(3, 0.8, rng);
  m.Bd = random_matrix(3, 1, rng);
  m.Cd = random_matrix(2, 3, rng);
  const Eigen::VectorXd x0 = random_matrix(3, 1, rng);
  const Eigen::MatrixXd V = random_matrix(1, 30, rng);
  for (double alpha : {-2.0, 0.5, 7.0}) {
    const RolloutResult a = rollout(m, alpha * x0, alpha * V);
    const RolloutResult b = rollout(m, x0, V);
    EXPECT_LT((a.X - alpha * b.X).cwiseAbs().maxCoeff(), 1e-12 * (1 + std::abs(alpha) * b.X.cwiseAbs().maxCoeff()));
  }
}

TEST(C2d, ZeroDynamics) {
  const Eigen::MatrixXd B = (Eigen::MatrixXd(2, 1) << 1.0, -2.0).finished();
  const auto [Ad, Bd] = c2d_zoh(Eigen::MatrixXd::Zero(2, 2), B, 0.1);
  EXPECT_TRUE(Ad.isApprox(Eigen::MatrixXd::Identity(2, 2), 1e-15));
  EXPECT_LT((Bd - 0.1 * B).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(C2d, ScalarExponential) {
  const auto [Ad, Bd] = c2d_zoh(Eigen::MatrixXd::Constant(1, 1, -1.0), Eigen::MatrixXd::Ones(1, 1), 1.0);
  EXPECT_NEAR(Ad(0, 0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(Bd(0, 0), 1.0 - std::exp(-1.0), 1e-15);
}

TEST(C2d, RlcAgreesWithFineStepIntegration) {
  const RlcParams p;
  const auto [A, B] = rlc_matrices(p);
  const auto [Ad, Bd] = c2d_zoh(A, B, p.dt);
  for (const Eigen::Vector2d x0 : {Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.0, 1.0), Eigen::Vector2d(0.0, 0.0)}) {
    const Eigen::VectorXd u = Eigen::VectorXd::Constant(1, x0.isZero() ? 1.0 : 0.0);
    const Eigen::VectorXd ref = rk4(A, B, x0, u, p.dt / 1000.0, 1000);
    const Eigen::VectorXd got = Ad * x0 + Bd * u;
    EXPECT_LT((got - ref).cwiseAbs().maxCoeff(), 1e-10 * (1.0 + ref.cwiseAbs().maxCoeff()));
  }
}

TEST(FitModel, RlcStatesRecoverAnalyticModel) {
  RlcSpec spec = default_rlc_spec();
  spec.params.duration = 1.0;
  const GeneratedDataset gen = simulate_rlc(spec);
  const TimeSeriesDataset& ds = gen.data;
  const IndexSet idx{ds.index_of("capacitor.v"), ds.index_of("capacitor.p.i")};
  const StateSpaceModel m = fit_model(ds, idx);
  const auto [A, B] = rlc_matrices(spec.params);
  const auto [Ad, Bd] = c2d_zoh(A, B, spec.params.dt);
  EXPECT_LT((m.Ad - Ad).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((m.Bd - Bd).cwiseAbs().maxCoeff(), 1e-6);
  Eigen::Matrix2d C;
  C << 1.0, 0.0, 0.0, spec.params.R;
  EXPECT_LT((m.Cd - C).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_EQ(m.state_names, (std::vector<std::string>{"capacitor.v", "capacitor.p.i"}));
  EXPECT_EQ(m.input_names, std::vector<std::string>{"source.v_in"});
}

TEST(ModelFile, RoundTrip) {
  TempDir dir("model");
  std::mt19937_64 rng(30);
  StateSpaceModel m;
  m.Ad = random_matrix(2, 2, rng);
  m.Bd = random_matrix(2, 1, rng);
  m.Cd = random_matrix(3, 2, rng);
  m.state_names = {"a", "b"};
  m.input_names = {"u"};
  m.output_names = {"p", "q", "r"};
  m.dt = 0.01;
  save_model(dir.path() / "m.json", m);
  const StateSpaceModel back = load_model(dir.path() / "m.json");
  EXPECT_EQ(back.Ad, m.Ad);
  EXPECT_EQ(back.Bd, m.Bd);
  EXPECT_EQ(back.Cd, m.Cd);
  EXPECT_EQ(back.state_names, m.state_names);
  EXPECT_EQ(back.output_names, m.output_names);
  EXPECT_EQ(back.dt, m.dt);
}

TEST(ModelFile, ValidateRejectsInconsistentModels) {
  StateSpaceModel m;
  m.Ad = Eigen::MatrixXd::Identity(2, 2);
  m.Bd = Eigen::MatrixXd::Zero(2, 1);
  m.Cd = Eigen::MatrixXd::Zero(1, 3);
  m.state_names = {"a", "b"};
  m.input_names = {"u"};
  m.output_names = {"y"};
  m.dt = 1.0;
  EXPECT_THROW(m.validate(), Error);
  m.Cd = Eigen::MatrixXd::Zero(1, 2);
  EXPECT_NO_THROW(m.validate());
  m.Ad(0, 0) = std::nan("");
  EXPECT_THROW(m.validate(), Error);
}
