#include "w2slab/ridge.hpp"
#include "w2slab/random.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace w2slab;

TEST(RidgeSolve, HeavyShrinkage) {
  Rng rng(1);
  const Eigen::MatrixXd a = gaussian_matrix(rng, 5, 20);
  const Eigen::VectorXd y = gaussian_vector(rng, 20);
  EXPECT_LE(ridge_solve(a, y, 1e12).norm(), 1e-6);
}

TEST(RidgeSolve, ScalarClosedForm) {
  Eigen::MatrixXd a(1, 1);
  a << 1.7;
  Eigen::VectorXd y(1);
  y << -0.4;
  const double eta = 0.3;
  EXPECT_NEAR(ridge_solve(a, y, eta)[0], 1.7 * -0.4 / (1.7 * 1.7 + eta), 1e-15);
}

TEST(RidgeSolve, FirstOrderOptimalityAndDualForm) {
  Rng rng(2);
  for (int rep = 0; rep < 5; ++rep) {
    const Eigen::MatrixXd a = gaussian_matrix(rng, 30, 80);
    const Eigen::VectorXd y = gaussian_vector(rng, 80);
    const double eta = 0.05 + rep;
    const Eigen::VectorXd w = ridge_solve(a, y, eta);
    EXPECT_LE(ridge_relative_gradient(a, y, eta, w), 1e-8);
    // Push-through identity: (A A^T + eta I)^-1 A = A (A^T A + eta I)^-1.
    Eigen::MatrixXd k = a.transpose() * a;
    k.diagonal().array() += eta;
    const Eigen::VectorXd dual = a * k.ldlt().solve(y);
    EXPECT_LT((w - dual).norm(), 1e-10 * (1.0 + dual.norm()));
  }
}

TEST(RidgeSolve, RejectsBadInput) {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Ones(2, 3);
  EXPECT_THROW(ridge_solve(a, Eigen::VectorXd::Ones(3), 0.0), std::invalid_argument);
  EXPECT_THROW(ridge_solve(a, Eigen::VectorXd::Ones(4), 1.0), std::invalid_argument);
}

TEST(HClosedForm, Examples) {
  EXPECT_LE(h_closed_form(1e-9, 2.0), 1e-8);
  EXPECT_NEAR(h_closed_form(1.0, 2.0), 1.0 / std::sqrt(2.0) - 0.5, 1e-15);
  EXPECT_GT(h_closed_form(1, 2), h_closed_form(1, 4));
  EXPECT_GT(h_closed_form(1, 4), h_closed_form(1, 8));
  EXPECT_NEAR(h_closed_form(1.0, 1.0 + 1e-9), 1.0 / std::sqrt(5.0), 1e-8);
  EXPECT_THROW(h_closed_form(0.0, 2.0), std::invalid_argument);
  EXPECT_THROW(h_closed_form(1.0, 1.0), std::invalid_argument);
}

TEST(Monotonicity, DenseGridHasNoViolations) {
  const auto r = verify_monotonicity({0.1, 0.5, 1, 2}, {1.1, 1.5, 2, 4, 8, 16});
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.evaluations, 24);
}

TEST(MpIntegral, MatchesClosedFormOnGrid) {
  for (double gamma : {1.5, 2.0, 4.0})
    for (double eta0 : {0.5, 1.0, 2.0}) EXPECT_NEAR(mp_integral(eta0, gamma), h_closed_form(eta0, gamma), 1e-6);
  EXPECT_NEAR(mp_integral(1, 2), 0.207107, 1e-6);
}

TEST(MpIntegral, DensityHasUnitMass) {
  for (double gamma : {1.5, 2.0, 4.0}) {
    const auto r = mp_expectation(gamma, [](double) { return 1.0; });
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.value, 1.0, 1e-6);
  }
}

TEST(MpIntegral, MeanEigenvalueIsOne) {
  // First moment of the Marchenko-Pastur law is 1 for every ratio.
  for (double gamma : {1.5, 3.0}) EXPECT_NEAR(mp_expectation(gamma, [](double l) { return l; }).value, 1.0, 1e-9);
}

TEST(MpIntegral, IncreasesTowardOneWithRidge) {
  const double a = mp_integral(1, 2), b = mp_integral(10, 2), c = mp_integral(100, 2);
  EXPECT_LT(a, b);
  EXPECT_LT(b, c);
  EXPECT_LT(c, 1.0);
  EXPECT_NEAR(mp_integral(1e6, 2), 1.0, 1e-4);
}

TEST(SimulateMisfit, LargeCapacityBeatsSmallerCapacityBound) {
  RidgeConfig cfg;
  cfg.d_w = 40;
  cfg.gamma = 16;
  cfg.eta0 = 0.5;
  const auto est = simulate_misfit(cfg, 10);
  EXPECT_LT(est.empirical_misfit / cfg.B, h_closed_form(0.5, 2));
}

TEST(SimulateMisfit, VanishingRidgeInterpolates) {
  RidgeConfig cfg;
  cfg.d_w = 40;
  cfg.gamma = 2;
  cfg.n_ratio = 50;
  cfg.eta0 = 1e-6;
  EXPECT_LE(simulate_misfit(cfg, 10).empirical_misfit / cfg.B, 0.01);
}

TEST(SimulateMisfit, DefaultCellWithinSlack) {
  RidgeConfig cfg;  // d_w 200, gamma 2, n/d_w 20, eta0 1, B 1
  const auto est = simulate_misfit(cfg, 50);
  EXPECT_EQ(est.trials, 50);
  EXPECT_EQ(est.per_trial.size(), 50u);
  EXPECT_LE(est.empirical_misfit / cfg.B, 1.1 * mp_integral(1, 2));
  EXPECT_LE(est.empirical_misfit / cfg.B, 1.1 * h_closed_form(1, 2));
  EXPECT_EQ(est.retried, 0);
}

TEST(SimulateMisfit, BitReproducibleAcrossThreadCounts) {
  RidgeConfig cfg;
  cfg.d_w = 30;
  const auto a = simulate_misfit(cfg, 6, 1);
  const auto b = simulate_misfit(cfg, 6, 3);
  EXPECT_EQ(a.per_trial, b.per_trial);
  EXPECT_EQ(a.empirical_misfit, b.empirical_misfit);
}

TEST(SimulateMisfit, RejectsBadConfig) {
  RidgeConfig cfg;
  cfg.gamma = 0.5;
  EXPECT_THROW(simulate_misfit(cfg, 5), std::invalid_argument);
  cfg.gamma = 2;
  EXPECT_THROW(simulate_misfit(cfg, 0), std::invalid_argument);
}

TEST(RidgeTrial, ThetaReductionMatchesFreshInputs) {
  RidgeConfig cfg;
  cfg.d_w = 60;
  cfg.seed = 9;
  const auto t = draw_ridge_trial(cfg, 0);

  const Eigen::MatrixXd theta = theta_matrix(t.first_layer, t.inputs, cfg.eta());
  const Eigen::VectorXd via_theta = theta * t.teacher;
  EXPECT_LT((via_theta - t.student_weights()).norm(), 1e-9 * (1.0 + t.teacher.norm()));
  const double reduced = ((theta - Eigen::MatrixXd::Identity(cfg.d_w, cfg.d_w)) * t.teacher).squaredNorm() / cfg.d_w;
  EXPECT_NEAR(reduced, t.misfit(), 1e-12);

  Rng rng(1234);
  const Eigen::MatrixXd x = gaussian_matrix(rng, cfg.d_w, 10000, 1.0 / cfg.d_w);
  const Eigen::ArrayXd sq = (x.transpose() * (t.student_weights() - t.teacher)).array().square();
  const double mean = sq.mean();
  const double se = std::sqrt((sq - mean).square().sum() / (sq.size() - 1) / sq.size());
  EXPECT_LE(std::abs(mean - reduced), 3.0 * se);
}
