#include "w2slab/bregman.hpp"
#include "w2slab/random.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace w2slab;

namespace {

VectorXd vec(std::initializer_list<double> xs) {
  VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

// Explicit KL written out coordinate by coordinate.
double kl_by_hand(const VectorXd& p, const VectorXd& q) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) s += p[i] * std::log(p[i] / q[i]);
  return s;
}

}  // namespace

TEST(Divergence, SquaredNormExample) {
  EXPECT_DOUBLE_EQ(divergence(Geometry::squared_norm(2), vec({1, 2}), vec({0, 0})), 5.0);
}

TEST(Divergence, OneHotAgainstUniformIsLog2) {
  const auto g = Geometry::negative_entropy(2);
  EXPECT_NEAR(divergence(g, clamp_to_simplex(vec({1, 0})), vec({0.5, 0.5})), std::log(2.0), 1e-9);
}

TEST(Divergence, ZeroOnTheDiagonal) {
  Eigen::MatrixXd m(2, 2);
  m << 2, 0.5, 0.5, 1;
  const VectorXd p = vec({0.3, 0.7});
  EXPECT_EQ(divergence(Geometry::squared_norm(2), p, p), 0.0);
  EXPECT_EQ(divergence(Geometry::mahalanobis(m), p, p), 0.0);
  EXPECT_EQ(divergence(Geometry::negative_entropy(2), p, p), 0.0);
}

TEST(Divergence, MatchesGeneratorDefinition) {
  Eigen::MatrixXd m(3, 3);
  m << 3, 1, 0, 1, 2, 0.5, 0, 0.5, 1;
  const auto g = Geometry::mahalanobis(m);
  const VectorXd x = vec({0.1, -0.4, 2.0}), y = vec({1.0, 0.3, -0.2});
  const double phi_x = x.dot(m * x), phi_y = y.dot(m * y);
  EXPECT_NEAR(divergence(g, x, y), phi_x - phi_y - (2.0 * m * y).dot(x - y), 1e-12);
}

TEST(Divergence, RejectsPointsOffTheSimplex) {
  const auto g = Geometry::negative_entropy(2);
  EXPECT_THROW(divergence(g, vec({0.6, 0.6}), vec({0.5, 0.5})), std::domain_error);
  EXPECT_THROW(divergence(g, vec({0.2, 0.3, 0.5}), vec({0.5, 0.5})), std::invalid_argument);
  EXPECT_THROW(clamp_to_simplex(vec({-0.1, 1.1})), std::invalid_argument);
}

TEST(Geometry, RejectsIndefiniteMetric) {
  Eigen::MatrixXd m(2, 2);
  m << 1, 2, 2, 1;
  EXPECT_THROW(Geometry::mahalanobis(m), std::invalid_argument);
}

TEST(DualMap, Examples) {
  EXPECT_TRUE(Geometry::squared_norm(2).to_dual(vec({1, 2})).isApprox(vec({2, 4})));
  Eigen::MatrixXd m = vec({2, 3}).asDiagonal();
  EXPECT_TRUE(Geometry::mahalanobis(m).to_dual(vec({1, 1})).isApprox(vec({4, 6})));
  const auto g = Geometry::negative_entropy(2);
  EXPECT_LT((g.from_dual(g.to_dual(vec({0.3, 0.7}))) - vec({0.3, 0.7})).norm(), 1e-10);
}

TEST(DualMap, RoundTripMahalanobis) {
  Rng rng(7);
  const Eigen::MatrixXd a = gaussian_matrix(rng, 4, 4);
  Eigen::MatrixXd m = a * a.transpose() + Eigen::MatrixXd::Identity(4, 4);
  m = 0.5 * (m + m.transpose());
  const auto g = Geometry::mahalanobis(m);
  const VectorXd x = gaussian_vector(rng, 4);
  EXPECT_LT((g.from_dual(g.to_dual(x)) - x).norm(), 1e-12);
}

TEST(LawOfCosines, CoincidentSecondAndThirdPoints) {
  const auto g = Geometry::negative_entropy(3);
  const VectorXd x = vec({0.2, 0.3, 0.5}), y = vec({0.6, 0.1, 0.3});
  EXPECT_NEAR(law_of_cosines_residual(g, x, y, y), 0.0, 1e-15);
}

TEST(LawOfCosines, RandomSquaredTriple) {
  Rng rng(3);
  const auto g = Geometry::squared_norm(5);
  EXPECT_NEAR(law_of_cosines_residual(g, gaussian_vector(rng, 5), gaussian_vector(rng, 5), gaussian_vector(rng, 5)),
              0.0, 1e-10);
}

TEST(LawOfCosines, SimplexTripleByHand) {
  const VectorXd x = vec({0.2, 0.8}), y = vec({0.5, 0.5}), z = vec({0.7, 0.3});
  // D(x,z) - D(x,y) - D(y,z) + <log z - log y, x - y>, with every term written explicitly.
  double inner = 0.0;
  for (int i = 0; i < 2; ++i) inner += (std::log(z[i]) - std::log(y[i])) * (x[i] - y[i]);
  const double by_hand = kl_by_hand(x, z) - kl_by_hand(x, y) - kl_by_hand(y, z) + inner;
  EXPECT_NEAR(by_hand, 0.0, 1e-10);
  EXPECT_NEAR(law_of_cosines_residual(Geometry::negative_entropy(2), x, y, z), 0.0, 1e-10);
}

TEST(Means, SelfDualSquaredNorm) {
  const auto s = Samples::uniform({vec({0, 0}), vec({2, 2})});
  EXPECT_TRUE(mean_minimizer(s).isApprox(vec({1, 1})));
  EXPECT_TRUE(dual_mean(Geometry::squared_norm(2), s).isApprox(vec({1, 1})));
}

TEST(Means, GeometricMeanOnTheSimplex) {
  const auto s = Samples::uniform({vec({0.8, 0.2}), vec({0.2, 0.8})});
  const auto g = Geometry::negative_entropy(2);
  EXPECT_LT((dual_mean(g, s) - vec({0.5, 0.5})).norm(), 1e-12);

  // Grid minimization of E[D(y, X)] over the segment as an independent check.
  double best = INFINITY, arg = 0.0;
  for (int i = 1; i < 1000; ++i) {
    const double t = i * 1e-3;
    const VectorXd y = vec({t, 1 - t});
    const double v = s.expect([&](const VectorXd& x) { return kl_by_hand(y, x); });
    if (v < best) best = v, arg = t;
  }
  EXPECT_NEAR(arg, 0.5, 1e-3);
}

TEST(Means, WeightedGeometricMean) {
  const VectorXd a = vec({0.9, 0.1}), b = vec({0.3, 0.7});
  const Samples s({a, b}, vec({0.25, 0.75}));
  VectorXd expected(2);
  for (int i = 0; i < 2; ++i) expected[i] = std::pow(a[i], 0.25) * std::pow(b[i], 0.75);
  expected /= expected.sum();
  EXPECT_LT((dual_mean(Geometry::negative_entropy(2), s) - expected).norm(), 1e-12);
}

TEST(Means, SinglePointIsItsOwnMean) {
  const VectorXd p = vec({0.25, 0.75});
  const Samples s({p}, vec({1.0}));
  EXPECT_TRUE(mean_minimizer(s).isApprox(p));
  EXPECT_LT((dual_mean(Geometry::negative_entropy(2), s) - p).norm(), 1e-12);
}

TEST(Samples, RejectsMalformedWeights) {
  EXPECT_THROW(Samples({vec({1.0})}, vec({0.5})), std::invalid_argument);
  EXPECT_THROW(Samples({vec({1.0}), vec({2.0})}, vec({1.5, -0.5})), std::invalid_argument);
  EXPECT_THROW(Samples({}, VectorXd()), std::invalid_argument);
}

TEST(ForwardDecomposition, BiasVanishesAtTheMean) {
  const auto g = Geometry::squared_norm(2);
  const auto s = Samples::uniform({vec({0, 1}), vec({2, 3})});
  EXPECT_EQ(forward_decomposition(g, s, mean_minimizer(s)).bias, 0.0);
  EXPECT_EQ(forward_decomposition(g, Samples::uniform({vec({1, 1})}), vec({0, 0})).variance, 0.0);
}

TEST(ForwardDecomposition, SimplexMatchesDirectSum) {
  const auto g = Geometry::negative_entropy(2);
  const VectorXd a = vec({0.9, 0.1}), b = vec({0.5, 0.5}), y = vec({0.3, 0.7});
  const auto d = forward_decomposition(g, Samples::uniform({a, b}), y);
  EXPECT_NEAR(d.total(), 0.5 * (kl_by_hand(a, y) + kl_by_hand(b, y)), 1e-10);
}

TEST(ReverseDecomposition, BiasVanishesAtTheDualMean) {
  const auto g = Geometry::negative_entropy(3);
  const auto s = Samples::uniform({vec({0.2, 0.3, 0.5}), vec({0.6, 0.3, 0.1})});
  EXPECT_NEAR(reverse_decomposition(g, dual_mean(g, s), s).bias, 0.0, 1e-15);
  EXPECT_EQ(reverse_decomposition(g, vec({0.1, 0.2, 0.7}), Samples::uniform({vec({0.5, 0.25, 0.25})})).dual_variance,
            0.0);
}

TEST(ReverseDecomposition, SquaredExample) {
  const auto d = reverse_decomposition(Geometry::squared_norm(2), vec({3, 0}),
                                       Samples::uniform({vec({0, 0}), vec({2, 0})}));
  EXPECT_DOUBLE_EQ(d.bias, 4.0);
  EXPECT_DOUBLE_EQ(d.dual_variance, 1.0);
  EXPECT_DOUBLE_EQ(d.total(), (9.0 + 1.0) / 2.0);
}

TEST(Templates, LongDoubleInstantiation) {
  using G = BregmanGeometry<long double>;
  Vector<long double> x(2), y(2);
  x << 0.25L, 0.75L;
  y << 0.5L, 0.5L;
  const long double d = divergence(G::negative_entropy(2), x, y);
  EXPECT_NEAR(static_cast<double>(d), 0.25 * std::log(0.5) + 0.75 * std::log(1.5), 1e-15);
}
