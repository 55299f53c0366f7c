#include "w2slab/trainer.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace w2slab;

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

TaskConfig small_task(std::uint64_t seed = 1) {
  TaskConfig t;
  t.seed = seed;
  return t;
}

Eigen::VectorXd hard_targets(const Split& s) { return s.y.cast<double>(); }

}  // namespace

TEST(Losses, NamesRoundTrip) {
  for (auto k : {LossKind::CE, LossKind::RCE, LossKind::KL, LossKind::RKL, LossKind::CACE, LossKind::SL, LossKind::AUX})
    EXPECT_EQ(parse_loss(to_string(k)), k);
  EXPECT_THROW(parse_loss("mse"), std::invalid_argument);
}

TEST(Task, ExactBalanceAndDisjointSplits) {
  const auto task = SyntheticTask::generate(small_task());
  for (const Split* s : {&task.train, &task.pseudo, &task.test}) EXPECT_EQ(2 * s->y.sum(), s->size());
  EXPECT_EQ(task.train.size(), 64);
  EXPECT_EQ(task.pseudo.size(), 512);
  EXPECT_EQ(task.test.size(), 1000);
  std::set<double> first;
  for (const Split* s : {&task.train, &task.pseudo, &task.test})
    for (Eigen::Index i = 0; i < s->size(); ++i) first.insert(s->x(i, 1));
  EXPECT_EQ(first.size(), std::size_t(64 + 512 + 1000));
}

TEST(Task, Validation) {
  TaskConfig t;
  t.n_train = 8;
  EXPECT_THROW(t.validate(), std::invalid_argument);
  t.n_train = 11;
  EXPECT_THROW(t.validate(), std::invalid_argument);
  t.n_train = 64;
  t.d = 0;
  EXPECT_THROW(t.validate(), std::invalid_argument);
}

TEST(Task, BayesAccuracyNearClosedForm) {
  TaskConfig t = small_task();
  t.n_test = 20000;
  const auto task = SyntheticTask::generate(t);
  EXPECT_NEAR(task.bayes_accuracy(), normal_cdf(t.separation / (2.0 * t.noise)), 0.01);
}

TEST(Train, ZeroStepsLeavesModelUntouched) {
  const auto task = SyntheticTask::generate(small_task());
  auto model = make_student(30, 60, Activation::Tanh, 0.1, 4);
  TrainConfig cfg;
  cfg.steps = 0;
  const auto before = model.parameters();
  const auto r = train(model, task.train.x, hard_targets(task.train), task.test, LossKind::CE, cfg);
  EXPECT_EQ(r.param_distance, 0.0);
  EXPECT_EQ(r.test_accuracy, r.initial_accuracy);
  EXPECT_EQ(model.parameters(), before);
  EXPECT_EQ(r.steps_run, 0);
}

TEST(Train, SeparableTaskIsLearned) {
  TaskConfig t = small_task(3);
  t.separation = 5.0;  // margin 2.5 sigma per class
  const auto task = SyntheticTask::generate(t);
  ASSERT_GE(normal_cdf(t.separation / 2.0), 0.97);
  auto model = make_teacher(t.d);
  const auto r = train(model, task.train.x, hard_targets(task.train), task.test, LossKind::CE, TrainConfig{});
  EXPECT_GE(r.test_accuracy, 0.95);
  EXPECT_FALSE(r.diverged_at.has_value());
}

TEST(Train, RceWithUniformTargetsDoesNotMove) {
  const auto task = SyntheticTask::generate(small_task());
  auto model = make_student(30, 40, Activation::Tanh, 0.05, 2);
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(task.pseudo.size(), 0.5);
  const auto r = train(model, task.pseudo.x, uniform, task.test, LossKind::RCE, TrainConfig{});
  EXPECT_EQ(r.param_distance, 0.0);
  for (double g : r.grad_norm_trace) EXPECT_EQ(g, 0.0);
}

TEST(Train, Deterministic) {
  const auto task = SyntheticTask::generate(small_task());
  auto run = [&] {
    auto model = make_student(30, 50, Activation::Tanh, 0.01, 5);
    TrainConfig cfg;
    cfg.steps = 60;
    cfg.seed = 17;
    return train(model, task.pseudo.x, hard_targets(task.pseudo), task.test, LossKind::SL, cfg);
  };
  EXPECT_EQ(run(), run());
}

TEST(Train, RejectsBadTargets) {
  const auto task = SyntheticTask::generate(small_task());
  auto model = make_teacher(30);
  Eigen::VectorXd t = hard_targets(task.train);
  t[0] = 1.5;
  EXPECT_THROW(train(model, task.train.x, t, task.test, LossKind::CE, TrainConfig{}), std::invalid_argument);
  TrainConfig bad;
  bad.learning_rate = -1;
  EXPECT_THROW(train(model, task.train.x, hard_targets(task.train), task.test, LossKind::CE, bad),
               std::invalid_argument);
}

TEST(Train, DivergenceIsReportedWithStep) {
  const auto task = SyntheticTask::generate(small_task());
  auto model = make_teacher(30);
  TrainConfig cfg;
  cfg.learning_rate = 1e200;
  const Eigen::MatrixXd huge = task.train.x * 1e200;
  const auto r = train(model, huge, hard_targets(task.train), task.test, LossKind::CE, cfg);
  ASSERT_TRUE(r.diverged_at.has_value());
  EXPECT_LE(*r.diverged_at, 2);
}

TEST(Train, NumericalGradientModeTracksAnalytic) {
  const auto task = SyntheticTask::generate(small_task());
  TrainConfig cfg;
  cfg.steps = 20;
  auto a = make_student(30, 20, Activation::Tanh, 0.05, 8);
  auto b = a;
  const auto ra = train(a, task.pseudo.x, hard_targets(task.pseudo), task.test, LossKind::RKL, cfg);
  cfg.gradient = GradientMode::Numerical;
  const auto rb = train(b, task.pseudo.x, hard_targets(task.pseudo), task.test, LossKind::RKL, cfg);
  EXPECT_LT((a.parameters() - b.parameters()).norm(), 1e-5);
  EXPECT_NEAR(ra.param_distance, rb.param_distance, 1e-5);
}

TEST(BatchObjective, AnalyticMatchesNumericalForEveryLoss) {
  Rng rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CompositeLossConfig composite;
  composite.cace_threshold = 0.2;
  double worst = 0.0;
  for (auto loss : {LossKind::CE, LossKind::RCE, LossKind::KL, LossKind::RKL, LossKind::CACE, LossKind::SL,
                    LossKind::AUX}) {
    for (int rep = 0; rep < 100; ++rep) {
      const int n = 4 + rep % 8, d = 3 + rep % 5;
      const Eigen::MatrixXd x = gaussian_matrix(rng, n, d);
      Eigen::VectorXd t(n);
      for (auto& v : t) v = u(rng);
      const Eigen::VectorXd theta = gaussian_vector(rng, d + 1, 0.5);
      const BatchObjective obj(x, t, loss, composite, theta, u(rng));
      const Eigen::VectorXd ga = obj.gradient(theta), gn = obj.numerical_gradient(theta);
      worst = std::max(worst, (ga - gn).norm() / std::max(1e-8, gn.norm()));
    }
  }
  EXPECT_LE(worst, 1e-4);
}

TEST(BatchObjective, ValueIsMeanSampleLoss) {
  Rng rng(2);
  const Eigen::MatrixXd x = gaussian_matrix(rng, 5, 3);
  Eigen::VectorXd t(5);
  t << 0.1, 0.9, 0.5, 0.3, 0.7;
  const Eigen::VectorXd theta = gaussian_vector(rng, 4);
  const BatchObjective obj(x, t, LossKind::CE, CompositeLossConfig{}, theta, 0.0);
  double mean = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double p = 1.0 / (1.0 + std::exp(-(x.row(i).dot(theta.head(3)) + theta[3])));
    mean += -(t[i] * std::log(p) + (1 - t[i]) * std::log(1 - p)) / 5.0;
  }
  EXPECT_NEAR(obj.value(theta), mean, 1e-12);
}

TEST(Gdv, Examples) {
  const Eigen::Vector3d g(1, 2, 3);
  EXPECT_NEAR(gdv({g, g, g}).value, 0.0, 1e-15);
  EXPECT_NEAR(gdv({g, Eigen::VectorXd(-g)}).value, 2.0, 1e-15);
  EXPECT_NEAR(gdv({Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 5, 0)}).value, 1.0, 1e-15);
}

TEST(Gdv, ZeroGradientsExcluded) {
  const auto r = gdv({Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 0), Eigen::Vector2d(0, 1)});
  EXPECT_EQ(r.excluded, 1);
  EXPECT_NEAR(r.value, 1.0, 1e-15);
  EXPECT_THROW(gdv({Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 0)}), std::invalid_argument);
}

TEST(Gdv, BoundedAndPermutationInvariant) {
  Rng rng(4);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<Eigen::VectorXd> gs;
    for (int i = 0; i < 2 + rep % 6; ++i) gs.push_back(gaussian_vector(rng, 4));
    const double v = gdv(gs).value;
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 2.0);
    std::reverse(gs.begin(), gs.end());
    EXPECT_NEAR(gdv(gs).value, v, 1e-14);
  }
}

TEST(ParamDistance, Examples) {
  const Eigen::Vector2d a(1, -2);
  EXPECT_EQ(param_distance(a, a), 0.0);
  EXPECT_DOUBLE_EQ(param_distance(a + Eigen::Vector2d(0, 1), a), 1.0);
  EXPECT_DOUBLE_EQ(param_distance(a + Eigen::Vector2d(3, 4), a), 5.0);
  EXPECT_THROW(param_distance(a, Eigen::Vector3d::Zero()), std::invalid_argument);
}

TEST(Model, FeatureMapIsFrozen) {
  auto m = make_student(30, 240, Activation::Tanh, 0.0065, 3);
  const auto task = SyntheticTask::generate(small_task());
  const Eigen::MatrixXd before = m.features.apply(task.test.x);
  train(m, task.train.x, hard_targets(task.train), task.test, LossKind::CE, TrainConfig{});
  EXPECT_EQ(m.features.apply(task.test.x), before);
  EXPECT_EQ(m.features.output_dim(), 240);
  EXPECT_EQ(m.parameters().size(), 241);
}

TEST(Pipeline, BaselineRunsAndFitsUniformTargets) {
  const auto task = SyntheticTask::generate(small_task());
  const PipelineConfig cfg;
  const auto base = w2s_pipeline(task, cfg, LossKind::CE, 1.0, 1);
  EXPECT_GT(base.teacher.test_accuracy, 0.8);
  EXPECT_GT(base.student.test_accuracy, 0.8);
  const auto flat = w2s_pipeline(task, cfg, LossKind::CE, 0.0, 1);
  EXPECT_GE(flat.student.mean_test_prediction, 0.45);
  EXPECT_LE(flat.student.mean_test_prediction, 0.55);
  EXPECT_EQ(flat.student_test_predictions.size(), task.test.size());
}

TEST(Pipeline, RceBeatsCeUnderHeavySmoothing) {
  const auto task = SyntheticTask::generate(small_task());
  const PipelineConfig cfg;
  const auto c = w2s_pipeline(task, cfg, LossKind::CE, 0.01, 1);
  const auto r = w2s_pipeline(task, cfg, LossKind::RCE, 0.01, 1);
  EXPECT_GT(r.student.test_accuracy, c.student.test_accuracy);
}

TEST(Pipeline, CompositeLossesRun) {
  const auto task = SyntheticTask::generate(small_task());
  PipelineConfig cfg;
  cfg.student.steps = 100;
  for (auto loss : {LossKind::CACE, LossKind::SL, LossKind::AUX, LossKind::KL, LossKind::RKL}) {
    const auto r = w2s_pipeline(task, cfg, loss, 1.0, 2);
    EXPECT_FALSE(r.student.diverged_at.has_value()) << to_string(loss);
    EXPECT_GT(r.student.test_accuracy, 0.5) << to_string(loss);
  }
}

TEST(Pipeline, DistillationSwapsCapacities) {
  const auto task = SyntheticTask::generate(small_task());
  PipelineConfig cfg;
  cfg.distillation = true;
  cfg.student.steps = cfg.teacher.steps = 50;
  const auto r = w2s_pipeline(task, cfg, LossKind::CE, 1.0, 2);
  EXPECT_GT(r.student.test_accuracy, 0.5);
}

TEST(Sweep, SingleBaselineCell) {
  PipelineConfig cfg;
  cfg.student.steps = 50;
  const auto s = alpha_sweep(small_task(), cfg, {LossKind::CE}, {1.0}, 2);
  EXPECT_EQ(s.cells.size(), 1u);
  EXPECT_EQ(s.rows.size(), 2u);
  EXPECT_THROW(s.cell(LossKind::RCE, 1.0), std::out_of_range);
}

TEST(Sweep, ThreadCountDoesNotChangeResults) {
  PipelineConfig cfg;
  cfg.student.steps = 40;
  const auto a = alpha_sweep(small_task(), cfg, {LossKind::CE, LossKind::RCE}, {0.1, 1.0}, 2, 1);
  const auto b = alpha_sweep(small_task(), cfg, {LossKind::CE, LossKind::RCE}, {0.1, 1.0}, 2, 4);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].student_acc, b.rows[i].student_acc);
    EXPECT_EQ(a.rows[i].param_distance, b.rows[i].param_distance);
  }
}

TEST(Sweep, RceRiskInsensitiveToSmoothing) {
  // Smoothing keeps the minimizer of the RCE risk, so final test risk should not move by more than noise.
  const auto s = alpha_sweep(small_task(), PipelineConfig{}, {LossKind::RCE}, {0.3, 1.0}, 5);
  const auto& a = s.cell(LossKind::RCE, 0.3);
  const auto& b = s.cell(LossKind::RCE, 1.0);
  const double pooled = std::sqrt(0.5 * (a.std_acc * a.std_acc + b.std_acc * b.std_acc));
  EXPECT_LE(std::abs((1 - a.mean_acc) - (1 - b.mean_acc)), 2.0 * pooled);
}

TEST(BiasVarianceExperiment, TinyRunSatisfiesIdentity) {
  BiasVarianceConfig cfg;
  cfg.k = 1;
  cfg.N = 2;
  cfg.test_points = 20;
  cfg.pipeline.student.steps = cfg.pipeline.teacher.steps = 50;
  const auto r = bias_variance_experiment(cfg);
  EXPECT_EQ(r.points.size(), 20u);
  EXPECT_LE(r.max_identity_error(), 1e-9);
  for (const auto& p : r.points) {
    EXPECT_GE(p.teacher.variance, 0.0);
    EXPECT_GE(p.student.bias, 0.0);
  }
  cfg.N = 0;
  EXPECT_THROW(bias_variance_experiment(cfg), std::invalid_argument);
}
