#pragma once

// Desk-scale weak-to-strong training on a two-class Gaussian mixture: a weak linear teacher,
// soft pseudo-labels with optional smoothing, and a random-feature student trained by plain
// mini-batch gradient descent under any of the entropy-family losses.

#include "w2slab/harness.hpp"
#include "w2slab/losses.hpp"
#include "w2slab/random.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace w2slab {

enum class LossKind { CE, RCE, KL, RKL, CACE, SL, AUX };

std::string to_string(LossKind k);
/// Throws std::invalid_argument on an unknown name.
LossKind parse_loss(const std::string& name);

struct TaskConfig {
  int d = 30;               // input dimension
  double separation = 3.0;  // distance between the class means
  double noise = 1.0;       // per-coordinate standard deviation
  int n_train = 64;         // |S|, teacher training set
  int n_pseudo = 512;       // |S'|, pseudo-labeled set
  int n_test = 1000;
  std::uint64_t seed = 1;

  void validate() const;
};

struct Split {
  Eigen::MatrixXd x;  // one sample per row
  Eigen::VectorXi y;  // 1 = positive class
  Eigen::Index size() const { return x.rows(); }
};

/// n samples with exactly n/2 of each class (n even), class means +-(separation/2) e_1.
Split draw_split(const TaskConfig& cfg, int n, std::uint64_t stream);

struct SyntheticTask {
  TaskConfig cfg;
  Split train, pseudo, test;

  static SyntheticTask generate(const TaskConfig& cfg);
  /// Accuracy of the Bayes classifier sign(x_1).
  double bayes_accuracy() const;
};

enum class Activation { Identity, Tanh };

class FeatureMap {
 public:
  static FeatureMap identity(int dim);
  /// act(R x) with R (out x in) iid N(0, 1/in).
  static FeatureMap random(int in, int out, Activation act, Rng& rng);

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  int input_dim() const { return in_; }
  int output_dim() const { return out_; }

 private:
  FeatureMap(int in, int out, Activation act, Eigen::MatrixXd projection)
      : in_(in), out_(out), act_(act), projection_(std::move(projection)) {}
  int in_;
  int out_;
  Activation act_;
  Eigen::MatrixXd projection_;  // empty for the identity map
};

struct LinearProbeModel {
  FeatureMap features;
  Eigen::VectorXd weights;
  double bias = 0.0;

  /// Parameters as one vector: weights followed by the bias.
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& theta);
  /// P(positive) per row of `x`.
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
  double accuracy(const Split& s) const;
};

LinearProbeModel make_teacher(int d);
LinearProbeModel make_student(int d_in, int d_out, Activation act, double init_scale, std::uint64_t seed);

enum class GradientMode { Analytic, Numerical };

struct TrainConfig {
  double learning_rate = 0.1;
  int steps = 500;
  int batch_size = 32;
  GradientMode gradient = GradientMode::Analytic;
  CompositeLossConfig composite;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Mean loss of one mini-batch as a function of the parameters. The AUX targets and weight
/// are frozen at construction, matching their stop-gradient role.
class BatchObjective {
 public:
  BatchObjective(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets, LossKind loss,
                 const CompositeLossConfig& composite, const Eigen::VectorXd& theta, double progress);

  double value(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd numerical_gradient(const Eigen::VectorXd& theta, double step = 1e-6) const;

 private:
  double sample_loss(Eigen::Index i, double p) const;
  double sample_slope(Eigen::Index i, double p) const;  // dL/dp

  const Eigen::MatrixXd& features_;
  const Eigen::VectorXd& targets_;
  LossKind loss_;
  CompositeLossConfig composite_;
  double beta_ = 0.0;
  Eigen::VectorXd aux_targets_;
};

struct TrainReport {
  LossKind loss = LossKind::CE;
  double alpha = 1.0;
  double initial_accuracy = 0.0;
  double test_accuracy = 0.0;
  double param_distance = 0.0;
  double mean_test_prediction = 0.0;
  double final_loss = 0.0;
  int steps_run = 0;
  std::optional<int> diverged_at;   // step whose loss was non-finite
  std::vector<double> grad_norm_trace;  // mean gradient norm per epoch
  std::vector<double> gdv_trace;        // per epoch
  int gdv_excluded = 0;                 // zero-norm gradients dropped from GDV

  double mean_gdv() const;
  bool operator==(const TrainReport&) const = default;
};

/// Mini-batch gradient descent with a fresh shuffle every epoch. `targets` are P(positive).
TrainReport train(LinearProbeModel& model, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                  const Split& test, LossKind loss, const TrainConfig& cfg);

struct GdvResult {
  double value = 0.0;
  int excluded = 0;
};

/// Mean pairwise (1 - cosine) over the nonzero gradients; needs at least two of them.
GdvResult gdv(const std::vector<Eigen::VectorXd>& gradients);

double param_distance(const Eigen::VectorXd& theta, const Eigen::VectorXd& theta0);

struct PipelineConfig {
  TrainConfig teacher;
  TrainConfig student;
  int student_width = 240;
  Activation student_activation = Activation::Tanh;
  double student_init_scale = 0.0065;
  /// Swap capacities: the teacher gets the random-feature map, the student the identity.
  bool distillation = false;

  void validate() const;
};

struct PipelineResult {
  TrainReport teacher;
  TrainReport student;
  Eigen::VectorXd student_test_predictions;
};

/// Teacher on S with hard labels (CE), soft pseudo-labels on S', smoothing by alpha,
/// student on the smoothed labels. Seeds for both runs derive from `seed`.
PipelineResult w2s_pipeline(const SyntheticTask& task, const PipelineConfig& cfg, LossKind loss, double alpha,
                            std::uint64_t seed);

struct SweepRow {
  LossKind loss;
  double alpha;
  int repeat;
  double teacher_acc;
  double student_acc;
  double param_distance;
  double mean_gdv;
};

struct SweepCell {
  LossKind loss;
  double alpha;
  double mean_acc, std_acc;
  double mean_distance, std_distance;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<SweepCell> cells;
  const SweepCell& cell(LossKind loss, double alpha) const;
};

/// Every (loss, alpha) pair on the same `repeats` tasks; repeat r uses seeds derived from
/// (task.seed, r), shared across cells so that cells are paired.
SweepResult alpha_sweep(const TaskConfig& task, const PipelineConfig& cfg, const std::vector<LossKind>& losses,
                        const std::vector<double>& alphas, int repeats, unsigned threads = 0);

struct BiasVarianceConfig {
  TaskConfig task;
  PipelineConfig pipeline;
  int k = 3;  // outer repetitions
  int N = 4;  // disjoint (S, S') pairs per repetition
  int test_points = 200;
  std::uint64_t seed = 1;

  void validate() const;
};

struct PointBiasVariance {
  int point;
  int label;
  BiasVariance teacher;
  BiasVariance student;
  BiasVariance ensemble_student;  // trained on geometric-mean ensemble pseudo-labels
};

struct BiasVarianceResult {
  std::vector<PointBiasVariance> points;
  double max_identity_error() const;
  /// Fraction of test points where the ensemble-supervised student has lower variance.
  double ensemble_variance_win_rate() const;
};

BiasVarianceResult bias_variance_experiment(const BiasVarianceConfig& cfg, unsigned threads = 0);

}  // namespace w2slab
