#include "w2slab/trainer.hpp"

#include "w2slab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace w2slab {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / double(v.size() - 1));
}

}  // namespace

std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::CE: return "ce";
    case LossKind::RCE: return "rce";
    case LossKind::KL: return "kl";
    case LossKind::RKL: return "rkl";
    case LossKind::CACE: return "cace";
    case LossKind::SL: return "sl";
    case LossKind::AUX: return "aux";
  }
  return "?";
}

LossKind parse_loss(const std::string& name) {
  for (auto k : {LossKind::CE, LossKind::RCE, LossKind::KL, LossKind::RKL, LossKind::CACE, LossKind::SL,
                 LossKind::AUX})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown loss '" + name + "'");
}

void TaskConfig::validate() const {
  if (d < 1) throw std::invalid_argument("task dimension must be >= 1");
  if (!(separation > 0.0)) throw std::invalid_argument("class separation must be > 0");
  if (!(noise > 0.0)) throw std::invalid_argument("noise scale must be > 0");
  for (int n : {n_train, n_pseudo, n_test}) {
    if (n < 10) throw std::invalid_argument("split sizes must be >= 10");
    if (n % 2 != 0) throw std::invalid_argument("split sizes must be even for exact class balance");
  }
}

Split draw_split(const TaskConfig& cfg, int n, std::uint64_t stream) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("split size must be even and >= 2");
  Rng rng(stream);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = i < n / 2 ? 1 : 0;
  std::shuffle(labels.begin(), labels.end(), rng);
  Split s;
  s.x = gaussian_matrix(rng, n, cfg.d, cfg.noise * cfg.noise);
  s.y.resize(n);
  for (int i = 0; i < n; ++i) {
    s.y[i] = labels[static_cast<std::size_t>(i)];
    s.x(i, 0) += (s.y[i] == 1 ? 0.5 : -0.5) * cfg.separation;
  }
  return s;
}

SyntheticTask SyntheticTask::generate(const TaskConfig& cfg) {
  cfg.validate();
  SyntheticTask t;
  t.cfg = cfg;
  t.train = draw_split(cfg, cfg.n_train, derive_seed(cfg.seed, {1}));
  t.pseudo = draw_split(cfg, cfg.n_pseudo, derive_seed(cfg.seed, {2}));
  t.test = draw_split(cfg, cfg.n_test, derive_seed(cfg.seed, {3}));
  return t;
}

double SyntheticTask::bayes_accuracy() const {
  return 0.5 * std::erfc(-(cfg.separation / (2.0 * cfg.noise)) / std::sqrt(2.0));
}

FeatureMap FeatureMap::identity(int dim) {
  if (dim < 1) throw std::invalid_argument("feature dimension must be >= 1");
  return FeatureMap(dim, dim, Activation::Identity, MatrixXd());
}

FeatureMap FeatureMap::random(int in, int out, Activation act, Rng& rng) {
  if (in < 1 || out < 1) throw std::invalid_argument("feature dimensions must be >= 1");
  return FeatureMap(in, out, act, gaussian_matrix(rng, out, in, 1.0 / in));
}

MatrixXd FeatureMap::apply(const MatrixXd& x) const {
  if (x.cols() != in_) throw std::invalid_argument("input dimension differs from the feature map");
  MatrixXd f = projection_.size() == 0 ? x : MatrixXd(x * projection_.transpose());
  if (act_ == Activation::Tanh) f = f.array().tanh().matrix();
  return f;
}

Eigen::VectorXd LinearProbeModel::parameters() const {
  Eigen::VectorXd theta(weights.size() + 1);
  theta << weights, bias;
  return theta;
}

void LinearProbeModel::set_parameters(const Eigen::VectorXd& theta) {
  if (theta.size() != weights.size() + 1) throw std::invalid_argument("parameter vector has the wrong length");
  weights = theta.head(weights.size());
  bias = theta[theta.size() - 1];
}

Eigen::VectorXd LinearProbeModel::predict(const MatrixXd& x) const {
  const Eigen::VectorXd z = (features.apply(x) * weights).array() + bias;
  return z.unaryExpr([](double v) { return sigmoid(v); });
}

double LinearProbeModel::accuracy(const Split& s) const {
  const Eigen::VectorXd p = predict(s.x);
  Index correct = 0;
  for (Index i = 0; i < p.size(); ++i) correct += (p[i] > 0.5) == (s.y[i] == 1);
  return double(correct) / double(p.size());
}

LinearProbeModel make_teacher(int d) {
  return {FeatureMap::identity(d), Eigen::VectorXd::Zero(d), 0.0};
}

LinearProbeModel make_student(int d_in, int d_out, Activation act, double init_scale, std::uint64_t seed) {
  if (init_scale < 0.0) throw std::invalid_argument("init scale must be >= 0");
  Rng rng(seed);
  FeatureMap f = act == Activation::Identity && d_in == d_out ? FeatureMap::identity(d_in)
                                                              : FeatureMap::random(d_in, d_out, act, rng);
  Eigen::VectorXd w = init_scale > 0.0 ? gaussian_vector(rng, d_out, init_scale * init_scale)
                                       : Eigen::VectorXd::Zero(d_out);
  return {std::move(f), std::move(w), 0.0};
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be > 0");
  if (steps < 0) throw std::invalid_argument("steps must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  composite.validate();
}

BatchObjective::BatchObjective(const MatrixXd& features, const Eigen::VectorXd& targets, LossKind loss,
                               const CompositeLossConfig& composite, const Eigen::VectorXd& theta,
                               double progress)
    : features_(features), targets_(targets), loss_(loss), composite_(composite) {
  if (features.rows() != targets.size() || features.rows() == 0)
    throw std::invalid_argument("batch features and targets disagree");
  if (theta.size() != features.cols() + 1) throw std::invalid_argument("parameter vector has the wrong length");
  if (loss_ == LossKind::AUX) {
    beta_ = aux_beta(progress, composite_);
    const Eigen::VectorXd z = (features_ * theta.head(features_.cols())).array() + theta[theta.size() - 1];
    std::vector<double> p(static_cast<std::size_t>(z.size()));
    for (Index i = 0; i < z.size(); ++i) p[static_cast<std::size_t>(i)] = sigmoid(z[i]);
    const double t = aux_threshold(p);
    aux_targets_.resize(z.size());
    for (Index i = 0; i < z.size(); ++i) aux_targets_[i] = aux_target(Prob::binary(p[static_cast<std::size_t>(i)]), t)[0];
  }
}

double BatchObjective::sample_loss(Index i, double p) const {
  const Prob y = Prob::binary(targets_[i]);
  const Prob yhat = Prob::binary(p);
  switch (loss_) {
    case LossKind::CE: return ce(y, yhat);
    case LossKind::RCE: return rce(y, yhat);
    case LossKind::KL: return kl(y, yhat);
    case LossKind::RKL: return rkl(y, yhat);
    case LossKind::CACE: return cace(y, yhat, composite_);
    case LossKind::SL: return sl(y, yhat, composite_);
    case LossKind::AUX:
      return beta_ * ce(y, yhat) + (1.0 - beta_) * ce(Prob::binary(aux_targets_[i]), yhat);
  }
  return 0.0;
}

double BatchObjective::sample_slope(Index i, double p) const {
  const Prob y = Prob::binary(targets_[i]);
  const Prob yhat = Prob::binary(p);
  switch (loss_) {
    case LossKind::CE: return grad_ce(y, yhat)[0];
    case LossKind::RCE: return grad_rce(y, yhat)[0];
    case LossKind::KL: return grad_kl(y, yhat)[0];
    case LossKind::RKL: return grad_rkl(y, yhat)[0];
    case LossKind::CACE:
      return cace_uses_rce(y, composite_.cace_threshold) ? grad_rce(y, yhat)[0] : grad_ce(y, yhat)[0];
    case LossKind::SL:
      return composite_.sl_lambda1 * grad_rce(y, yhat)[0] + composite_.sl_lambda2 * grad_ce(y, yhat)[0];
    case LossKind::AUX:
      return beta_ * grad_ce(y, yhat)[0] + (1.0 - beta_) * grad_ce(Prob::binary(aux_targets_[i]), yhat)[0];
  }
  return 0.0;
}

double BatchObjective::value(const Eigen::VectorXd& theta) const {
  const Eigen::VectorXd z = (features_ * theta.head(features_.cols())).array() + theta[theta.size() - 1];
  double total = 0.0;
  for (Index i = 0; i < z.size(); ++i) total += sample_loss(i, sigmoid(z[i]));
  return total / double(z.size());
}

Eigen::VectorXd BatchObjective::gradient(const Eigen::VectorXd& theta) const {
  const Eigen::VectorXd z = (features_ * theta.head(features_.cols())).array() + theta[theta.size() - 1];
  Eigen::VectorXd dz(z.size());
  for (Index i = 0; i < z.size(); ++i) {
    const double p = sigmoid(z[i]);
    dz[i] = sample_slope(i, p) * p * sigmoid(-z[i]);
  }
  dz /= double(z.size());
  Eigen::VectorXd g(theta.size());
  g.head(features_.cols()) = features_.transpose() * dz;
  g[g.size() - 1] = dz.sum();
  return g;
}

Eigen::VectorXd BatchObjective::numerical_gradient(const Eigen::VectorXd& theta, double step) const {
  Eigen::VectorXd g(theta.size());
  Eigen::VectorXd probe = theta;
  for (Index k = 0; k < theta.size(); ++k) {
    probe[k] = theta[k] + step;
    const double up = value(probe);
    probe[k] = theta[k] - step;
    const double down = value(probe);
    probe[k] = theta[k];
    g[k] = (up - down) / (2.0 * step);
  }
  return g;
}

double TrainReport::mean_gdv() const { return mean_of(gdv_trace); }

GdvResult gdv(const std::vector<Eigen::VectorXd>& gradients) {
  std::vector<Eigen::VectorXd> unit;
  GdvResult r;
  for (const auto& g : gradients) {
    const double n = g.norm();
    if (n > 0.0 && std::isfinite(n)) {
      if (!unit.empty() && g.size() != unit.front().size())
        throw std::invalid_argument("gradients differ in length");
      unit.push_back(g / n);
    } else {
      ++r.excluded;
    }
  }
  if (unit.size() < 2) throw std::invalid_argument("GDV needs at least two nonzero gradients");
  double sum = 0.0;
  for (std::size_t i = 0; i < unit.size(); ++i)
    for (std::size_t j = i + 1; j < unit.size(); ++j) sum += 1.0 - std::clamp(unit[i].dot(unit[j]), -1.0, 1.0);
  const double m = double(unit.size());
  r.value = 2.0 * sum / (m * (m - 1.0));
  return r;
}

double param_distance(const Eigen::VectorXd& theta, const Eigen::VectorXd& theta0) {
  if (theta.size() != theta0.size()) throw std::invalid_argument("parameter vectors differ in length");
  return (theta - theta0).norm();
}

TrainReport train(LinearProbeModel& model, const MatrixXd& inputs, const Eigen::VectorXd& targets,
                  const Split& test, LossKind loss, const TrainConfig& cfg) {
  cfg.validate();
  if (inputs.rows() != targets.size() || inputs.rows() == 0)
    throw std::invalid_argument("training inputs and targets disagree");
  if (((targets.array() < 0.0) || (targets.array() > 1.0)).any() || !targets.allFinite())
    throw std::invalid_argument("targets must be probabilities");

  TrainReport report;
  report.loss = loss;
  report.initial_accuracy = model.accuracy(test);
  const MatrixXd features = model.features.apply(inputs);
  const Eigen::VectorXd theta0 = model.parameters();
  Eigen::VectorXd theta = theta0;

  Rng rng(cfg.seed);
  const Index n = features.rows();
  const Index bs = std::min<Index>(cfg.batch_size, n);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  MatrixXd batch_x(bs, features.cols());
  Eigen::VectorXd batch_t(bs);

  int step = 0;
  while (step < cfg.steps && !report.diverged_at) {
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Eigen::VectorXd> epoch_grads;
    for (Index start = 0; start + bs <= n && step < cfg.steps; start += bs) {
      for (Index r = 0; r < bs; ++r) {
        const Index src = order[static_cast<std::size_t>(start + r)];
        batch_x.row(r) = features.row(src);
        batch_t[r] = targets[src];
      }
      const BatchObjective objective(batch_x, batch_t, loss, cfg.composite, theta,
                                     double(step) / double(cfg.steps));
      const double value = objective.value(theta);
      if (!std::isfinite(value)) {
        report.diverged_at = step;
        break;
      }
      Eigen::VectorXd g = cfg.gradient == GradientMode::Analytic ? objective.gradient(theta)
                                                                : objective.numerical_gradient(theta);
      theta -= cfg.learning_rate * g;
      if (!theta.allFinite()) {
        report.diverged_at = step;
        break;
      }
      report.final_loss = value;
      epoch_grads.push_back(std::move(g));
      ++step;
    }
    if (epoch_grads.empty()) break;
    double norm_sum = 0.0;
    for (const auto& g : epoch_grads) norm_sum += g.norm();
    report.grad_norm_trace.push_back(norm_sum / double(epoch_grads.size()));
    std::size_t nonzero = 0;
    for (const auto& g : epoch_grads) nonzero += g.norm() > 0.0;
    if (nonzero >= 2) {
      const auto r = gdv(epoch_grads);
      report.gdv_trace.push_back(r.value);
      report.gdv_excluded += r.excluded;
    } else {
      report.gdv_excluded += static_cast<int>(epoch_grads.size() - nonzero);
    }
  }

  report.steps_run = step;
  model.set_parameters(theta);
  report.param_distance = param_distance(theta, theta0);
  report.test_accuracy = model.accuracy(test);
  report.mean_test_prediction = model.predict(test.x).mean();
  return report;
}

void PipelineConfig::validate() const {
  teacher.validate();
  student.validate();
  if (student_width < 1) throw std::invalid_argument("student width must be >= 1");
  if (student_init_scale < 0.0) throw std::invalid_argument("student init scale must be >= 0");
}

namespace {

LinearProbeModel weak_model(int d, const PipelineConfig& cfg, std::uint64_t seed) {
  if (cfg.distillation)
    return make_student(d, cfg.student_width, cfg.student_activation, cfg.student_init_scale, seed);
  return make_teacher(d);
}

LinearProbeModel strong_model(int d, const PipelineConfig& cfg, std::uint64_t seed) {
  if (cfg.distillation) return make_teacher(d);
  return make_student(d, cfg.student_width, cfg.student_activation, cfg.student_init_scale, seed);
}

Eigen::VectorXd hard_targets(const Split& s) { return s.y.cast<double>(); }

std::vector<Prob> smoothed_labels(const Eigen::VectorXd& p, double alpha) {
  std::vector<Prob> labels;
  labels.reserve(static_cast<std::size_t>(p.size()));
  for (Index i = 0; i < p.size(); ++i) labels.push_back(smooth_labels(Prob::binary(p[i]), alpha));
  return labels;
}

TrainConfig with_seed(TrainConfig c, std::uint64_t seed) {
  c.seed = seed;
  return c;
}

}  // namespace

PipelineResult w2s_pipeline(const SyntheticTask& task, const PipelineConfig& cfg, LossKind loss, double alpha,
                            std::uint64_t seed) {
  cfg.validate();
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in [0, 1]");
  const int d = task.cfg.d;

  PipelineResult out;
  LinearProbeModel teacher = weak_model(d, cfg, derive_seed(seed, {1}));
  out.teacher = train(teacher, task.train.x, hard_targets(task.train), task.test, LossKind::CE,
                      with_seed(cfg.teacher, derive_seed(seed, {2})));

  const auto labels = smoothed_labels(teacher.predict(task.pseudo.x), alpha);
  Eigen::VectorXd targets(static_cast<Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) targets[static_cast<Index>(i)] = labels[i][0];

  TrainConfig scfg = with_seed(cfg.student, derive_seed(seed, {3}));
  if (loss == LossKind::CACE)
    scfg.composite.cace_threshold = cace_threshold(labels, scfg.composite.cace_quantile);
  LinearProbeModel student = strong_model(d, cfg, derive_seed(seed, {4}));
  out.student = train(student, task.pseudo.x, targets, task.test, loss, scfg);
  out.student.alpha = alpha;
  out.student_test_predictions = student.predict(task.test.x);
  return out;
}

const SweepCell& SweepResult::cell(LossKind loss, double alpha) const {
  for (const auto& c : cells)
    if (c.loss == loss && c.alpha == alpha) return c;
  throw std::out_of_range("no sweep cell for " + to_string(loss) + " at alpha " + std::to_string(alpha));
}

SweepResult alpha_sweep(const TaskConfig& task, const PipelineConfig& cfg, const std::vector<LossKind>& losses,
                        const std::vector<double>& alphas, int repeats, unsigned threads) {
  if (losses.empty()) throw std::invalid_argument("no losses to sweep");
  if (alphas.empty()) throw std::invalid_argument("no alpha values to sweep");
  if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
  for (double a : alphas)
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("alpha must be in [0, 1]");
  cfg.validate();

  std::vector<SyntheticTask> tasks;
  for (int r = 0; r < repeats; ++r) {
    TaskConfig t = task;
    t.seed = derive_seed(task.seed, {static_cast<std::uint64_t>(r)});
    tasks.push_back(SyntheticTask::generate(t));
  }

  const std::size_t per_repeat = losses.size() * alphas.size();
  std::vector<SweepRow> rows(per_repeat * static_cast<std::size_t>(repeats));
  parallel_for(
      rows.size(),
      [&](std::size_t idx) {
        const int r = static_cast<int>(idx / per_repeat);
        const std::size_t cell = idx % per_repeat;
        const LossKind loss = losses[cell / alphas.size()];
        const double alpha = alphas[cell % alphas.size()];
        const auto res = w2s_pipeline(tasks[static_cast<std::size_t>(r)], cfg, loss, alpha,
                                      derive_seed(task.seed, {static_cast<std::uint64_t>(r), 0x77}));
        rows[idx] = {loss,
                     alpha,
                     r,
                     res.teacher.test_accuracy,
                     res.student.test_accuracy,
                     res.student.param_distance,
                     res.student.mean_gdv()};
      },
      threads);

  SweepResult out;
  out.rows = rows;
  for (LossKind loss : losses) {
    for (double alpha : alphas) {
      std::vector<double> acc, dist;
      for (const auto& row : rows)
        if (row.loss == loss && row.alpha == alpha) {
          acc.push_back(row.student_acc);
          dist.push_back(row.param_distance);
        }
      out.cells.push_back({loss, alpha, mean_of(acc), sample_std(acc), mean_of(dist), sample_std(dist)});
    }
  }
  return out;
}

void BiasVarianceConfig::validate() const {
  task.validate();
  pipeline.validate();
  if (k < 1 || N < 1) throw std::invalid_argument("k and N must be >= 1");
  if (k * N < 2) throw std::invalid_argument("k * N must be >= 2");
  if (test_points < 2 || test_points % 2 != 0) throw std::invalid_argument("test_points must be even and >= 2");
}

double BiasVarianceResult::max_identity_error() const {
  double m = 0.0;
  for (const auto& p : points)
    m = std::max({m, p.teacher.identity_error, p.student.identity_error, p.ensemble_student.identity_error});
  return m;
}

double BiasVarianceResult::ensemble_variance_win_rate() const {
  if (points.empty()) return 0.0;
  std::size_t wins = 0;
  for (const auto& p : points) wins += p.ensemble_student.variance < p.student.variance;
  return double(wins) / double(points.size());
}

BiasVarianceResult bias_variance_experiment(const BiasVarianceConfig& cfg, unsigned threads) {
  cfg.validate();
  const int runs = cfg.k * cfg.N;
  const int d = cfg.task.d;
  const Split test = draw_split(cfg.task, cfg.test_points, derive_seed(cfg.seed, {0}));

  std::vector<Split> weak_sets(static_cast<std::size_t>(runs)), strong_sets(static_cast<std::size_t>(runs));
  std::vector<LinearProbeModel> teachers;
  for (int m = 0; m < runs; ++m) {
    const auto i = static_cast<std::uint64_t>(m / cfg.N);
    const auto j = static_cast<std::uint64_t>(m % cfg.N);
    weak_sets[static_cast<std::size_t>(m)] = draw_split(cfg.task, cfg.task.n_train, derive_seed(cfg.seed, {1, i, j}));
    strong_sets[static_cast<std::size_t>(m)] = draw_split(cfg.task, cfg.task.n_pseudo, derive_seed(cfg.seed, {2, i, j}));
    teachers.push_back(weak_model(d, cfg.pipeline, derive_seed(cfg.seed, {3, i, j})));
  }

  std::vector<Eigen::VectorXd> teacher_preds(static_cast<std::size_t>(runs));
  parallel_for(
      static_cast<std::size_t>(runs),
      [&](std::size_t m) {
        const auto& s = weak_sets[m];
        train(teachers[m], s.x, hard_targets(s), test, LossKind::CE,
              with_seed(cfg.pipeline.teacher, derive_seed(cfg.seed, {4, m})));
        teacher_preds[m] = teachers[m].predict(test.x);
      },
      threads);

  std::vector<Eigen::VectorXd> student_preds(static_cast<std::size_t>(runs)), ensemble_preds(static_cast<std::size_t>(runs));
  parallel_for(
      static_cast<std::size_t>(runs),
      [&](std::size_t m) {
        const auto& s = strong_sets[m];
        const Eigen::VectorXd single = teachers[m].predict(s.x);
        std::vector<Eigen::VectorXd> all;
        for (const auto& t : teachers) all.push_back(t.predict(s.x));
        Eigen::VectorXd ensemble(s.size());
        for (Index i = 0; i < s.size(); ++i) {
          std::vector<Prob> votes;
          for (const auto& p : all) votes.push_back(Prob::binary(p[i]));
          ensemble[i] = ensemble_dual_mean_prediction(votes)[0];
        }
        const TrainConfig scfg = with_seed(cfg.pipeline.student, derive_seed(cfg.seed, {5, m}));
        const auto init_seed = derive_seed(cfg.seed, {6, m});
        LinearProbeModel a = strong_model(d, cfg.pipeline, init_seed);
        train(a, s.x, single, test, LossKind::CE, scfg);
        student_preds[m] = a.predict(test.x);
        LinearProbeModel b = strong_model(d, cfg.pipeline, init_seed);
        train(b, s.x, ensemble, test, LossKind::CE, scfg);
        ensemble_preds[m] = b.predict(test.x);
      },
      threads);

  BiasVarianceResult out;
  auto collect = [&](const std::vector<Eigen::VectorXd>& preds, Index i) {
    std::vector<Prob> v;
    for (const auto& p : preds) v.push_back(Prob::binary(p[i]));
    return v;
  };
  for (Index i = 0; i < test.size(); ++i) {
    const Prob truth = Prob::one_hot(2, test.y[i] == 1 ? 0 : 1);
    out.points.push_back({static_cast<int>(i), test.y[i], bias_variance_estimate(collect(teacher_preds, i), truth),
                          bias_variance_estimate(collect(student_preds, i), truth),
                          bias_variance_estimate(collect(ensemble_preds, i), truth)});
  }
  return out;
}

}  // namespace w2slab
