#include "w2slab/harness.hpp"

#include <cmath>
#include <stdexcept>

namespace w2slab {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

VectorXd weighted_mean(const std::vector<Predictor>& models, const VectorXd& weights, std::size_t x) {
  VectorXd m = VectorXd::Zero(models.front()[x].size());
  for (std::size_t i = 0; i < models.size(); ++i) m += weights[idx(i)] * models[i][x];
  return m;
}

VectorXd weighted_dual_mean(const Geometry& g, const std::vector<Predictor>& models, const VectorXd& weights,
                            std::size_t x) {
  VectorXd m = VectorXd::Zero(models.front()[x].size());
  for (std::size_t i = 0; i < models.size(); ++i) m += weights[idx(i)] * g.to_dual(models[i][x]);
  return m;
}

// Teacher weights for the misfit and the teacher mean for student j: the posterior for the
// conditional statement, the teacher marginal for the product statement.
enum class Coupling { Joint, Product };

TheoremReport enumerate(const FiniteScenario& sc, const Geometry& g, Direction dir, Coupling coupling) {
  sc.validate(g);
  const VectorXd pw = sc.teacher_marginal();
  const VectorXd pwp = sc.student_marginal();
  TheoremReport r;
  double dual_ss = 0.0;
  double primal_ss = 0.0;
  for (std::size_t x = 0; x < sc.inputs(); ++x) {
    const double px = sc.input_probs[idx(x)];
    const VectorXd& truth = sc.truth[x];
    for (std::size_t i = 0; i < sc.teachers.size(); ++i) {
      const auto& t = sc.teachers[i][x];
      r.teacher_risk += px * pw[idx(i)] *
                        (dir == Direction::Forward ? divergence(g, truth, t) : divergence(g, t, truth));
    }
    for (std::size_t j = 0; j < sc.students.size(); ++j) {
      const double pj = pwp[idx(j)];
      if (pj <= 0.0) continue;
      const VectorXd weights = coupling == Coupling::Joint ? sc.posterior(j) : pw;
      const VectorXd& s = sc.students[j][x];
      const double w = px * pj;
      for (std::size_t i = 0; i < sc.teachers.size(); ++i) {
        const auto& t = sc.teachers[i][x];
        const double d = dir == Direction::Forward ? divergence(g, s, t) : divergence(g, t, s);
        r.misfit += w * weights[idx(i)] * d;
      }
      if (dir == Direction::Forward) {
        r.lhs += w * divergence(g, truth, s);
        const VectorXd dual_gap = g.dual_difference(weighted_dual_mean(g, sc.teachers, weights, x), g.to_dual(s));
        const VectorXd primal_gap = truth - s;
        r.exact_residual += w * primal_gap.dot(dual_gap);
        dual_ss += w * dual_gap.squaredNorm();
        primal_ss += w * primal_gap.squaredNorm();
      } else {
        r.lhs += w * divergence(g, s, truth);
        const VectorXd primal_gap = weighted_mean(sc.teachers, weights, x) - s;
        const VectorXd dual_gap = g.dual_difference(g.to_dual(truth), g.to_dual(s));
        r.exact_residual += w * primal_gap.dot(dual_gap);
        dual_ss += w * dual_gap.squaredNorm();
        primal_ss += w * primal_gap.squaredNorm();
      }
    }
  }
  r.epsilon = std::sqrt(dual_ss) * std::sqrt(primal_ss);
  r.rhs = r.teacher_risk - r.misfit + r.epsilon;
  r.slack = r.rhs - r.lhs;
  r.identity_error = std::abs(r.lhs - (r.teacher_risk - r.misfit + r.exact_residual));
  r.equality_error = std::abs(r.lhs - (r.teacher_risk - r.misfit));
  return r;
}

double max_abs_diff(const Predictor& a, const Predictor& b) {
  double m = 0.0;
  for (std::size_t x = 0; x < a.size(); ++x) m = std::max(m, (a[x] - b[x]).cwiseAbs().maxCoeff());
  return m;
}

void require_construction(const FiniteScenario& actual, const FiniteScenario& expected, const char* what) {
  const VectorXd pwp = actual.student_marginal();
  for (std::size_t j = 0; j < actual.students.size(); ++j) {
    if (pwp[idx(j)] <= 0.0) continue;
    if (max_abs_diff(actual.students[j], expected.students[j]) > 1e-10)
      throw std::invalid_argument(std::string("student ") + std::to_string(j) + " is not the " + what);
  }
}

void require_same_teacher_side(const FiniteScenario& a, const FiniteScenario& b) {
  bool same = a.inputs() == b.inputs() && a.teachers.size() == b.teachers.size() &&
              a.students.size() == b.students.size() && a.joint == b.joint && a.input_probs == b.input_probs;
  for (std::size_t x = 0; same && x < a.inputs(); ++x) same = a.truth[x] == b.truth[x];
  for (std::size_t i = 0; same && i < a.teachers.size(); ++i) same = max_abs_diff(a.teachers[i], b.teachers[i]) == 0.0;
  if (!same) throw std::invalid_argument("scenarios differ outside their students");
}

Prob as_prob(const VectorXd& v) { return Prob(v); }

}  // namespace

TheoremReport verify_theorem1(const FiniteScenario& sc, const Geometry& g, Direction dir) {
  return enumerate(sc, g, dir, Coupling::Joint);
}

TheoremReport verify_theoremA(const FiniteScenario& sc, const Geometry& g, Direction dir) {
  return enumerate(sc, g, dir, Coupling::Product);
}

TheoremReport verify_corollary1(const FiniteScenario& sc, const Geometry& g, Direction dir) {
  sc.validate(g);
  if (dir == Direction::Forward)
    require_construction(sc, with_posterior_dual_mean_students(sc, g), "posterior dual mean");
  else
    require_construction(sc, with_posterior_mean_students(sc), "posterior mean");
  return enumerate(sc, g, dir, Coupling::Joint);
}

double corollary3_slack(const FiniteScenario& sc, const Geometry& g, Direction dir) {
  if (!g.is_simplex()) throw std::invalid_argument("cross-entropy form needs the negative-entropy geometry");
  const TheoremReport r = enumerate(sc, g, dir, Coupling::Joint);
  double lhs = 0.0, teacher = 0.0, misfit = 0.0;
  for (std::size_t x = 0; x < sc.inputs(); ++x) {
    const Prob truth = as_prob(sc.truth[x]);
    for (std::size_t i = 0; i < sc.teachers.size(); ++i) {
      for (std::size_t j = 0; j < sc.students.size(); ++j) {
        const double w = sc.input_probs[idx(x)] * sc.joint(idx(i), idx(j));
        if (w <= 0.0) continue;
        const Prob t = as_prob(sc.teachers[i][x]);
        const Prob s = as_prob(sc.students[j][x]);
        if (dir == Direction::Forward) {
          lhs += w * (ce(truth, s) - entropy(truth));
          teacher += w * (ce(truth, t) - entropy(truth));
          misfit += w * (rce(t, s) - entropy(s));
        } else {
          lhs += w * (rce(truth, s) - entropy(s));
          teacher += w * (rce(truth, t) - entropy(t));
          misfit += w * (ce(t, s) - entropy(t));
        }
      }
    }
  }
  return teacher - misfit + r.epsilon - lhs;
}

ConditionalVarianceCheck epsilon_decomposition_check(const FiniteScenario& sc, const Geometry& g) {
  if (g.kind() != GeometryKind::SquaredNorm)
    throw std::invalid_argument("conditional-variance identity needs the squared-norm geometry");
  sc.validate(g);
  const VectorXd pwp = sc.student_marginal();
  ConditionalVarianceCheck c;
  for (std::size_t x = 0; x < sc.inputs(); ++x) {
    double lhs = 0.0, misfit = 0.0, var = 0.0;
    for (std::size_t j = 0; j < sc.students.size(); ++j) {
      if (pwp[idx(j)] <= 0.0) continue;
      const VectorXd post = sc.posterior(j);
      const VectorXd mean = weighted_mean(sc.teachers, post, x);
      const VectorXd& s = sc.students[j][x];
      lhs += pwp[idx(j)] * (s - mean).squaredNorm();
      for (std::size_t i = 0; i < sc.teachers.size(); ++i) {
        const double w = sc.joint(idx(i), idx(j));
        misfit += w * (s - sc.teachers[i][x]).squaredNorm();
        var += w * (sc.teachers[i][x] - mean).squaredNorm();
      }
    }
    const double px = sc.input_probs[idx(x)];
    c.lhs += px * lhs;
    c.misfit += px * misfit;
    c.cond_variance += px * var;
    c.max_identity_error = std::max(c.max_identity_error, std::abs(lhs - (misfit - var)));
  }
  return c;
}

Prop1Report verify_prop1(const FiniteScenario& dual_mean_students, const FiniteScenario& mean_students) {
  require_same_teacher_side(dual_mean_students, mean_students);
  const FiniteScenario& base = dual_mean_students;
  if (base.inputs() == 0) throw std::invalid_argument("scenario has no inputs");
  const Geometry g = Geometry::negative_entropy(base.dimension());
  dual_mean_students.validate(g);
  mean_students.validate(g);
  require_construction(dual_mean_students, with_posterior_dual_mean_students(base, g), "posterior dual mean");
  require_construction(mean_students, with_posterior_mean_students(base), "posterior mean");

  Prop1Report r;
  double h_student = 0.0, h_teacher = 0.0;
  for (std::size_t x = 0; x < base.inputs(); ++x) {
    const Prob truth = as_prob(base.truth[x]);
    for (std::size_t i = 0; i < base.teachers.size(); ++i) {
      const Prob t = as_prob(base.teachers[i][x]);
      for (std::size_t j = 0; j < base.students.size(); ++j) {
        const double w = base.input_probs[idx(x)] * base.joint(idx(i), idx(j));
        if (w <= 0.0) continue;
        const Prob sd = as_prob(dual_mean_students.students[j][x]);
        const Prob sm = as_prob(mean_students.students[j][x]);
        r.ce_gain += w * (ce(truth, t) - ce(truth, sd));
        r.kl_misfit += w * kl(sd, t);
        r.rce_gain += w * (rce(truth, t) - rce(truth, sm));
        r.reverse_gain += w * (kl(t, truth) - kl(sm, truth));
        h_student += w * entropy(sm);
        h_teacher += w * entropy(t);
      }
    }
  }
  r.entropy_gap = h_student - h_teacher;
  r.ce_error = std::abs(r.ce_gain - r.kl_misfit);
  r.reconstruction_error = std::abs(r.reverse_gain - r.entropy_gap - r.rce_gain);
  return r;
}

Prop1Report verify_prop1(const FiniteScenario& sc) {
  const Geometry g = Geometry::negative_entropy(sc.dimension());
  return verify_prop1(with_posterior_dual_mean_students(sc, g), with_posterior_mean_students(sc));
}

Prob ensemble_dual_mean_prediction(const std::vector<Prob>& predictions) {
  if (predictions.empty()) throw std::invalid_argument("ensemble needs at least one prediction");
  const auto k = predictions.front().size();
  VectorXd log_mean = VectorXd::Zero(k);
  for (const auto& p : predictions) {
    if (p.size() != k) throw std::invalid_argument("ensemble predictions differ in size");
    log_mean += p.probs().array().log().matrix();
  }
  log_mean /= double(predictions.size());
  const VectorXd e = (log_mean.array() - log_mean.maxCoeff()).exp();
  return Prob(e / e.sum());
}

BiasVariance bias_variance_estimate(const std::vector<Prob>& runs, const Prob& truth) {
  if (runs.size() < 2) throw std::invalid_argument("bias/variance estimate needs at least two runs");
  const Prob pi = ensemble_dual_mean_prediction(runs);
  BiasVariance bv;
  bv.bias = kl(truth, pi);
  for (const auto& run : runs) {
    bv.variance += kl(pi, run);
    bv.mean_ce += ce(truth, run);
  }
  bv.variance /= double(runs.size());
  bv.mean_ce /= double(runs.size());
  bv.identity_error = std::abs(bv.bias + bv.variance + entropy(truth) - bv.mean_ce);
  return bv;
}

}  // namespace w2slab
