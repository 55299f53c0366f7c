#include "w2slab/ridge.hpp"

#include "w2slab/parallel.hpp"
#include "w2slab/random.hpp"

#include <algorithm>
#include <sstream>

namespace w2slab {

namespace {

Eigen::LLT<Eigen::MatrixXd> factor_ridge(const Eigen::MatrixXd& gram, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("ridge coefficient must be positive");
  Eigen::MatrixXd a = gram;
  a.diagonal().array() += eta;
  return Eigen::LLT<Eigen::MatrixXd>(a);
}

}  // namespace

Eigen::VectorXd ridge_solve_gram(const Eigen::MatrixXd& gram, const Eigen::VectorXd& moment, double eta) {
  if (gram.rows() != gram.cols() || gram.rows() != moment.size())
    throw std::invalid_argument("ridge system dimensions disagree");
  if (!gram.allFinite() || !moment.allFinite()) throw std::invalid_argument("non-finite ridge input");
  const auto llt = factor_ridge(gram, eta);
  if (llt.info() != Eigen::Success) throw std::runtime_error("ridge system is numerically singular");
  Eigen::VectorXd w = llt.solve(moment);
  if (!w.allFinite()) throw std::runtime_error("ridge system is numerically singular");
  return w;
}

Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets, double eta) {
  if (features.cols() != targets.size()) throw std::invalid_argument("features and targets disagree");
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(features.rows(), features.rows());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(features);
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  return ridge_solve_gram(gram, features * targets, eta);
}

double ridge_relative_gradient(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                               double eta, const Eigen::VectorXd& w) {
  const Eigen::VectorXd residual = features.transpose() * w - targets;
  const Eigen::VectorXd grad = 2.0 * (features * residual) + 2.0 * eta * w;
  const double scale = 2.0 * (features * targets).norm();
  return scale > 0.0 ? grad.norm() / scale : grad.norm();
}

Eigen::MatrixXd theta_matrix(const Eigen::MatrixXd& first_layer, const Eigen::MatrixXd& inputs, double eta) {
  const Eigen::MatrixXd cov = inputs * inputs.transpose();
  const Eigen::MatrixXd gram = first_layer * cov * first_layer.transpose();
  const auto llt = factor_ridge(gram, eta);
  return first_layer.transpose() * llt.solve(first_layer * cov);
}

RidgeTrial draw_ridge_trial(const RidgeConfig& cfg, int trial) {
  cfg.validate();
  const int d_w = cfg.d_w;
  const int d_s = cfg.d_s();
  const int n = cfg.n();
  constexpr int kMaxAttempts = 8;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(attempt)}));
    RidgeTrial t;
    t.teacher = gaussian_vector(rng, d_w, cfg.teacher_scale());
    t.first_layer = gaussian_matrix(rng, d_s, d_w, 1.0 / d_w);
    t.inputs = gaussian_matrix(rng, d_w, n, 1.0 / d_w);
    t.retries = attempt;

    // Pseudo-labels y' = X'^T W enter only through A A^T and A y', with A = W1' X'.
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d_w, d_w);
    cov.selfadjointView<Eigen::Lower>().rankUpdate(t.inputs);
    cov.triangularView<Eigen::StrictlyUpper>() = cov.transpose();
    const Eigen::MatrixXd projected = t.first_layer * cov;
    const Eigen::MatrixXd gram = projected * t.first_layer.transpose();
    const Eigen::VectorXd moment = projected * t.teacher;
    try {
      t.second_layer = ridge_solve_gram(gram, moment, cfg.eta());
      return t;
    } catch (const std::runtime_error&) {
      continue;
    }
  }
  throw std::runtime_error("ridge trial " + std::to_string(trial) + " failed after retries");
}

MisfitEstimate simulate_misfit(const RidgeConfig& cfg, int trials, unsigned threads) {
  cfg.validate();
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  std::vector<double> misfit(static_cast<std::size_t>(trials));
  std::vector<int> retries(static_cast<std::size_t>(trials));
  parallel_for(
      misfit.size(),
      [&](std::size_t i) {
        const auto t = draw_ridge_trial(cfg, static_cast<int>(i));
        misfit[i] = t.misfit();
        retries[i] = t.retries;
      },
      threads);

  MisfitEstimate est;
  est.trials = trials;
  est.per_trial = misfit;
  est.bound = cfg.B * h_closed_form(cfg.eta0, cfg.gamma);
  double mean = 0.0;
  for (double m : misfit) mean += m;
  mean /= trials;
  double ss = 0.0;
  for (double m : misfit) ss += (m - mean) * (m - mean);
  est.empirical_misfit = mean;
  est.std_error = trials > 1 ? std::sqrt(ss / (trials - 1) / trials) : 0.0;
  for (int r : retries) est.retried += r > 0 ? 1 : 0;
  return est;
}

double h_closed_form(double eta0, double gamma) {
  if (!(eta0 > 0.0) || !std::isfinite(eta0)) throw std::invalid_argument("eta0 must be > 0");
  if (!(gamma > 1.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be > 1");
  const double num = eta0 * (gamma + 1.0) + (gamma - 1.0) * (gamma - 1.0);
  const double den = 2.0 * std::sqrt(gamma * gamma - 2.0 * (1.0 - eta0) * gamma + (eta0 + 1.0) * (eta0 + 1.0));
  return num / den - 0.5 * (gamma - 1.0);
}

QuadratureResult mp_integral_result(double eta0, double gamma) {
  if (!(eta0 > 0.0)) throw std::invalid_argument("eta0 must be > 0");
  const double k = gamma / eta0;
  return mp_expectation(gamma, [k](double lambda) {
    const double s = 1.0 + k * lambda;
    return 1.0 / (s * s);
  });
}

double mp_integral(double eta0, double gamma) {
  const auto r = mp_integral_result(eta0, gamma);
  if (!r.converged) {
    std::ostringstream msg;
    msg << "Marchenko-Pastur quadrature did not converge (error estimate " << r.error_estimate << ")";
    throw std::runtime_error(msg.str());
  }
  return r.value;
}

MonotonicityReport verify_monotonicity(const std::vector<double>& eta0_grid,
                                       const std::vector<double>& gamma_grid) {
  MonotonicityReport report;
  std::vector<double> gammas = gamma_grid;
  std::sort(gammas.begin(), gammas.end());
  for (double eta0 : eta0_grid) {
    double prev_gamma = 0.0;
    double prev_h = 0.0;
    for (std::size_t i = 0; i < gammas.size(); ++i) {
      const double h = h_closed_form(eta0, gammas[i]);
      ++report.evaluations;
      if (!(h > 0.0 && h < 1.0))
        report.violations.push_back({eta0, gammas[i], gammas[i], h, h, "h outside (0, 1)"});
      if (i > 0 && !(h < prev_h))
        report.violations.push_back({eta0, prev_gamma, gammas[i], prev_h, h, "h not decreasing in gamma"});
      prev_gamma = gammas[i];
      prev_h = h;
    }
  }
  return report;
}

}  // namespace w2slab
