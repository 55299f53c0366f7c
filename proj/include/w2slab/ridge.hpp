#pragma once

// Teacher-student ridge regression with a random-feature student, the closed-form
// asymptotic misfit bound h(eta0, gamma), and its Marchenko-Pastur integral form.

#include "w2slab/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace w2slab {

struct RidgeConfig {
  int d_w = 200;
  double gamma = 2.0;     // d_s / d_w
  double n_ratio = 20.0;  // n / d_w
  double eta0 = 1.0;      // ridge coefficient is eta = n_ratio * eta0
  double B = 1.0;         // E|W|^2
  std::uint64_t seed = 1;

  int d_s() const { return static_cast<int>(std::lround(gamma * d_w)); }
  int n() const { return static_cast<int>(std::lround(n_ratio * d_w)); }
  double eta() const { return n_ratio * eta0; }
  double teacher_scale() const { return B / d_w; }

  void validate() const {
    if (d_w < 2) throw std::invalid_argument("d_w must be >= 2");
    if (!(gamma > 1.0)) throw std::invalid_argument("gamma must be > 1");
    if (!(n_ratio >= 1.0)) throw std::invalid_argument("n_ratio must be >= 1");
    if (!(eta0 > 0.0)) throw std::invalid_argument("eta0 must be > 0");
    if (!(B > 0.0)) throw std::invalid_argument("B must be > 0");
  }
};

struct MisfitEstimate {
  double empirical_misfit = 0.0;  // mean over trials of E_X (f_W'(X) - f_W(X))^2
  double bound = 0.0;             // B * h(eta0, gamma)
  int trials = 0;
  double std_error = 0.0;
  int retried = 0;                // trials redrawn after a failed factorization
  std::vector<double> per_trial;
};

/// One draw of the simulation: teacher W, frozen first layer W1', inputs X' and the
/// fitted second layer W2'.
struct RidgeTrial {
  Eigen::VectorXd teacher;       // d_w
  Eigen::MatrixXd first_layer;   // d_s x d_w
  Eigen::MatrixXd inputs;        // d_w x n
  Eigen::VectorXd second_layer;  // d_s
  int retries = 0;

  /// Effective linear map of the student, f_W'(x) = x^T (W1'^T W2').
  Eigen::VectorXd student_weights() const { return first_layer.transpose() * second_layer; }
  /// E_X (f_W'(X) - f_W(X))^2 with X ~ N(0, I/d_w).
  double misfit() const {
    return (student_weights() - teacher).squaredNorm() / double(teacher.size());
  }
};

/// argmin_w |A^T w - y|^2 + eta |w|^2 = (A A^T + eta I)^{-1} A y for features A (d_s x n).
Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets, double eta);

/// Same solve from sufficient statistics: gram = A A^T, moment = A y.
Eigen::VectorXd ridge_solve_gram(const Eigen::MatrixXd& gram, const Eigen::VectorXd& moment, double eta);

/// |grad of the ridge objective at w| / |A y|; zero at the exact solution.
double ridge_relative_gradient(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                               double eta, const Eigen::VectorXd& w);

/// Theta = W1'^T (W1' X' X'^T W1'^T + eta I)^{-1} W1' X' X'^T, so that W1'^T W2' = Theta W.
Eigen::MatrixXd theta_matrix(const Eigen::MatrixXd& first_layer, const Eigen::MatrixXd& inputs, double eta);

RidgeTrial draw_ridge_trial(const RidgeConfig& cfg, int trial);

MisfitEstimate simulate_misfit(const RidgeConfig& cfg, int trials, unsigned threads = 0);

double h_closed_form(double eta0, double gamma);

/// Support [gamma_-, gamma_+] of the Marchenko-Pastur law with ratio 1/gamma.
inline std::pair<double, double> mp_support(double gamma) {
  const double r = std::sqrt(1.0 / gamma);
  return {(1.0 - r) * (1.0 - r), (1.0 + r) * (1.0 + r)};
}

/// E[f(lambda)] under the Marchenko-Pastur density
///   p(lambda) = gamma sqrt((gamma_+ - lambda)(lambda - gamma_-)) / (2 pi lambda).
/// The substitution lambda = c - r cos(theta) absorbs both square-root endpoints.
template <typename F>
QuadratureResult mp_expectation(double gamma, F&& f, double abs_tol = 1e-13) {
  if (!(gamma > 1.0)) throw std::invalid_argument("gamma must be > 1");
  const auto [lo, hi] = mp_support(gamma);
  const double c = 0.5 * (hi + lo);
  const double r = 0.5 * (hi - lo);
  auto integrand = [&](double theta) {
    const double s = std::sin(theta);
    const double lambda = c - r * std::cos(theta);
    return gamma / (2.0 * std::numbers::pi) * r * r * s * s / lambda * f(lambda);
  };
  return integrate_adaptive(integrand, 0.0, std::numbers::pi, abs_tol);
}

QuadratureResult mp_integral_result(double eta0, double gamma);

/// Quadrature value of the Marchenko-Pastur integral equal to h(eta0, gamma).
/// Throws std::runtime_error (with the achieved error estimate) if quadrature does not converge.
double mp_integral(double eta0, double gamma);

struct MonotonicityViolation {
  double eta0;
  double gamma_lo;
  double gamma_hi;
  double h_lo;
  double h_hi;
  std::string reason;
};

struct MonotonicityReport {
  int evaluations = 0;
  std::vector<MonotonicityViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks that h is strictly decreasing along the (sorted) gamma grid and lies in (0, 1).
MonotonicityReport verify_monotonicity(const std::vector<double>& eta0_grid,
                                       const std::vector<double>& gamma_grid);

}  // namespace w2slab
