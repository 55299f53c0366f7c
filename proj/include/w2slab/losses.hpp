#pragma once

// Entropy-family losses on probability vectors, their binary gradients, label
// smoothing, and the composite CACE / SL / AUX training losses.
//
// Argument order is always (label, prediction): ce(y, yhat) = -sum y log yhat.

#include "w2slab/bregman.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace w2slab {

/// A point of the probability simplex, clamped to [eps, 1 - eps] on construction.
template <typename Scalar>
class ProbVector {
 public:
  template <typename Derived>
  explicit ProbVector(const Eigen::MatrixBase<Derived>& p) : probs_(clamp_to_simplex(p)) {}

  static ProbVector binary(Scalar p1) {
    if (!(p1 >= Scalar(0) && p1 <= Scalar(1)))
      throw std::invalid_argument("binary probability outside [0, 1]");
    Vector<Scalar> v(2);
    v << p1, Scalar(1) - p1;
    return ProbVector(v);
  }

  static ProbVector uniform(Eigen::Index k) {
    return ProbVector(Vector<Scalar>::Constant(k, Scalar(1) / Scalar(k)));
  }

  static ProbVector one_hot(Eigen::Index k, Eigen::Index hot) {
    Vector<Scalar> v = Vector<Scalar>::Zero(k);
    v[hot] = Scalar(1);
    return ProbVector(v);
  }

  Eigen::Index size() const { return probs_.size(); }
  Scalar operator[](Eigen::Index i) const { return probs_[i]; }
  const Vector<Scalar>& probs() const { return probs_; }
  Eigen::Index argmax() const {
    Eigen::Index i;
    probs_.maxCoeff(&i);
    return i;
  }

 private:
  Vector<Scalar> probs_;
};

using Prob = ProbVector<double>;

namespace detail {
template <typename Scalar>
void require_same_size(const ProbVector<Scalar>& a, const ProbVector<Scalar>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("probability vectors differ in length");
}
template <typename Scalar>
void require_binary(const ProbVector<Scalar>& a, const ProbVector<Scalar>& b) {
  require_same_size(a, b);
  if (a.size() != 2) throw std::invalid_argument("analytic gradients are defined for K = 2 only");
}
}  // namespace detail

template <typename Scalar>
Scalar entropy(const ProbVector<Scalar>& y) {
  return -(y.probs().array() * y.probs().array().log()).sum();
}

template <typename Scalar>
Scalar ce(const ProbVector<Scalar>& y, const ProbVector<Scalar>& yhat) {
  detail::require_same_size(y, yhat);
  return -(y.probs().array() * yhat.probs().array().log()).sum();
}

template <typename Scalar>
Scalar rce(const ProbVector<Scalar>& y, const ProbVector<Scalar>& yhat) {
  return ce(yhat, y);
}

template <typename Scalar>
Scalar kl(const ProbVector<Scalar>& y, const ProbVector<Scalar>& yhat) {
  detail::require_same_size(y, yhat);
  return (y.probs().array() * (y.probs().array() / yhat.probs().array()).log()).sum();
}

template <typename Scalar>
Scalar rkl(const ProbVector<Scalar>& y, const ProbVector<Scalar>& yhat) {
  return kl(yhat, y);
}

// Binary gradients with respect to yhat_j, the other coordinate tied as 1 - yhat_j.

template <typename Scalar>
Vector<Scalar> grad_ce(const ProbVector<Scalar>& y, const ProbVector<Scalar>& yhat) {
  detail::require_binary(y, yhat);
  Vector<Scalar> g(2);
  for (Eigen::Index j = 0; j < 2; ++j)
    g[j] = -y[j] / yhat[j] + (Scalar(1) - y[j]) / (Scalar(1) - yhat[j]);
  return g;
}

template <typename Scalar>
Vector<Scalar> grad_kl(const ProbVector<Scalar>& y, const ProbVector<Scalar>& yhat) {
  return grad_ce(y, yhat);
}

template <typename Scalar>
Vector<Scalar> grad_rce(const ProbVector<Scalar>& y, const ProbVector<Scalar>& yhat) {
  detail::require_binary(y, yhat);
  Vector<Scalar> g(2);
  for (Eigen::Index j = 0; j < 2; ++j) g[j] = std::log((Scalar(1) - y[j]) / y[j]);
  return g;
}

template <typename Scalar>
Vector<Scalar> grad_rkl(const ProbVector<Scalar>& y, const ProbVector<Scalar>& yhat) {
  detail::require_binary(y, yhat);
  Vector<Scalar> g(2);
  for (Eigen::Index j = 0; j < 2; ++j)
    g[j] = std::log((Scalar(1) - y[j]) / y[j]) - std::log((Scalar(1) - yhat[j]) / yhat[j]);
  return g;
}

/// yhat_j = 1/2 + alpha (y_j - 1/2). Keeps the argmax for alpha > 0.
template <typename Scalar>
ProbVector<Scalar> smooth_labels(const ProbVector<Scalar>& y, Scalar alpha) {
  if (y.size() != 2) throw std::invalid_argument("label smoothing is defined for K = 2 only");
  if (!(alpha >= Scalar(0) && alpha <= Scalar(1)))
    throw std::invalid_argument("smoothing factor outside [0, 1]");
  return ProbVector<Scalar>::binary(Scalar(0.5) + alpha * (y[0] - Scalar(0.5)));
}

// ---------------------------------------------------------------------------
// Composite losses

struct CompositeLossConfig {
  double cace_quantile = 20.0;   // percent of pseudo-labels treated as low-confidence
  double cace_threshold = 0.0;   // c, fixed before training from the quantile
  double sl_lambda1 = 1.0;       // RCE weight
  double sl_lambda2 = 1.0;       // CE weight
  double aux_beta_max = 1.0;
  double aux_warmup = 0.2;       // fraction of training over which beta ramps 0 -> beta_max

  void validate() const {
    if (!(cace_quantile >= 0.0 && cace_quantile <= 100.0))
      throw std::invalid_argument("cace quantile must be in [0, 100]");
    if (cace_threshold < 0.0) throw std::invalid_argument("cace threshold must be >= 0");
    if (sl_lambda1 < 0.0 || sl_lambda2 < 0.0 || !(sl_lambda1 + sl_lambda2 > 0.0))
      throw std::invalid_argument("SL weights must be >= 0 with positive sum");
    if (!(aux_beta_max >= 0.0 && aux_beta_max <= 1.0))
      throw std::invalid_argument("aux beta_max must be in [0, 1]");
    if (!(aux_warmup > 0.0 && aux_warmup <= 1.0))
      throw std::invalid_argument("aux warm-up fraction must be in (0, 1]");
  }
};

template <typename Scalar>
Scalar label_confidence(const ProbVector<Scalar>& y) {
  return std::abs(y[0] - Scalar(0.5));
}

/// Threshold c such that exactly `quantile_percent`% of the labels have confidence below c
/// (up to ties). Computed once over the whole pseudo-label set.
inline double cace_threshold(std::span<const Prob> labels, double quantile_percent) {
  if (labels.empty()) throw std::invalid_argument("empty pseudo-label set");
  if (!(quantile_percent >= 0.0 && quantile_percent <= 100.0))
    throw std::invalid_argument("quantile must be in [0, 100]");
  std::vector<double> conf;
  conf.reserve(labels.size());
  for (const auto& y : labels) conf.push_back(label_confidence(y));
  std::sort(conf.begin(), conf.end());
  const auto n = conf.size();
  const auto k = static_cast<std::size_t>(std::llround(quantile_percent / 100.0 * double(n)));
  if (k == 0) return 0.0;
  if (k >= n) return std::nextafter(conf.back(), 1.0);
  return 0.5 * (conf[k - 1] + conf[k]);
}

template <typename Scalar>
bool cace_uses_rce(const ProbVector<Scalar>& y, double threshold) {
  return label_confidence(y) < Scalar(threshold);
}

template <typename Scalar>
Scalar cace(const ProbVector<Scalar>& y, const ProbVector<Scalar>& yhat, const CompositeLossConfig& cfg) {
  return cace_uses_rce(y, cfg.cace_threshold) ? rce(y, yhat) : ce(y, yhat);
}

template <typename Scalar>
Scalar sl(const ProbVector<Scalar>& y, const ProbVector<Scalar>& yhat, const CompositeLossConfig& cfg) {
  return Scalar(cfg.sl_lambda1) * rce(y, yhat) + Scalar(cfg.sl_lambda2) * ce(y, yhat);
}

/// Threshold t with exactly half of the batch strictly above it (midpoint of the two middle values).
inline double aux_threshold(std::span<const double> batch_first_coords) {
  if (batch_first_coords.empty()) throw std::invalid_argument("empty batch");
  std::vector<double> v(batch_first_coords.begin(), batch_first_coords.end());
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  if (n == 1) return v[0];
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Linear warm-up of beta from 0 to beta_max over the first `warmup` fraction of training.
inline double aux_beta(double progress, const CompositeLossConfig& cfg) {
  const double ramp = std::clamp(progress / cfg.aux_warmup, 0.0, 1.0);
  return cfg.aux_beta_max * ramp;
}

/// Self-training target: clamped one-hot argmax when the prediction's first coordinate
/// exceeds t, otherwise the prediction itself.
template <typename Scalar>
ProbVector<Scalar> aux_target(const ProbVector<Scalar>& yhat, double threshold) {
  if (yhat[0] > Scalar(threshold)) return ProbVector<Scalar>::one_hot(yhat.size(), yhat.argmax());
  return yhat;
}

template <typename Scalar>
Scalar aux(const ProbVector<Scalar>& y_weak, const ProbVector<Scalar>& yhat, Scalar beta,
           std::span<const double> batch_first_coords) {
  if (!(beta >= Scalar(0) && beta <= Scalar(1))) throw std::invalid_argument("beta outside [0, 1]");
  const double t = aux_threshold(batch_first_coords);
  return beta * ce(y_weak, yhat) + (Scalar(1) - beta) * ce(aux_target(yhat, t), yhat);
}

// ---------------------------------------------------------------------------
// Smoothed-label RCE risk ordering

struct RcePopulationRisks {
  double smoothed;    // R^alpha
  double unsmoothed;  // R
};

struct OrderingGap {
  double lhs = 0.0;
  double mid = 0.0;  // R^alpha(f) - R^alpha(f*)
  double rhs = 0.0;  // R(f) - R(f*)
  bool holds(double tol) const { return lhs <= mid + tol && mid <= rhs + tol; }
};

inline OrderingGap rce_ordering_gap(const RcePopulationRisks& f, const RcePopulationRisks& fstar) {
  return {0.0, f.smoothed - fstar.smoothed, f.unsmoothed - fstar.unsmoothed};
}

/// RCE population risk -E_X sum_i f(X)_i log Y_i over a finite binary input set,
/// with labels optionally smoothed by alpha.
inline double rce_population_risk(std::span<const double> input_probs, std::span<const Prob> labels,
                                  std::span<const Prob> outputs, double alpha = 1.0) {
  if (input_probs.size() != labels.size() || labels.size() != outputs.size())
    throw std::invalid_argument("risk inputs differ in length");
  double r = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    r += input_probs[i] * rce(smooth_labels(labels[i], alpha), outputs[i]);
  return r;
}

}  // namespace w2slab
