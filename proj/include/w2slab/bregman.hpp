#pragma once

// Bregman divergence geometries on R^d and on the probability simplex.
//
// Three generators are supported:
//   squared norm       phi(x) = |x|^2
//   Mahalanobis        phi(x) = x^T M x   (M symmetric positive definite)
//   negative entropy   phi(x) = sum_i x_i log x_i, restricted to the open simplex
//
// For the simplex-restricted generator, dual coordinates grad phi(x) = log x + 1
// are only meaningful modulo the all-ones direction; from_dual() is a softmax and
// dual_difference() returns the centered representative.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace w2slab {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VectorXd = Vector<double>;
using MatrixXd = Matrix<double>;

inline constexpr double kSimplexEpsilon = 1e-12;

enum class GeometryKind { SquaredNorm, Mahalanobis, NegativeEntropy };

inline std::string to_string(GeometryKind kind) {
  switch (kind) {
    case GeometryKind::SquaredNorm: return "squared";
    case GeometryKind::Mahalanobis: return "mahalanobis";
    case GeometryKind::NegativeEntropy: return "negentropy";
  }
  return "unknown";
}

/// Clamp every coordinate into [eps, 1 - eps] and renormalize onto the simplex.
/// Negative or non-finite coordinates are rejected, as is a total mass far from one.
template <typename Derived>
Vector<typename Derived::Scalar> clamp_to_simplex(const Eigen::MatrixBase<Derived>& v,
                                                  double eps = kSimplexEpsilon) {
  using Scalar = typename Derived::Scalar;
  if (v.size() < 2) throw std::invalid_argument("simplex point needs at least 2 coordinates");
  if (!v.allFinite()) throw std::invalid_argument("simplex point has non-finite coordinates");
  if ((v.array() < Scalar(0)).any())
    throw std::invalid_argument("simplex point has negative coordinates");
  const Scalar total = v.sum();
  if (std::abs(total - Scalar(1)) > Scalar(1e-6))
    throw std::invalid_argument("simplex point does not sum to one");
  Vector<Scalar> c = v.array().max(Scalar(eps)).min(Scalar(1 - eps)).matrix();
  return c / c.sum();
}

template <typename Scalar>
class BregmanGeometry {
 public:
  static BregmanGeometry squared_norm(Eigen::Index dim) {
    return BregmanGeometry(GeometryKind::SquaredNorm, dim, Matrix<Scalar>());
  }

  static BregmanGeometry mahalanobis(const Matrix<Scalar>& m) {
    if (m.rows() != m.cols() || m.rows() == 0)
      throw std::invalid_argument("Mahalanobis matrix must be square and non-empty");
    if (!m.isApprox(m.transpose(), Scalar(1e-12)))
      throw std::invalid_argument("Mahalanobis matrix must be symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(m, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() <= Scalar(0))
      throw std::invalid_argument("Mahalanobis matrix must be strictly positive definite");
    return BregmanGeometry(GeometryKind::Mahalanobis, m.rows(), m);
  }

  static BregmanGeometry negative_entropy(Eigen::Index dim) {
    if (dim < 2) throw std::invalid_argument("simplex geometry needs dimension >= 2");
    return BregmanGeometry(GeometryKind::NegativeEntropy, dim, Matrix<Scalar>());
  }

  GeometryKind kind() const { return kind_; }
  Eigen::Index dimension() const { return dim_; }
  const Matrix<Scalar>& metric() const { return metric_; }
  bool is_simplex() const { return kind_ == GeometryKind::NegativeEntropy; }

  template <typename Derived>
  bool in_domain(const Eigen::MatrixBase<Derived>& x) const {
    if (x.size() != dim_ || !x.allFinite()) return false;
    if (!is_simplex()) return true;
    return (x.array() > Scalar(0)).all() && std::abs(x.sum() - Scalar(1)) <= Scalar(1e-9);
  }

  template <typename Derived>
  void require_domain(const Eigen::MatrixBase<Derived>& x) const {
    if (x.size() != dim_) throw std::invalid_argument("dimension mismatch");
    if (!in_domain(x)) throw std::domain_error("point outside the domain of " + to_string(kind_));
  }

  template <typename Derived>
  Scalar phi(const Eigen::MatrixBase<Derived>& x) const {
    require_domain(x);
    switch (kind_) {
      case GeometryKind::SquaredNorm: return x.squaredNorm();
      case GeometryKind::Mahalanobis: return x.dot(metric_ * x);
      case GeometryKind::NegativeEntropy: return (x.array() * x.array().log()).sum();
    }
    return Scalar(0);
  }

  template <typename Derived>
  Vector<Scalar> to_dual(const Eigen::MatrixBase<Derived>& x) const {
    require_domain(x);
    switch (kind_) {
      case GeometryKind::SquaredNorm: return Scalar(2) * x;
      case GeometryKind::Mahalanobis: return Scalar(2) * (metric_ * x);
      case GeometryKind::NegativeEntropy: return (x.array().log() + Scalar(1)).matrix();
    }
    return {};
  }

  template <typename Derived>
  Vector<Scalar> from_dual(const Eigen::MatrixBase<Derived>& xs) const {
    if (xs.size() != dim_) throw std::invalid_argument("dimension mismatch");
    if (!xs.allFinite()) throw std::domain_error("dual point is not finite");
    switch (kind_) {
      case GeometryKind::SquaredNorm: return Scalar(0.5) * xs;
      case GeometryKind::Mahalanobis: return Scalar(0.5) * metric_.llt().solve(Vector<Scalar>(xs));
      case GeometryKind::NegativeEntropy: {
        Vector<Scalar> e = (xs.array() - xs.maxCoeff()).exp().matrix();
        return e / e.sum();
      }
    }
    return {};
  }

  /// Canonical difference of two dual points a* - b*. On the simplex the
  /// all-ones component is removed, since it pairs to zero with every tangent vector.
  template <typename DA, typename DB>
  Vector<Scalar> dual_difference(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) const {
    Vector<Scalar> d = a - b;
    if (is_simplex()) d.array() -= d.mean();
    return d;
  }

 private:
  BregmanGeometry(GeometryKind kind, Eigen::Index dim, Matrix<Scalar> metric)
      : kind_(kind), dim_(dim), metric_(std::move(metric)) {
    if (dim <= 0) throw std::invalid_argument("dimension must be positive");
  }

  GeometryKind kind_;
  Eigen::Index dim_;
  Matrix<Scalar> metric_;
};

/// D(x, y) = phi(x) - phi(y) - <grad phi(y), x - y>.
template <typename Scalar, typename DX, typename DY>
Scalar divergence(const BregmanGeometry<Scalar>& g, const Eigen::MatrixBase<DX>& x,
                  const Eigen::MatrixBase<DY>& y) {
  g.require_domain(x);
  g.require_domain(y);
  switch (g.kind()) {
    case GeometryKind::SquaredNorm: return (x - y).squaredNorm();
    case GeometryKind::Mahalanobis: {
      const Vector<Scalar> d = x - y;
      return d.dot(g.metric() * d);
    }
    case GeometryKind::NegativeEntropy: {
      // Both points lie on the simplex, so the linear terms cancel and only KL remains.
      Scalar kl = (x.array() * (x.array() / y.array()).log()).sum();
      return kl < Scalar(0) ? Scalar(0) : kl;
    }
  }
  return Scalar(0);
}

/// D(x,z) - D(x,y) - D(y,z) + <z* - y*, x - y>; zero up to rounding for every triple.
template <typename Scalar, typename DX, typename DY, typename DZ>
Scalar law_of_cosines_residual(const BregmanGeometry<Scalar>& g, const Eigen::MatrixBase<DX>& x,
                               const Eigen::MatrixBase<DY>& y, const Eigen::MatrixBase<DZ>& z) {
  const Vector<Scalar> zs = g.to_dual(z);
  const Vector<Scalar> ys = g.to_dual(y);
  return divergence(g, x, z) - divergence(g, x, y) - divergence(g, y, z) +
         (zs - ys).dot(x - y);
}

/// A finite weighted distribution over points of one geometry.
template <typename Scalar>
class SampleSet {
 public:
  SampleSet(std::vector<Vector<Scalar>> points, Vector<Scalar> weights)
      : points_(std::move(points)), weights_(std::move(weights)) {
    if (points_.empty()) throw std::invalid_argument("empty sample set");
    if (weights_.size() != static_cast<Eigen::Index>(points_.size()))
      throw std::invalid_argument("weights and points differ in length");
    if ((weights_.array() < Scalar(0)).any()) throw std::invalid_argument("negative weight");
    if (std::abs(weights_.sum() - Scalar(1)) > Scalar(1e-12))
      throw std::invalid_argument("weights must sum to one");
    for (const auto& p : points_)
      if (p.size() != points_.front().size()) throw std::invalid_argument("ragged sample set");
  }

  static SampleSet uniform(std::vector<Vector<Scalar>> points) {
    const auto n = static_cast<Eigen::Index>(points.size());
    if (n == 0) throw std::invalid_argument("empty sample set");
    return SampleSet(std::move(points), Vector<Scalar>::Constant(n, Scalar(1) / Scalar(n)));
  }

  std::size_t size() const { return points_.size(); }
  Eigen::Index dimension() const { return points_.front().size(); }
  const Vector<Scalar>& point(std::size_t i) const { return points_[i]; }
  Scalar weight(std::size_t i) const { return weights_[static_cast<Eigen::Index>(i)]; }
  const std::vector<Vector<Scalar>>& points() const { return points_; }
  const Vector<Scalar>& weights() const { return weights_; }

  template <typename F>
  Scalar expect(F&& f) const {
    Scalar acc(0);
    for (std::size_t i = 0; i < points_.size(); ++i) acc += weight(i) * f(points_[i]);
    return acc;
  }

 private:
  std::vector<Vector<Scalar>> points_;
  Vector<Scalar> weights_;
};

/// argmin_y E[D(X, y)] = E[X].
template <typename Scalar>
Vector<Scalar> mean_minimizer(const SampleSet<Scalar>& s) {
  Vector<Scalar> m = Vector<Scalar>::Zero(s.dimension());
  for (std::size_t i = 0; i < s.size(); ++i) m += s.weight(i) * s.point(i);
  return m;
}

/// argmin_y E[D(y, X)] = (E[X*])*. On the simplex this is the normalized weighted geometric mean.
template <typename Scalar>
Vector<Scalar> dual_mean(const BregmanGeometry<Scalar>& g, const SampleSet<Scalar>& s) {
  Vector<Scalar> m = Vector<Scalar>::Zero(g.dimension());
  for (std::size_t i = 0; i < s.size(); ++i) m += s.weight(i) * g.to_dual(s.point(i));
  return g.from_dual(m);
}

template <typename Scalar>
struct ForwardDecomposition {
  Scalar variance;  // E[D(X, EX)]
  Scalar bias;      // D(EX, y)
  Scalar total() const { return variance + bias; }
};

template <typename Scalar>
struct ReverseDecomposition {
  Scalar bias;           // D(y, dual mean)
  Scalar dual_variance;  // E[D(dual mean, X)]
  Scalar total() const { return bias + dual_variance; }
};

template <typename Scalar, typename DY>
ForwardDecomposition<Scalar> forward_decomposition(const BregmanGeometry<Scalar>& g,
                                                   const SampleSet<Scalar>& s,
                                                   const Eigen::MatrixBase<DY>& y) {
  const Vector<Scalar> m = mean_minimizer(s);
  const Scalar var = s.expect([&](const Vector<Scalar>& x) { return divergence(g, x, m); });
  return {var, divergence(g, m, y)};
}

template <typename Scalar, typename DY>
ReverseDecomposition<Scalar> reverse_decomposition(const BregmanGeometry<Scalar>& g,
                                                   const Eigen::MatrixBase<DY>& y,
                                                   const SampleSet<Scalar>& s) {
  const Vector<Scalar> m = dual_mean(g, s);
  const Scalar var = s.expect([&](const Vector<Scalar>& x) { return divergence(g, m, x); });
  return {divergence(g, y, m), var};
}

using Geometry = BregmanGeometry<double>;
using Samples = SampleSet<double>;

}  // namespace w2slab
