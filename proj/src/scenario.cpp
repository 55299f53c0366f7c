#include "w2slab/scenario.hpp"

#include <random>
#include <stdexcept>

namespace w2slab {

VectorXd flat_dirichlet(Rng& rng, Eigen::Index k) {
  std::exponential_distribution<double> e(1.0);
  VectorXd v(k);
  for (Eigen::Index i = 0; i < k; ++i) v[i] = e(rng);
  return v / v.sum();
}

VectorXd FiniteScenario::posterior(std::size_t j) const {
  const auto col = joint.col(static_cast<Eigen::Index>(j));
  const double mass = col.sum();
  if (mass <= 0.0) return VectorXd::Zero(joint.rows());
  return col / mass;
}

void FiniteScenario::validate(const Geometry& g) const {
  const auto n = inputs();
  if (n == 0) throw std::invalid_argument("scenario has no inputs");
  if (input_probs.size() != static_cast<Eigen::Index>(n))
    throw std::invalid_argument("input marginal length differs from input count");
  if (teachers.empty() || students.empty()) throw std::invalid_argument("scenario needs teachers and students");
  if (joint.rows() != static_cast<Eigen::Index>(teachers.size()) ||
      joint.cols() != static_cast<Eigen::Index>(students.size()))
    throw std::invalid_argument("joint table shape differs from model counts");
  if ((input_probs.array() < 0.0).any() || std::abs(input_probs.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("input marginal must be a distribution");
  if ((joint.array() < 0.0).any() || std::abs(joint.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("joint table must be a distribution");
  auto check = [&](const Predictor& p) {
    if (p.size() != n) throw std::invalid_argument("predictor length differs from input count");
    for (const auto& v : p) g.require_domain(v);
  };
  for (const auto& v : truth) g.require_domain(v);
  for (const auto& t : teachers) check(t);
  for (const auto& s : students) check(s);
}

namespace {

VectorXd random_point(Rng& rng, GeometryKind kind, Eigen::Index k) {
  if (kind == GeometryKind::NegativeEntropy) return clamp_to_simplex(flat_dirichlet(rng, k));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  VectorXd v(k);
  for (Eigen::Index i = 0; i < k; ++i) v[i] = u(rng);
  return v;
}

Predictor random_predictor(Rng& rng, GeometryKind kind, Eigen::Index k, std::size_t n) {
  Predictor p;
  p.reserve(n);
  for (std::size_t x = 0; x < n; ++x) p.push_back(random_point(rng, kind, k));
  return p;
}

}  // namespace

FiniteScenario random_scenario(std::uint64_t seed, GeometryKind kind, const ScenarioShape& shape) {
  Rng rng(derive_seed(seed, {0x5ce7a210ULL}));
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int teachers = pick(shape.min_teachers, shape.max_teachers);
  const int students = pick(shape.min_students, shape.max_students);
  const int inputs = pick(shape.min_inputs, shape.max_inputs);
  const int classes = pick(shape.min_classes, shape.max_classes);

  FiniteScenario sc;
  sc.seed = seed;
  sc.input_probs = flat_dirichlet(rng, inputs);
  const VectorXd flat_joint = flat_dirichlet(rng, teachers * students);
  sc.joint = Eigen::Map<const MatrixXd>(flat_joint.data(), teachers, students);
  for (int x = 0; x < inputs; ++x) sc.truth.push_back(random_point(rng, kind, classes));
  for (int i = 0; i < teachers; ++i) sc.teachers.push_back(random_predictor(rng, kind, classes, inputs));
  for (int j = 0; j < students; ++j) sc.students.push_back(random_predictor(rng, kind, classes, inputs));
  return sc;
}

Geometry geometry_for(const FiniteScenario& sc, GeometryKind kind) {
  const auto k = sc.dimension();
  switch (kind) {
    case GeometryKind::SquaredNorm: return Geometry::squared_norm(k);
    case GeometryKind::NegativeEntropy: return Geometry::negative_entropy(k);
    case GeometryKind::Mahalanobis: {
      Rng rng(derive_seed(sc.seed, {0x3e7a1cULL}));
      const MatrixXd a = gaussian_matrix(rng, k, k);
      MatrixXd m = a * a.transpose() / double(k);
      m.diagonal().array() += 0.5;
      return Geometry::mahalanobis(0.5 * (m + m.transpose()));
    }
  }
  throw std::invalid_argument("unknown geometry kind");
}

FiniteScenario with_posterior_dual_mean_students(FiniteScenario sc, const Geometry& g) {
  const auto n = sc.inputs();
  for (std::size_t j = 0; j < sc.students.size(); ++j) {
    const VectorXd post = sc.posterior(j);
    if (post.sum() <= 0.0) continue;
    for (std::size_t x = 0; x < n; ++x) {
      VectorXd dual = VectorXd::Zero(sc.dimension());
      for (std::size_t i = 0; i < sc.teachers.size(); ++i)
        dual += post[static_cast<Eigen::Index>(i)] * g.to_dual(sc.teachers[i][x]);
      sc.students[j][x] = g.from_dual(dual);
    }
  }
  return sc;
}

FiniteScenario with_posterior_mean_students(FiniteScenario sc) {
  const auto n = sc.inputs();
  for (std::size_t j = 0; j < sc.students.size(); ++j) {
    const VectorXd post = sc.posterior(j);
    if (post.sum() <= 0.0) continue;
    for (std::size_t x = 0; x < n; ++x) {
      VectorXd mean = VectorXd::Zero(sc.dimension());
      for (std::size_t i = 0; i < sc.teachers.size(); ++i)
        mean += post[static_cast<Eigen::Index>(i)] * sc.teachers[i][x];
      sc.students[j][x] = mean;
    }
  }
  return sc;
}

}  // namespace w2slab
