#pragma once

// Exactly enumerable teacher-student scenarios: a finite input marginal, ground-truth
// labels, finitely many teacher and student predictors and a joint table over them.

#include "w2slab/bregman.hpp"
#include "w2slab/random.hpp"

#include <cstdint>
#include <vector>

namespace w2slab {

using Predictor = std::vector<VectorXd>;  // one prediction per input

struct FiniteScenario {
  VectorXd input_probs;            // P(X = x)
  std::vector<VectorXd> truth;     // g(x)
  std::vector<Predictor> teachers;
  std::vector<Predictor> students;
  MatrixXd joint;                  // P(W = i, W' = j), teachers x students
  std::uint64_t seed = 0;

  std::size_t inputs() const { return truth.size(); }
  Eigen::Index dimension() const { return truth.empty() ? 0 : truth.front().size(); }

  VectorXd teacher_marginal() const { return joint.rowwise().sum(); }
  VectorXd student_marginal() const { return joint.colwise().sum().transpose(); }
  /// P(W = . | W' = j); a zero vector when the student has no mass.
  VectorXd posterior(std::size_t j) const;

  /// Throws std::invalid_argument / std::domain_error on a malformed scenario.
  void validate(const Geometry& g) const;
};

struct ScenarioShape {
  int min_teachers = 1, max_teachers = 5;
  int min_students = 1, max_students = 4;
  int min_inputs = 2, max_inputs = 6;
  int min_classes = 2, max_classes = 8;
};

/// Random scenario: sizes uniform on the shape's ranges, flat Dirichlet tables, predictions
/// uniform on [0,1]^K (squared / Mahalanobis) or flat Dirichlet on the simplex (negative entropy).
/// The geometry kind fixes the domain; its dimension is drawn from the class range.
FiniteScenario random_scenario(std::uint64_t seed, GeometryKind kind, const ScenarioShape& shape = {});

/// Geometry of the matching kind for a scenario (Mahalanobis uses a seeded SPD metric).
Geometry geometry_for(const FiniteScenario& sc, GeometryKind kind);

/// Students replaced by the posterior dual mean (E[f_W* | W'])* of the teachers, input by input.
FiniteScenario with_posterior_dual_mean_students(FiniteScenario sc, const Geometry& g);
/// Students replaced by the posterior mean E[f_W | W'].
FiniteScenario with_posterior_mean_students(FiniteScenario sc);

VectorXd flat_dirichlet(Rng& rng, Eigen::Index k);

}  // namespace w2slab
