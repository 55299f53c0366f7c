#pragma once

// Exact verification of the misfit inequalities on finite scenarios, plus the
// geometric-mean ensemble and the bias/variance estimator for cross-entropy.

#include "w2slab/losses.hpp"
#include "w2slab/scenario.hpp"

#include <string>
#include <vector>

namespace w2slab {

enum class Direction { Forward, Reverse };

inline std::string to_string(Direction d) { return d == Direction::Forward ? "forward" : "reverse"; }

struct TheoremReport {
  double lhs = 0.0;             // expected student risk
  double rhs = 0.0;             // teacher_risk - misfit + epsilon
  double teacher_risk = 0.0;
  double misfit = 0.0;
  double epsilon = 0.0;         // Cauchy-Schwarz residual
  double exact_residual = 0.0;  // the inner-product term epsilon bounds
  double slack = 0.0;           // rhs - lhs
  /// |lhs - (teacher_risk - misfit + exact_residual)|, zero up to rounding.
  double identity_error = 0.0;
  /// |lhs - (teacher_risk - misfit)|; the equality gap when epsilon vanishes.
  double equality_error = 0.0;

  bool holds(double tol) const { return slack >= -tol; }
  bool residual_dominated(double tol) const { return std::abs(exact_residual) <= epsilon + tol; }
};

/// Forward: E D(g, S) <= E D(g, T) - E D(S, T) + eps1.
/// Reverse: E D(S, g) <= E D(T, g) - E D(T, S) + eps2.
/// Expectations run over X and the joint table; conditional means use the posterior.
TheoremReport verify_theorem1(const FiniteScenario& sc, const Geometry& g, Direction dir);

/// Same inequality with the misfit taken under P_W x P_W' and unconditional teacher means.
TheoremReport verify_theoremA(const FiniteScenario& sc, const Geometry& g, Direction dir);

/// Requires students equal to the posterior dual mean (forward) or posterior mean (reverse)
/// within 1e-10; throws std::invalid_argument otherwise.
TheoremReport verify_corollary1(const FiniteScenario& sc, const Geometry& g, Direction dir);

/// Forward/reverse slack recomputed from CE, RCE and entropy values instead of KL.
/// Negative-entropy geometry only.
double corollary3_slack(const FiniteScenario& sc, const Geometry& g, Direction dir);

struct ConditionalVarianceCheck {
  double lhs = 0.0;            // E|S - E[T | W']|^2
  double misfit = 0.0;         // E|S - T|^2
  double cond_variance = 0.0;  // E|T - E[T | W']|^2
  double max_identity_error = 0.0;  // worst per-input |lhs - (misfit - cond_variance)|
};

/// Squared-norm geometry only; throws std::invalid_argument otherwise.
ConditionalVarianceCheck epsilon_decomposition_check(const FiniteScenario& sc, const Geometry& g);

struct Prop1Report {
  double ce_gain = 0.0;         // E CE(g, T) - E CE(g, S) with S the posterior dual mean
  double kl_misfit = 0.0;       // E KL(S, T)
  double rce_gain = 0.0;        // E RCE(g, T) - E RCE(g, S) with S the posterior mean
  double reverse_gain = 0.0;    // E KL(T, g) - E KL(S, g) = E KL(T, S)
  double entropy_gap = 0.0;     // E H(S) - E H(T) >= 0
  double ce_error = 0.0;        // |ce_gain - kl_misfit|
  double reconstruction_error = 0.0;  // |reverse_gain - entropy_gap - rce_gain|
};

/// `dual_mean_students` and `mean_students` must share teachers, truth and tables and carry
/// the respective constructions; throws std::invalid_argument otherwise.
Prop1Report verify_prop1(const FiniteScenario& dual_mean_students, const FiniteScenario& mean_students);
/// Builds both constructions from `sc`'s teacher side.
Prop1Report verify_prop1(const FiniteScenario& sc);

/// exp(mean log p), renormalized.
Prob ensemble_dual_mean_prediction(const std::vector<Prob>& predictions);

struct BiasVariance {
  double bias = 0.0;            // KL(truth, pi)
  double variance = 0.0;        // mean KL(pi, run)
  double mean_ce = 0.0;         // mean CE(truth, run)
  double identity_error = 0.0;  // |bias + variance + H(truth) - mean_ce|
};

/// pi = ensemble_dual_mean_prediction(runs). Requires at least two runs.
BiasVariance bias_variance_estimate(const std::vector<Prob>& runs, const Prob& truth);

}  // namespace w2slab
