#include "w2slab/commands.hpp"

#include "w2slab/harness.hpp"
#include "w2slab/ridge.hpp"
#include "w2slab/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

namespace w2slab {

namespace {

// ---------------------------------------------------------------------------
// Schemas

Schema task_keys() {
  return {
      {"d", ValueType::Int, "30", "input dimension of the synthetic task"},
      {"separation", ValueType::Double, "3", "distance between the two class means"},
      {"noise", ValueType::Double, "1", "per-coordinate standard deviation"},
      {"n_train", ValueType::Int, "64", "teacher training set size |S| (even)"},
      {"n_pseudo", ValueType::Int, "512", "pseudo-labeled set size |S'| (even)"},
      {"n_test", ValueType::Int, "1000", "test set size (even)"},
      {"student_width", ValueType::Int, "240", "number of random features of the strong model"},
      {"student_activation", ValueType::String, "tanh", "random-feature activation: tanh or identity"},
      {"init_scale", ValueType::Double, "0.0065", "std of the strong model's initial weights"},
      {"lr", ValueType::Double, "0.1", "learning rate (teacher and student)"},
      {"steps", ValueType::Int, "500", "gradient steps per training run"},
      {"batch_size", ValueType::Int, "32", "mini-batch size"},
      {"distillation", ValueType::Bool, "false", "swap capacities: random-feature teacher, linear student"},
      {"threads", ValueType::Int, "0", "worker threads (0 = hardware concurrency)"},
  };
}

Schema build_schema(const std::string& command) {
  Schema s = {{"seed", ValueType::UInt64, "1", "master seed (W2SLAB_SEED overrides the file value)"}};
  auto append = [&](const Schema& more) { s.insert(s.end(), more.begin(), more.end()); };
  if (command == "verify") {
    append({
        {"scenarios", ValueType::Int, "100", "random finite scenarios per geometry"},
        {"triples", ValueType::Int, "1000", "random triples per geometry for the law of cosines"},
        {"sample_sets", ValueType::Int, "200", "random sample sets per geometry for the decompositions"},
        {"lemma_sets", ValueType::Int, "20", "random sample sets for the grid minimizer oracle"},
        {"grid_step", ValueType::Double, "1e-3", "grid step of the minimizer oracle"},
        {"prop1_constructions", ValueType::Int, "50", "posterior-mean constructions for the CE/RCE gain check"},
        {"bv_cases", ValueType::Int, "100", "random run sets for the bias/variance identity"},
        {"tolerance", ValueType::Double, "1e-9", "tolerance for inequalities and equalities"},
        {"identity_tolerance", ValueType::Double, "1e-10", "tolerance for the decomposition identities"},
    });
  } else if (command == "ridge") {
    append({
        {"d_w", ValueType::Int, "200", "teacher input dimension"},
        {"gammas", ValueType::DoubleList, "1.5,2,4", "capacity ratios d_s/d_w (> 1)"},
        {"eta0s", ValueType::DoubleList, "0.5,1", "scaled ridge coefficients (> 0)"},
        {"n_ratio", ValueType::Double, "20", "n/d_w"},
        {"B", ValueType::Double, "1", "E|W|^2"},
        {"trials", ValueType::Int, "50", "Monte Carlo trials per cell"},
        {"slack", ValueType::Double, "0.1", "finite-size slack on the bound"},
        {"mp_tolerance", ValueType::Double, "1e-6", "allowed |quadrature - closed form|"},
        {"max_inversions", ValueType::Int, "1", "allowed non-decreasing steps along gamma per eta0"},
        {"threads", ValueType::Int, "0", "worker threads (0 = hardware concurrency)"},
    });
  } else if (command == "classify") {
    append({
        {"losses", ValueType::StringList, "ce,rce", "losses to sweep: ce, rce, kl, rkl, cace, sl, aux"},
        {"alphas", ValueType::DoubleList, "0,0.001,0.01,0.1,1", "label smoothing factors in [0, 1]"},
        {"repeats", ValueType::Int, "3", "repeats per cell"},
        {"cace_quantile", ValueType::Double, "20", "percent of pseudo-labels routed to RCE by CACE"},
        {"sl_lambda1", ValueType::Double, "1", "SL weight on RCE"},
        {"sl_lambda2", ValueType::Double, "1", "SL weight on CE"},
        {"aux_beta_max", ValueType::Double, "1", "AUX maximum weight on the weak labels"},
        {"aux_warmup", ValueType::Double, "0.2", "AUX warm-up fraction of training"},
        {"flat_tolerance", ValueType::Double, "0.05", "max RCE accuracy range across alpha >= 0.001"},
        {"drop_threshold", ValueType::Double, "0.05", "min CE accuracy drop from alpha 1 to 0.01"},
        {"max_inversions", ValueType::Int, "1", "allowed inversions in the CE accuracy trend"},
        {"risk_check", ValueType::Bool, "true", "compare RCE test risk at risk_alpha and alpha 1"},
        {"risk_alpha", ValueType::Double, "0.3", "smoothing factor compared against alpha 1"},
        {"risk_repeats", ValueType::Int, "5", "repeats for the risk comparison"},
    });
    append(task_keys());
  } else if (command == "bias-variance") {
    append({
        {"k", ValueType::Int, "3", "outer repetitions"},
        {"N", ValueType::Int, "4", "disjoint (S, S') pairs per repetition"},
        {"repeats", ValueType::Int, "3", "independent experiments (seeds)"},
        {"test_points", ValueType::Int, "200", "test points (even)"},
        {"tolerance", ValueType::Double, "1e-9", "tolerance of the bias + variance identity"},
    });
    append(task_keys());
  } else {
    throw std::invalid_argument("unknown command '" + command + "'");
  }
  return s;
}

// ---------------------------------------------------------------------------
// Shared helpers

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

unsigned threads_of(const ExperimentConfig& cfg) {
  const int t = cfg.get_int("threads");
  require(t >= 0, "threads must be >= 0");
  return static_cast<unsigned>(t);
}

Verdict max_verdict(const std::string& name, double worst, double tol, const std::string& what) {
  return {name, worst <= tol, what + " max " + fmt(worst) + " (tolerance " + fmt(tol) + ")"};
}

Verdict min_verdict(const std::string& name, double worst, double floor, const std::string& what) {
  return {name, worst >= floor, what + " min " + fmt(worst) + " (floor " + fmt(floor) + ")"};
}

Rng suite_rng(std::uint64_t seed, std::uint64_t suite, std::uint64_t i) { return Rng(derive_seed(seed, {suite, i})); }

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

VectorXd random_point(Rng& rng, const Geometry& g) {
  if (g.is_simplex()) return clamp_to_simplex(flat_dirichlet(rng, g.dimension()));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  VectorXd v(g.dimension());
  for (auto& x : v) x = u(rng);
  return v;
}

Geometry random_geometry(Rng& rng, GeometryKind kind, Eigen::Index k) {
  switch (kind) {
    case GeometryKind::SquaredNorm: return Geometry::squared_norm(k);
    case GeometryKind::NegativeEntropy: return Geometry::negative_entropy(k);
    case GeometryKind::Mahalanobis: {
      const MatrixXd a = gaussian_matrix(rng, k, k);
      MatrixXd m = a * a.transpose() / double(k);
      m.diagonal().array() += 0.5;
      return Geometry::mahalanobis(0.5 * (m + m.transpose()));
    }
  }
  throw std::invalid_argument("unknown geometry");
}

constexpr GeometryKind kAllGeometries[] = {GeometryKind::SquaredNorm, GeometryKind::Mahalanobis,
                                           GeometryKind::NegativeEntropy};

// ---------------------------------------------------------------------------
// verify

struct VerifyParams {
  std::uint64_t seed;
  int scenarios, triples, sample_sets, lemma_sets, prop1, bv_cases;
  double grid_step, tol, identity_tol;
};

VerifyParams parse_verify(const ExperimentConfig& c) {
  VerifyParams p{c.get_uint64("seed"),        c.get_int("scenarios"),   c.get_int("triples"),
                 c.get_int("sample_sets"),    c.get_int("lemma_sets"),  c.get_int("prop1_constructions"),
                 c.get_int("bv_cases"),       c.get_double("grid_step"), c.get_double("tolerance"),
                 c.get_double("identity_tolerance")};
  require(p.scenarios >= 1 && p.triples >= 1 && p.sample_sets >= 1 && p.lemma_sets >= 1 && p.prop1 >= 1 &&
              p.bv_cases >= 1,
          "suite sizes must be >= 1");
  require(p.grid_step > 0.0 && p.grid_step <= 0.1, "grid_step must be in (0, 0.1]");
  require(p.tol >= 0.0 && p.identity_tol >= 0.0, "tolerances must be >= 0");
  return p;
}

struct VerifyRowBuilder {
  Table& table;
  void add(const std::string& suite, std::int64_t seed, const std::string& geometry, const std::string& direction,
           const TheoremReport& r) {
    table.add({suite, seed, geometry, direction, r.lhs, r.rhs, r.misfit, r.epsilon, r.exact_residual, r.slack,
               r.identity_error});
  }
  void add_error(const std::string& suite, std::int64_t seed, const std::string& geometry,
                 const std::string& direction, double error) {
    table.add({suite, seed, geometry, direction, {}, {}, {}, {}, {}, {}, error});
  }
};

CommandOutput run_verify(const VerifyParams& p) {
  CommandOutput out;
  out.csv.header = {"suite", "seed", "geometry", "direction", "lhs", "rhs", "misfit",
                    "epsilon", "exact_residual", "slack", "error"};
  VerifyRowBuilder rows{out.csv};
  auto& verdicts = out.report.verdicts;

  // Law of cosines.
  {
    double worst = 0.0;
    for (auto kind : kAllGeometries) {
      double worst_g = 0.0;
      for (int i = 0; i < p.triples; ++i) {
        Rng rng = suite_rng(p.seed, 1, static_cast<std::uint64_t>(i) * 3 + static_cast<std::uint64_t>(kind));
        const Geometry g = random_geometry(rng, kind, uniform_int(rng, 2, 8));
        const VectorXd x = random_point(rng, g), y = random_point(rng, g), z = random_point(rng, g);
        worst_g = std::max(worst_g, std::abs(law_of_cosines_residual(g, x, y, z)));
      }
      rows.add_error("law_of_cosines", static_cast<std::int64_t>(p.seed), to_string(kind), "", worst_g);
      worst = std::max(worst, worst_g);
    }
    verdicts.push_back(max_verdict("law_of_cosines", worst, p.tol, "|residual|"));
  }

  // Forward and reverse decompositions.
  {
    double worst = 0.0;
    for (auto kind : kAllGeometries) {
      double fwd = 0.0, rev = 0.0;
      for (int i = 0; i < p.sample_sets; ++i) {
        Rng rng = suite_rng(p.seed, 2, static_cast<std::uint64_t>(i) * 3 + static_cast<std::uint64_t>(kind));
        const Geometry g = random_geometry(rng, kind, uniform_int(rng, 2, 8));
        const int n = uniform_int(rng, 2, 10);
        std::vector<VectorXd> pts;
        for (int k = 0; k < n; ++k) pts.push_back(random_point(rng, g));
        const Samples s(pts, flat_dirichlet(rng, n));
        const VectorXd y = random_point(rng, g);
        const double direct_f = s.expect([&](const VectorXd& x) { return divergence(g, x, y); });
        const double direct_r = s.expect([&](const VectorXd& x) { return divergence(g, y, x); });
        fwd = std::max(fwd, std::abs(direct_f - forward_decomposition(g, s, y).total()));
        rev = std::max(rev, std::abs(direct_r - reverse_decomposition(g, y, s).total()));
      }
      rows.add_error("decomposition", static_cast<std::int64_t>(p.seed), to_string(kind), "forward", fwd);
      rows.add_error("decomposition", static_cast<std::int64_t>(p.seed), to_string(kind), "reverse", rev);
      worst = std::max({worst, fwd, rev});
    }
    verdicts.push_back(max_verdict("decompositions", worst, p.identity_tol, "|direct - decomposed|"));
  }

  // Expectation minimizers against a brute-force grid (one-dimensional parametrizations).
  {
    double worst = 0.0;
    const int cells = static_cast<int>(std::floor(1.0 / p.grid_step));
    for (auto kind : {GeometryKind::SquaredNorm, GeometryKind::NegativeEntropy}) {
      double worst_g = 0.0;
      const Geometry g = kind == GeometryKind::SquaredNorm ? Geometry::squared_norm(1) : Geometry::negative_entropy(2);
      auto embed = [&](double t) {
        VectorXd v(g.dimension());
        if (g.is_simplex()) v << t, 1.0 - t;
        else v << t;
        return v;
      };
      for (int i = 0; i < p.lemma_sets; ++i) {
        Rng rng = suite_rng(p.seed, 3, static_cast<std::uint64_t>(i) * 3 + static_cast<std::uint64_t>(kind));
        const int n = uniform_int(rng, 2, 10);
        std::vector<VectorXd> pts;
        std::uniform_real_distribution<double> u(0.02, 0.98);
        for (int k = 0; k < n; ++k) pts.push_back(embed(u(rng)));
        const Samples s(pts, flat_dirichlet(rng, n));
        double best_f = INFINITY, best_r = INFINITY, arg_f = 0.0, arg_r = 0.0;
        for (int c = 1; c < cells; ++c) {
          const VectorXd y = embed(c * p.grid_step);
          const double f = s.expect([&](const VectorXd& x) { return divergence(g, x, y); });
          const double r = s.expect([&](const VectorXd& x) { return divergence(g, y, x); });
          if (f < best_f) best_f = f, arg_f = c * p.grid_step;
          if (r < best_r) best_r = r, arg_r = c * p.grid_step;
        }
        worst_g = std::max({worst_g, std::abs(arg_f - mean_minimizer(s)[0]), std::abs(arg_r - dual_mean(g, s)[0])});
      }
      rows.add_error("lemma_grid", static_cast<std::int64_t>(p.seed), to_string(kind), "", worst_g);
      worst = std::max(worst, worst_g);
    }
    verdicts.push_back(max_verdict("minimizer_grid_oracle", worst, p.grid_step, "|grid argmin - closed form|"));
  }

  // Theorem 1 / Theorem A / Corollary 1 / Corollary 3 / conditional-variance identity.
  struct Worst {
    double slack = INFINITY, residual = 0.0, identity = 0.0;
  } t1, ta;
  double cor1_eq = 0.0, cor1_eps = 0.0, cor3 = 0.0, eq10 = 0.0;
  for (auto kind : kAllGeometries) {
    for (int i = 0; i < p.scenarios; ++i) {
      const auto sseed = derive_seed(p.seed, {4, static_cast<std::uint64_t>(kind), static_cast<std::uint64_t>(i)});
      const FiniteScenario sc = random_scenario(sseed, kind);
      const Geometry g = geometry_for(sc, kind);
      const auto gname = to_string(kind);
      for (auto dir : {Direction::Forward, Direction::Reverse}) {
        const auto dname = to_string(dir);
        for (auto [name, fn, w] :
             {std::tuple{"theorem1", &verify_theorem1, &t1}, std::tuple{"theoremA", &verify_theoremA, &ta}}) {
          const TheoremReport r = fn(sc, g, dir);
          rows.add(name, static_cast<std::int64_t>(sseed), gname, dname, r);
          w->slack = std::min(w->slack, r.slack);
          w->residual = std::max(w->residual, std::abs(r.exact_residual) - r.epsilon);
          w->identity = std::max(w->identity, r.identity_error);
        }
        const FiniteScenario ideal = dir == Direction::Forward ? with_posterior_dual_mean_students(sc, g)
                                                               : with_posterior_mean_students(sc);
        const TheoremReport c1 = verify_corollary1(ideal, g, dir);
        rows.add("corollary1", static_cast<std::int64_t>(sseed), gname, dname, c1);
        cor1_eq = std::max(cor1_eq, c1.equality_error);
        cor1_eps = std::max(cor1_eps, c1.epsilon);
        if (kind == GeometryKind::NegativeEntropy) {
          const double diff = std::abs(corollary3_slack(sc, g, dir) - verify_theorem1(sc, g, dir).slack);
          rows.add_error("corollary3", static_cast<std::int64_t>(sseed), gname, dname, diff);
          cor3 = std::max(cor3, diff);
        }
      }
      if (kind == GeometryKind::SquaredNorm) {
        const auto c = epsilon_decomposition_check(sc, g);
        out.csv.add({"conditional_variance", static_cast<std::int64_t>(sseed), gname, "", c.lhs,
                     c.misfit - c.cond_variance, c.misfit, {}, {}, {}, c.max_identity_error});
        eq10 = std::max(eq10, c.max_identity_error);
      }
    }
  }
  verdicts.push_back(min_verdict("theorem1_inequality", t1.slack, -p.tol, "slack"));
  verdicts.push_back(max_verdict("theorem1_residual_bound", t1.residual, p.tol, "|exact residual| - epsilon"));
  verdicts.push_back(max_verdict("theorem1_identity", t1.identity, p.tol, "|lhs - (teacher - misfit + exact)|"));
  verdicts.push_back(min_verdict("theoremA_inequality", ta.slack, -p.tol, "slack"));
  verdicts.push_back(max_verdict("theoremA_residual_bound", ta.residual, p.tol, "|exact residual| - epsilon"));
  verdicts.push_back(max_verdict("theoremA_identity", ta.identity, p.tol, "|lhs - (teacher - misfit + exact)|"));
  verdicts.push_back(max_verdict("corollary1_equality", cor1_eq, p.tol, "|lhs - (teacher - misfit)|"));
  verdicts.push_back(max_verdict("corollary1_epsilon", cor1_eps, p.tol, "epsilon"));
  verdicts.push_back(max_verdict("corollary3_cross_entropy_form", cor3, p.tol, "|slack(CE form) - slack(KL form)|"));
  verdicts.push_back(max_verdict("conditional_variance_identity", eq10, p.identity_tol, "per-input identity error"));

  // CE / RCE gains of the ideal constructions.
  {
    double ce_err = 0.0, rec_err = 0.0, gap = INFINITY;
    for (int i = 0; i < p.prop1; ++i) {
      const auto sseed = derive_seed(p.seed, {5, static_cast<std::uint64_t>(i)});
      const auto r = verify_prop1(random_scenario(sseed, GeometryKind::NegativeEntropy));
      out.csv.add({"ce_rce_gain", static_cast<std::int64_t>(sseed), "negentropy", "", r.rce_gain, r.reverse_gain,
                   r.kl_misfit, {}, r.entropy_gap, {}, std::max(r.ce_error, r.reconstruction_error)});
      ce_err = std::max(ce_err, r.ce_error);
      rec_err = std::max(rec_err, r.reconstruction_error);
      gap = std::min(gap, r.entropy_gap);
    }
    verdicts.push_back(max_verdict("ce_gain_equals_misfit", ce_err, p.tol, "|CE gain - KL misfit|"));
    verdicts.push_back(max_verdict("rce_gain_entropy_gap", rec_err, p.tol, "|reverse gain - entropy gap - RCE gain|"));
    verdicts.push_back(min_verdict("entropy_gap_nonnegative", gap, -p.tol, "entropy gap"));
  }

  // Bias + variance against the mean one-hot cross-entropy.
  {
    double worst = 0.0;
    for (int i = 0; i < p.bv_cases; ++i) {
      Rng rng = suite_rng(p.seed, 6, static_cast<std::uint64_t>(i));
      const int k = uniform_int(rng, 2, 8);
      const int runs = uniform_int(rng, 2, 10);
      std::vector<Prob> preds;
      for (int r = 0; r < runs; ++r) preds.emplace_back(flat_dirichlet(rng, k));
      const Prob truth = Prob::one_hot(k, uniform_int(rng, 0, k - 1));
      const auto bv = bias_variance_estimate(preds, truth);
      worst = std::max(worst, bv.identity_error);
    }
    rows.add_error("bias_variance", static_cast<std::int64_t>(p.seed), "negentropy", "", worst);
    verdicts.push_back(max_verdict("bias_variance_identity", worst, p.tol, "|bias + variance + H(truth) - mean CE|"));
  }

  out.report.rows = out.csv;
  return out;
}

// ---------------------------------------------------------------------------
// ridge

struct RidgeParams {
  std::vector<RidgeConfig> cells;
  int trials;
  double slack, mp_tol;
  int max_inversions;
  unsigned threads;
};

RidgeParams parse_ridge(const ExperimentConfig& c) {
  RidgeParams p;
  const auto gammas = c.get_doubles("gammas");
  const auto eta0s = c.get_doubles("eta0s");
  require(!gammas.empty() && !eta0s.empty(), "gammas and eta0s must be non-empty");
  for (std::size_t e = 0; e < eta0s.size(); ++e)
    for (std::size_t k = 0; k < gammas.size(); ++k) {
      const double eta0 = eta0s[e], gamma = gammas[k];
      RidgeConfig r;
      r.d_w = c.get_int("d_w");
      r.gamma = gamma;
      r.eta0 = eta0;
      r.n_ratio = c.get_double("n_ratio");
      r.B = c.get_double("B");
      r.seed = derive_seed(c.get_uint64("seed"), {e, k});
      try {
        r.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      p.cells.push_back(r);
    }
  p.trials = c.get_int("trials");
  p.slack = c.get_double("slack");
  p.mp_tol = c.get_double("mp_tolerance");
  p.max_inversions = c.get_int("max_inversions");
  p.threads = threads_of(c);
  require(p.trials >= 1, "trials must be >= 1");
  require(p.slack >= 0.0, "slack must be >= 0");
  require(p.mp_tol > 0.0, "mp_tolerance must be > 0");
  require(p.max_inversions >= 0, "max_inversions must be >= 0");
  return p;
}

CommandOutput run_ridge(const RidgeParams& p) {
  CommandOutput out;
  out.csv.header = {"d_w", "gamma", "n_ratio", "eta0", "trial", "misfit", "bound", "h", "mp_integral"};
  out.report.rows.header = {"d_w", "gamma", "n_ratio", "eta0", "trials", "mean_misfit", "std_error", "bound",
                            "h", "mp_integral", "mp_delta", "misfit_over_bound", "dw_misfit_over_bound", "retried"};
  double worst_ratio = 0.0, worst_mp = 0.0;
  std::map<double, std::vector<std::pair<double, double>>> by_eta;
  for (const auto& cell : p.cells) {
    const auto est = simulate_misfit(cell, p.trials, p.threads);
    const double h = h_closed_form(cell.eta0, cell.gamma);
    const double mp = mp_integral(cell.eta0, cell.gamma);
    for (int t = 0; t < est.trials; ++t)
      out.csv.add({std::int64_t{cell.d_w}, cell.gamma, cell.n_ratio, cell.eta0, std::int64_t{t},
                   est.per_trial[static_cast<std::size_t>(t)], est.bound, h, mp});
    const double ratio = est.empirical_misfit / est.bound;
    out.report.rows.add({std::int64_t{cell.d_w}, cell.gamma, cell.n_ratio, cell.eta0, std::int64_t{est.trials},
                         est.empirical_misfit, est.std_error, est.bound, h, mp, std::abs(mp - h), ratio,
                         ratio * cell.d_w, std::int64_t{est.retried}});
    worst_ratio = std::max(worst_ratio, ratio);
    worst_mp = std::max(worst_mp, std::abs(mp - h));
    by_eta[cell.eta0].emplace_back(cell.gamma, est.empirical_misfit);
  }
  auto& v = out.report.verdicts;
  v.push_back(max_verdict("misfit_within_bound", worst_ratio, 1.0 + p.slack, "misfit / (B h)"));
  v.push_back(max_verdict("mp_matches_closed_form", worst_mp, p.mp_tol, "|mp_integral - h|"));
  const double spot = 1.0 / std::sqrt(2.0) - 0.5;
  v.push_back(max_verdict("h_spot_value", std::max(std::abs(h_closed_form(1, 2) - spot), std::abs(mp_integral(1, 2) - spot)),
                          p.mp_tol, "|h(1,2) - (1/sqrt2 - 1/2)|"));
  int worst_inv = 0;
  for (auto& [eta0, pts] : by_eta) {
    std::sort(pts.begin(), pts.end());
    int inv = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) inv += !(pts[i].second < pts[i - 1].second);
    worst_inv = std::max(worst_inv, inv);
  }
  v.push_back({"misfit_decreases_in_gamma", worst_inv <= p.max_inversions,
               "worst inversions per eta0 " + std::to_string(worst_inv) + " (allowed " +
                   std::to_string(p.max_inversions) + ")"});
  return out;
}

// ---------------------------------------------------------------------------
// classify / bias-variance shared parsing

struct TrainingParams {
  TaskConfig task;
  PipelineConfig pipeline;
  unsigned threads;
};

TrainingParams parse_training(const ExperimentConfig& c) {
  TrainingParams p;
  p.task.d = c.get_int("d");
  p.task.separation = c.get_double("separation");
  p.task.noise = c.get_double("noise");
  p.task.n_train = c.get_int("n_train");
  p.task.n_pseudo = c.get_int("n_pseudo");
  p.task.n_test = c.get_int("n_test");
  p.task.seed = c.get_uint64("seed");
  TrainConfig t;
  t.learning_rate = c.get_double("lr");
  t.steps = c.get_int("steps");
  t.batch_size = c.get_int("batch_size");
  p.pipeline.teacher = t;
  p.pipeline.student = t;
  p.pipeline.student_width = c.get_int("student_width");
  p.pipeline.student_init_scale = c.get_double("init_scale");
  p.pipeline.distillation = c.get_bool("distillation");
  const auto& act = c.get_string("student_activation");
  require(act == "tanh" || act == "identity", "student_activation must be tanh or identity");
  p.pipeline.student_activation = act == "tanh" ? Activation::Tanh : Activation::Identity;
  p.threads = threads_of(c);
  return p;
}

template <typename F>
auto as_config_error(F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

// ---------------------------------------------------------------------------
// classify

struct ClassifyParams {
  TrainingParams train;
  std::vector<LossKind> losses;
  std::vector<double> alphas;
  int repeats;
  double flat_tol, drop, risk_alpha;
  int max_inversions, risk_repeats;
  bool risk_check;
};

ClassifyParams parse_classify(const ExperimentConfig& c) {
  ClassifyParams p;
  p.train = parse_training(c);
  auto& composite = p.train.pipeline.student.composite;
  composite.cace_quantile = c.get_double("cace_quantile");
  composite.sl_lambda1 = c.get_double("sl_lambda1");
  composite.sl_lambda2 = c.get_double("sl_lambda2");
  composite.aux_beta_max = c.get_double("aux_beta_max");
  composite.aux_warmup = c.get_double("aux_warmup");
  for (const auto& name : c.get_strings("losses")) p.losses.push_back(as_config_error([&] { return parse_loss(name); }));
  p.alphas = c.get_doubles("alphas");
  p.repeats = c.get_int("repeats");
  p.flat_tol = c.get_double("flat_tolerance");
  p.drop = c.get_double("drop_threshold");
  p.max_inversions = c.get_int("max_inversions");
  p.risk_check = c.get_bool("risk_check");
  p.risk_alpha = c.get_double("risk_alpha");
  p.risk_repeats = c.get_int("risk_repeats");
  require(!p.losses.empty(), "losses must be non-empty");
  require(!p.alphas.empty(), "alphas must be non-empty");
  for (double a : p.alphas) require(a >= 0.0 && a <= 1.0, "alphas must lie in [0, 1]");
  require(p.repeats >= 1, "repeats must be >= 1");
  require(p.risk_alpha >= 0.0 && p.risk_alpha <= 1.0, "risk_alpha must lie in [0, 1]");
  require(p.risk_repeats >= 2, "risk_repeats must be >= 2");
  require(p.max_inversions >= 0, "max_inversions must be >= 0");
  as_config_error([&] {
    p.train.task.validate();
    p.train.pipeline.validate();
    return 0;
  });
  return p;
}

bool contains(const std::vector<double>& v, double x) { return std::find(v.begin(), v.end(), x) != v.end(); }
bool contains(const std::vector<LossKind>& v, LossKind x) { return std::find(v.begin(), v.end(), x) != v.end(); }

CommandOutput run_classify(const ClassifyParams& p) {
  CommandOutput out;
  const auto sweep = alpha_sweep(p.train.task, p.train.pipeline, p.losses, p.alphas, p.repeats, p.train.threads);
  out.csv.header = {"loss", "alpha", "repeat", "teacher_acc", "student_acc", "param_distance", "mean_gdv"};
  out.report.rows.header = {"sweep", "loss", "alpha", "repeat", "teacher_acc", "student_acc", "param_distance",
                            "mean_gdv"};
  auto emit = [&](const SweepResult& s, const std::string& name, bool to_csv) {
    for (const auto& r : s.rows) {
      if (to_csv)
        out.csv.add({to_string(r.loss), r.alpha, std::int64_t{r.repeat}, r.teacher_acc, r.student_acc,
                     r.param_distance, r.mean_gdv});
      out.report.rows.add({name, to_string(r.loss), r.alpha, std::int64_t{r.repeat}, r.teacher_acc, r.student_acc,
                           r.param_distance, r.mean_gdv});
    }
  };
  emit(sweep, "alpha", true);
  auto& v = out.report.verdicts;
  const bool has_ce = contains(p.losses, LossKind::CE), has_rce = contains(p.losses, LossKind::RCE);

  if (has_rce) {
    std::vector<double> accs;
    for (double a : p.alphas)
      if (a >= 0.001) accs.push_back(sweep.cell(LossKind::RCE, a).mean_acc);
    if (accs.size() >= 2) {
      const auto [lo, hi] = std::minmax_element(accs.begin(), accs.end());
      v.push_back(max_verdict("rce_flat_across_alpha", *hi - *lo, p.flat_tol, "RCE accuracy range over alpha >= 0.001"));
    }
  }
  if (has_ce && contains(p.alphas, 0.01) && contains(p.alphas, 1.0)) {
    const double drop = sweep.cell(LossKind::CE, 1.0).mean_acc - sweep.cell(LossKind::CE, 0.01).mean_acc;
    v.push_back(min_verdict("ce_degrades_at_small_alpha", drop, p.drop, "CE accuracy(alpha 1) - accuracy(alpha 0.01)"));
  }
  if (has_ce && p.alphas.size() >= 3) {
    std::vector<double> sorted = p.alphas;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    int inv = 0;
    for (std::size_t i = 1; i < sorted.size(); ++i)
      inv += sweep.cell(LossKind::CE, sorted[i]).mean_acc < sweep.cell(LossKind::CE, sorted[i - 1]).mean_acc;
    v.push_back({"ce_monotone_in_alpha", inv <= p.max_inversions,
                 "inversions " + std::to_string(inv) + " (allowed " + std::to_string(p.max_inversions) + ")"});
  }
  if (has_ce && has_rce && contains(p.alphas, 1.0)) {
    int wins = 0;
    for (int r = 0; r < p.repeats; ++r) {
      double ce_d = 0.0, rce_d = 0.0;
      for (const auto& row : sweep.rows)
        if (row.repeat == r && row.alpha == 1.0) (row.loss == LossKind::CE ? ce_d : rce_d) = row.param_distance;
      wins += rce_d >= ce_d;
    }
    v.push_back({"rce_moves_farther", 2 * wins > p.repeats,
                 "RCE distance >= CE distance in " + std::to_string(wins) + " of " + std::to_string(p.repeats) +
                     " repeats"});
  }
  if (has_rce && p.risk_check) {
    const auto risk = alpha_sweep(p.train.task, p.train.pipeline, {LossKind::RCE}, {p.risk_alpha, 1.0},
                                  p.risk_repeats, p.train.threads);
    emit(risk, "risk", false);
    const auto& a = risk.cell(LossKind::RCE, p.risk_alpha);
    const auto& b = risk.cell(LossKind::RCE, 1.0);
    const double pooled = std::sqrt(0.5 * (a.std_acc * a.std_acc + b.std_acc * b.std_acc));
    const double diff = std::abs(a.mean_acc - b.mean_acc);
    v.push_back({"rce_risk_invariant_to_smoothing", diff <= 2.0 * pooled,
                 "|risk(alpha " + fmt(p.risk_alpha) + ") - risk(alpha 1)| = " + fmt(diff) + " vs 2 sd = " +
                     fmt(2.0 * pooled)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// bias-variance

struct BiasVarianceParams {
  BiasVarianceConfig base;
  int repeats;
  double tol;
  unsigned threads;
};

BiasVarianceParams parse_bias_variance(const ExperimentConfig& c) {
  BiasVarianceParams p;
  const auto t = parse_training(c);
  p.base.task = t.task;
  p.base.pipeline = t.pipeline;
  p.base.k = c.get_int("k");
  p.base.N = c.get_int("N");
  p.base.test_points = c.get_int("test_points");
  p.base.seed = c.get_uint64("seed");
  p.repeats = c.get_int("repeats");
  p.tol = c.get_double("tolerance");
  p.threads = t.threads;
  require(p.repeats >= 1, "repeats must be >= 1");
  require(p.tol >= 0.0, "tolerance must be >= 0");
  as_config_error([&] {
    p.base.validate();
    return 0;
  });
  return p;
}

CommandOutput run_bias_variance(const BiasVarianceParams& p) {
  CommandOutput out;
  out.csv.header = {"repeat", "point", "label", "teacher_bias", "teacher_variance", "teacher_risk",
                    "student_bias", "student_variance", "student_risk", "ensemble_bias", "ensemble_variance",
                    "ensemble_risk", "identity_error"};
  double worst = 0.0;
  int majority = 0;
  std::string rates;
  for (int r = 0; r < p.repeats; ++r) {
    BiasVarianceConfig cfg = p.base;
    cfg.seed = derive_seed(p.base.seed, {static_cast<std::uint64_t>(r)});
    const auto res = bias_variance_experiment(cfg, p.threads);
    for (const auto& pt : res.points) {
      const double err = std::max(
          {pt.teacher.identity_error, pt.student.identity_error, pt.ensemble_student.identity_error});
      worst = std::max(worst, err);
      out.csv.add({std::int64_t{r}, std::int64_t{pt.point}, std::int64_t{pt.label}, pt.teacher.bias,
                   pt.teacher.variance, pt.teacher.mean_ce, pt.student.bias, pt.student.variance, pt.student.mean_ce,
                   pt.ensemble_student.bias, pt.ensemble_student.variance, pt.ensemble_student.mean_ce, err});
    }
    const double rate = res.ensemble_variance_win_rate();
    majority += rate > 0.5;
    rates += (r ? ", " : "") + fmt(rate);
  }
  out.report.rows = out.csv;
  auto& v = out.report.verdicts;
  v.push_back(max_verdict("bias_variance_identity", worst, p.tol, "|bias + variance + H(truth) - mean CE|"));
  v.push_back({"ensemble_reduces_variance", majority == p.repeats,
               "fraction of test points with lower ensemble-student variance per repeat: " + rates});
  return out;
}

}  // namespace

const Schema& command_schema(const std::string& command) {
  static const std::map<std::string, Schema> schemas = [] {
    std::map<std::string, Schema> m;
    for (const auto& c : command_names()) m[c] = build_schema(c);
    return m;
  }();
  const auto it = schemas.find(command);
  if (it == schemas.end()) throw std::invalid_argument("unknown command '" + command + "'");
  return it->second;
}

CommandOutput run_command(const std::string& command, const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  CommandOutput out;
  if (command == "verify") {
    out = run_verify(parse_verify(cfg));
  } else if (command == "ridge") {
    out = run_ridge(parse_ridge(cfg));
  } else if (command == "classify") {
    out = run_classify(parse_classify(cfg));
  } else if (command == "bias-variance") {
    out = run_bias_variance(parse_bias_variance(cfg));
  } else {
    throw std::invalid_argument("unknown command '" + command + "'");
  }
  out.report.command = command;
  out.report.config = config_json(cfg);
  out.report.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace w2slab
