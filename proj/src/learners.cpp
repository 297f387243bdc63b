#include "clo/learners.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace clo {

std::vector<double> standard_penalty_grid() {
  std::vector<double> grid = {0.0, 0.001, 0.01};
  for (int i = 0; i < 10; ++i) {
    const double expo = -1.0 + 3.0 * static_cast<double>(i) / 9.0;
    grid.push_back(std::pow(10.0, expo));
  }
  return grid;
}

CrossFitPlan split_folds(int n, int K, RandomStream& rng) {
  if (K < 1) throw std::invalid_argument("split_folds: K must be positive");
  if (n < K) throw std::invalid_argument("split_folds: fewer samples than folds");
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  // Fisher-Yates with the project stream, so the plan is seed-deterministic.
  for (int i = n - 1; i > 0; --i) {
    const int j = rng.uniform_int(i + 1);
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  CrossFitPlan plan;
  plan.K = K;
  plan.folds.resize(static_cast<std::size_t>(K));
  plan.fold_of.assign(static_cast<std::size_t>(n), -1);
  const int base = n / K;
  const int extra = n % K;  // first `extra` folds take one more sample
  int pos = 0;
  for (int f = 0; f < K; ++f) {
    const int size = base + (f < extra ? 1 : 0);
    for (int s = 0; s < size; ++s) {
      const int i = perm[static_cast<std::size_t>(pos++)];
      plan.folds[static_cast<std::size_t>(f)].push_back(i);
      plan.fold_of[static_cast<std::size_t>(i)] = f;
    }
    std::sort(plan.folds[static_cast<std::size_t>(f)].begin(),
              plan.folds[static_cast<std::size_t>(f)].end());
  }
  return plan;
}

int coordinate_argmin(const Eigen::VectorXd& v) {
  if (v.size() == 0) throw std::invalid_argument("coordinate_argmin: empty vector");
  int best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v[i] < v[best]) best = static_cast<int>(i);
  }
  return best;
}

void decide_edges(const PolicyArtifact& artifact, const GridInstance& g,
                  const PathMatrix& paths, ShortestPathOracle& oracle,
                  const Eigen::Vector3d& x, std::vector<int>& edges) {
  const Eigen::VectorXd pred = artifact.hypothesis.predict(x);
  if (artifact.form == PolicyArtifact::Form::LinearPlugin) {
    if (pred.size() != g.num_edges()) {
      throw std::invalid_argument("decide: hypothesis does not predict edge costs");
    }
    oracle.solve(pred.data(), edges);
    return;
  }
  if (pred.size() != paths.num_paths()) {
    throw std::invalid_argument("decide: hypothesis does not predict per-path costs");
  }
  edges = paths.edge_lists[static_cast<std::size_t>(coordinate_argmin(pred))];
}

Eigen::VectorXd decide(const PolicyArtifact& artifact, const GridInstance& g,
                       const PathMatrix& paths, const Eigen::Vector3d& x) {
  ShortestPathOracle oracle(g);
  std::vector<int> edges;
  decide_edges(artifact, g, paths, oracle, x, edges);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(g.num_edges());
  for (int e : edges) z[e] = 1.0;
  return z;
}

PolicyArtifact eto_learn(const BanditDataset& data, const PathMatrix& paths,
                         FeatureSpec spec_f, double ridge_lambda, RidgeFitInfo* info) {
  PolicyArtifact artifact;
  artifact.form = PolicyArtifact::Form::LinearPlugin;
  artifact.hypothesis = fit_bandit_ridge(data, paths, spec_f, ridge_lambda, info);
  artifact.method = "eto";
  return artifact;
}

double spoplus_loss(const Eigen::VectorXd& fx, const Eigen::VectorXd& theta,
                    const GridInstance& g) {
  ShortestPathOracle oracle(g);
  Eigen::VectorXd z_hat;
  Eigen::VectorXd z_star;
  // max over the polytope of (theta - 2 fx)^T z equals minus the min of the
  // negated cost, and the negated cost is 2 fx - theta.
  const double neg_max = oracle.solve(Eigen::VectorXd(2.0 * fx - theta), z_hat);
  oracle.solve(theta, z_star);
  return -neg_max - (theta - 2.0 * fx).dot(z_star);
}

Eigen::MatrixXd spoplus_subgradient(const LinearHypothesis& h, const Eigen::Vector3d& x,
                                    const Eigen::VectorXd& theta, const GridInstance& g) {
  ShortestPathOracle oracle(g);
  const Eigen::VectorXd phi = feature_map(h.spec, x);
  const Eigen::VectorXd fx = h.W * phi;
  Eigen::VectorXd z_star;
  Eigen::VectorXd z_hat;
  oracle.solve(theta, z_star);
  oracle.solve(Eigen::VectorXd(2.0 * fx - theta), z_hat);
  return 2.0 * (z_star - z_hat) * phi.transpose();
}

namespace {

// Vertex-set argmin shared by the grid polytope and the naive simplex:
// returns the support (ascending coordinate indices) of the minimizing vertex.
class VertexOracle {
 public:
  virtual ~VertexOracle() = default;
  virtual void argmin(const double* cost, std::vector<int>& support) = 0;
};

class GridVertexOracle : public VertexOracle {
 public:
  explicit GridVertexOracle(const GridInstance& g) : oracle_(g) {}
  void argmin(const double* cost, std::vector<int>& support) override {
    oracle_.solve(cost, support);
  }

 private:
  ShortestPathOracle oracle_;
};

class SimplexVertexOracle : public VertexOracle {
 public:
  explicit SimplexVertexOracle(int m) : m_(m) {}
  void argmin(const double* cost, std::vector<int>& support) override {
    int best = 0;
    for (int i = 1; i < m_; ++i) {
      if (cost[i] < cost[best]) best = i;
    }
    support.assign(1, best);
  }

 private:
  int m_;
};

struct SgdProblem {
  // One row per sample; phis is n x k, thetas is n x D (D = edge count or m).
  Eigen::MatrixXd phis;
  Eigen::MatrixXd thetas;
  std::vector<std::vector<int>> theta_argmin;  // support of z*(theta_i)
  int dim = 0;                                 // D
  FeatureSpec spec = FeatureSpec::WellSpecified;
};

// Tail-averaged projected... plain penalized stochastic subgradient descent:
// W_{t+1} = W_t - gamma_t (batch mean subgradient + 2 lambda W_t), gamma_t =
// step / sqrt(t), averaging the iterates of the second half.
Eigen::MatrixXd run_spoplus_sgd(const SgdProblem& prob, double penalty,
                                const SgdConfig& cfg, VertexOracle& oracle,
                                RandomStream& rng) {
  const int n = static_cast<int>(prob.phis.rows());
  const int k = static_cast<int>(prob.phis.cols());
  const int D = prob.dim;
  if (n < 1) throw std::invalid_argument("spoplus sgd: no training scores");
  if (cfg.iterations < 1 || cfg.batch < 1) {
    throw std::invalid_argument("spoplus sgd: bad SGD configuration");
  }

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(D, k);
  Eigen::MatrixXd grad(D, k);
  Eigen::MatrixXd w_sum = Eigen::MatrixXd::Zero(D, k);
  Eigen::VectorXd cost(D);
  std::vector<int> support;
  const int tail_start = cfg.iterations / 2 + 1;  // iterates t in (T/2, T]
  int tail_count = 0;

  for (int t = 1; t <= cfg.iterations; ++t) {
    grad.setZero();
    for (int b = 0; b < cfg.batch; ++b) {
      const int i = rng.uniform_int(n);
      const auto phi = prob.phis.row(i);
      // cost = 2 W phi - theta_i, the argument of the second oracle call
      cost.noalias() = 2.0 * (w * phi.transpose());
      cost -= prob.thetas.row(i).transpose();
      oracle.argmin(cost.data(), support);
      for (int e : prob.theta_argmin[static_cast<std::size_t>(i)]) {
        grad.row(e) += 2.0 * phi;
      }
      for (int e : support) grad.row(e) -= 2.0 * phi;
    }
    const double gamma = cfg.step / std::sqrt(static_cast<double>(t));
    w *= (1.0 - 2.0 * gamma * penalty);
    w -= (gamma / static_cast<double>(cfg.batch)) * grad;
    if (t >= tail_start) {
      w_sum += w;
      ++tail_count;
    }
  }
  return w_sum / static_cast<double>(tail_count);
}

// Training objective (1/n) sum l_SPO+(W phi_i, theta_i) + penalty ||W||_F^2.
double spoplus_objective(const Eigen::MatrixXd& w, const SgdProblem& prob, double penalty,
                         VertexOracle& oracle) {
  const int n = static_cast<int>(prob.phis.rows());
  Eigen::VectorXd cost(prob.dim);
  std::vector<int> support;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto phi = prob.phis.row(i);
    const auto theta = prob.thetas.row(i);
    cost.noalias() = 2.0 * (w * phi.transpose());
    cost -= theta.transpose();
    oracle.argmin(cost.data(), support);
    double max_term = 0.0;  // (theta - 2 W phi)^T z_hat = -cost^T z_hat
    for (int e : support) max_term -= cost[e];
    double star_term = 0.0;  // (theta - 2 W phi)^T z*(theta)
    for (int e : prob.theta_argmin[static_cast<std::size_t>(i)]) star_term -= cost[e];
    total += max_term - star_term;
  }
  return total / static_cast<double>(n) + penalty * w.squaredNorm();
}

// Validation decision cost (1/n_v) sum theta_i^T pi_W(x_i).
double validation_cost(const Eigen::MatrixXd& w, const Eigen::MatrixXd& val_phis,
                       const Eigen::MatrixXd& val_thetas, VertexOracle& oracle) {
  const int n = static_cast<int>(val_phis.rows());
  Eigen::VectorXd cost(w.rows());
  std::vector<int> support;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    cost.noalias() = w * val_phis.row(i).transpose();
    oracle.argmin(cost.data(), support);
    for (int e : support) total += val_thetas(i, e);
  }
  return total / static_cast<double>(n);
}

double grid_median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return values[(values.size() - 1) / 2];
}

// Penalty sweep, validation selection, halving, final retrain. Shared by the
// linear-structure and naive SPO+ learners.
Eigen::MatrixXd tune_and_train(const SgdProblem& prob, const Eigen::MatrixXd& val_phis,
                               const Eigen::MatrixXd& val_thetas, const SpoPlusConfig& cfg,
                               VertexOracle& oracle, std::uint64_t seed,
                               double* chosen_penalty, bool* objective_increased,
                               std::ostream* warnings) {
  if (cfg.penalty_grid.empty()) {
    throw std::invalid_argument("spoplus: empty penalty grid");
  }
  bool increased = false;
  double chosen;
  if (val_phis.rows() == 0) {
    if (warnings) {
      *warnings << "warning: empty validation set; using penalty grid median\n";
    }
    chosen = grid_median(cfg.penalty_grid);
  } else {
    double best_cost = std::numeric_limits<double>::infinity();
    std::size_t best_idx = 0;
    for (std::size_t c = 0; c < cfg.penalty_grid.size(); ++c) {
      RandomStream rng(derive_seed(seed, "sgd_candidate", static_cast<std::uint64_t>(c)));
      const Eigen::MatrixXd w =
          run_spoplus_sgd(prob, cfg.penalty_grid[c], cfg.sgd, oracle, rng);
      if (spoplus_objective(w, prob, cfg.penalty_grid[c], oracle) >
          spoplus_objective(Eigen::MatrixXd::Zero(w.rows(), w.cols()), prob,
                            cfg.penalty_grid[c], oracle)) {
        increased = true;
      }
      const double cost = validation_cost(w, val_phis, val_thetas, oracle);
      if (cost < best_cost) {
        best_cost = cost;
        best_idx = c;
      }
    }
    chosen = cfg.penalty_grid[best_idx];
  }
  const double final_penalty = cfg.halve_chosen_penalty ? chosen / 2.0 : chosen;
  RandomStream rng(derive_seed(seed, "sgd_final"));
  const Eigen::MatrixXd w = run_spoplus_sgd(prob, final_penalty, cfg.sgd, oracle, rng);
  if (spoplus_objective(w, prob, final_penalty, oracle) >
      spoplus_objective(Eigen::MatrixXd::Zero(w.rows(), w.cols()), prob, final_penalty,
                        oracle)) {
    increased = true;
  }
  if (increased && warnings) {
    *warnings << "warning: SPO+ SGD objective increased over the zero start; "
                 "check the step size\n";
  }
  if (chosen_penalty) *chosen_penalty = final_penalty;
  if (objective_increased) *objective_increased = increased;
  return w;
}

Eigen::MatrixXd feature_rows(const BanditDataset& data, FeatureSpec spec) {
  const int k = feature_dim(spec);
  Eigen::MatrixXd phis(data.n(), k);
  double phi[8];
  for (int i = 0; i < data.n(); ++i) {
    const double x[3] = {data.X(i, 0), data.X(i, 1), data.X(i, 2)};
    feature_map(spec, x, phi);
    for (int j = 0; j < k; ++j) phis(i, j) = phi[j];
  }
  return phis;
}

struct LinearNuisances {
  LinearHypothesis f_hat;
  SigmaInversePack sigma_inv;  // empty pack when the score needs no Sigma
  bool has_sigma = false;
};

LinearNuisances fit_linear_nuisances(const BanditDataset& data, const PathMatrix& paths,
                                     ScoreKind score, const NuisanceConfig& nuisance) {
  LinearNuisances out;
  out.f_hat = fit_bandit_ridge(data, paths, nuisance.spec, nuisance.ridge_lambda);
  if (score_needs_sigma(score)) {
    const PropensityModel prop =
        fit_propensity(data, paths.num_paths(), nuisance.propensity, nuisance.tree_depth,
                       nuisance.tree_min_leaf);
    out.sigma_inv = materialize_sigma_inverses(prop, paths, nuisance.inverse,
                                               nuisance.inverse_params);
    out.has_sigma = true;
  }
  return out;
}

// theta_i for every sample of `data`, scored with the given nuisances. The
// linear scores only touch Sigma^+ through Sigma^+ z, computed via the path's
// edge list.
Eigen::MatrixXd linear_score_rows(const BanditDataset& data, const PathMatrix& paths,
                                  ScoreKind score, const LinearNuisances& nuis) {
  const int d = static_cast<int>(paths.incidence.cols());
  Eigen::MatrixXd thetas(data.n(), d);
  Eigen::VectorXd fx(d);
  Eigen::VectorXd sz(d);
  for (int i = 0; i < data.n(); ++i) {
    const Eigen::Vector3d x = data.X.row(i).transpose();
    const std::vector<int>& edges =
        paths.edge_lists[static_cast<std::size_t>(data.Z[static_cast<std::size_t>(i)])];
    fx = nuis.f_hat.predict(x);
    switch (score) {
      case ScoreKind::DM:
        thetas.row(i) = fx.transpose();
        break;
      case ScoreKind::ISW: {
        const Eigen::MatrixXd& si = nuis.sigma_inv.at(x);
        sz.setZero();
        for (int e : edges) sz += si.col(e);
        thetas.row(i) = (data.C[i] * sz).transpose();
        break;
      }
      case ScoreKind::DR: {
        const Eigen::MatrixXd& si = nuis.sigma_inv.at(x);
        double resid = data.C[i];
        for (int e : edges) resid -= fx[e];
        sz.setZero();
        for (int e : edges) sz += si.col(e);
        thetas.row(i) = (fx + resid * sz).transpose();
        break;
      }
      default:
        throw std::invalid_argument("linear_score_rows: naive score kind");
    }
  }
  return thetas;
}

void precompute_theta_argmin(SgdProblem& prob, VertexOracle& oracle) {
  const int n = static_cast<int>(prob.thetas.rows());
  prob.theta_argmin.resize(static_cast<std::size_t>(n));
  Eigen::VectorXd theta(prob.dim);
  for (int i = 0; i < n; ++i) {
    theta = prob.thetas.row(i).transpose();
    oracle.argmin(theta.data(), prob.theta_argmin[static_cast<std::size_t>(i)]);
  }
}

}  // namespace

PolicyArtifact ierm_spoplus_learn(const BanditDataset& train, const BanditDataset& validation,
                                  const GridInstance& g, const PathMatrix& paths,
                                  FeatureSpec spec_f, ScoreKind score,
                                  const NuisanceConfig& nuisance, const SpoPlusConfig& cfg,
                                  std::uint64_t seed, int folds, std::ostream* warnings) {
  if (score_is_naive(score)) {
    throw std::invalid_argument("ierm_spoplus_learn: use naive_learn for naive scores");
  }
  const int n = train.n();
  RandomStream fold_rng(derive_seed(seed, "folds"));
  const CrossFitPlan plan = split_folds(n, folds, fold_rng);

  // Complement-fitted nuisances; fold bookkeeping is checked explicitly so a
  // regression here trips loudly rather than leaking samples across folds.
  std::vector<LinearNuisances> per_fold;
  per_fold.reserve(static_cast<std::size_t>(folds));
  for (int f = 0; f < folds; ++f) {
    std::vector<int> complement;
    complement.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      if (plan.fold_of[static_cast<std::size_t>(i)] != f) complement.push_back(i);
    }
    for (int i : plan.folds[static_cast<std::size_t>(f)]) {
      if (std::binary_search(complement.begin(), complement.end(), i)) {
        throw std::logic_error("cross-fit hygiene violation: fold sample in complement");
      }
    }
    if (complement.empty()) {
      throw std::invalid_argument("ierm_spoplus_learn: a fold complement is empty");
    }
    per_fold.push_back(fit_linear_nuisances(train.subset(complement), paths, score, nuisance));
  }

  SgdProblem prob;
  prob.dim = g.num_edges();
  prob.spec = spec_f;
  prob.phis = feature_rows(train, spec_f);
  prob.thetas.resize(n, prob.dim);
  {
    Eigen::VectorXd fx(prob.dim);
    Eigen::VectorXd sz(prob.dim);
    for (int i = 0; i < n; ++i) {
      const LinearNuisances& nuis =
          per_fold[static_cast<std::size_t>(plan.fold_of[static_cast<std::size_t>(i)])];
      const Eigen::Vector3d x = train.X.row(i).transpose();
      const std::vector<int>& edges =
          paths.edge_lists[static_cast<std::size_t>(train.Z[static_cast<std::size_t>(i)])];
      fx = nuis.f_hat.predict(x);
      switch (score) {
        case ScoreKind::DM:
          prob.thetas.row(i) = fx.transpose();
          break;
        case ScoreKind::ISW: {
          const Eigen::MatrixXd& si = nuis.sigma_inv.at(x);
          sz.setZero();
          for (int e : edges) sz += si.col(e);
          prob.thetas.row(i) = (train.C[i] * sz).transpose();
          break;
        }
        case ScoreKind::DR: {
          const Eigen::MatrixXd& si = nuis.sigma_inv.at(x);
          double resid = train.C[i];
          for (int e : edges) resid -= fx[e];
          sz.setZero();
          for (int e : edges) sz += si.col(e);
          prob.thetas.row(i) = (fx + resid * sz).transpose();
          break;
        }
        default:
          throw std::logic_error("unexpected score kind");
      }
    }
  }
  GridVertexOracle oracle(g);
  precompute_theta_argmin(prob, oracle);

  // Validation scores come from nuisances fit on the full training data.
  Eigen::MatrixXd val_phis(0, feature_dim(spec_f));
  Eigen::MatrixXd val_thetas(0, prob.dim);
  if (validation.n() > 0) {
    const LinearNuisances full = fit_linear_nuisances(train, paths, score, nuisance);
    val_phis = feature_rows(validation, spec_f);
    val_thetas = linear_score_rows(validation, paths, score, full);
  }

  PolicyArtifact artifact;
  artifact.form = PolicyArtifact::Form::LinearPlugin;
  artifact.hypothesis.spec = spec_f;
  artifact.hypothesis.W = tune_and_train(prob, val_phis, val_thetas, cfg, oracle, seed,
                                         &artifact.penalty,
                                         &artifact.sgd_objective_increased, warnings);
  artifact.method = std::string("spo_") + score_kind_name(score);
  return artifact;
}

PolicyArtifact naive_learn(NaiveMethod kind, const BanditDataset& train,
                           const BanditDataset& validation, const PathMatrix& paths,
                           FeatureSpec spec_fn, const NuisanceConfig& nuisance,
                           const SpoPlusConfig& cfg, std::uint64_t seed,
                           std::ostream* warnings) {
  const int n = train.n();
  if (n < 1) throw std::invalid_argument("naive_learn: empty dataset");
  const int m = paths.num_paths();
  const int k = feature_dim(spec_fn);

  // Per-action cost regressions with pooled imputation for unseen actions.
  const Eigen::MatrixXd phis = feature_rows(train, spec_fn);
  const Eigen::VectorXd pooled = ridge_regression(phis, train.C, nuisance.ridge_lambda);
  LinearHypothesis f_tilde;
  f_tilde.spec = spec_fn;
  f_tilde.W.resize(m, k);
  std::vector<std::vector<int>> rows_of(static_cast<std::size_t>(m));
  for (int i = 0; i < n; ++i) {
    rows_of[static_cast<std::size_t>(train.Z[static_cast<std::size_t>(i)])].push_back(i);
  }
  for (int j = 0; j < m; ++j) {
    const std::vector<int>& rows = rows_of[static_cast<std::size_t>(j)];
    if (rows.empty()) {
      f_tilde.W.row(j) = pooled.transpose();
      continue;
    }
    Eigen::MatrixXd sub_phi(static_cast<Eigen::Index>(rows.size()), k);
    Eigen::VectorXd sub_c(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      sub_phi.row(static_cast<Eigen::Index>(r)) = phis.row(rows[r]);
      sub_c[static_cast<Eigen::Index>(r)] = train.C[rows[r]];
    }
    f_tilde.W.row(j) =
        ridge_regression(sub_phi, sub_c, nuisance.ridge_lambda).transpose();
  }

  if (kind == NaiveMethod::Eto) {
    PolicyArtifact artifact;
    artifact.form = PolicyArtifact::Form::ActionIndex;
    artifact.hypothesis = std::move(f_tilde);
    artifact.method = "naive_eto";
    return artifact;
  }

  const ScoreKind score = kind == NaiveMethod::SpoDM    ? ScoreKind::NaiveDM
                          : kind == NaiveMethod::SpoIPW ? ScoreKind::NaiveIPW
                                                        : ScoreKind::NaiveDR;
  // The naive nuisances are fit once on the full training data; the observed
  // action of every training sample then has positive estimated propensity by
  // construction (its own leaf contains it).
  PropensityModel prop;
  if (score_needs_propensity(score)) {
    prop = fit_propensity(train, m, nuisance.propensity, nuisance.tree_depth,
                          nuisance.tree_min_leaf);
  }

  auto naive_theta = [&](const BanditDataset& data, int i) {
    const Eigen::Vector3d x = data.X.row(i).transpose();
    const int action = data.Z[static_cast<std::size_t>(i)];
    const double e_hat =
        score_needs_propensity(score) ? prop.prob(x, action) : 1.0;
    return score_naive(score, action, data.C[i], f_tilde.predict(x), e_hat);
  };

  SgdProblem prob;
  prob.dim = m;
  prob.spec = spec_fn;
  prob.phis = phis;
  prob.thetas.resize(n, m);
  for (int i = 0; i < n; ++i) prob.thetas.row(i) = naive_theta(train, i).transpose();
  SimplexVertexOracle oracle(m);
  precompute_theta_argmin(prob, oracle);

  Eigen::MatrixXd val_phis(0, k);
  Eigen::MatrixXd val_thetas(0, m);
  if (validation.n() > 0) {
    val_phis = feature_rows(validation, spec_fn);
    val_thetas.resize(validation.n(), m);
    for (int i = 0; i < validation.n(); ++i) {
      val_thetas.row(i) = naive_theta(validation, i).transpose();
    }
  }

  PolicyArtifact artifact;
  artifact.form = PolicyArtifact::Form::ActionIndex;
  artifact.hypothesis.spec = spec_fn;
  artifact.hypothesis.W = tune_and_train(prob, val_phis, val_thetas, cfg, oracle, seed,
                                         &artifact.penalty,
                                         &artifact.sgd_objective_increased, warnings);
  artifact.method = std::string("naive_spo_") +
                    (kind == NaiveMethod::SpoDM ? "dm"
                     : kind == NaiveMethod::SpoIPW ? "ipw"
                                                   : "dr");
  return artifact;
}

void save_policy_artifact(const PolicyArtifact& artifact, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_policy_artifact: cannot open " + path);
  out << "method " << artifact.method << "\n";
  out << "form "
      << (artifact.form == PolicyArtifact::Form::LinearPlugin ? "linear" : "action")
      << "\n";
  if (std::isnan(artifact.penalty)) {
    out << "penalty none\n";
  } else {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", artifact.penalty);
    out << "penalty " << buf << "\n";
  }
  write_hypothesis(out, artifact.hypothesis);
  if (!out) throw std::runtime_error("save_policy_artifact: write failed for " + path);
}

PolicyArtifact load_policy_artifact(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_policy_artifact: cannot open " + path);
  PolicyArtifact artifact;
  std::string key;
  std::string value;
  for (int line = 0; line < 3; ++line) {
    if (!(in >> key >> value)) {
      throw std::runtime_error("load_policy_artifact: truncated metadata");
    }
    if (key == "method") {
      artifact.method = value;
    } else if (key == "form") {
      if (value == "linear") artifact.form = PolicyArtifact::Form::LinearPlugin;
      else if (value == "action") artifact.form = PolicyArtifact::Form::ActionIndex;
      else throw std::runtime_error("load_policy_artifact: bad form '" + value + "'");
    } else if (key == "penalty") {
      artifact.penalty = value == "none" ? std::numeric_limits<double>::quiet_NaN()
                                         : std::stod(value);
    } else {
      throw std::runtime_error("load_policy_artifact: unexpected key '" + key + "'");
    }
  }
  in.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
  artifact.hypothesis = read_hypothesis(in);
  return artifact;
}

}  // namespace clo
