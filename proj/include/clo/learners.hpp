#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "clo/features.hpp"
#include "clo/grid.hpp"
#include "clo/nuisance.hpp"
#include "clo/scores.hpp"
#include "clo/simulator.hpp"

namespace clo {

struct SgdConfig {
  int iterations = 1000;
  int batch = 10;
  double step = 0.1;  // step at t is step / sqrt(t)
};

// {0, 0.001, 0.01} plus 10 points spread uniformly on the log scale over
// [0.1, 100].
std::vector<double> standard_penalty_grid();

struct SpoPlusConfig {
  SgdConfig sgd;
  std::vector<double> penalty_grid = standard_penalty_grid();
  bool halve_chosen_penalty = true;
};

// Nuisance estimation knobs shared by the surrogate learners.
struct NuisanceConfig {
  FeatureSpec spec = FeatureSpec::WellSpecified;
  double ridge_lambda = 1.0;
  PropensityKind propensity = PropensityKind::EmpiricalFrequency;
  int tree_depth = 3;
  int tree_min_leaf = 20;
  InverseVariant inverse = InverseVariant::PInv;
  InverseParams inverse_params;
};

struct CrossFitPlan {
  int K = 0;
  std::vector<std::vector<int>> folds;  // ascending sample indices per fold
  std::vector<int> fold_of;             // fold index per sample
};

// Random partition into K near-equal folds; the remainder spreads one sample
// per fold.
CrossFitPlan split_folds(int n, int K, RandomStream& rng);

// A learned decision rule. LinearPlugin runs the path oracle on predicted
// edge costs; ActionIndex picks the coordinate argmin over per-path cost
// predictions and maps it to that path's incidence row.
struct PolicyArtifact {
  enum class Form { LinearPlugin, ActionIndex };

  Form form = Form::LinearPlugin;
  LinearHypothesis hypothesis;  // d x k for LinearPlugin, m x k for ActionIndex
  std::string method;
  double penalty = std::numeric_limits<double>::quiet_NaN();  // NaN when untuned
  bool sgd_objective_increased = false;
};

// Coordinate argmin with smallest-index tie-break.
int coordinate_argmin(const Eigen::VectorXd& v);

// Deterministic decision map. decide_edges writes the chosen path's ascending
// edge indices (the cheap form used in hot loops); decide returns incidence.
void decide_edges(const PolicyArtifact& artifact, const GridInstance& g,
                  const PathMatrix& paths, ShortestPathOracle& oracle,
                  const Eigen::Vector3d& x, std::vector<int>& edges);
Eigen::VectorXd decide(const PolicyArtifact& artifact, const GridInstance& g,
                       const PathMatrix& paths, const Eigen::Vector3d& x);

PolicyArtifact eto_learn(const BanditDataset& data, const PathMatrix& paths,
                         FeatureSpec spec_f, double ridge_lambda,
                         RidgeFitInfo* info = nullptr);

// SPO+ surrogate loss and its closed-form subgradient in W.
double spoplus_loss(const Eigen::VectorXd& fx, const Eigen::VectorXd& theta,
                    const GridInstance& g);
Eigen::MatrixXd spoplus_subgradient(const LinearHypothesis& h, const Eigen::Vector3d& x,
                                    const Eigen::VectorXd& theta, const GridInstance& g);

// Cross-fitted IERM through the SPO+ surrogate: two-fold nuisance fitting,
// score materialization, penalized SGD over the penalty grid, validation
// selection by the score-weighted decision cost (validation scores use
// nuisances fit on the full training data), and a final retrain at half the
// selected penalty.
PolicyArtifact ierm_spoplus_learn(const BanditDataset& train, const BanditDataset& validation,
                                  const GridInstance& g, const PathMatrix& paths,
                                  FeatureSpec spec_f, ScoreKind score,
                                  const NuisanceConfig& nuisance, const SpoPlusConfig& cfg,
                                  std::uint64_t seed, int folds = 2,
                                  std::ostream* warnings = nullptr);

enum class NaiveMethod { Eto, SpoDM, SpoIPW, SpoDR };

// Discrete-action baselines: the m paths are treated as unrelated actions.
// Per-action ridge regressions of C on phi(X) form the cost model, with a
// pooled regression imputed for actions never observed; NaiveETO plugs that
// model in directly, the SPO+ variants run the surrogate SGD over the simplex
// with scores from score_naive.
PolicyArtifact naive_learn(NaiveMethod kind, const BanditDataset& train,
                           const BanditDataset& validation, const PathMatrix& paths,
                           FeatureSpec spec_fn, const NuisanceConfig& nuisance,
                           const SpoPlusConfig& cfg, std::uint64_t seed,
                           std::ostream* warnings = nullptr);

// Artifact serialization: metadata lines, then the hypothesis text matrix.
void save_policy_artifact(const PolicyArtifact& artifact, const std::string& path);
PolicyArtifact load_policy_artifact(const std::string& path);

}  // namespace clo
