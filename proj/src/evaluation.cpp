#include "clo/evaluation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "clo/nuisance.hpp"
#include "clo/rng.hpp"

namespace clo {

double true_value(const GroundTruth& gt, const PolicyArtifact& policy,
                  const GridInstance& g, const PathMatrix& paths,
                  const Eigen::MatrixXd& test_X) {
  if (test_X.rows() < 1 || test_X.cols() != 3) {
    throw std::invalid_argument("true_value: test covariates must be n x 3");
  }
  ShortestPathOracle oracle(g);
  std::vector<int> edges;
  Eigen::VectorXd f0x(g.num_edges());
  double phi[8];
  double total = 0.0;
  for (Eigen::Index i = 0; i < test_X.rows(); ++i) {
    const Eigen::Vector3d x = test_X.row(i).transpose();
    decide_edges(policy, g, paths, oracle, x, edges);
    const double xr[3] = {x[0], x[1], x[2]};
    feature_map(FeatureSpec::WellSpecified, xr, phi);
    gt.f0_into(phi, f0x.data());
    for (int e : edges) total += f0x[e];
  }
  return total / static_cast<double>(test_X.rows());
}

double oracle_value(const GroundTruth& gt, const GridInstance& g,
                    const Eigen::MatrixXd& test_X) {
  if (test_X.rows() < 1 || test_X.cols() != 3) {
    throw std::invalid_argument("oracle_value: test covariates must be n x 3");
  }
  ShortestPathOracle oracle(g);
  std::vector<int> edges;
  Eigen::VectorXd f0x(g.num_edges());
  double phi[8];
  double total = 0.0;
  for (Eigen::Index i = 0; i < test_X.rows(); ++i) {
    const double xr[3] = {test_X(i, 0), test_X(i, 1), test_X(i, 2)};
    feature_map(FeatureSpec::WellSpecified, xr, phi);
    gt.f0_into(phi, f0x.data());
    total += oracle.solve(f0x.data(), edges);
  }
  return total / static_cast<double>(test_X.rows());
}

double relative_regret(const GroundTruth& gt, const PolicyArtifact& policy,
                       const GridInstance& g, const PathMatrix& paths,
                       const Eigen::MatrixXd& test_X) {
  const double v = true_value(gt, policy, g, paths, test_X);
  const double v_star = oracle_value(gt, g, test_X);
  return (v - v_star) / v_star;
}

EvalReport evaluate_policy(const GroundTruth& gt, const PolicyArtifact& policy,
                           const GridInstance& g, const PathMatrix& paths,
                           const Eigen::MatrixXd& test_X) {
  EvalReport report;
  report.policy = policy.method;
  report.value = true_value(gt, policy, g, paths, test_X);
  report.optimal_value = oracle_value(gt, g, test_X);
  report.rel_regret = (report.value - report.optimal_value) / report.optimal_value;
  report.n_test = static_cast<int>(test_X.rows());
  return report;
}

const char* nuisance_mode_name(NuisanceMode mode) {
  switch (mode) {
    case NuisanceMode::TrueNuisances: return "true";
    case NuisanceMode::PerturbedF: return "perturbed_f";
    case NuisanceMode::WrongSigma: return "wrong_sigma";
  }
  throw std::logic_error("nuisance_mode_name: unknown mode");
}

NuisanceMode parse_nuisance_mode(const std::string& name) {
  if (name == "true") return NuisanceMode::TrueNuisances;
  if (name == "perturbed_f") return NuisanceMode::PerturbedF;
  if (name == "wrong_sigma") return NuisanceMode::WrongSigma;
  throw std::invalid_argument("parse_nuisance_mode: unknown mode '" + name + "'");
}

namespace {

// Fixed span-direction perturbation: 0.5 times the unit vector along the mean
// decision of the optimal policy over a pilot covariate sample. Being a scaled
// convex combination of path vertices it lies in the span the scores can see,
// and it correlates positively with the optimal policy's decisions.
Eigen::VectorXd span_perturbation(const GroundTruth& gt, const GridInstance& g,
                                  std::uint64_t seed) {
  RandomStream pilot(derive_seed(seed, "audit_pilot"));
  ShortestPathOracle oracle(g);
  std::vector<int> edges;
  Eigen::VectorXd f0x(g.num_edges());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(g.num_edges());
  double phi[8];
  const int pilot_n = 512;
  for (int i = 0; i < pilot_n; ++i) {
    const double xr[3] = {pilot.normal(), pilot.normal(), pilot.normal()};
    feature_map(FeatureSpec::WellSpecified, xr, phi);
    gt.f0_into(phi, f0x.data());
    oracle.solve(f0x.data(), edges);
    for (int e : edges) mean[e] += 1.0;
  }
  mean /= static_cast<double>(pilot_n);
  const double norm = mean.norm();
  if (norm <= 0.0) throw std::logic_error("span_perturbation: degenerate pilot mean");
  return 0.5 * mean / norm;
}

}  // namespace

AuditResult mc_unbiasedness_audit(ScoreKind score, NuisanceMode mode,
                                  const PolicyArtifact& policy, const GroundTruth& gt,
                                  const LoggingPolicy& logging, const GridInstance& g,
                                  const PathMatrix& paths, long long N,
                                  std::uint64_t seed) {
  if (N < 2) throw std::invalid_argument("mc_unbiasedness_audit: need at least 2 draws");
  const int d = g.num_edges();
  const int m = paths.num_paths();
  const bool naive = score_is_naive(score);
  if (naive && policy.form != PolicyArtifact::Form::ActionIndex) {
    throw std::invalid_argument("mc_unbiasedness_audit: naive scores audit action policies");
  }

  // Cost-model nuisance: exact, or shifted by the fixed span perturbation.
  Eigen::MatrixXd what = gt.W;
  if (mode == NuisanceMode::PerturbedF) {
    what.col(0) += span_perturbation(gt, g, seed);
  }

  // Moment-matrix nuisance per logging profile, exactly pseudo-inverted; the
  // wrong-Sigma mode swaps in the moments of an unrelated ramp-weight policy.
  std::vector<Eigen::MatrixXd> sigma_inv;
  if (score_needs_sigma(score)) {
    InverseParams params;
    if (mode == NuisanceMode::WrongSigma) {
      Eigen::VectorXd ramp(m);
      for (int j = 0; j < m; ++j) ramp[j] = static_cast<double>(j + 1);
      ramp /= ramp.sum();
      sigma_inv.push_back(regularized_inverse(sigma_from_probs(ramp, paths),
                                              InverseVariant::PInv, params));
    } else {
      for (int p = 0; p < logging.num_profiles(); ++p) {
        sigma_inv.push_back(regularized_inverse(
            sigma_from_probs(logging.profile_probs(p), paths), InverseVariant::PInv,
            params));
      }
    }
  }

  RandomStream xs(derive_seed(seed, "audit_x"));
  RandomStream noise(derive_seed(seed, "audit_noise"));
  RandomStream log_rng(derive_seed(seed, "audit_logging"));
  ShortestPathOracle oracle(g);
  std::vector<int> pi_edges;
  Eigen::VectorXd f0x(d);
  Eigen::VectorXd fhat_x(d);
  double phi[8];

  double sum_est = 0.0;
  double sum_ref = 0.0;
  double sum_gap = 0.0;
  double sum_gap2 = 0.0;
  for (long long i = 0; i < N; ++i) {
    const Eigen::Vector3d x(xs.normal(), xs.normal(), xs.normal());
    const double xr[3] = {x[0], x[1], x[2]};
    feature_map(FeatureSpec::WellSpecified, xr, phi);
    gt.f0_into(phi, f0x.data());

    int pi_action = -1;
    if (policy.form == PolicyArtifact::Form::ActionIndex) {
      pi_action = coordinate_argmin(policy.hypothesis.predict(x));
      pi_edges = paths.edge_lists[static_cast<std::size_t>(pi_action)];
    } else {
      decide_edges(policy, g, paths, oracle, x, pi_edges);
    }
    double ref = 0.0;
    for (int e : pi_edges) ref += f0x[e];

    const int action = logging.sample(x, log_rng);
    const std::vector<int>& z_edges = paths.edge_lists[static_cast<std::size_t>(action)];
    double c = 0.0;
    for (int e : z_edges) c += f0x[e] + noise.uniform(-0.5, 0.5);

    double est = 0.0;
    if (naive) {
      const double e_hat = logging.probs(x)[action];
      fhat_x.noalias() = what * Eigen::Map<const Eigen::VectorXd>(phi, 8);
      const Eigen::VectorXd theta =
          score_naive(score, action, c, paths.incidence * fhat_x, e_hat);
      est = theta[pi_action];
    } else {
      switch (score) {
        case ScoreKind::DM: {
          fhat_x.noalias() = what * Eigen::Map<const Eigen::VectorXd>(phi, 8);
          for (int e : pi_edges) est += fhat_x[e];
          break;
        }
        case ScoreKind::ISW: {
          const Eigen::MatrixXd& si =
              sigma_inv[static_cast<std::size_t>(
                  mode == NuisanceMode::WrongSigma ? 0 : logging.profile_index(x))];
          double szpi = 0.0;
          for (int e : z_edges) {
            for (int e2 : pi_edges) szpi += si(e, e2);
          }
          est = c * szpi;
          break;
        }
        case ScoreKind::DR: {
          fhat_x.noalias() = what * Eigen::Map<const Eigen::VectorXd>(phi, 8);
          const Eigen::MatrixXd& si =
              sigma_inv[static_cast<std::size_t>(
                  mode == NuisanceMode::WrongSigma ? 0 : logging.profile_index(x))];
          double resid = c;
          for (int e : z_edges) resid -= fhat_x[e];
          double szpi = 0.0;
          for (int e : z_edges) {
            for (int e2 : pi_edges) szpi += si(e, e2);
          }
          for (int e : pi_edges) est += fhat_x[e];
          est += resid * szpi;
          break;
        }
        default:
          throw std::logic_error("unexpected score kind in audit");
      }
    }

    const double gap = est - ref;
    sum_est += est;
    sum_ref += ref;
    sum_gap += gap;
    sum_gap2 += gap * gap;
  }

  const double nn = static_cast<double>(N);
  AuditResult result;
  result.estimate = sum_est / nn;
  result.reference = sum_ref / nn;
  const double mean_gap = sum_gap / nn;
  const double var = std::max(0.0, (sum_gap2 - nn * mean_gap * mean_gap) / (nn - 1.0));
  result.se = std::sqrt(var / nn);
  if (result.se > 0.0) {
    result.zscore = mean_gap / result.se;
  } else {
    result.zscore = mean_gap == 0.0 ? 0.0
                    : mean_gap > 0.0 ? std::numeric_limits<double>::infinity()
                                     : -std::numeric_limits<double>::infinity();
  }
  return result;
}

}  // namespace clo
