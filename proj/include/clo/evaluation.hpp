#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "clo/grid.hpp"
#include "clo/learners.hpp"
#include "clo/scores.hpp"
#include "clo/simulator.hpp"

namespace clo {

// Ground-truth evaluation of a learned policy on a test covariate matrix.
struct EvalReport {
  std::string policy;
  double value = 0.0;          // mean true cost of the policy's decisions
  double optimal_value = 0.0;  // mean cost of the pointwise optimal decisions
  double rel_regret = 0.0;     // (value - optimal_value) / optimal_value
  int n_test = 0;
  std::uint64_t seed = 0;
};

double true_value(const GroundTruth& gt, const PolicyArtifact& policy,
                  const GridInstance& g, const PathMatrix& paths,
                  const Eigen::MatrixXd& test_X);

// Mean of min_z f0(x)^T z over the test covariates.
double oracle_value(const GroundTruth& gt, const GridInstance& g,
                    const Eigen::MatrixXd& test_X);

double relative_regret(const GroundTruth& gt, const PolicyArtifact& policy,
                       const GridInstance& g, const PathMatrix& paths,
                       const Eigen::MatrixXd& test_X);

EvalReport evaluate_policy(const GroundTruth& gt, const PolicyArtifact& policy,
                           const GridInstance& g, const PathMatrix& paths,
                           const Eigen::MatrixXd& test_X);

// Nuisances handed to the Monte-Carlo audit: exact ones, a cost model shifted
// by a fixed span-direction perturbation, or the moment matrix of an
// unrelated full-support logging policy.
enum class NuisanceMode { TrueNuisances, PerturbedF, WrongSigma };

struct AuditResult {
  double estimate = 0.0;   // mean of theta^T pi(X) over the draws
  double reference = 0.0;  // mean of f0(X)^T pi(X) over the same X draws
  double se = 0.0;         // standard error of the pointwise gap
  double zscore = 0.0;     // mean gap studentized by se
};

// Draws N fresh logged samples and compares the score-weighted value of the
// fixed policy against its ground-truth value on the same covariate stream.
AuditResult mc_unbiasedness_audit(ScoreKind score, NuisanceMode mode,
                                  const PolicyArtifact& policy, const GroundTruth& gt,
                                  const LoggingPolicy& logging, const GridInstance& g,
                                  const PathMatrix& paths, long long N,
                                  std::uint64_t seed);

const char* nuisance_mode_name(NuisanceMode mode);
NuisanceMode parse_nuisance_mode(const std::string& name);

}  // namespace clo
