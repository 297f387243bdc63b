#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cstdint>
#include <string>
#include <vector>

#include "clo/features.hpp"
#include "clo/grid.hpp"
#include "clo/rng.hpp"

namespace clo {

// True conditional mean cost f0(x) = W phi(x) over the full cubic basis.
// The constant column is exactly 3 for every edge; the seven non-constant
// columns are drawn once from Unif[0,1] and frozen for the experiment.
struct GroundTruth {
  Eigen::MatrixXd W;  // d x 8
  double noise_half_width = 0.5;

  Eigen::VectorXd f0(const Eigen::Vector3d& x) const;
  void f0_into(const double* phi8, double* out) const;  // phi over the full basis
  LinearHypothesis as_hypothesis() const;
};

GroundTruth make_ground_truth(int d, std::uint64_t seed);

struct FullSample {
  Eigen::MatrixXd X;  // n x 3
  Eigen::MatrixXd Y;  // n x d
};

// X rows iid standard normal, Y = f0(X) + eps with eps iid
// Unif[-half_width, half_width] per edge. Covariates and noise come from
// separately derived streams.
FullSample sample_full(const GroundTruth& gt, int n, std::uint64_t seed);

enum class LoggingKind { UniformRandom, X1Policy, X1X2Policy };

const char* logging_kind_name(LoggingKind kind);
LoggingKind logging_kind_from_name(const std::string& name);

// Historical decision rule. The covariate-dependent kinds remove the 20 paths
// most often optimal on a design sample and split the retained paths into two
// groups whose selection probability depends on covariate signs; sampling is
// uniform within the chosen group. Conditional distributions take finitely
// many values ("profiles"), which downstream caches key on.
struct LoggingPolicy {
  LoggingKind kind = LoggingKind::UniformRandom;
  int m = 0;
  std::vector<int> removed;  // empty for UniformRandom
  std::vector<int> group_a;
  std::vector<int> group_b;

  int num_profiles() const;
  int profile_index(const Eigen::Vector3d& x) const;
  const Eigen::VectorXd& profile_probs(int profile) const;
  const Eigen::VectorXd& probs(const Eigen::Vector3d& x) const;
  int sample(const Eigen::Vector3d& x, RandomStream& rng) const;

  // Probability of choosing group_a, by profile.
  double group_a_prob(int profile) const;

  std::vector<Eigen::VectorXd> profile_probs_;  // filled by build_logging_policy
};

LoggingPolicy build_logging_policy(LoggingKind kind, const GroundTruth& gt,
                                   const GridInstance& g, const PathMatrix& paths,
                                   const Eigen::MatrixXd& test_X, int n_remove = 20);

// Logged bandit data. The realized full feedback is retained for diagnostics
// but sits behind an access-counting gate: learners must never touch it, and
// the harness asserts the access count stayed at zero while they ran.
class BanditDataset {
 public:
  Eigen::MatrixXd X;      // n x 3
  std::vector<int> Z;     // chosen path index per sample
  Eigen::VectorXd C;      // realized total cost per sample

  BanditDataset() = default;
  BanditDataset(const BanditDataset& other);
  BanditDataset& operator=(const BanditDataset& other);
  BanditDataset(BanditDataset&& other) noexcept;
  BanditDataset& operator=(BanditDataset&& other) noexcept;

  int n() const { return static_cast<int>(X.rows()); }
  bool has_hidden_feedback() const { return hidden_Y_.size() > 0; }

  // Diagnostics-only view of the counterfactual costs; every call is counted.
  const Eigen::MatrixXd& diagnostic_full_feedback() const;
  std::uint64_t diagnostic_access_count() const { return accesses_.load(); }

  // Row subset for fold handling. Hidden feedback is deliberately dropped.
  BanditDataset subset(const std::vector<int>& idx) const;

  void set_hidden_feedback(Eigen::MatrixXd y) { hidden_Y_ = std::move(y); }

 private:
  Eigen::MatrixXd hidden_Y_;  // n x d, possibly empty
  mutable std::atomic<std::uint64_t> accesses_{0};
};

BanditDataset generate_dataset(const GroundTruth& gt, const LoggingPolicy& policy,
                               const PathMatrix& paths, int n, std::uint64_t seed);

// Columnar text export: header `x1,x2,x3,path_index,cost`, one row per sample.
// Hidden feedback is never exported.
void write_dataset_csv(const BanditDataset& data, const std::string& path);
BanditDataset read_dataset_csv(const std::string& path);

}  // namespace clo
