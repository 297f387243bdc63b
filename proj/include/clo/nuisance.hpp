#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "clo/features.hpp"
#include "clo/grid.hpp"
#include "clo/simulator.hpp"

namespace clo {

struct RidgeFitInfo {
  bool degenerate = false;  // lambda == 0 met a singular Gram matrix
};

// Least-squares fit of W minimizing sum_i (C_i - z_i^T W phi(X_i))^2
// + lambda ||W||_F^2. W is vectorized and the per-sample regressor is the
// Kronecker product phi(X_i) (x) z_i; the normal equations are solved by a
// symmetric factorization. With lambda == 0 and a singular Gram matrix the
// solve falls back to the minimum-norm least-squares solution and sets the
// degeneracy flag.
LinearHypothesis fit_bandit_ridge(const BanditDataset& data, const PathMatrix& paths,
                                  FeatureSpec spec, double lambda,
                                  RidgeFitInfo* info = nullptr);

// Plain ridge regression of y on rows of Phi; shared by the per-action and
// pooled regressions of the naive baselines.
Eigen::VectorXd ridge_regression(const Eigen::MatrixXd& Phi, const Eigen::VectorXd& y,
                                 double lambda);

enum class PropensityKind { EmpiricalFrequency, AxisTree };

const char* propensity_kind_name(PropensityKind kind);
PropensityKind propensity_kind_from_name(const std::string& name);

struct TreeNode {
  int feature = -1;       // -1 marks a leaf
  double threshold = 0.0; // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  int leaf = -1;          // profile index when a leaf
};

// Estimated propensities e(z_j | x) over the m paths. Both kinds take
// finitely many distinct values; downstream Sigma inverses are materialized
// once per such profile.
struct PropensityModel {
  PropensityKind kind = PropensityKind::EmpiricalFrequency;
  int m = 0;
  std::vector<TreeNode> nodes;               // empty for EmpiricalFrequency
  std::vector<Eigen::VectorXd> leaf_probs;   // one vector per profile

  int num_profiles() const { return static_cast<int>(leaf_probs.size()); }
  int profile_index(const Eigen::Vector3d& x) const;
  const Eigen::VectorXd& profile_probs(int profile) const;
  const Eigen::VectorXd& probs(const Eigen::Vector3d& x) const;
  double prob(const Eigen::Vector3d& x, int path) const;
};

// EmpiricalFrequency ignores covariates. AxisTree is a CART-style classifier
// over the path labels: greedy binary splits on one covariate minimizing Gini
// impurity, depth-limited, minimum leaf size enforced. Leaf probabilities are
// smoothed label frequencies with additive weight 1/(n_leaf + m) on observed
// classes only; never-observed paths keep probability zero.
PropensityModel fit_propensity(const BanditDataset& data, int m, PropensityKind kind,
                               int max_depth = 3, int min_leaf = 20);

// Sigma(x) = sum_j probs[j] z_j z_j^T.
Eigen::MatrixXd sigma_from_probs(const Eigen::VectorXd& probs, const PathMatrix& paths);

enum class InverseVariant { PInv, Lambda, Clip };

const char* inverse_variant_name(InverseVariant v);
InverseVariant inverse_variant_from_name(const std::string& name);

struct InverseParams {
  double pinv_rel_tol = 1e-8;  // eigenvalues below rel_tol * lambda_max zero out
  double lambda = 1.0;         // Lambda variant: invert (Sigma + lambda I)
  double clip = 1.0;           // Clip variant: raise eigenvalues below clip to clip
};

// Symmetric eigendecomposition by cyclic Jacobi sweeps; converged when the
// off-diagonal Frobenius mass falls below rel_tol * ||A||_F. Eigenvalues are
// returned ascending with matching eigenvector columns.
void jacobi_eigen_symmetric(const Eigen::MatrixXd& a, Eigen::VectorXd& evals,
                            Eigen::MatrixXd& evecs, double rel_tol = 1e-12);

// The three inverse regularizations of a PSD Sigma. Input is symmetrized
// defensively; non-finite entries are rejected.
Eigen::MatrixXd regularized_inverse(const Eigen::MatrixXd& sigma, InverseVariant variant,
                                    const InverseParams& params = {});

// Per-profile materialized inverses: one eigendecomposition per distinct
// propensity profile instead of per sample, and immutable thereafter so
// concurrent lookup is safe.
struct SigmaInversePack {
  PropensityModel propensity;
  std::vector<Eigen::MatrixXd> inverses;  // aligned with propensity profiles

  const Eigen::MatrixXd& at(const Eigen::Vector3d& x) const {
    return inverses[static_cast<std::size_t>(propensity.profile_index(x))];
  }
};

SigmaInversePack materialize_sigma_inverses(const PropensityModel& propensity,
                                            const PathMatrix& paths, InverseVariant variant,
                                            const InverseParams& params = {});

}  // namespace clo
