#pragma once

#include <Eigen/Dense>

#include "clo/features.hpp"
#include "clo/nuisance.hpp"

namespace clo {

// Score kinds. The first three exploit the linear structure of the decision
// cost over edges; the Naive* kinds treat the m paths as unrelated discrete
// actions (one-hot decision space).
enum class ScoreKind { DM, ISW, DR, NaiveDM, NaiveIPW, NaiveDR };

const char* score_kind_name(ScoreKind kind);
bool score_is_naive(ScoreKind kind);
bool score_needs_sigma(ScoreKind kind);       // ISW / DR
bool score_needs_propensity(ScoreKind kind);  // NaiveIPW / NaiveDR

// Linear-structure scores over edge space:
//   DM  -> f(x)
//   ISW -> Sigma^+ z c
//   DR  -> f(x) + Sigma^+ z (c - z^T f(x))
// sigma_inv may be null for DM; ISW ignores f.
Eigen::VectorXd score_linear(ScoreKind kind, const Eigen::Vector3d& x,
                             const Eigen::VectorXd& z, double c,
                             const LinearHypothesis& f,
                             const Eigen::MatrixXd* sigma_inv);

// Discrete-action scores over the m paths, with one-hot z at action_index:
//   NaiveDM  -> f~(x)
//   NaiveIPW -> c / e(action|x) at the observed action, zero elsewhere
//   NaiveDR  -> f~(x) + (c - f~_action(x)) / e(action|x) at the observed action
// A nonpositive propensity at the observed action is a support violation and
// throws.
Eigen::VectorXd score_naive(ScoreKind kind, int action_index, double c,
                            const Eigen::VectorXd& f_tilde_x, double propensity_at_action);

}  // namespace clo
