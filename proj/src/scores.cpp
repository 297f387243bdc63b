#include "clo/scores.hpp"

#include <stdexcept>

namespace clo {

const char* score_kind_name(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::DM: return "dm";
    case ScoreKind::ISW: return "isw";
    case ScoreKind::DR: return "dr";
    case ScoreKind::NaiveDM: return "naive_dm";
    case ScoreKind::NaiveIPW: return "naive_ipw";
    case ScoreKind::NaiveDR: return "naive_dr";
  }
  throw std::invalid_argument("score_kind_name: unknown kind");
}

bool score_is_naive(ScoreKind kind) {
  return kind == ScoreKind::NaiveDM || kind == ScoreKind::NaiveIPW ||
         kind == ScoreKind::NaiveDR;
}

bool score_needs_sigma(ScoreKind kind) {
  return kind == ScoreKind::ISW || kind == ScoreKind::DR;
}

bool score_needs_propensity(ScoreKind kind) {
  return kind == ScoreKind::NaiveIPW || kind == ScoreKind::NaiveDR;
}

Eigen::VectorXd score_linear(ScoreKind kind, const Eigen::Vector3d& x,
                             const Eigen::VectorXd& z, double c,
                             const LinearHypothesis& f,
                             const Eigen::MatrixXd* sigma_inv) {
  if (score_is_naive(kind)) {
    throw std::invalid_argument("score_linear: naive kind passed to linear scorer");
  }
  if (kind != ScoreKind::DM) {
    if (!sigma_inv) throw std::invalid_argument("score_linear: Sigma inverse required");
    if (sigma_inv->rows() != z.size() || sigma_inv->cols() != z.size()) {
      throw std::invalid_argument("score_linear: Sigma inverse dimension mismatch");
    }
  }
  switch (kind) {
    case ScoreKind::DM:
      return f.predict(x);
    case ScoreKind::ISW:
      return (*sigma_inv) * z * c;
    case ScoreKind::DR: {
      Eigen::VectorXd fx = f.predict(x);
      if (fx.size() != z.size()) {
        throw std::invalid_argument("score_linear: hypothesis dimension mismatch");
      }
      const double residual = c - z.dot(fx);
      fx.noalias() += (*sigma_inv) * z * residual;
      return fx;
    }
    default:
      break;
  }
  throw std::invalid_argument("score_linear: unknown kind");
}

Eigen::VectorXd score_naive(ScoreKind kind, int action_index, double c,
                            const Eigen::VectorXd& f_tilde_x, double propensity_at_action) {
  if (!score_is_naive(kind)) {
    throw std::invalid_argument("score_naive: linear kind passed to naive scorer");
  }
  const Eigen::Index m = f_tilde_x.size();
  if (action_index < 0 || action_index >= m) {
    throw std::invalid_argument("score_naive: action index out of range");
  }
  if (score_needs_propensity(kind) && propensity_at_action <= 0.0) {
    throw std::runtime_error("score_naive: zero propensity at observed action (support violation)");
  }
  switch (kind) {
    case ScoreKind::NaiveDM:
      return f_tilde_x;
    case ScoreKind::NaiveIPW: {
      Eigen::VectorXd theta = Eigen::VectorXd::Zero(m);
      theta[action_index] = c / propensity_at_action;
      return theta;
    }
    case ScoreKind::NaiveDR: {
      Eigen::VectorXd theta = f_tilde_x;
      theta[action_index] += (c - f_tilde_x[action_index]) / propensity_at_action;
      return theta;
    }
    default:
      break;
  }
  throw std::invalid_argument("score_naive: unknown kind");
}

}  // namespace clo
