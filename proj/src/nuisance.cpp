#include "clo/nuisance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace clo {

LinearHypothesis fit_bandit_ridge(const BanditDataset& data, const PathMatrix& paths,
                                  FeatureSpec spec, double lambda, RidgeFitInfo* info) {
  const int n = data.n();
  if (n < 1) throw std::invalid_argument("fit_bandit_ridge: empty dataset");
  if (lambda < 0.0) throw std::invalid_argument("fit_bandit_ridge: negative ridge penalty");
  const int k = feature_dim(spec);
  const int d = static_cast<int>(paths.incidence.cols());
  const int m = paths.num_paths();

  // The Gram matrix of the Kronecker regressors decomposes per logged path:
  // sum over paths of S_j (x) z_j z_j^T with S_j the per-path feature Gram.
  std::vector<Eigen::MatrixXd> s(static_cast<std::size_t>(m),
                                 Eigen::MatrixXd::Zero(k, k));
  std::vector<Eigen::VectorXd> b(static_cast<std::size_t>(m), Eigen::VectorXd::Zero(k));
  std::vector<char> used(static_cast<std::size_t>(m), 0);
  Eigen::VectorXd phi(k);
  for (int i = 0; i < n; ++i) {
    const double x[3] = {data.X(i, 0), data.X(i, 1), data.X(i, 2)};
    feature_map(spec, x, phi.data());
    const int j = data.Z[static_cast<std::size_t>(i)];
    if (j < 0 || j >= m) throw std::invalid_argument("fit_bandit_ridge: path index out of range");
    s[static_cast<std::size_t>(j)].noalias() += phi * phi.transpose();
    b[static_cast<std::size_t>(j)].noalias() += phi * data.C[i];
    used[static_cast<std::size_t>(j)] = 1;
  }

  const int dk = d * k;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dk, dk);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dk);
  for (int j = 0; j < m; ++j) {
    if (!used[static_cast<std::size_t>(j)]) continue;
    const std::vector<int>& edges = paths.edge_lists[static_cast<std::size_t>(j)];
    const Eigen::MatrixXd& sj = s[static_cast<std::size_t>(j)];
    for (int j1 = 0; j1 < k; ++j1) {
      for (int j2 = 0; j2 < k; ++j2) {
        const double v = sj(j1, j2);
        for (int e1 : edges) {
          for (int e2 : edges) {
            gram(j1 * d + e1, j2 * d + e2) += v;
          }
        }
      }
      const Eigen::VectorXd& bj = b[static_cast<std::size_t>(j)];
      for (int e : edges) rhs[j1 * d + e] += bj[j1];
    }
  }

  Eigen::VectorXd w(dk);
  bool degenerate = false;
  if (lambda > 0.0) {
    gram.diagonal().array() += lambda;
    w = gram.ldlt().solve(rhs);
  } else {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(gram);
    cod.setThreshold(1e-10);
    degenerate = cod.rank() < dk;
    w = cod.solve(rhs);
  }
  if (info) info->degenerate = degenerate;

  LinearHypothesis h;
  h.spec = spec;
  h.W.resize(d, k);
  for (int j = 0; j < k; ++j) {
    for (int e = 0; e < d; ++e) h.W(e, j) = w[j * d + e];
  }
  return h;
}

Eigen::VectorXd ridge_regression(const Eigen::MatrixXd& Phi, const Eigen::VectorXd& y,
                                 double lambda) {
  if (Phi.rows() != y.size()) throw std::invalid_argument("ridge_regression: shape mismatch");
  if (lambda < 0.0) throw std::invalid_argument("ridge_regression: negative penalty");
  Eigen::MatrixXd gram = Phi.transpose() * Phi;
  const Eigen::VectorXd rhs = Phi.transpose() * y;
  if (lambda > 0.0) {
    gram.diagonal().array() += lambda;
    return gram.ldlt().solve(rhs);
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(gram);
  cod.setThreshold(1e-10);
  return cod.solve(rhs);
}

const char* propensity_kind_name(PropensityKind kind) {
  switch (kind) {
    case PropensityKind::EmpiricalFrequency: return "frequency";
    case PropensityKind::AxisTree: return "tree";
  }
  throw std::invalid_argument("propensity_kind_name: unknown kind");
}

PropensityKind propensity_kind_from_name(const std::string& name) {
  if (name == "frequency") return PropensityKind::EmpiricalFrequency;
  if (name == "tree") return PropensityKind::AxisTree;
  throw std::invalid_argument("unknown propensity kind '" + name + "'");
}

int PropensityModel::profile_index(const Eigen::Vector3d& x) const {
  if (kind == PropensityKind::EmpiricalFrequency) return 0;
  int node = 0;
  while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const TreeNode& nd = nodes[static_cast<std::size_t>(node)];
    node = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
  }
  return nodes[static_cast<std::size_t>(node)].leaf;
}

const Eigen::VectorXd& PropensityModel::profile_probs(int profile) const {
  return leaf_probs.at(static_cast<std::size_t>(profile));
}

const Eigen::VectorXd& PropensityModel::probs(const Eigen::Vector3d& x) const {
  return profile_probs(profile_index(x));
}

double PropensityModel::prob(const Eigen::Vector3d& x, int path) const {
  return probs(x)[path];
}

namespace {

Eigen::VectorXd smoothed_leaf_probs(const std::vector<int>& counts, int n_leaf, int m) {
  // Additive smoothing 1/(n_leaf + m) on observed classes only, then
  // normalized, so probabilities stay a distribution and unobserved paths
  // keep exact zero.
  Eigen::VectorXd probs = Eigen::VectorXd::Zero(m);
  const double add = 1.0 / (static_cast<double>(n_leaf) + static_cast<double>(m));
  double total = 0.0;
  for (int j = 0; j < m; ++j) {
    if (counts[static_cast<std::size_t>(j)] > 0) {
      probs[j] = static_cast<double>(counts[static_cast<std::size_t>(j)]) + add;
      total += probs[j];
    }
  }
  if (total > 0.0) probs /= total;
  return probs;
}

struct TreeBuilder {
  const BanditDataset& data;
  int m;
  int max_depth;
  int min_leaf;
  PropensityModel* model;

  // Returns the node index of the built subtree over the given sample rows.
  int build(std::vector<int>& idx, int depth) {
    const int node_id = static_cast<int>(model->nodes.size());
    model->nodes.emplace_back();

    std::vector<int> counts(static_cast<std::size_t>(m), 0);
    for (int i : idx) ++counts[static_cast<std::size_t>(data.Z[static_cast<std::size_t>(i)])];
    const int n_node = static_cast<int>(idx.size());

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_score = impurity_sum(counts, n_node);  // must strictly improve
    if (depth < max_depth && n_node >= 2 * min_leaf) {
      for (int f = 0; f < 3; ++f) {
        std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
          return data.X(a, f) < data.X(b, f);
        });
        std::vector<int> left_counts(static_cast<std::size_t>(m), 0);
        double ss_left = 0.0;
        double ss_right = 0.0;
        for (int c : counts) ss_right += static_cast<double>(c) * c;
        for (int pos = 0; pos + 1 < n_node; ++pos) {
          const int cls = data.Z[static_cast<std::size_t>(idx[static_cast<std::size_t>(pos)])];
          const double cl = static_cast<double>(left_counts[static_cast<std::size_t>(cls)]);
          const double cr = static_cast<double>(counts[static_cast<std::size_t>(cls)]) -
                            cl;  // count currently on the right
          ss_left += 2.0 * cl + 1.0;
          ss_right -= 2.0 * cr - 1.0;
          ++left_counts[static_cast<std::size_t>(cls)];
          const int n_left = pos + 1;
          const int n_right = n_node - n_left;
          if (n_left < min_leaf) continue;
          if (n_right < min_leaf) break;
          const double lo = data.X(idx[static_cast<std::size_t>(pos)], f);
          const double hi = data.X(idx[static_cast<std::size_t>(pos + 1)], f);
          if (lo == hi) continue;  // not a realizable threshold
          // Weighted Gini totals n - sum(counts^2)/n summed over children;
          // the shared constant n cancels, so compare the subtracted terms.
          const double score = static_cast<double>(n_node) -
                               ss_left / static_cast<double>(n_left) -
                               ss_right / static_cast<double>(n_right);
          if (score < best_score) {
            best_score = score;
            best_feature = f;
            best_threshold = 0.5 * (lo + hi);
          }
        }
      }
    }

    if (best_feature < 0) {
      model->nodes[static_cast<std::size_t>(node_id)].leaf =
          static_cast<int>(model->leaf_probs.size());
      model->leaf_probs.push_back(smoothed_leaf_probs(counts, n_node, m));
      return node_id;
    }

    std::vector<int> left_idx;
    std::vector<int> right_idx;
    for (int i : idx) {
      (data.X(i, best_feature) <= best_threshold ? left_idx : right_idx).push_back(i);
    }
    model->nodes[static_cast<std::size_t>(node_id)].feature = best_feature;
    model->nodes[static_cast<std::size_t>(node_id)].threshold = best_threshold;
    const int left = build(left_idx, depth + 1);
    model->nodes[static_cast<std::size_t>(node_id)].left = left;
    const int right = build(right_idx, depth + 1);
    model->nodes[static_cast<std::size_t>(node_id)].right = right;
    return node_id;
  }

  static double impurity_sum(const std::vector<int>& counts, int n_node) {
    double ss = 0.0;
    for (int c : counts) ss += static_cast<double>(c) * c;
    return static_cast<double>(n_node) - ss / static_cast<double>(n_node);
  }
};

}  // namespace

PropensityModel fit_propensity(const BanditDataset& data, int m, PropensityKind kind,
                               int max_depth, int min_leaf) {
  if (data.n() < 1) throw std::invalid_argument("fit_propensity: empty dataset");
  if (m < 1) throw std::invalid_argument("fit_propensity: m must be positive");
  for (int z : data.Z) {
    if (z < 0 || z >= m) throw std::invalid_argument("fit_propensity: path index out of range");
  }
  PropensityModel model;
  model.kind = kind;
  model.m = m;
  if (kind == PropensityKind::EmpiricalFrequency) {
    Eigen::VectorXd probs = Eigen::VectorXd::Zero(m);
    for (int z : data.Z) probs[z] += 1.0;
    probs /= static_cast<double>(data.n());
    model.leaf_probs.push_back(std::move(probs));
    return model;
  }
  if (max_depth < 0 || min_leaf < 1) {
    throw std::invalid_argument("fit_propensity: bad tree parameters");
  }
  std::vector<int> idx(static_cast<std::size_t>(data.n()));
  std::iota(idx.begin(), idx.end(), 0);
  TreeBuilder builder{data, m, max_depth, min_leaf, &model};
  builder.build(idx, 0);
  return model;
}

Eigen::MatrixXd sigma_from_probs(const Eigen::VectorXd& probs, const PathMatrix& paths) {
  if (probs.size() != paths.num_paths()) {
    throw std::invalid_argument("sigma_from_probs: probability vector length mismatch");
  }
  const int d = static_cast<int>(paths.incidence.cols());
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(d, d);
  for (int j = 0; j < paths.num_paths(); ++j) {
    const double p = probs[j];
    if (p == 0.0) continue;
    const std::vector<int>& edges = paths.edge_lists[static_cast<std::size_t>(j)];
    for (int e1 : edges) {
      for (int e2 : edges) sigma(e1, e2) += p;
    }
  }
  return sigma;
}

const char* inverse_variant_name(InverseVariant v) {
  switch (v) {
    case InverseVariant::PInv: return "pinv";
    case InverseVariant::Lambda: return "lambda";
    case InverseVariant::Clip: return "clip";
  }
  throw std::invalid_argument("inverse_variant_name: unknown variant");
}

InverseVariant inverse_variant_from_name(const std::string& name) {
  if (name == "pinv") return InverseVariant::PInv;
  if (name == "lambda") return InverseVariant::Lambda;
  if (name == "clip") return InverseVariant::Clip;
  throw std::invalid_argument("unknown inverse variant '" + name + "'");
}

void jacobi_eigen_symmetric(const Eigen::MatrixXd& a, Eigen::VectorXd& evals,
                            Eigen::MatrixXd& evecs, double rel_tol) {
  if (a.rows() != a.cols()) throw std::invalid_argument("jacobi: matrix must be square");
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd w = 0.5 * (a + a.transpose());
  evecs = Eigen::MatrixXd::Identity(n, n);
  const double norm = w.norm();
  const double target = rel_tol * norm;

  auto off_norm = [&]() {
    double s = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) s += 2.0 * w(p, q) * w(p, q);
    }
    return std::sqrt(s);
  };

  const int max_sweeps = 100;
  int sweep = 0;
  while (off_norm() > target) {
    if (++sweep > max_sweeps) {
      throw std::runtime_error("jacobi: failed to converge");
    }
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = w(p, q);
        if (apq == 0.0) continue;
        const double tau = (w(q, q) - w(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // Two-sided rotation in the (p, q) plane.
        for (Eigen::Index r = 0; r < n; ++r) {
          const double wrp = w(r, p);
          const double wrq = w(r, q);
          w(r, p) = c * wrp - s * wrq;
          w(r, q) = s * wrp + c * wrq;
        }
        for (Eigen::Index r = 0; r < n; ++r) {
          const double wpr = w(p, r);
          const double wqr = w(q, r);
          w(p, r) = c * wpr - s * wqr;
          w(q, r) = s * wpr + c * wqr;
        }
        w(p, q) = 0.0;
        w(q, p) = 0.0;
        for (Eigen::Index r = 0; r < n; ++r) {
          const double vrp = evecs(r, p);
          const double vrq = evecs(r, q);
          evecs(r, p) = c * vrp - s * vrq;
          evecs(r, q) = s * vrp + c * vrq;
        }
      }
    }
    if (norm == 0.0) break;
  }

  // Sort ascending for deterministic downstream behavior.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return w(i, i) < w(j, j); });
  evals.resize(n);
  Eigen::MatrixXd sorted(n, n);
  for (Eigen::Index o = 0; o < n; ++o) {
    evals[o] = w(order[static_cast<std::size_t>(o)], order[static_cast<std::size_t>(o)]);
    sorted.col(o) = evecs.col(order[static_cast<std::size_t>(o)]);
  }
  evecs = std::move(sorted);
}

Eigen::MatrixXd regularized_inverse(const Eigen::MatrixXd& sigma, InverseVariant variant,
                                    const InverseParams& params) {
  if (sigma.rows() != sigma.cols()) {
    throw std::invalid_argument("regularized_inverse: matrix must be square");
  }
  if (!sigma.allFinite()) {
    throw std::invalid_argument("regularized_inverse: non-finite entries");
  }
  Eigen::VectorXd evals;
  Eigen::MatrixXd q;
  jacobi_eigen_symmetric(sigma, evals, q);

  const Eigen::Index n = evals.size();
  Eigen::VectorXd inv(n);
  switch (variant) {
    case InverseVariant::PInv: {
      const double lambda_max = evals.maxCoeff();
      const double cutoff = params.pinv_rel_tol * lambda_max;
      for (Eigen::Index i = 0; i < n; ++i) {
        inv[i] = (lambda_max > 0.0 && evals[i] > cutoff) ? 1.0 / evals[i] : 0.0;
      }
      break;
    }
    case InverseVariant::Lambda:
      for (Eigen::Index i = 0; i < n; ++i) inv[i] = 1.0 / (evals[i] + params.lambda);
      break;
    case InverseVariant::Clip:
      for (Eigen::Index i = 0; i < n; ++i) inv[i] = 1.0 / std::max(evals[i], params.clip);
      break;
  }
  return q * inv.asDiagonal() * q.transpose();
}

SigmaInversePack materialize_sigma_inverses(const PropensityModel& propensity,
                                            const PathMatrix& paths, InverseVariant variant,
                                            const InverseParams& params) {
  SigmaInversePack pack;
  pack.propensity = propensity;
  pack.inverses.reserve(static_cast<std::size_t>(propensity.num_profiles()));
  for (int p = 0; p < propensity.num_profiles(); ++p) {
    pack.inverses.push_back(regularized_inverse(
        sigma_from_probs(propensity.profile_probs(p), paths), variant, params));
  }
  return pack;
}

}  // namespace clo
