#include "clo/grid.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace clo {

GridInstance build_grid(int rows, int cols) {
  if (rows < 2 || cols < 2) {
    throw std::invalid_argument("build_grid: rows and cols must be at least 2");
  }
  GridInstance g;
  g.rows = rows;
  g.cols = cols;
  g.out_edges.resize(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int u = g.node_id(r, c);
      if (c + 1 < cols) {
        g.out_edges[u].push_back(g.num_edges());
        g.edges.push_back({u, g.node_id(r, c + 1)});
      }
      if (r + 1 < rows) {
        g.out_edges[u].push_back(g.num_edges());
        g.edges.push_back({u, g.node_id(r + 1, c)});
      }
    }
  }
  return g;
}

PathMatrix enumerate_paths(const GridInstance& g) {
  std::vector<std::vector<int>> lists;
  std::vector<int> stack;
  // Iterative DFS over edge choices, right edge first (the smaller index at
  // each node), yielding rows in lexicographic edge-sequence order.
  struct Frame {
    int node;
    std::size_t next;  // index into out_edges[node]
  };
  std::vector<Frame> frames;
  frames.push_back({g.start(), 0});
  while (!frames.empty()) {
    Frame& f = frames.back();
    if (f.node == g.goal()) {
      lists.push_back(stack);
      frames.pop_back();
      if (!stack.empty()) stack.pop_back();
      continue;
    }
    if (f.next >= g.out_edges[f.node].size()) {
      frames.pop_back();
      if (!stack.empty()) stack.pop_back();
      continue;
    }
    const int e = g.out_edges[f.node][f.next++];
    stack.push_back(e);
    frames.push_back({g.edges[e].to, 0});
  }

  PathMatrix pm;
  pm.edge_lists = std::move(lists);
  pm.incidence = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(pm.edge_lists.size()),
                                       g.num_edges());
  for (std::size_t j = 0; j < pm.edge_lists.size(); ++j) {
    for (int e : pm.edge_lists[j]) {
      pm.incidence(static_cast<Eigen::Index>(j), e) = 1.0;
    }
  }
  return pm;
}

int PathMatrix::find_row(const Eigen::VectorXd& z) const {
  for (int j = 0; j < num_paths(); ++j) {
    if ((incidence.row(j).transpose() - z).cwiseAbs().maxCoeff() == 0.0) return j;
  }
  return -1;
}

namespace {

void check_costs(const double* cost, int d) {
  for (int e = 0; e < d; ++e) {
    if (std::isnan(cost[e])) {
      throw std::invalid_argument("linear_oracle: cost contains NaN");
    }
  }
}

}  // namespace

ShortestPathOracle::ShortestPathOracle(const GridInstance& g)
    : g_(&g),
      value_(static_cast<std::size_t>(g.num_nodes())),
      choice_(static_cast<std::size_t>(g.num_nodes()), -1) {}

double ShortestPathOracle::solve(const double* cost, std::vector<int>& path_edges) {
  const GridInstance& g = *g_;
  check_costs(cost, g.num_edges());
  value_[static_cast<std::size_t>(g.goal())] = 0.0;
  // Node ids increase along every edge, so descending id order is a reverse
  // topological order.
  for (int u = g.goal() - 1; u >= 0; --u) {
    double best = std::numeric_limits<double>::infinity();
    int pick = -1;
    for (int e : g.out_edges[u]) {
      const double cand = cost[e] + value_[static_cast<std::size_t>(g.edges[e].to)];
      if (cand < best) {  // strict: first (smallest) edge index wins ties
        best = cand;
        pick = e;
      }
    }
    value_[static_cast<std::size_t>(u)] = best;
    choice_[static_cast<std::size_t>(u)] = pick;
  }
  path_edges.clear();
  int u = g.start();
  while (u != g.goal()) {
    const int e = choice_[static_cast<std::size_t>(u)];
    path_edges.push_back(e);
    u = g.edges[e].to;
  }
  return value_[static_cast<std::size_t>(g.start())];
}

double ShortestPathOracle::solve(const Eigen::VectorXd& cost, Eigen::VectorXd& z) {
  if (cost.size() != g_->num_edges()) {
    throw std::invalid_argument("linear_oracle: cost dimension mismatch");
  }
  std::vector<int> edges;
  const double obj = solve(cost.data(), edges);
  z.setZero(g_->num_edges());
  for (int e : edges) z[e] = 1.0;
  return obj;
}

Eigen::VectorXd linear_oracle(const GridInstance& g, const Eigen::VectorXd& cost,
                              double* objective) {
  ShortestPathOracle oracle(g);
  Eigen::VectorXd z;
  const double obj = oracle.solve(cost, z);
  if (objective) *objective = obj;
  return z;
}

int span_rank(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.size() == 0) throw std::invalid_argument("span_rank: empty matrix");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  lu.setThreshold(rel_tol);
  return static_cast<int>(lu.rank());
}

}  // namespace clo
