#pragma once

#include <Eigen/Dense>
#include <vector>

namespace clo {

struct GridEdge {
  int from = 0;
  int to = 0;
};

// Directed grid DAG with right/down edges between rows x cols nodes.
// Node ids are row-major; edge ids are row-major by from-node with the right
// edge listed before the down edge. That edge ordering is load-bearing: it
// defines the tie-break rule used by every argmin in the project.
struct GridInstance {
  int rows = 0;
  int cols = 0;
  std::vector<GridEdge> edges;
  std::vector<std::vector<int>> out_edges;  // per node, ascending edge index

  int num_nodes() const { return rows * cols; }
  int num_edges() const { return static_cast<int>(edges.size()); }
  int start() const { return 0; }
  int goal() const { return rows * cols - 1; }
  int node_id(int r, int c) const { return r * cols + c; }
};

// Builds the grid. Throws std::invalid_argument for dimensions below 2.
GridInstance build_grid(int rows, int cols);

// All monotone start-goal paths as 0/1 incidence rows, in depth-first order
// exploring the right edge before the down edge. This row order matches the
// oracle tie-break: the smallest row index among cost ties is the oracle winner.
struct PathMatrix {
  Eigen::MatrixXd incidence;                // m x d
  std::vector<std::vector<int>> edge_lists; // ascending edge indices per path

  int num_paths() const { return static_cast<int>(incidence.rows()); }
  // Exact row lookup for an incidence vector; -1 if not a path.
  int find_row(const Eigen::VectorXd& z) const;
};

PathMatrix enumerate_paths(const GridInstance& g);

// Minimum-cost path via dynamic programming over the reverse topological
// order. Negative costs are fine (DAG). Exact value ties at a node resolve to
// the smaller outgoing edge index, which realizes the lexicographic tie-break
// over edge sequences. Reusable so hot loops avoid per-call allocation.
class ShortestPathOracle {
 public:
  explicit ShortestPathOracle(const GridInstance& g);

  // Fills path_edges with the ascending edge indices of the argmin path and
  // returns the objective value. Throws std::invalid_argument on NaN cost.
  double solve(const double* cost, std::vector<int>& path_edges);

  // Convenience overload producing the incidence vector.
  double solve(const Eigen::VectorXd& cost, Eigen::VectorXd& z);

 private:
  const GridInstance* g_;
  std::vector<double> value_;
  std::vector<int> choice_;
};

// One-shot convenience wrapper around ShortestPathOracle.
Eigen::VectorXd linear_oracle(const GridInstance& g, const Eigen::VectorXd& cost,
                              double* objective = nullptr);

// Numerical rank by Gaussian elimination with full pivoting; pivots below
// rel_tol times the largest pivot count as zero.
int span_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-10);

}  // namespace clo
