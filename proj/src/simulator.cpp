#include "clo/simulator.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace clo {

Eigen::VectorXd GroundTruth::f0(const Eigen::Vector3d& x) const {
  return W * feature_map(FeatureSpec::WellSpecified, x);
}

void GroundTruth::f0_into(const double* phi8, double* out) const {
  const Eigen::Index d = W.rows();
  for (Eigen::Index e = 0; e < d; ++e) {
    double acc = 0.0;
    for (int j = 0; j < 8; ++j) acc += W(e, j) * phi8[j];
    out[e] = acc;
  }
}

LinearHypothesis GroundTruth::as_hypothesis() const {
  return LinearHypothesis{FeatureSpec::WellSpecified, W};
}

GroundTruth make_ground_truth(int d, std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("make_ground_truth: d must be positive");
  RandomStream rng(derive_seed(seed, "ground_truth"));
  GroundTruth gt;
  gt.W.resize(d, 8);
  for (Eigen::Index e = 0; e < d; ++e) {
    gt.W(e, 0) = 3.0;
    for (int j = 1; j < 8; ++j) gt.W(e, j) = rng.uniform01();
  }
  return gt;
}

FullSample sample_full(const GroundTruth& gt, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_full: n must be positive");
  const Eigen::Index d = gt.W.rows();
  RandomStream cov(derive_seed(seed, "covariates"));
  RandomStream noise(derive_seed(seed, "noise"));
  FullSample s;
  s.X.resize(n, 3);
  s.Y.resize(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) s.X(i, j) = cov.normal();
  }
  double phi[8];
  Eigen::VectorXd mean(d);
  const double hw = gt.noise_half_width;
  for (int i = 0; i < n; ++i) {
    const double x[3] = {s.X(i, 0), s.X(i, 1), s.X(i, 2)};
    feature_map(FeatureSpec::WellSpecified, x, phi);
    gt.f0_into(phi, mean.data());
    for (Eigen::Index e = 0; e < d; ++e) s.Y(i, e) = mean[e] + noise.uniform(-hw, hw);
  }
  return s;
}

const char* logging_kind_name(LoggingKind kind) {
  switch (kind) {
    case LoggingKind::UniformRandom: return "uniform";
    case LoggingKind::X1Policy: return "x1";
    case LoggingKind::X1X2Policy: return "x1x2";
  }
  throw std::invalid_argument("logging_kind_name: unknown kind");
}

LoggingKind logging_kind_from_name(const std::string& name) {
  if (name == "uniform") return LoggingKind::UniformRandom;
  if (name == "x1") return LoggingKind::X1Policy;
  if (name == "x1x2") return LoggingKind::X1X2Policy;
  throw std::invalid_argument("unknown logging policy '" + name + "'");
}

int LoggingPolicy::num_profiles() const {
  switch (kind) {
    case LoggingKind::UniformRandom: return 1;
    case LoggingKind::X1Policy: return 2;
    case LoggingKind::X1X2Policy: return 4;
  }
  throw std::logic_error("LoggingPolicy: unknown kind");
}

int LoggingPolicy::profile_index(const Eigen::Vector3d& x) const {
  switch (kind) {
    case LoggingKind::UniformRandom: return 0;
    case LoggingKind::X1Policy: return x[0] > 0.0 ? 0 : 1;
    case LoggingKind::X1X2Policy:
      return (x[0] > 0.0 ? 0 : 2) + (x[1] > 0.0 ? 0 : 1);
  }
  throw std::logic_error("LoggingPolicy: unknown kind");
}

double LoggingPolicy::group_a_prob(int profile) const {
  switch (kind) {
    case LoggingKind::UniformRandom:
      throw std::logic_error("group_a_prob: uniform policy has no groups");
    case LoggingKind::X1Policy:
      return profile == 0 ? 2.0 / 3.0 : 1.0 / 3.0;
    case LoggingKind::X1X2Policy:
      switch (profile) {
        case 0: return 2.0 / 3.0;  // x1 > 0, x2 > 0
        case 1: return 1.0 / 3.0;  // x1 > 0, x2 <= 0
        case 2: return 3.0 / 4.0;  // x1 <= 0, x2 > 0
        case 3: return 1.0 / 4.0;  // x1 <= 0, x2 <= 0
      }
      break;
  }
  throw std::logic_error("group_a_prob: bad profile");
}

const Eigen::VectorXd& LoggingPolicy::profile_probs(int profile) const {
  return profile_probs_.at(static_cast<std::size_t>(profile));
}

const Eigen::VectorXd& LoggingPolicy::probs(const Eigen::Vector3d& x) const {
  return profile_probs(profile_index(x));
}

int LoggingPolicy::sample(const Eigen::Vector3d& x, RandomStream& rng) const {
  if (kind == LoggingKind::UniformRandom) return rng.uniform_int(m);
  const double pa = group_a_prob(profile_index(x));
  const std::vector<int>& grp = rng.uniform01() < pa ? group_a : group_b;
  return grp[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(grp.size())))];
}

LoggingPolicy build_logging_policy(LoggingKind kind, const GroundTruth& gt,
                                   const GridInstance& g, const PathMatrix& paths,
                                   const Eigen::MatrixXd& test_X, int n_remove) {
  LoggingPolicy pol;
  pol.kind = kind;
  pol.m = paths.num_paths();

  if (kind == LoggingKind::UniformRandom) {
    pol.profile_probs_.assign(1, Eigen::VectorXd::Constant(pol.m, 1.0 / pol.m));
    return pol;
  }

  if (test_X.rows() == 0) {
    throw std::invalid_argument("build_logging_policy: design covariates required");
  }
  if (pol.m - n_remove < 50) {
    throw std::invalid_argument(
        "build_logging_policy: removing " + std::to_string(n_remove) +
        " paths leaves fewer than 50");
  }

  // Rank paths by how often they are optimal on the design sample. Sorting by
  // (frequency desc, index asc) both breaks frequency ties deterministically
  // and pads with the smallest-index never-optimal paths when fewer than
  // n_remove distinct optima occur.
  std::map<std::vector<int>, int> row_of;
  for (int j = 0; j < pol.m; ++j) row_of[paths.edge_lists[j]] = j;
  std::vector<int> freq(static_cast<std::size_t>(pol.m), 0);
  ShortestPathOracle oracle(g);
  std::vector<int> path_edges;
  double phi[8];
  std::vector<double> f0(static_cast<std::size_t>(g.num_edges()));
  for (Eigen::Index i = 0; i < test_X.rows(); ++i) {
    const double x[3] = {test_X(i, 0), test_X(i, 1), test_X(i, 2)};
    feature_map(FeatureSpec::WellSpecified, x, phi);
    gt.f0_into(phi, f0.data());
    oracle.solve(f0.data(), path_edges);
    const auto it = row_of.find(path_edges);
    if (it == row_of.end()) throw std::logic_error("oracle returned a non-path");
    ++freq[static_cast<std::size_t>(it->second)];
  }
  std::vector<int> order(static_cast<std::size_t>(pol.m));
  for (int j = 0; j < pol.m; ++j) order[static_cast<std::size_t>(j)] = j;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (freq[static_cast<std::size_t>(a)] != freq[static_cast<std::size_t>(b)]) {
      return freq[static_cast<std::size_t>(a)] > freq[static_cast<std::size_t>(b)];
    }
    return a < b;
  });
  pol.removed.assign(order.begin(), order.begin() + n_remove);
  std::sort(pol.removed.begin(), pol.removed.end());

  std::vector<int> retained;
  std::vector<char> is_removed(static_cast<std::size_t>(pol.m), 0);
  for (int j : pol.removed) is_removed[static_cast<std::size_t>(j)] = 1;
  for (int j = 0; j < pol.m; ++j) {
    if (!is_removed[static_cast<std::size_t>(j)]) retained.push_back(j);
  }
  const std::size_t half = retained.size() / 2;
  pol.group_a.assign(retained.begin(), retained.begin() + static_cast<std::ptrdiff_t>(half));
  pol.group_b.assign(retained.begin() + static_cast<std::ptrdiff_t>(half), retained.end());

  pol.profile_probs_.resize(static_cast<std::size_t>(pol.num_profiles()));
  for (int p = 0; p < pol.num_profiles(); ++p) {
    Eigen::VectorXd probs = Eigen::VectorXd::Zero(pol.m);
    const double pa = pol.group_a_prob(p);
    for (int j : pol.group_a) probs[j] = pa / static_cast<double>(pol.group_a.size());
    for (int j : pol.group_b) probs[j] = (1.0 - pa) / static_cast<double>(pol.group_b.size());
    pol.profile_probs_[static_cast<std::size_t>(p)] = std::move(probs);
  }
  return pol;
}

BanditDataset::BanditDataset(const BanditDataset& other)
    : X(other.X), Z(other.Z), C(other.C), hidden_Y_(other.hidden_Y_),
      accesses_(other.accesses_.load()) {}

BanditDataset& BanditDataset::operator=(const BanditDataset& other) {
  if (this != &other) {
    X = other.X;
    Z = other.Z;
    C = other.C;
    hidden_Y_ = other.hidden_Y_;
    accesses_.store(other.accesses_.load());
  }
  return *this;
}

BanditDataset::BanditDataset(BanditDataset&& other) noexcept
    : X(std::move(other.X)), Z(std::move(other.Z)), C(std::move(other.C)),
      hidden_Y_(std::move(other.hidden_Y_)), accesses_(other.accesses_.load()) {}

BanditDataset& BanditDataset::operator=(BanditDataset&& other) noexcept {
  if (this != &other) {
    X = std::move(other.X);
    Z = std::move(other.Z);
    C = std::move(other.C);
    hidden_Y_ = std::move(other.hidden_Y_);
    accesses_.store(other.accesses_.load());
  }
  return *this;
}

const Eigen::MatrixXd& BanditDataset::diagnostic_full_feedback() const {
  if (hidden_Y_.size() == 0) {
    throw std::logic_error("diagnostic_full_feedback: no hidden feedback stored");
  }
  accesses_.fetch_add(1);
  return hidden_Y_;
}

BanditDataset BanditDataset::subset(const std::vector<int>& idx) const {
  BanditDataset out;
  out.X.resize(static_cast<Eigen::Index>(idx.size()), X.cols());
  out.C.resize(static_cast<Eigen::Index>(idx.size()));
  out.Z.reserve(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const int i = idx[r];
    if (i < 0 || i >= n()) throw std::out_of_range("BanditDataset::subset: bad index");
    out.X.row(static_cast<Eigen::Index>(r)) = X.row(i);
    out.C[static_cast<Eigen::Index>(r)] = C[i];
    out.Z.push_back(Z[static_cast<std::size_t>(i)]);
  }
  return out;
}

BanditDataset generate_dataset(const GroundTruth& gt, const LoggingPolicy& policy,
                               const PathMatrix& paths, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("generate_dataset: n must be positive");
  FullSample full = sample_full(gt, n, seed);
  RandomStream logging(derive_seed(seed, "logging"));
  BanditDataset ds;
  ds.X = std::move(full.X);
  ds.Z.resize(static_cast<std::size_t>(n));
  ds.C.resize(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d x = ds.X.row(i).transpose();
    const int j = policy.sample(x, logging);
    ds.Z[static_cast<std::size_t>(i)] = j;
    double c = 0.0;
    for (int e : paths.edge_lists[static_cast<std::size_t>(j)]) c += full.Y(i, e);
    ds.C[i] = c;
  }
  ds.set_hidden_feedback(std::move(full.Y));
  return ds;
}

void write_dataset_csv(const BanditDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_dataset_csv: cannot open " + path);
  out << "x1,x2,x3,path_index,cost\n";
  char buf[128];
  for (int i = 0; i < data.n(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d,%.17g\n", data.X(i, 0),
                  data.X(i, 1), data.X(i, 2), data.Z[static_cast<std::size_t>(i)],
                  data.C[i]);
    out << buf;
  }
  if (!out) throw std::runtime_error("write_dataset_csv: write failed for " + path);
}

BanditDataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_dataset_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "x1,x2,x3,path_index,cost") {
    throw std::runtime_error("read_dataset_csv: bad header in " + path);
  }
  std::vector<std::array<double, 3>> xs;
  std::vector<int> zs;
  std::vector<double> cs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::array<double, 3> x{};
    int z = 0;
    double c = 0.0;
    char comma = 0;
    if (!(ls >> x[0] >> comma >> x[1] >> comma >> x[2] >> comma >> z >> comma >> c)) {
      throw std::runtime_error("read_dataset_csv: malformed row in " + path);
    }
    xs.push_back(x);
    zs.push_back(z);
    cs.push_back(c);
  }
  BanditDataset ds;
  ds.X.resize(static_cast<Eigen::Index>(xs.size()), 3);
  ds.C.resize(static_cast<Eigen::Index>(cs.size()));
  ds.Z = std::move(zs);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (int j = 0; j < 3; ++j) ds.X(static_cast<Eigen::Index>(i), j) = xs[i][static_cast<std::size_t>(j)];
    ds.C[static_cast<Eigen::Index>(i)] = cs[i];
  }
  return ds;
}

}  // namespace clo
