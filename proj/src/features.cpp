#include "clo/features.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace clo {

namespace {

constexpr std::array<const char*, 8> kBasisNames = {
    "1", "x1", "x2", "x3", "x1x2", "x2x3", "x1x3", "x1x2x3"};

}  // namespace

int feature_dim(FeatureSpec spec) {
  switch (spec) {
    case FeatureSpec::WellSpecified: return 8;
    case FeatureSpec::MisspecDeg2: return 6;
    case FeatureSpec::MisspecDeg4: return 4;
  }
  throw std::invalid_argument("feature_dim: unknown spec");
}

const char* feature_spec_name(FeatureSpec spec) {
  switch (spec) {
    case FeatureSpec::WellSpecified: return "well";
    case FeatureSpec::MisspecDeg2: return "deg2";
    case FeatureSpec::MisspecDeg4: return "deg4";
  }
  throw std::invalid_argument("feature_spec_name: unknown spec");
}

FeatureSpec feature_spec_from_name(const std::string& name) {
  if (name == "well") return FeatureSpec::WellSpecified;
  if (name == "deg2") return FeatureSpec::MisspecDeg2;
  if (name == "deg4") return FeatureSpec::MisspecDeg4;
  throw std::invalid_argument("unknown feature spec '" + name + "'");
}

void feature_map(FeatureSpec spec, const double* x, double* out) {
  out[0] = 1.0;
  out[1] = x[0];
  out[2] = x[1];
  out[3] = x[2];
  if (spec == FeatureSpec::MisspecDeg4) return;
  out[4] = x[0] * x[1];
  out[5] = x[1] * x[2];
  if (spec == FeatureSpec::MisspecDeg2) return;
  out[6] = x[0] * x[2];
  out[7] = x[0] * x[1] * x[2];
}

Eigen::VectorXd feature_map(FeatureSpec spec, const Eigen::Vector3d& x) {
  Eigen::VectorXd phi(feature_dim(spec));
  feature_map(spec, x.data(), phi.data());
  return phi;
}

Eigen::VectorXd LinearHypothesis::predict(const Eigen::Vector3d& x) const {
  return W * feature_map(spec, x);
}

void LinearHypothesis::predict_into(const double* phi, double* out) const {
  const Eigen::Index rows = W.rows();
  const Eigen::Index k = W.cols();
  for (Eigen::Index r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) acc += W(r, j) * phi[j];
    out[r] = acc;
  }
}

void write_hypothesis(std::ostream& out, const LinearHypothesis& h) {
  const int k = feature_dim(h.spec);
  if (h.W.cols() != k) throw std::invalid_argument("write_hypothesis: column count mismatch");
  for (int j = 0; j < k; ++j) out << (j ? " " : "") << kBasisNames[j];
  out << "\n";
  char buf[32];
  for (Eigen::Index r = 0; r < h.W.rows(); ++r) {
    for (Eigen::Index j = 0; j < h.W.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", h.W(r, j));
      out << (j ? " " : "") << buf;
    }
    out << "\n";
  }
}

void save_hypothesis(const LinearHypothesis& h, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_hypothesis: cannot open " + path);
  write_hypothesis(out, h);
  if (!out) throw std::runtime_error("save_hypothesis: write failed for " + path);
}

LinearHypothesis read_hypothesis(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) {
    throw std::runtime_error("read_hypothesis: missing header");
  }
  std::istringstream hs(header);
  std::vector<std::string> names;
  for (std::string tok; hs >> tok;) names.push_back(tok);

  FeatureSpec spec;
  if (names.size() == 8) spec = FeatureSpec::WellSpecified;
  else if (names.size() == 6) spec = FeatureSpec::MisspecDeg2;
  else if (names.size() == 4) spec = FeatureSpec::MisspecDeg4;
  else throw std::runtime_error("read_hypothesis: unrecognized basis width");
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (names[j] != kBasisNames[j]) {
      throw std::runtime_error("read_hypothesis: unexpected basis name '" + names[j] + "'");
    }
  }

  std::vector<std::vector<double>> rows;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<double> row;
    for (double v; ls >> v;) row.push_back(v);
    if (row.size() != names.size()) {
      throw std::runtime_error("read_hypothesis: ragged coefficient row");
    }
    rows.push_back(std::move(row));
  }

  LinearHypothesis h;
  h.spec = spec;
  h.W.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t j = 0; j < names.size(); ++j) {
      h.W(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = rows[r][j];
    }
  }
  return h;
}

LinearHypothesis load_hypothesis(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_hypothesis: cannot open " + path);
  return read_hypothesis(in);
}

}  // namespace clo
