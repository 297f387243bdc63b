#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>

namespace clo {

// Polynomial bases over the 3 covariates. The basis order is fixed; the two
// misspecified bases are prefixes of the full one (they drop trailing
// interaction terms), which makes zero-padding between classes trivial.
enum class FeatureSpec {
  WellSpecified,  // 1, x1, x2, x3, x1x2, x2x3, x1x3, x1x2x3
  MisspecDeg2,    // drops x1x3 and x1x2x3
  MisspecDeg4,    // constant and linear terms only
};

int feature_dim(FeatureSpec spec);
const char* feature_spec_name(FeatureSpec spec);
FeatureSpec feature_spec_from_name(const std::string& name);

// Writes the k basis values for x into out. Hot path; no allocation.
void feature_map(FeatureSpec spec, const double* x, double* out);
Eigen::VectorXd feature_map(FeatureSpec spec, const Eigen::Vector3d& x);

// f(x) = W phi(x). W has one row per output coordinate: d rows when the
// hypothesis predicts edge costs, m rows for the per-action bundles used by
// the naive baselines.
struct LinearHypothesis {
  FeatureSpec spec = FeatureSpec::WellSpecified;
  Eigen::MatrixXd W;

  Eigen::VectorXd predict(const Eigen::Vector3d& x) const;
  // out must hold W.rows() values; phi must hold feature_dim(spec) values.
  void predict_into(const double* phi, double* out) const;
};

// Text matrix format: a header row naming the basis columns, then one row of
// coefficients per output coordinate.
void write_hypothesis(std::ostream& out, const LinearHypothesis& h);
LinearHypothesis read_hypothesis(std::istream& in);
void save_hypothesis(const LinearHypothesis& h, const std::string& path);
LinearHypothesis load_hypothesis(const std::string& path);

}  // namespace clo
