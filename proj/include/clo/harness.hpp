#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "clo/learners.hpp"
#include "clo/simulator.hpp"

namespace clo {

// Canonical method tokens in canonical reporting order.
const std::vector<std::string>& method_registry();
bool is_known_method(const std::string& token);

struct ExperimentConfig {
  std::string name;
  int rows = 5;
  int cols = 5;
  std::vector<int> n_train = {400, 1600};
  int n_validation = 0;  // 0: match each n_train
  int n_test = 2000;
  int replications = 20;
  LoggingKind logging = LoggingKind::UniformRandom;
  FeatureSpec spec_f = FeatureSpec::WellSpecified;    // policy-inducing class
  FeatureSpec spec_fn = FeatureSpec::WellSpecified;   // nuisance class
  std::vector<std::string> methods = {"eto", "spo_dm"};
  double ridge_lambda = 1.0;
  PropensityKind propensity = PropensityKind::EmpiricalFrequency;
  int tree_depth = 3;
  int tree_min_leaf = 20;
  InverseParams inverse_params;
  SgdConfig sgd;
  int cross_fit_folds = 2;
  int design_sample = 4000;  // covariate draws used to build the logging policy
  std::uint64_t seed = 1;

  void validate() const;  // throws std::invalid_argument on bad values
};

// Flat `key = value` format with one `[experiment NAME]` section per
// experiment; `#` starts a comment. Lists are whitespace- or comma-separated.
std::vector<ExperimentConfig> parse_experiment_configs(std::istream& in);
std::vector<ExperimentConfig> load_experiment_configs(const std::string& path);

struct ResultRecord {
  std::string method;
  int n_train = 0;
  int replication = 0;
  double rel_regret = 0.0;  // NaN marks a failed method run
  double penalty = 0.0;     // NaN when the method tunes no penalty
  std::uint64_t seed = 0;   // method-stream seed for this task
  long long wall_ms = 0;
};

// Runs every (replication, n_train, method) task, `jobs`-way parallel.
// Failures inside one task yield an error record (NaN regret) and a note on
// `warnings`; other tasks proceed.
std::vector<ResultRecord> run_experiment(const ExperimentConfig& config, int jobs,
                                         std::ostream* warnings = nullptr);

void write_results_csv(const std::vector<ResultRecord>& records, std::ostream& out);
void write_results_csv(const std::vector<ResultRecord>& records, const std::string& path);
std::vector<ResultRecord> read_results_csv(const std::string& path);

struct SummaryCell {
  double mean = 0.0;  // relative regret, not percent
  double se = 0.0;
  int count = 0;
};

struct SummaryTable {
  std::vector<std::string> methods;  // row order
  std::vector<int> ns;               // column order
  std::map<std::pair<std::string, int>, SummaryCell> cells;
};

// Means and standard errors over replications; error records are excluded
// from the statistics (an all-error cell is absent, rendered blank).
SummaryTable aggregate(const std::vector<ResultRecord>& records);

// Fixed-width text table; cells show `mean% (se%)` with two decimals.
std::string render_summary(const SummaryTable& table);

}  // namespace clo
