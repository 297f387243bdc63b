#include "clo/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "clo/evaluation.hpp"
#include "clo/rng.hpp"

namespace clo {

const std::vector<std::string>& method_registry() {
  static const std::vector<std::string> registry = {
      "eto",       "spo_dm",       "spo_isw",      "spo_dr_pinv", "spo_dr_lambda",
      "spo_dr_clip", "naive_eto",  "naive_spo_dm", "naive_spo_ipw", "naive_spo_dr"};
  return registry;
}

bool is_known_method(const std::string& token) {
  const auto& reg = method_registry();
  return std::find(reg.begin(), reg.end(), token) != reg.end();
}

void ExperimentConfig::validate() const {
  if (rows < 2 || cols < 2) throw std::invalid_argument("config: grid must be at least 2x2");
  if (n_train.empty()) throw std::invalid_argument("config: n_train list is empty");
  for (int n : n_train) {
    if (n < 2) throw std::invalid_argument("config: n_train entries must be >= 2");
  }
  if (n_validation < 0) throw std::invalid_argument("config: n_validation must be >= 0");
  if (n_test < 1) throw std::invalid_argument("config: n_test must be positive");
  if (replications < 1) throw std::invalid_argument("config: replications must be positive");
  if (methods.empty()) throw std::invalid_argument("config: methods list is empty");
  for (const std::string& method : methods) {
    if (!is_known_method(method)) {
      throw std::invalid_argument("config: unknown method '" + method + "'");
    }
  }
  if (ridge_lambda < 0.0) throw std::invalid_argument("config: ridge_lambda must be >= 0");
  if (tree_depth < 0) throw std::invalid_argument("config: tree_depth must be >= 0");
  if (tree_min_leaf < 1) throw std::invalid_argument("config: tree_min_leaf must be >= 1");
  if (sgd.iterations < 1 || sgd.batch < 1 || sgd.step <= 0.0) {
    throw std::invalid_argument("config: bad SGD parameters");
  }
  if (cross_fit_folds < 2) throw std::invalid_argument("config: cross_fit_folds must be >= 2");
  if (design_sample < 1) throw std::invalid_argument("config: design_sample must be positive");
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_tokens(const std::string& s) {
  std::string normalized = s;
  for (char& c : normalized)
    if (c == ',') c = ' ';
  std::istringstream ss(normalized);
  std::vector<std::string> out;
  for (std::string tok; ss >> tok;) out.push_back(tok);
  return out;
}

int parse_int(const std::string& value, int line_no) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config line " + std::to_string(line_no) +
                                ": bad integer '" + value + "'");
  }
}

double parse_double(const std::string& value, int line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config line " + std::to_string(line_no) +
                                ": bad number '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& value, int line_no) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    throw std::invalid_argument("config line " + std::to_string(line_no) +
                                ": bad seed '" + value + "'");
  }
}

void apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& value,
               int line_no) {
  if (key == "rows") cfg.rows = parse_int(value, line_no);
  else if (key == "cols") cfg.cols = parse_int(value, line_no);
  else if (key == "n_train") {
    cfg.n_train.clear();
    for (const std::string& tok : split_tokens(value)) {
      cfg.n_train.push_back(parse_int(tok, line_no));
    }
  } else if (key == "n_validation") cfg.n_validation = parse_int(value, line_no);
  else if (key == "n_test") cfg.n_test = parse_int(value, line_no);
  else if (key == "replications") cfg.replications = parse_int(value, line_no);
  else if (key == "logging") cfg.logging = logging_kind_from_name(value);
  else if (key == "spec_f") cfg.spec_f = feature_spec_from_name(value);
  else if (key == "spec_fn") cfg.spec_fn = feature_spec_from_name(value);
  else if (key == "methods") cfg.methods = split_tokens(value);
  else if (key == "ridge_lambda") cfg.ridge_lambda = parse_double(value, line_no);
  else if (key == "propensity") cfg.propensity = propensity_kind_from_name(value);
  else if (key == "tree_depth") cfg.tree_depth = parse_int(value, line_no);
  else if (key == "tree_min_leaf") cfg.tree_min_leaf = parse_int(value, line_no);
  else if (key == "pinv_rel_tol") cfg.inverse_params.pinv_rel_tol = parse_double(value, line_no);
  else if (key == "inverse_lambda") cfg.inverse_params.lambda = parse_double(value, line_no);
  else if (key == "inverse_clip") cfg.inverse_params.clip = parse_double(value, line_no);
  else if (key == "sgd_iterations") cfg.sgd.iterations = parse_int(value, line_no);
  else if (key == "sgd_batch") cfg.sgd.batch = parse_int(value, line_no);
  else if (key == "sgd_step") cfg.sgd.step = parse_double(value, line_no);
  else if (key == "cross_fit_folds") cfg.cross_fit_folds = parse_int(value, line_no);
  else if (key == "design_sample") cfg.design_sample = parse_int(value, line_no);
  else if (key == "seed") cfg.seed = parse_u64(value, line_no);
  else {
    throw std::invalid_argument("config line " + std::to_string(line_no) +
                                ": unknown key '" + key + "'");
  }
}

}  // namespace

std::vector<ExperimentConfig> parse_experiment_configs(std::istream& in) {
  std::vector<ExperimentConfig> configs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": unterminated section header");
      }
      const std::vector<std::string> head = split_tokens(line.substr(1, line.size() - 2));
      if (head.size() != 2 || head[0] != "experiment" || head[1].empty()) {
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": expected [experiment NAME]");
      }
      configs.emplace_back();
      configs.back().name = head[1];
      continue;
    }
    if (configs.empty()) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": key outside any [experiment] section");
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": empty key or value");
    }
    apply_key(configs.back(), key, value, line_no);
  }
  if (configs.empty()) throw std::invalid_argument("config: no [experiment] sections found");
  for (const ExperimentConfig& cfg : configs) cfg.validate();
  return configs;
}

std::vector<ExperimentConfig> load_experiment_configs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  return parse_experiment_configs(in);
}

namespace {

PolicyArtifact learn_method(const std::string& token, const ExperimentConfig& config,
                            const BanditDataset& train, const BanditDataset& validation,
                            const GridInstance& g, const PathMatrix& paths,
                            std::uint64_t seed, std::ostream* warnings) {
  NuisanceConfig nuis;
  nuis.spec = config.spec_fn;
  nuis.ridge_lambda = config.ridge_lambda;
  nuis.propensity = config.propensity;
  nuis.tree_depth = config.tree_depth;
  nuis.tree_min_leaf = config.tree_min_leaf;
  nuis.inverse_params = config.inverse_params;

  SpoPlusConfig cfg;
  cfg.sgd = config.sgd;
  cfg.penalty_grid = standard_penalty_grid();

  const int folds = config.cross_fit_folds;
  if (token == "eto") {
    return eto_learn(train, paths, config.spec_f, config.ridge_lambda);
  }
  if (token == "spo_dm") {
    return ierm_spoplus_learn(train, validation, g, paths, config.spec_f, ScoreKind::DM,
                              nuis, cfg, seed, folds, warnings);
  }
  if (token == "spo_isw") {
    nuis.inverse = InverseVariant::PInv;
    return ierm_spoplus_learn(train, validation, g, paths, config.spec_f, ScoreKind::ISW,
                              nuis, cfg, seed, folds, warnings);
  }
  if (token == "spo_dr_pinv" || token == "spo_dr_lambda" || token == "spo_dr_clip") {
    nuis.inverse = token == "spo_dr_pinv"     ? InverseVariant::PInv
                   : token == "spo_dr_lambda" ? InverseVariant::Lambda
                                              : InverseVariant::Clip;
    return ierm_spoplus_learn(train, validation, g, paths, config.spec_f, ScoreKind::DR,
                              nuis, cfg, seed, folds, warnings);
  }
  if (token == "naive_eto") {
    return naive_learn(NaiveMethod::Eto, train, validation, paths, config.spec_f, nuis,
                       cfg, seed, warnings);
  }
  if (token == "naive_spo_dm") {
    return naive_learn(NaiveMethod::SpoDM, train, validation, paths, config.spec_f, nuis,
                       cfg, seed, warnings);
  }
  if (token == "naive_spo_ipw") {
    return naive_learn(NaiveMethod::SpoIPW, train, validation, paths, config.spec_f, nuis,
                       cfg, seed, warnings);
  }
  if (token == "naive_spo_dr") {
    return naive_learn(NaiveMethod::SpoDR, train, validation, paths, config.spec_f, nuis,
                       cfg, seed, warnings);
  }
  throw std::invalid_argument("unknown method '" + token + "'");
}

Eigen::MatrixXd normal_covariates(int n, std::uint64_t seed) {
  RandomStream rng(seed);
  Eigen::MatrixXd x(n, 3);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) x(i, j) = rng.normal();
  }
  return x;
}

}  // namespace

std::vector<ResultRecord> run_experiment(const ExperimentConfig& config, int jobs,
                                         std::ostream* warnings) {
  config.validate();
  const GridInstance g = build_grid(config.rows, config.cols);
  const PathMatrix paths = enumerate_paths(g);
  const GroundTruth gt = make_ground_truth(g.num_edges(), config.seed);
  const Eigen::MatrixXd design =
      normal_covariates(config.design_sample, derive_seed(config.seed, "policy_design"));
  const LoggingPolicy logging = build_logging_policy(config.logging, gt, g, paths, design);

  struct Task {
    int rep;
    int n;
    std::string method;
  };
  std::vector<Task> tasks;
  for (int rep = 0; rep < config.replications; ++rep) {
    for (int n : config.n_train) {
      for (const std::string& method : config.methods) tasks.push_back({rep, n, method});
    }
  }

  std::vector<ResultRecord> records(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex warn_mutex;

  auto worker = [&]() {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      const Task& task = tasks[t];
      ResultRecord rec;
      rec.method = task.method;
      rec.n_train = task.n;
      rec.replication = task.rep;
      rec.seed = derive_seed(config.seed, "method:" + task.method,
                             static_cast<std::uint64_t>(task.rep),
                             static_cast<std::uint64_t>(task.n));
      const auto t0 = std::chrono::steady_clock::now();
      std::ostringstream local_warn;
      try {
        const BanditDataset train =
            generate_dataset(gt, logging, paths, task.n,
                             derive_seed(config.seed, "data",
                                         static_cast<std::uint64_t>(task.rep),
                                         static_cast<std::uint64_t>(task.n)));
        const int n_val = config.n_validation > 0 ? config.n_validation : task.n;
        const BanditDataset validation =
            generate_dataset(gt, logging, paths, n_val,
                             derive_seed(config.seed, "validation",
                                         static_cast<std::uint64_t>(task.rep),
                                         static_cast<std::uint64_t>(task.n)));
        const Eigen::MatrixXd test_X = normal_covariates(
            config.n_test,
            derive_seed(config.seed, "test", static_cast<std::uint64_t>(task.rep)));

        const std::uint64_t gate_before =
            train.diagnostic_access_count() + validation.diagnostic_access_count();
        const PolicyArtifact artifact = learn_method(
            task.method, config, train, validation, g, paths, rec.seed, &local_warn);
        const std::uint64_t gate_after =
            train.diagnostic_access_count() + validation.diagnostic_access_count();
        if (gate_after != gate_before) {
          throw std::logic_error("hidden full feedback was accessed during learning");
        }
        rec.penalty = artifact.penalty;
        rec.rel_regret = relative_regret(gt, artifact, g, paths, test_X);
      } catch (const std::exception& ex) {
        rec.rel_regret = std::numeric_limits<double>::quiet_NaN();
        rec.penalty = std::numeric_limits<double>::quiet_NaN();
        local_warn << "error: " << config.name << " method=" << task.method
                   << " n=" << task.n << " rep=" << task.rep << ": " << ex.what() << "\n";
      }
      rec.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
      records[t] = std::move(rec);
      if (warnings) {
        const std::string text = local_warn.str();
        if (!text.empty()) {
          std::lock_guard<std::mutex> lock(warn_mutex);
          *warnings << text;
        }
      }
    }
  };

  int n_threads = jobs;
  if (n_threads < 1) {
    n_threads = static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads < 1) n_threads = 1;
  }
  n_threads = std::min<int>(n_threads, static_cast<int>(tasks.size()));
  std::vector<std::thread> pool;
  for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (std::thread& th : pool) th.join();

  std::sort(records.begin(), records.end(),
            [](const ResultRecord& a, const ResultRecord& b) {
              if (a.method != b.method) return a.method < b.method;
              if (a.n_train != b.n_train) return a.n_train < b.n_train;
              return a.replication < b.replication;
            });
  return records;
}

void write_results_csv(const std::vector<ResultRecord>& records, std::ostream& out) {
  out << "method,n_train,replication,rel_regret,penalty,seed,wall_ms\n";
  char buf[64];
  for (const ResultRecord& rec : records) {
    out << rec.method << ',' << rec.n_train << ',' << rec.replication << ',';
    std::snprintf(buf, sizeof buf, "%.17g", rec.rel_regret);
    out << buf << ',';
    std::snprintf(buf, sizeof buf, "%.17g", rec.penalty);
    out << buf << ',' << rec.seed << ',' << rec.wall_ms << '\n';
  }
}

void write_results_csv(const std::vector<ResultRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file " + path);
  write_results_csv(records, out);
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::vector<ResultRecord> read_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open results file " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty results file " + path);
  if (trim(line) != "method,n_train,replication,rel_regret,penalty,seed,wall_ms") {
    throw std::runtime_error("unexpected results header in " + path);
  }
  std::vector<ResultRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 7) {
      throw std::runtime_error("results line " + std::to_string(line_no) +
                               ": expected 7 fields");
    }
    ResultRecord rec;
    rec.method = fields[0];
    rec.n_train = parse_int(fields[1], line_no);
    rec.replication = parse_int(fields[2], line_no);
    rec.rel_regret = parse_double(fields[3], line_no);
    rec.penalty = parse_double(fields[4], line_no);
    rec.seed = parse_u64(fields[5], line_no);
    rec.wall_ms = static_cast<long long>(parse_double(fields[6], line_no));
    records.push_back(std::move(rec));
  }
  return records;
}

SummaryTable aggregate(const std::vector<ResultRecord>& records) {
  if (records.empty()) throw std::invalid_argument("aggregate: no records");
  SummaryTable table;
  std::map<std::pair<std::string, int>, std::vector<double>> values;
  std::vector<std::string> seen_methods;
  for (const ResultRecord& rec : records) {
    if (std::find(seen_methods.begin(), seen_methods.end(), rec.method) ==
        seen_methods.end()) {
      seen_methods.push_back(rec.method);
    }
    if (std::find(table.ns.begin(), table.ns.end(), rec.n_train) == table.ns.end()) {
      table.ns.push_back(rec.n_train);
    }
    if (std::isnan(rec.rel_regret)) continue;  // error record
    values[{rec.method, rec.n_train}].push_back(rec.rel_regret);
  }
  std::sort(table.ns.begin(), table.ns.end());

  // Registry order first, then anything nonstandard in first-seen order.
  for (const std::string& method : method_registry()) {
    if (std::find(seen_methods.begin(), seen_methods.end(), method) != seen_methods.end()) {
      table.methods.push_back(method);
    }
  }
  for (const std::string& method : seen_methods) {
    if (std::find(table.methods.begin(), table.methods.end(), method) ==
        table.methods.end()) {
      table.methods.push_back(method);
    }
  }

  for (const auto& [key, vals] : values) {
    SummaryCell cell;
    cell.count = static_cast<int>(vals.size());
    double sum = 0.0;
    for (double v : vals) sum += v;
    cell.mean = sum / static_cast<double>(vals.size());
    if (vals.size() > 1) {
      double ss = 0.0;
      for (double v : vals) ss += (v - cell.mean) * (v - cell.mean);
      cell.se = std::sqrt(ss / (static_cast<double>(vals.size()) - 1.0) /
                          static_cast<double>(vals.size()));
    }
    table.cells[key] = cell;
  }
  return table;
}

std::string render_summary(const SummaryTable& table) {
  std::size_t method_width = 8;
  for (const std::string& method : table.methods) {
    method_width = std::max(method_width, method.size());
  }
  const int cell_width = 18;
  std::ostringstream out;
  out << std::string(method_width, ' ');
  char buf[64];
  for (int n : table.ns) {
    std::snprintf(buf, sizeof buf, "  %-*s", cell_width, ("n=" + std::to_string(n)).c_str());
    out << buf;
  }
  out << "\n";
  for (const std::string& method : table.methods) {
    std::snprintf(buf, sizeof buf, "%-*s", static_cast<int>(method_width), method.c_str());
    out << buf;
    for (int n : table.ns) {
      const auto it = table.cells.find({method, n});
      if (it == table.cells.end()) {
        out << "  " << std::string(cell_width, ' ');
      } else {
        char cell[48];
        std::snprintf(cell, sizeof cell, "%.2f%% (%.2f%%)", it->second.mean * 100.0,
                      it->second.se * 100.0);
        std::snprintf(buf, sizeof buf, "  %-*s", cell_width, cell);
        out << buf;
      }
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace clo
