#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "clo/evaluation.hpp"
#include "clo/harness.hpp"
#include "clo/learners.hpp"
#include "clo/rng.hpp"
#include "clo/simulator.hpp"

namespace {

clo::LoggingPolicy make_policy_for(const clo::GroundTruth& gt, const clo::GridInstance& g,
                                   const clo::PathMatrix& paths, clo::LoggingKind kind,
                                   std::uint64_t seed, int design_sample) {
  clo::RandomStream rng(clo::derive_seed(seed, "policy_design"));
  Eigen::MatrixXd design(design_sample, 3);
  for (int i = 0; i < design_sample; ++i) {
    for (int j = 0; j < 3; ++j) design(i, j) = rng.normal();
  }
  return clo::build_logging_policy(kind, gt, g, paths, design);
}

std::string experiment_out_path(const std::string& out, const std::string& name,
                                bool single) {
  if (out.empty()) return name + ".csv";
  if (single) return out;
  const std::size_t dot = out.rfind('.');
  if (dot == std::string::npos || out.find('/', dot) != std::string::npos) {
    return out + "." + name;
  }
  return out.substr(0, dot) + "." + name + out.substr(dot);
}

int run_generate(const std::string& out, std::uint64_t seed, int n,
                 const std::string& logging, int rep) {
  const clo::GridInstance g = clo::build_grid(5, 5);
  const clo::PathMatrix paths = clo::enumerate_paths(g);
  const clo::GroundTruth gt = clo::make_ground_truth(g.num_edges(), seed);
  const clo::LoggingPolicy policy =
      make_policy_for(gt, g, paths, clo::logging_kind_from_name(logging), seed, 4000);
  const clo::BanditDataset data = clo::generate_dataset(
      gt, policy, paths, n,
      clo::derive_seed(seed, "data", static_cast<std::uint64_t>(rep),
                       static_cast<std::uint64_t>(n)));
  clo::write_dataset_csv(data, out);
  std::cout << "wrote " << n << " logged samples (" << logging << " logging) to " << out
            << "\n";
  return 0;
}

int run_run(const std::string& config_path, std::uint64_t seed_override, bool has_seed,
            int jobs, const std::string& out) {
  std::vector<clo::ExperimentConfig> configs = clo::load_experiment_configs(config_path);
  for (clo::ExperimentConfig& config : configs) {
    if (has_seed) config.seed = seed_override;
    const std::string path = experiment_out_path(out, config.name, configs.size() == 1);
    const std::vector<clo::ResultRecord> records =
        clo::run_experiment(config, jobs, &std::cerr);
    clo::write_results_csv(records, path);
    std::cout << "[" << config.name << "] -> " << path << "\n"
              << clo::render_summary(clo::aggregate(records)) << "\n";
  }
  return 0;
}

int run_audit(const std::string& score_name, const std::string& mode_name,
              const std::string& policy_name, const std::string& logging, long long draws,
              std::uint64_t seed, double max_z, bool expect_bias, double min_z) {
  const clo::GridInstance g = clo::build_grid(5, 5);
  const clo::PathMatrix paths = clo::enumerate_paths(g);
  const clo::GroundTruth gt = clo::make_ground_truth(g.num_edges(), seed);
  const clo::LoggingPolicy log_policy =
      make_policy_for(gt, g, paths, clo::logging_kind_from_name(logging), seed, 4000);

  clo::ScoreKind score;
  if (score_name == "dm") score = clo::ScoreKind::DM;
  else if (score_name == "isw") score = clo::ScoreKind::ISW;
  else if (score_name == "dr") score = clo::ScoreKind::DR;
  else if (score_name == "naive_dm") score = clo::ScoreKind::NaiveDM;
  else if (score_name == "naive_ipw") score = clo::ScoreKind::NaiveIPW;
  else if (score_name == "naive_dr") score = clo::ScoreKind::NaiveDR;
  else {
    std::cerr << "unknown score '" << score_name << "'\n";
    return 2;
  }

  clo::PolicyArtifact policy;
  const bool naive = clo::score_is_naive(score);
  policy.form = naive ? clo::PolicyArtifact::Form::ActionIndex
                      : clo::PolicyArtifact::Form::LinearPlugin;
  policy.hypothesis.spec = clo::FeatureSpec::WellSpecified;
  const int rows = naive ? paths.num_paths() : g.num_edges();
  if (policy_name == "tiebreak") {
    policy.hypothesis.W = Eigen::MatrixXd::Zero(rows, 8);
    policy.method = "tiebreak";
  } else if (policy_name == "optimal") {
    policy.hypothesis.W = naive ? Eigen::MatrixXd(paths.incidence * gt.W) : gt.W;
    policy.method = "optimal";
  } else if (policy_name == "random") {
    clo::RandomStream rng(clo::derive_seed(seed, "audit_policy"));
    policy.hypothesis.W.resize(rows, 8);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < 8; ++j) policy.hypothesis.W(i, j) = rng.uniform01();
    }
    policy.method = "random";
  } else {
    std::cerr << "unknown policy '" << policy_name << "' (tiebreak|optimal|random)\n";
    return 2;
  }

  const clo::AuditResult result =
      clo::mc_unbiasedness_audit(score, clo::parse_nuisance_mode(mode_name), policy, gt,
                                 log_policy, g, paths, draws, seed);
  std::printf("score=%s mode=%s policy=%s N=%lld\n", score_name.c_str(), mode_name.c_str(),
              policy_name.c_str(), draws);
  std::printf("estimate=%.6f reference=%.6f se=%.6f z=%.3f\n", result.estimate,
              result.reference, result.se, result.zscore);
  const double az = std::abs(result.zscore);
  if (expect_bias) {
    if (az > min_z) {
      std::printf("OK: bias detected (|z| = %.3f > %.1f)\n", az, min_z);
      return 0;
    }
    std::printf("VIOLATION: expected bias not detected (|z| = %.3f <= %.1f)\n", az, min_z);
    return 1;
  }
  if (az <= max_z) {
    std::printf("OK: unbiased within noise (|z| = %.3f <= %.1f)\n", az, max_z);
    return 0;
  }
  std::printf("VIOLATION: |z| = %.3f > %.1f\n", az, max_z);
  return 1;
}

int run_report(const std::vector<std::string>& csvs) {
  for (const std::string& path : csvs) {
    const std::vector<clo::ResultRecord> records = clo::read_results_csv(path);
    std::cout << "== " << path << " ==\n"
              << clo::render_summary(clo::aggregate(records)) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual linear optimization from logged bandit data"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "emit a logged dataset file");
  std::string gen_out = "dataset.csv";
  std::uint64_t gen_seed = 1;
  int gen_n = 400;
  std::string gen_logging = "uniform";
  int gen_rep = 0;
  gen->add_option("--out", gen_out, "output path");
  gen->add_option("--seed", gen_seed, "root seed");
  gen->add_option("-n,--samples", gen_n, "number of logged samples");
  gen->add_option("--logging", gen_logging, "logging policy (uniform|x1|x1x2)");
  gen->add_option("--rep", gen_rep, "replication index in the seed derivation");

  auto* run = app.add_subcommand("run", "execute an experiment config");
  std::string run_config;
  std::uint64_t run_seed = 0;
  int run_jobs = 0;
  std::string run_out;
  run->add_option("--config", run_config, "experiment config path")->required();
  auto* seed_opt = run->add_option("--seed", run_seed, "override every experiment seed");
  run->add_option("--jobs", run_jobs, "worker threads (0: all cores)");
  run->add_option("--out", run_out, "results CSV path");

  auto* audit = app.add_subcommand("audit", "Monte-Carlo score audits");
  std::string audit_score = "dr";
  std::string audit_mode = "true";
  std::string audit_policy = "optimal";
  std::string audit_logging = "uniform";
  long long audit_n = 1000000;
  std::uint64_t audit_seed = 1;
  double audit_max_z = 4.0;
  double audit_min_z = 6.0;
  bool audit_expect_bias = false;
  audit->add_option("--score", audit_score, "dm|isw|dr|naive_dm|naive_ipw|naive_dr");
  audit->add_option("--mode", audit_mode, "true|perturbed_f|wrong_sigma");
  audit->add_option("--policy", audit_policy, "tiebreak|optimal|random");
  audit->add_option("--logging", audit_logging, "uniform|x1|x1x2");
  audit->add_option("-N,--draws", audit_n, "Monte-Carlo draws");
  audit->add_option("--seed", audit_seed, "root seed");
  audit->add_option("--max-z", audit_max_z, "pass threshold on |z|");
  audit->add_flag("--expect-bias", audit_expect_bias, "require |z| above --min-z instead");
  audit->add_option("--min-z", audit_min_z, "detection threshold with --expect-bias");

  auto* report = app.add_subcommand("report", "aggregate results CSV to a table");
  std::vector<std::string> report_csvs;
  report->add_option("csv", report_csvs, "results CSV files")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return run_generate(gen_out, gen_seed, gen_n, gen_logging, gen_rep);
    if (run->parsed())
      return run_run(run_config, run_seed, seed_opt->count() > 0, run_jobs, run_out);
    if (audit->parsed())
      return run_audit(audit_score, audit_mode, audit_policy, audit_logging, audit_n,
                       audit_seed, audit_max_z, audit_expect_bias, audit_min_z);
    if (report->parsed()) return run_report(report_csvs);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
