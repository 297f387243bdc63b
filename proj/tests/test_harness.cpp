#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "clo/harness.hpp"
#include "clo/rng.hpp"

using namespace clo;

namespace {

std::vector<ExperimentConfig> parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse_experiment_configs(in);
}

std::string thrown_message(const std::string& text) {
  try {
    parse_string(text);
  } catch (const std::invalid_argument& ex) {
    return ex.what();
  }
  return "";
}

// Drops the trailing wall-clock column, the only field allowed to differ
// between reruns of the same configuration.
std::string strip_last_field(const std::string& csv) {
  std::ostringstream out;
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);) {
    const std::size_t comma = line.rfind(',');
    out << line.substr(0, comma) << '\n';
  }
  return out.str();
}

ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.name = "tiny";
  cfg.n_train = {400};
  cfg.n_test = 500;
  cfg.replications = 2;
  cfg.methods = {"eto"};
  cfg.seed = 3;
  return cfg;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("method registry covers the canonical tokens") {
    const auto& reg = method_registry();
    CHECK(reg.size() == 10);
    CHECK(reg.front() == "eto");
    for (const std::string& tok :
         {std::string("spo_dm"), std::string("spo_isw"), std::string("spo_dr_pinv"),
          std::string("spo_dr_lambda"), std::string("spo_dr_clip"), std::string("naive_eto"),
          std::string("naive_spo_dm"), std::string("naive_spo_ipw"),
          std::string("naive_spo_dr")}) {
      CHECK(is_known_method(tok));
    }
    CHECK_FALSE(is_known_method("warp"));
  }

  TEST_CASE("config files parse sections, comments, and lists") {
    const std::string text =
        "# regret sweep\n"
        "[experiment alpha]\n"
        "n_train = 400, 1600\n"
        "methods = eto, spo_dm   # two methods\n"
        "logging = x1x2\n"
        "spec_f = deg2\n"
        "spec_fn = well\n"
        "replications = 3\n"
        "seed = 9\n"
        "sgd_step = 0.25\n"
        "\n"
        "[experiment beta]\n"
        "methods = naive_eto\n"
        "n_train = 250\n";
    std::vector<ExperimentConfig> configs = parse_string(text);
    REQUIRE(configs.size() == 2);
    const ExperimentConfig& a = configs[0];
    CHECK(a.name == "alpha");
    CHECK(a.n_train == std::vector<int>{400, 1600});
    CHECK(a.methods == std::vector<std::string>{"eto", "spo_dm"});
    CHECK(a.logging == LoggingKind::X1X2Policy);
    CHECK(a.spec_f == FeatureSpec::MisspecDeg2);
    CHECK(a.spec_fn == FeatureSpec::WellSpecified);
    CHECK(a.replications == 3);
    CHECK(a.seed == 9);
    CHECK(a.sgd.step == 0.25);
    CHECK(a.rows == 5);
    CHECK(a.n_test == 2000);
    const ExperimentConfig& b = configs[1];
    CHECK(b.name == "beta");
    CHECK(b.methods == std::vector<std::string>{"naive_eto"});
    CHECK(b.n_train == std::vector<int>{250});
    CHECK(b.replications == 20);
    CHECK(b.seed == 1);
  }

  TEST_CASE("config parsing reports the offending line") {
    CHECK_THROWS_AS(parse_string("[experiment a]\nbogus = 1\n"), std::invalid_argument);
    CHECK(thrown_message("[experiment a]\nseed = 1\nbogus = 1\n").find("line 3") !=
          std::string::npos);
    CHECK(thrown_message("[experiment a]\nbogus = 1\n").find("bogus") != std::string::npos);
    CHECK_THROWS_AS(parse_string("n_train = 400\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_string("[experiment a\nseed = 1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_string("[experiment a]\nn_train = 40x\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_string("[experiment a]\nseed =\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_string("# nothing here\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_string("[experiment a]\nmethods = eto, warp\n"),
                    std::invalid_argument);
  }

  TEST_CASE("config validation rejects bad values") {
    ExperimentConfig cfg = tiny_config();
    CHECK_NOTHROW(cfg.validate());
    cfg.replications = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = tiny_config();
    cfg.rows = 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = tiny_config();
    cfg.methods = {"warp"};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = tiny_config();
    cfg.methods.clear();
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = tiny_config();
    cfg.cross_fit_folds = 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = tiny_config();
    cfg.sgd.batch = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = tiny_config();
    cfg.n_train = {400, 1};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }

  TEST_CASE("an experiment run yields one record per task") {
    ExperimentConfig cfg = tiny_config();
    std::ostringstream warnings;
    std::vector<ResultRecord> records = run_experiment(cfg, 2, &warnings);
    REQUIRE(records.size() == 2);
    CHECK(warnings.str().empty());
    for (int rep = 0; rep < 2; ++rep) {
      const ResultRecord& rec = records[static_cast<std::size_t>(rep)];
      CHECK(rec.method == "eto");
      CHECK(rec.n_train == 400);
      CHECK(rec.replication == rep);
      CHECK(std::isfinite(rec.rel_regret));
      CHECK(rec.rel_regret >= 0.0);
      CHECK(std::isnan(rec.penalty));  // plain regression tunes no penalty
      CHECK(rec.seed == derive_seed(cfg.seed, "method:eto",
                                    static_cast<std::uint64_t>(rep), 400));
      CHECK(rec.wall_ms >= 0);
    }
    CHECK(records[0].rel_regret != records[1].rel_regret);
  }

  TEST_CASE("replications are independent of the requested count") {
    ExperimentConfig cfg = tiny_config();
    std::vector<ResultRecord> two = run_experiment(cfg, 1);
    cfg.replications = 1;
    std::vector<ResultRecord> one = run_experiment(cfg, 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0].rel_regret == two[0].rel_regret);
    CHECK(one[0].seed == two[0].seed);
  }

  TEST_CASE("reruns are byte-identical apart from wall time") {
    ExperimentConfig cfg = tiny_config();
    cfg.methods = {"eto", "naive_eto"};
    std::ostringstream a, b;
    write_results_csv(run_experiment(cfg, 2), a);
    write_results_csv(run_experiment(cfg, 1), b);
    CHECK(strip_last_field(a.str()) == strip_last_field(b.str()));
  }

  TEST_CASE("tuned methods record the selected penalty") {
    ExperimentConfig cfg = tiny_config();
    cfg.methods = {"spo_dm"};
    cfg.n_train = {300};
    cfg.n_test = 300;
    cfg.replications = 1;
    cfg.sgd.iterations = 60;
    std::vector<ResultRecord> records = run_experiment(cfg, 1);
    REQUIRE(records.size() == 1);
    CHECK(std::isfinite(records[0].rel_regret));
    bool on_halved_grid = false;
    for (double p : standard_penalty_grid()) {
      if (records[0].penalty == p / 2.0) on_halved_grid = true;
    }
    CHECK(on_halved_grid);
  }

  TEST_CASE("result records survive the CSV round trip") {
    ExperimentConfig cfg = tiny_config();
    std::vector<ResultRecord> records = run_experiment(cfg, 2);
    ResultRecord failed;
    failed.method = "spo_dm";
    failed.n_train = 400;
    failed.replication = 7;
    failed.rel_regret = std::numeric_limits<double>::quiet_NaN();
    failed.penalty = std::numeric_limits<double>::quiet_NaN();
    failed.seed = 123456789ull;
    failed.wall_ms = 42;
    records.push_back(failed);
    const std::string path =
        (std::filesystem::temp_directory_path() / "clo_results_roundtrip.csv").string();
    write_results_csv(records, path);
    std::vector<ResultRecord> back = read_results_csv(path);
    REQUIRE(back.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      CHECK(back[i].method == records[i].method);
      CHECK(back[i].n_train == records[i].n_train);
      CHECK(back[i].replication == records[i].replication);
      if (std::isnan(records[i].rel_regret)) {
        CHECK(std::isnan(back[i].rel_regret));
        CHECK(std::isnan(back[i].penalty));
      } else {
        CHECK(back[i].rel_regret == records[i].rel_regret);
      }
      CHECK(back[i].seed == records[i].seed);
      CHECK(back[i].wall_ms == records[i].wall_ms);
    }
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_results_csv(path), std::runtime_error);
  }

  TEST_CASE("aggregation averages good records and drops failures") {
    std::vector<ResultRecord> records;
    ResultRecord r;
    r.method = "spo_dm";
    r.n_train = 400;
    r.replication = 0;
    r.rel_regret = 0.01;
    records.push_back(r);
    r.replication = 1;
    r.rel_regret = 0.03;
    records.push_back(r);
    r.replication = 2;
    r.rel_regret = std::numeric_limits<double>::quiet_NaN();
    records.push_back(r);
    r.method = "eto";
    r.n_train = 1600;
    r.rel_regret = 0.02;
    records.push_back(r);
    r.method = "naive_eto";
    r.n_train = 400;
    r.rel_regret = std::numeric_limits<double>::quiet_NaN();
    records.push_back(r);

    SummaryTable table = aggregate(records);
    CHECK(table.ns == std::vector<int>{400, 1600});
    // Registry order, regardless of record order.
    CHECK(table.methods ==
          std::vector<std::string>{"eto", "spo_dm", "naive_eto"});
    const SummaryCell& cell = table.cells.at({"spo_dm", 400});
    CHECK(cell.count == 2);
    CHECK(cell.mean == doctest::Approx(0.02).epsilon(1e-15));
    CHECK(cell.se == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(table.cells.count({"naive_eto", 400}) == 0);  // all runs failed
    const SummaryCell& single = table.cells.at({"eto", 1600});
    CHECK(single.count == 1);
    CHECK(single.se == 0.0);
    CHECK_THROWS_AS(aggregate({}), std::invalid_argument);

    const std::string text = render_summary(table);
    CHECK(text.find("n=400") != std::string::npos);
    CHECK(text.find("n=1600") != std::string::npos);
    CHECK(text.find("2.00% (1.00%)") != std::string::npos);
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      if (line.rfind("naive_eto", 0) == 0) {
        CHECK(line.find('%') == std::string::npos);  // blank cells, no numbers
      }
    }
  }
}
