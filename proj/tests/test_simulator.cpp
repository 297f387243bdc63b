#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <set>
#include <vector>

#include "clo/rng.hpp"
#include "clo/simulator.hpp"

using namespace clo;

namespace {

struct World {
  GridInstance g = build_grid(5, 5);
  PathMatrix paths = enumerate_paths(g);
  GroundTruth gt = make_ground_truth(40, 9001);
  Eigen::MatrixXd design;

  World() {
    RandomStream rng(derive_seed(9001, "design"));
    design.resize(500, 3);
    for (int i = 0; i < design.rows(); ++i)
      for (int j = 0; j < 3; ++j) design(i, j) = rng.normal();
  }
};

}  // namespace

TEST_SUITE("simulator") {
  TEST_CASE("ground truth has exact intercept 3 and unit-interval slopes") {
    const GroundTruth gt = make_ground_truth(40, 1234);
    REQUIRE(gt.W.rows() == 40);
    REQUIRE(gt.W.cols() == 8);
    for (int e = 0; e < 40; ++e) {
      CHECK(gt.W(e, 0) == 3.0);
      for (int j = 1; j < 8; ++j) {
        CHECK(gt.W(e, j) >= 0.0);
        CHECK(gt.W(e, j) <= 1.0);
      }
    }
    // f0 at the origin is the bare intercept; at all-ones x every basis term
    // is 1 so the value is 3 plus the row sum of the non-constant columns.
    Eigen::VectorXd at0 = gt.f0(Eigen::Vector3d::Zero());
    Eigen::VectorXd at1 = gt.f0(Eigen::Vector3d::Ones());
    for (int e = 0; e < 40; ++e) {
      CHECK(at0[e] == 3.0);
      CHECK(at1[e] ==
            doctest::Approx(3.0 + gt.W.row(e).tail(7).sum()).epsilon(1e-15));
    }
  }

  TEST_CASE("ground truth embeds as a well-specified hypothesis") {
    const GroundTruth gt = make_ground_truth(40, 77);
    const LinearHypothesis h = gt.as_hypothesis();
    CHECK(h.spec == FeatureSpec::WellSpecified);
    RandomStream rng(derive_seed(77, "embed_test"));
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::Vector3d x{rng.normal(), rng.normal(), rng.normal()};
      CHECK((h.predict(x) - gt.f0(x)).lpNorm<Eigen::Infinity>() == 0.0);
    }
  }

  TEST_CASE("full samples keep noise inside the half-width band") {
    const GroundTruth gt = make_ground_truth(40, 31);
    const FullSample s = sample_full(gt, 2000, derive_seed(31, "full"));
    REQUIRE(s.X.rows() == 2000);
    REQUIRE(s.Y.rows() == 2000);
    double worst = 0.0;
    for (int i = 0; i < s.X.rows(); ++i) {
      Eigen::Vector3d x = s.X.row(i).transpose();
      worst = std::max(worst,
                       (s.Y.row(i).transpose() - gt.f0(x)).lpNorm<Eigen::Infinity>());
    }
    CHECK(worst <= 0.5);
    CHECK(worst > 0.25);  // noise actually moves; catches a silent zero-noise bug
  }

  TEST_CASE("noise is centered and covariates are standard normal") {
    const GroundTruth gt = make_ground_truth(40, 5150);
    const int n = 100000;
    const FullSample s = sample_full(gt, n, derive_seed(5150, "full"));
    Eigen::VectorXd mean_noise = Eigen::VectorXd::Zero(40);
    for (int i = 0; i < n; ++i) {
      Eigen::Vector3d x = s.X.row(i).transpose();
      mean_noise += s.Y.row(i).transpose() - gt.f0(x);
    }
    mean_noise /= n;
    // Unif[-0.5, 0.5] has sd sqrt(1/12); four standard errors.
    const double tol = 4.0 * std::sqrt(1.0 / 12.0 / n);
    CHECK(mean_noise.lpNorm<Eigen::Infinity>() <= tol);

    Eigen::Matrix3d cov = (s.X.transpose() * s.X) / n;
    CHECK((cov - Eigen::Matrix3d::Identity()).lpNorm<Eigen::Infinity>() <= 0.02);
    CHECK(s.X.colwise().mean().lpNorm<Eigen::Infinity>() <= 0.02);
  }

  TEST_CASE("uniform logging weights every path at 1/70") {
    World w;
    const LoggingPolicy pol =
        build_logging_policy(LoggingKind::UniformRandom, w.gt, w.g, w.paths, w.design);
    CHECK(pol.num_profiles() == 1);
    CHECK(pol.removed.empty());
    const Eigen::VectorXd& p = pol.profile_probs(0);
    REQUIRE(p.size() == 70);
    for (int j = 0; j < 70; ++j) CHECK(p[j] == doctest::Approx(1.0 / 70).epsilon(1e-15));
  }

  TEST_CASE("sign-conditioned logging removes 20 paths and splits the rest") {
    World w;
    for (LoggingKind kind : {LoggingKind::X1Policy, LoggingKind::X1X2Policy}) {
      const LoggingPolicy pol = build_logging_policy(kind, w.gt, w.g, w.paths, w.design);
      CHECK(pol.removed.size() == 20);
      CHECK(pol.group_a.size() == 25);
      CHECK(pol.group_b.size() == 25);
      std::set<int> all(pol.removed.begin(), pol.removed.end());
      all.insert(pol.group_a.begin(), pol.group_a.end());
      all.insert(pol.group_b.begin(), pol.group_b.end());
      CHECK(all.size() == 70);  // removal and groups partition the paths
      // Retained paths are split by enumeration order: the first 25 go to
      // group a, the last 25 to group b.
      std::vector<int> retained;
      for (int j = 0; j < 70; ++j)
        if (!std::count(pol.removed.begin(), pol.removed.end(), j)) retained.push_back(j);
      CHECK(std::vector<int>(retained.begin(), retained.begin() + 25) == pol.group_a);
      CHECK(std::vector<int>(retained.begin() + 25, retained.end()) == pol.group_b);
      for (int j : pol.removed) {
        for (int profile = 0; profile < pol.num_profiles(); ++profile)
          CHECK(pol.profile_probs(profile)[j] == 0.0);
      }
    }
  }

  TEST_CASE("sign-conditioned group probabilities match the stated pattern") {
    World w;
    const LoggingPolicy x1 =
        build_logging_policy(LoggingKind::X1Policy, w.gt, w.g, w.paths, w.design);
    // positive first coordinate: each favored path carries (2/3)/25 = 2/75
    Eigen::Vector3d pos{0.5, 0.0, 0.0}, neg{-0.5, 0.0, 0.0};
    CHECK(x1.probs(pos)[x1.group_a[0]] == doctest::Approx(2.0 / 75).epsilon(1e-15));
    CHECK(x1.probs(pos)[x1.group_b[0]] == doctest::Approx(1.0 / 75).epsilon(1e-15));
    CHECK(x1.probs(neg)[x1.group_a[0]] == doctest::Approx(1.0 / 75).epsilon(1e-15));
    CHECK(x1.group_a_prob(x1.profile_index(pos)) == doctest::Approx(2.0 / 3).epsilon(1e-15));
    CHECK(x1.group_a_prob(x1.profile_index(neg)) == doctest::Approx(1.0 / 3).epsilon(1e-15));

    const LoggingPolicy x12 =
        build_logging_policy(LoggingKind::X1X2Policy, w.gt, w.g, w.paths, w.design);
    auto pa = [&](double a, double b) {
      return x12.group_a_prob(x12.profile_index(Eigen::Vector3d{a, b, 0.0}));
    };
    CHECK(pa(1, 1) == doctest::Approx(2.0 / 3).epsilon(1e-15));
    CHECK(pa(1, -1) == doctest::Approx(1.0 / 3).epsilon(1e-15));
    CHECK(pa(-1, 1) == doctest::Approx(3.0 / 4).epsilon(1e-15));
    CHECK(pa(-1, -1) == doctest::Approx(1.0 / 4).epsilon(1e-15));
    for (int profile = 0; profile < 4; ++profile)
      CHECK(x12.profile_probs(profile).sum() == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("sampling respects support and group frequencies") {
    World w;
    const LoggingPolicy pol =
        build_logging_policy(LoggingKind::X1Policy, w.gt, w.g, w.paths, w.design);
    RandomStream rng(derive_seed(9001, "sample_test"));
    Eigen::Vector3d pos{1.0, 0.0, 0.0};
    int in_a = 0;
    const int n = 5000;
    for (int i = 0; i < n; ++i) {
      int z = pol.sample(pos, rng);
      CHECK(std::count(pol.removed.begin(), pol.removed.end(), z) == 0);
      in_a += std::count(pol.group_a.begin(), pol.group_a.end(), z);
    }
    CHECK(std::abs(in_a / double(n) - 2.0 / 3.0) < 0.03);
  }

  TEST_CASE("uniform path frequencies concentrate at 1/70") {
    World w;
    const LoggingPolicy pol =
        build_logging_policy(LoggingKind::UniformRandom, w.gt, w.g, w.paths, w.design);
    const BanditDataset data =
        generate_dataset(w.gt, pol, w.paths, 70000, derive_seed(9001, "freq"));
    std::vector<int> counts(70, 0);
    for (int z : data.Z) ++counts[z];
    const double p = 1.0 / 70, se = std::sqrt(p * (1 - p) / 70000);
    for (int j = 0; j < 70; ++j)
      CHECK(std::abs(counts[j] / 70000.0 - p) <= 4 * se);
  }

  TEST_CASE("logged costs equal the hidden feedback at the chosen path") {
    World w;
    const LoggingPolicy pol =
        build_logging_policy(LoggingKind::UniformRandom, w.gt, w.g, w.paths, w.design);
    const BanditDataset data =
        generate_dataset(w.gt, pol, w.paths, 200, derive_seed(9001, "cost"));
    REQUIRE(data.has_hidden_feedback());
    CHECK(data.diagnostic_access_count() == 0);
    const Eigen::MatrixXd& y = data.diagnostic_full_feedback();
    CHECK(data.diagnostic_access_count() == 1);
    for (int i = 0; i < data.n(); ++i) {
      double want = 0;
      for (int e : w.paths.edge_lists[data.Z[i]]) want += y(i, e);
      CHECK(data.C[i] == doctest::Approx(want).epsilon(1e-15));
      // costs live near 8 edges x [2.5, 3.5+slope] at standard-normal x
      CHECK(std::isfinite(data.C[i]));
    }
  }

  TEST_CASE("subsetting drops hidden feedback and keeps rows aligned") {
    World w;
    const LoggingPolicy pol =
        build_logging_policy(LoggingKind::UniformRandom, w.gt, w.g, w.paths, w.design);
    const BanditDataset data =
        generate_dataset(w.gt, pol, w.paths, 50, derive_seed(9001, "subset"));
    const BanditDataset sub = data.subset({3, 7, 11});
    CHECK(sub.n() == 3);
    CHECK_FALSE(sub.has_hidden_feedback());
    CHECK_THROWS_AS(sub.diagnostic_full_feedback(), std::logic_error);
    CHECK(sub.X.row(0) == data.X.row(3));
    CHECK(sub.Z[1] == data.Z[7]);
    CHECK(sub.C[2] == data.C[11]);
  }

  TEST_CASE("dataset generation is deterministic and kind-sensitive") {
    World w;
    const LoggingPolicy pol =
        build_logging_policy(LoggingKind::X1Policy, w.gt, w.g, w.paths, w.design);
    const BanditDataset a = generate_dataset(w.gt, pol, w.paths, 100, 424242);
    const BanditDataset b = generate_dataset(w.gt, pol, w.paths, 100, 424242);
    CHECK((a.X - b.X).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(a.Z == b.Z);
    CHECK((a.C - b.C).lpNorm<Eigen::Infinity>() == 0.0);
    for (int z : a.Z)
      CHECK(std::count(pol.removed.begin(), pol.removed.end(), z) == 0);
  }

  TEST_CASE("dataset CSV round-trips without the hidden feedback") {
    World w;
    const LoggingPolicy pol =
        build_logging_policy(LoggingKind::UniformRandom, w.gt, w.g, w.paths, w.design);
    const BanditDataset data =
        generate_dataset(w.gt, pol, w.paths, 40, derive_seed(9001, "csv"));
    const std::string path = "test_dataset_roundtrip.csv";
    write_dataset_csv(data, path);
    const BanditDataset back = read_dataset_csv(path);
    std::remove(path.c_str());
    REQUIRE(back.n() == data.n());
    CHECK((back.X - data.X).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(back.Z == data.Z);
    CHECK((back.C - data.C).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK_FALSE(back.has_hidden_feedback());
  }

  TEST_CASE("logging token names round-trip") {
    for (LoggingKind kind :
         {LoggingKind::UniformRandom, LoggingKind::X1Policy, LoggingKind::X1X2Policy})
      CHECK(logging_kind_from_name(logging_kind_name(kind)) == kind);
    CHECK_THROWS_AS(logging_kind_from_name("thompson"), std::invalid_argument);
  }
}
