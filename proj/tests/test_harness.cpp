#include "distlr/harness.hpp"

#include <algorithm>
#include <cmath>

#include "doctest.h"

using distlr::ExtendedReal;
using distlr::Matrix;
using distlr::PartitionSpec;
using distlr::RngStream;
using distlr::SweepConfig;
using distlr::SweepResult;
using distlr::SweepRow;
using distlr::Vector;

TEST_CASE("error metrics have their defining identities") {
  RngStream rng(50, 0);
  const Vector x = distlr::sample_gaussian_matrix(6, 1, rng).col(0);
  RngStream gen(50, 1);
  const distlr::ProblemInstance instance = distlr::generate_instance(4, 6, x, 0.0, gen);

  // Exact estimate: zero everywhere.
  CHECK(distlr::training_error(instance, x) == 0.0);
  const Matrix eye = Matrix::Identity(6, 6);
  const distlr::GenError perfect = distlr::generalization_error(x, x, eye);
  CHECK(perfect.empirical == 0.0);
  CHECK(perfect.population == 0.0);

  // Identity test matrix: empirical error is ||d||^2 / rows.
  const Vector x_hat = Vector::Zero(6);
  const distlr::GenError off = distlr::generalization_error(x, x_hat, eye);
  CHECK(off.population == doctest::Approx(x.squaredNorm()).epsilon(1e-15));
  CHECK(off.empirical == doctest::Approx(x.squaredNorm() / 6.0).epsilon(1e-15));

  // Training error is the mean squared residual.
  const double direct =
      (instance.y - instance.a * x_hat).squaredNorm() / instance.n();
  CHECK(distlr::training_error(instance, x_hat) == doctest::Approx(direct).epsilon(1e-15));
}

TEST_CASE("the ground-truth draw depends only on seed and p") {
  SweepConfig a;
  a.seed = 7;
  a.p = 40;
  SweepConfig b = a;
  b.trials = 999;
  b.partition_grid = {{20, 20}};
  CHECK(distlr::draw_x_true(a) == distlr::draw_x_true(b));

  SweepConfig c = a;
  c.seed = 8;
  CHECK(distlr::draw_x_true(a) != distlr::draw_x_true(c));
}

TEST_CASE("default partition grid covers the sweep range and the near-critical sizes") {
  const auto grid = distlr::default_partition_grid(50, 150, 2);
  std::vector<int> firsts;
  for (const auto& sizes : grid) {
    REQUIRE(sizes.size() == 2);
    REQUIRE(sizes[0] + sizes[1] == 150);
    firsts.push_back(sizes[0]);
  }
  for (int expected : {5, 75, 145, 49, 50, 51, 99, 100, 101}) {
    CHECK(std::count(firsts.begin(), firsts.end(), expected) == 1);
  }
  CHECK(std::is_sorted(firsts.begin(), firsts.end()));

  // Non-bisection node counts default to the single balanced cell.
  const auto k3 = distlr::default_partition_grid(50, 150, 3);
  REQUIRE(k3.size() == 1);
  CHECK(k3[0] == std::vector<int>{50, 50, 50});
}

TEST_CASE("sweep CSV round-trips every field shape") {
  SweepRow full;
  full.n = 50;
  full.p = 150;
  full.K = 2;
  full.sizes = {75, 75};
  full.lambda = 1e-4;
  full.trials = 100;
  full.iters = 200;
  full.seed = 42;
  full.empirical_first_iter = 153.0625;
  full.theory_first_iter = ExtendedReal(153.125);
  full.gen_error = 1.25e-3;
  full.train_error = 3.5e-26;
  full.failures = 1;
  full.wall_time_ms = 12.5;

  SweepRow divergent;
  divergent.n = 50;
  divergent.p = 150;
  divergent.K = 2;
  divergent.sizes = {50, 100};
  divergent.lambda = 0.0;
  divergent.trials = 100;
  divergent.iters = 1;
  divergent.seed = 42;
  divergent.empirical_first_iter = 8.25e7;
  divergent.theory_first_iter = ExtendedReal::infinity();
  // gen/train/wall time unrecorded -> NaN -> empty fields.

  const std::string csv = distlr::sweep_rows_to_csv({full, divergent});
  CHECK(csv.find("n,p,K,sizes,lambda,N,T,seed,empirical_first_iter,"
                 "theory_first_iter,gen_error,train_error,failures,"
                 "wall_time_ms\n") == 0);
  CHECK(csv.find("75|75") != std::string::npos);
  CHECK(csv.find(",inf,") != std::string::npos);

  const std::vector<SweepRow> back = distlr::parse_sweep_csv(csv);
  REQUIRE(back.size() == 2);
  CHECK(back[0].sizes == full.sizes);
  CHECK(back[0].lambda == full.lambda);  // %.17g is lossless for doubles
  CHECK(back[0].empirical_first_iter == full.empirical_first_iter);
  REQUIRE(back[0].theory_first_iter.has_value());
  CHECK(back[0].theory_first_iter->value() == 153.125);
  CHECK(back[0].gen_error == full.gen_error);
  CHECK(back[0].train_error == full.train_error);
  CHECK(back[0].failures == 1);
  CHECK(back[0].wall_time_ms == full.wall_time_ms);

  REQUIRE(back[1].theory_first_iter.has_value());
  CHECK(back[1].theory_first_iter->is_infinite());
  CHECK(std::isnan(back[1].gen_error));
  CHECK(std::isnan(back[1].train_error));
  CHECK(std::isnan(back[1].wall_time_ms));

  // Re-serialization is byte-identical: the CSV is a fixed point.
  CHECK(distlr::sweep_rows_to_csv(back) == csv);
}

TEST_CASE("sweep CSV parsing rejects malformed input") {
  CHECK_THROWS_AS(distlr::parse_sweep_csv("a,b,c\n1,2,3\n"), std::invalid_argument);
  const std::string good = distlr::sweep_rows_to_csv({});
  CHECK(distlr::parse_sweep_csv(good).empty());
  CHECK_THROWS_AS(distlr::parse_sweep_csv(good + "1,2,3\n"), std::invalid_argument);
}

TEST_CASE("sweep config JSON round-trips") {
  SweepConfig config;
  config.n = 20;
  config.p = 40;
  config.K = 2;
  config.partition_grid = {{10, 30}, {30, 10}};
  config.lambdas = {0.0, 1.0};
  config.trials = 17;
  config.iters = 23;
  config.test_rows = 111;
  config.seed = 99;
  config.record_first_iteration = true;
  config.record_timing = false;
  config.jobs = 4;

  const SweepConfig back = distlr::sweep_config_from_json(distlr::sweep_config_to_json(config));
  CHECK(back.n == config.n);
  CHECK(back.p == config.p);
  CHECK(back.K == config.K);
  CHECK(back.partition_grid == config.partition_grid);
  CHECK(back.lambdas == config.lambdas);
  CHECK(back.trials == config.trials);
  CHECK(back.iters == config.iters);
  CHECK(back.test_rows == config.test_rows);
  CHECK(back.seed == config.seed);
  CHECK(back.record_first_iteration == config.record_first_iteration);
  CHECK(back.jobs == config.jobs);

  // Partial configs keep defaults for missing fields.
  const SweepConfig partial = distlr::sweep_config_from_json(R"({"n": 12})");
  CHECK(partial.n == 12);
  CHECK(partial.p == 150);
  CHECK(partial.trials == 100);
}

TEST_CASE("first-iteration experiment agrees with the prediction at small scale") {
  // n = 10, p = 20, blocks (5, 15) and (15, 5): cheap enough for tight
  // Monte Carlo, far enough from the critical band for finite predictions.
  SweepConfig config;
  config.n = 10;
  config.p = 20;
  config.K = 2;
  config.partition_grid = {{5, 15}, {15, 5}};
  config.trials = 400;
  config.seed = 42;
  config.record_first_iteration = true;

  const SweepResult result = distlr::run_first_iteration_experiment(config);
  REQUIRE(result.rows.size() == 2);
  for (const SweepRow& row : result.rows) {
    REQUIRE(row.theory_first_iter.has_value());
    REQUIRE(row.theory_first_iter->is_finite());
    const double theory = row.theory_first_iter->value();
    CHECK(row.failures == 0);
    CHECK(row.iters == 1);
    // 3 standard errors, the same gate the full-scale experiment uses.
    CHECK(std::abs(row.empirical_first_iter - theory) <=
          3.0 * row.empirical_first_iter_se);
  }
}

TEST_CASE("first-iteration experiment rejects misconfiguration") {
  SweepConfig config;
  config.record_first_iteration = false;
  CHECK_THROWS_AS(distlr::run_first_iteration_experiment(config), std::invalid_argument);

  config.record_first_iteration = true;
  config.lambdas = {0.5};
  CHECK_THROWS_AS(distlr::run_first_iteration_experiment(config), std::invalid_argument);
}

TEST_CASE("convergence sweep drives a solvable split to exact recovery") {
  // All block sizes below n: the fixed point is the unique solution x_true,
  // so both training and generalization error collapse. n >> p keeps the
  // cross-block coupling weak and the contraction fast enough to hit the
  // floating-point floor well within the iteration budget.
  SweepConfig config;
  config.n = 40;
  config.p = 8;
  config.K = 2;
  config.partition_grid = {{4, 4}};
  config.trials = 25;
  config.iters = 150;
  config.seed = 5;

  const SweepResult result = distlr::run_convergence_sweep(config);
  REQUIRE(result.rows.size() == 1);
  const SweepRow& row = result.rows[0];
  CHECK(row.failures == 0);
  CHECK(row.train_error < 1e-20);
  CHECK(row.gen_error < 1e-18);
  CHECK(std::isnan(row.empirical_first_iter));  // not requested
  REQUIRE(row.theory_first_iter.has_value());   // lambda = 0 rows carry theory
}

TEST_CASE("sweep rows are identical for any worker count") {
  SweepConfig config;
  config.n = 8;
  config.p = 12;
  config.K = 2;
  config.partition_grid = {{4, 8}, {6, 6}, {8, 4}};
  config.lambdas = {0.0, 0.1};
  config.trials = 12;
  config.iters = 20;
  config.seed = 3;
  config.record_first_iteration = true;

  config.jobs = 1;
  const std::string serial = distlr::sweep_rows_to_csv(distlr::run_convergence_sweep(config).rows);
  config.jobs = 8;
  const std::string parallel = distlr::sweep_rows_to_csv(distlr::run_convergence_sweep(config).rows);
  CHECK(serial == parallel);  // byte-for-byte
}

TEST_CASE("projection expectation validator accepts matched dimensions") {
  RngStream rng(60, 0);
  const Vector z = Vector::Ones(12);
  const distlr::ValidatorReport report =
      distlr::validate_projection_expectation(6, 12, z, 2000, rng);
  CHECK(report.pass);
  CHECK(report.analytic == doctest::Approx(12.0 * 6.0 / 12.0).epsilon(1e-15));

  // Degenerate direction: p_c <= n makes the statistic exact per trial.
  RngStream rng2(60, 1);
  const Vector z2 = Vector::Ones(4);
  const distlr::ValidatorReport exact =
      distlr::validate_projection_expectation(9, 4, z2, 200, rng2);
  CHECK(exact.pass);
  CHECK(std::abs(exact.empirical_mean - exact.analytic) < 1e-9 * exact.analytic);
}

TEST_CASE("projection expectation validator notices a wrong constant") {
  // Same machinery, deliberately wrong analytic target: must fail.
  RngStream rng(61, 0);
  const Vector z = Vector::Ones(12);
  distlr::ValidatorReport report =
      distlr::validate_projection_expectation(6, 12, z, 2000, rng);
  const double wrong_target = report.analytic * 1.2;
  CHECK(std::abs(report.empirical_mean - wrong_target) > 4.0 * report.std_error);
}

TEST_CASE("wishart moment validator matches the analytic diagonal off the band") {
  RngStream rng(62, 0);
  const distlr::WishartReport report = distlr::validate_wishart_moment(10, 22, 1500, rng);
  CHECK(!report.divergence_demo);
  CHECK(report.base.pass);
  CHECK(report.base.analytic == doctest::Approx(1.0 / 11.0).epsilon(1e-15));

  RngStream rng2(62, 1);
  const distlr::WishartReport under = distlr::validate_wishart_moment(10, 4, 1500, rng2);
  CHECK(under.base.pass);
  CHECK(under.base.analytic == doctest::Approx(4.0 / (10.0 * 5.0)).epsilon(1e-15));
}

TEST_CASE("wishart moment validator switches to divergence demo on the band") {
  RngStream rng(63, 0);
  const distlr::WishartReport report = distlr::validate_wishart_moment(10, 10, 300, rng);
  CHECK(report.divergence_demo);
  CHECK(!report.running_diag_means.empty());
}

TEST_CASE("closed-form validator passes on mixed shapes") {
  RngStream rng(64, 0);
  const PartitionSpec spec = distlr::make_partition(15, 3);
  const distlr::ClosedFormReport report =
      distlr::validate_closed_form(9, 15, spec, 25, 3, rng);
  CHECK(report.base.pass);
  CHECK(report.max_rel_deviation < 1e-9);
}
