#pragma once

#include "distlr/solver.hpp"
#include "distlr/theory.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace distlr {

// Mean squared residual on the training data: (1/n) ||A (x_true - x_hat)||^2.
// Equals (1/n) ||y - A x_hat||^2 when noise_std = 0.
double training_error(const ProblemInstance& instance, const Vector& x_hat);

struct GenError {
  double empirical = 0.0;   // (1/rows) ||A_test (x_true - x_hat)||^2
  double population = 0.0;  // ||x_true - x_hat||^2, exact for Gaussian regressors
};

// Squared prediction error on fresh data, with the exact population value as
// a companion field.
GenError generalization_error(const Vector& x_true, const Vector& x_hat,
                              const Matrix& test_matrix);

// Monte Carlo sweep configuration. partition_grid entries are per-node size
// lists for (p, K); lambdas defaults to {0}.
struct SweepConfig {
  int n = 50;
  int p = 150;
  int K = 2;
  std::vector<std::vector<int>> partition_grid;
  std::vector<double> lambdas = {0.0};
  int trials = 100;      // N per cell
  int iters = 200;       // T
  int test_rows = 0;     // 0 selects the default 10*n
  std::uint64_t seed = 42;
  bool record_first_iteration = false;
  bool record_timing = false;  // off by default: keeps CSV bitwise reproducible
  int jobs = 1;                // worker threads; results independent of this
};

// One (partition, lambda) cell of a sweep. Metrics that were not recorded
// are NaN and serialize as empty CSV fields.
struct SweepRow {
  int n = 0;
  int p = 0;
  int K = 0;
  std::vector<int> sizes;
  double lambda = 0.0;
  int trials = 0;
  int iters = 0;
  std::uint64_t seed = 0;
  // Metrics below default to "not recorded": NaN doubles and an empty
  // optional serialize as empty CSV fields.
  double empirical_first_iter = std::numeric_limits<double>::quiet_NaN();
  std::optional<ExtendedReal> theory_first_iter;  // "inf" at critical cells
  double gen_error = std::numeric_limits<double>::quiet_NaN();
  double train_error = std::numeric_limits<double>::quiet_NaN();
  int failures = 0;  // trials lost to numerical failures (excluded from means)
  double wall_time_ms = std::numeric_limits<double>::quiet_NaN();

  // Standard errors of the recorded means. In-memory companions for
  // statistical gating; not part of the CSV schema, so rows read back from a
  // file carry NaN here.
  double empirical_first_iter_se = std::numeric_limits<double>::quiet_NaN();
  double gen_error_se = std::numeric_limits<double>::quiet_NaN();
};

struct SweepResult {
  Vector x_true;               // the fixed coefficient draw shared by all cells
  std::vector<SweepRow> rows;  // cell order: lambda-major, then grid order
};

// The ground-truth coefficient vector a sweep with this config will use:
// drawn once from a reserved stream of the sweep seed and held fixed.
Vector draw_x_true(const SweepConfig& config);

// Default K = 2 partition grid for reproducing the headline experiments:
// p1 in {5, 10, ...} plus the integer sizes adjacent to n and p - n.
// For K != 2 the balanced partition is the single default cell.
std::vector<std::vector<int>> default_partition_grid(int n, int p, int K);

// Single-iteration experiment: per cell, the empirical mean of
// ||x - x_hat^1||^2 over N trials next to the closed-form prediction.
// Requires record_first_iteration and lambdas restricted to {0}.
SweepResult run_first_iteration_experiment(const SweepConfig& config);

// Full-solve experiment: per (partition, lambda) cell, mean training and
// generalization errors of x_hat^T over N trials (fresh A and test matrix per
// trial, fixed x_true).
SweepResult run_convergence_sweep(const SweepConfig& config);

// CSV with the exact header
// n,p,K,sizes,lambda,N,T,seed,empirical_first_iter,theory_first_iter,gen_error,train_error,failures,wall_time_ms
// sizes as "75|75", divergent theory as "inf", missing metrics empty.
std::string sweep_rows_to_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> parse_sweep_csv(const std::string& text);

// JSON round-trip for SweepConfig (jobs and record_timing included).
std::string sweep_config_to_json(const SweepConfig& config);
SweepConfig sweep_config_from_json(const std::string& text);

struct ValidatorReport {
  std::string name;
  double analytic = 0.0;
  double empirical_mean = 0.0;
  double std_error = 0.0;
  int trials = 0;
  bool pass = false;
  std::string detail;
};

std::string validator_report_to_json(const ValidatorReport& report);

// Monte Carlo check of the projection expectation: the mean of z^T C^+ C z
// over draws of an n-by-p_c Gaussian C against ||z||^2 * min(n, p_c) / p_c.
// Pass band: 4 standard errors plus a tiny rounding floor (the statistic is
// numerically exact when p_c <= n, making the raw standard error collapse).
ValidatorReport validate_projection_expectation(int n, int p_c, const Vector& z,
                                                int trials, RngStream rng);

struct WishartReport {
  ValidatorReport base;           // analytic = gamma', empirical = mean diagonal
  double offdiag_mean_abs = 0.0;  // mean |off-diagonal| of the averaged matrix
  double diag_max_rel_dev = 0.0;  // worst single diagonal entry vs gamma'
  bool divergence_demo = false;   // set when (n, p_k) sits in the critical band
  std::vector<double> running_diag_means;  // demo mode: running mean trace
};

// Monte Carlo check of E[(A A^T)^+] = gamma' I for n-by-p_k Gaussian A.
// Outside the critical band: pass iff the diagonal mean is within 5% of
// gamma' and the mean off-diagonal magnitude is below 5e-3. Inside the band
// the expectation diverges; the report carries a running-mean trace instead
// of a verdict (divergence-demo mode, pass not asserted).
WishartReport validate_wishart_moment(int n, int p_k, int trials, RngStream rng);

struct ClosedFormReport {
  ValidatorReport base;  // empirical = max deviation observed, analytic = 0
  int iters = 0;
  double max_rel_deviation = 0.0;
};

// Cross-validates the iterative solver against the one-matrix affine update
// it is equivalent to for lambda = 0: max scaled deviation over trials and
// t <= T must stay below 1e-9.
ClosedFormReport validate_closed_form(int n, int p, const PartitionSpec& spec,
                                      int T, int trials, RngStream rng);

}  // namespace distlr
