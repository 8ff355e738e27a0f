#pragma once

#include "distlr/problem.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace distlr {

// Configuration of the distributed solver. The aggregation parameter is
// pinned to K and the subproblem weight to 1; both are enforced on
// construction because the update algebra in this codebase assumes them.
struct SolverConfig {
  double lambda = 0.0;   // ridge penalty, >= 0
  int iters = 1;         // T, >= 1
  double sigma_prime = 0.0;  // must equal K (set by make_config)
  double tau = 1.0;          // must equal 1
  double rel_tol = 0.0;      // pseudoinverse cutoff; <= 0 selects default
};

// Validates and pins sigma_prime = K, tau = 1.
SolverConfig make_config(double lambda, int iters, int K, double rel_tol = 0.0);

// Snapshot schedule for a run. Default records t = 0, t = 1, and t = T.
struct TraceSchedule {
  bool full = false;            // record every iteration
  std::vector<int> at = {};     // explicit iteration indices (used when !full)
};

struct SolverState {
  int t = 0;
  Vector x_hat;              // length p, blocks per the partition
  std::vector<Vector> v;     // K local estimates of y, each length n
  Vector v_bar;              // running average of the v_k
};

struct SolveTrace {
  std::vector<std::pair<int, Vector>> snapshots;  // (t, x_hat at t)
  SolverState final_state;

  // x_hat recorded at iteration t; throws if t was not in the schedule.
  const Vector& at(int t) const;
};

// Reference form of one node's local subproblem solution:
//   dx_k = -(K A_k^T A_k + lambda I)^+ (lambda x_hat_k - A_k^T (y - v_bar)).
// For lambda = 0 the equivalent reduced form dx_k = (1/K) A_k^+ (y - v_bar)
// is used; both agree to rounding and tests pin that equivalence.
Vector local_update(const Matrix& a_k, const Vector& y, const Vector& v_bar,
                    const Vector& x_hat_k, double lambda, int K,
                    double rel_tol = 0.0);

// Distributed solver with per-node operators precomputed once per instance.
// step() runs one synchronous round: every node forms its update against the
// same incoming v_bar, then x_hat, v_k, and v_bar advance together.
class CocoaSolver {
 public:
  CocoaSolver(const ProblemInstance& instance, const PartitionSpec& spec,
              const SolverConfig& config);

  SolverState initial_state() const;
  SolverState step(const SolverState& state) const;
  SolveTrace run(const std::optional<TraceSchedule>& schedule = std::nullopt) const;

  const PartitionSpec& spec() const { return spec_; }
  int node_count() const { return spec_.node_count(); }

 private:
  const ProblemInstance& instance_;
  PartitionSpec spec_;
  SolverConfig config_;
  std::vector<Matrix> ops_;  // A_k^+ when lambda = 0, else (K A_k^T A_k + lambda I)^+
};

// One synchronous round from an explicit state (constructs the per-node
// operators afresh; bitwise-identical to CocoaSolver::step on the same state).
SolverState cocoa_step(const SolverState& state, const ProblemInstance& instance,
                       const PartitionSpec& spec, const SolverConfig& config);

// T rounds from the zero state, recording the schedule (default {0, 1, T}).
SolveTrace cocoa_run(const ProblemInstance& instance, const PartitionSpec& spec,
                     const SolverConfig& config,
                     const std::optional<TraceSchedule>& schedule = std::nullopt);

// Stacked block pseudoinverse: the p-by-n matrix stacking A_1^+, ..., A_K^+.
Matrix stacked_block_pinv(const Matrix& a, const PartitionSpec& spec,
                          double rel_tol = 0.0);

// One application of the closed-form affine update
//   x_hat <- (I - (1/K) Abar A) x_hat + (1/K) Abar y,
// computed in the numerically equivalent grouped form
//   x_hat + (1/K) Abar (y - A x_hat). Valid for the lambda = 0 iteration.
Vector closed_form_step(const Vector& x_hat, const Matrix& a_bar, const Matrix& a,
                        const Vector& y, int K);

// Centralized least squares / minimum-norm interpolator: A^+ y.
Vector centralized_ls(const Matrix& a, const Vector& y, double rel_tol = 0.0);

}  // namespace distlr
