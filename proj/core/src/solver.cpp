#include "distlr/solver.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace distlr {

SolverConfig make_config(double lambda, int iters, int K, double rel_tol) {
  if (lambda < 0.0) throw std::invalid_argument("make_config: lambda must be >= 0");
  if (iters < 1) throw std::invalid_argument("make_config: iters must be >= 1");
  if (K < 1) throw std::invalid_argument("make_config: K must be >= 1");
  SolverConfig c;
  c.lambda = lambda;
  c.iters = iters;
  c.sigma_prime = static_cast<double>(K);
  c.tau = 1.0;
  c.rel_tol = rel_tol;
  return c;
}

const Vector& SolveTrace::at(int t) const {
  for (const auto& [when, x] : snapshots) {
    if (when == t) return x;
  }
  throw std::out_of_range("SolveTrace::at: iteration not in snapshot schedule");
}

Vector local_update(const Matrix& a_k, const Vector& y, const Vector& v_bar,
                    const Vector& x_hat_k, double lambda, int K, double rel_tol) {
  if (y.size() != a_k.rows() || v_bar.size() != a_k.rows() ||
      x_hat_k.size() != a_k.cols()) {
    throw std::invalid_argument("local_update: dimension mismatch");
  }
  if (lambda < 0.0) throw std::invalid_argument("local_update: lambda must be >= 0");
  if (K < 1) throw std::invalid_argument("local_update: K must be >= 1");
  if (lambda == 0.0) {
    // Reduced form of the same subproblem solution; cheaper and better
    // conditioned than forming the Gram matrix.
    return (pseudoinverse(a_k, rel_tol) * (y - v_bar)) / static_cast<double>(K);
  }
  const Matrix gram = static_cast<double>(K) * (a_k.transpose() * a_k);
  const Vector rhs = lambda * x_hat_k - a_k.transpose() * (y - v_bar);
  return -solve_regularized(gram, rhs, lambda, rel_tol);
}

namespace {

void check_state(const SolverState& state, const ProblemInstance& instance,
                 const PartitionSpec& spec) {
  if (state.x_hat.size() != instance.p() || spec.p != instance.p()) {
    throw std::invalid_argument("solver: state/instance/partition disagree on p");
  }
  if (static_cast<int>(state.v.size()) != spec.node_count()) {
    throw std::invalid_argument("solver: one v_k per node required");
  }
  if (state.v_bar.size() != instance.n()) {
    throw std::invalid_argument("solver: v_bar length must equal n");
  }
}

}  // namespace

CocoaSolver::CocoaSolver(const ProblemInstance& instance, const PartitionSpec& spec,
                         const SolverConfig& config)
    : instance_(instance), spec_(spec), config_(config) {
  if (spec.p != instance.p()) {
    throw std::invalid_argument("CocoaSolver: partition does not match instance");
  }
  const int K = spec_.node_count();
  if (config_.sigma_prime != static_cast<double>(K) || config_.tau != 1.0) {
    throw std::invalid_argument(
        "CocoaSolver: config must be built by make_config for this K "
        "(sigma_prime = K, tau = 1)");
  }
  ops_.reserve(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    const Matrix a_k = slice_block(instance_.a, spec_, k);
    if (config_.lambda == 0.0) {
      ops_.push_back(pseudoinverse(a_k, config_.rel_tol));
    } else {
      Matrix gram = static_cast<double>(K) * (a_k.transpose() * a_k);
      ops_.push_back(regularized_pinv(gram, config_.lambda, config_.rel_tol));
    }
  }
}

SolverState CocoaSolver::initial_state() const {
  SolverState s;
  s.t = 0;
  s.x_hat = Vector::Zero(instance_.p());
  s.v.assign(static_cast<std::size_t>(spec_.node_count()),
             Vector::Zero(instance_.n()));
  s.v_bar = Vector::Zero(instance_.n());
  return s;
}

SolverState CocoaSolver::step(const SolverState& state) const {
  check_state(state, instance_, spec_);
  const int K = spec_.node_count();
  SolverState next = state;
  next.t = state.t + 1;

  // Synchronous round: every node sees the same incoming v_bar.
  const Vector residual = instance_.y - state.v_bar;
  Vector sum_a_dx = Vector::Zero(instance_.n());
  for (int k = 0; k < K; ++k) {
    const auto width = spec_.sizes[static_cast<std::size_t>(k)];
    const auto off = spec_.offset(k);
    const Matrix a_k = slice_block(instance_.a, spec_, k);
    Vector dx;
    if (config_.lambda == 0.0) {
      dx = (ops_[static_cast<std::size_t>(k)] * residual) / static_cast<double>(K);
    } else {
      const Vector rhs =
          config_.lambda * state.x_hat.segment(off, width) - a_k.transpose() * residual;
      dx = -(ops_[static_cast<std::size_t>(k)] * rhs);
    }
    next.x_hat.segment(off, width) += dx;
    const Vector a_dx = a_k * dx;
    next.v[static_cast<std::size_t>(k)] = state.v_bar + static_cast<double>(K) * a_dx;
    sum_a_dx += a_dx;  // fixed node order keeps the reduction deterministic
  }
  next.v_bar = state.v_bar + sum_a_dx;

#ifndef NDEBUG
  // The incremental v_bar must agree with re-averaging the v_k.
  Vector avg = Vector::Zero(instance_.n());
  for (const auto& vk : next.v) avg += vk;
  avg /= static_cast<double>(K);
  assert((next.v_bar - avg).norm() <=
         1e-9 * (1.0 + instance_.y.norm() + next.v_bar.norm()));
#endif
  return next;
}

SolveTrace CocoaSolver::run(const std::optional<TraceSchedule>& schedule) const {
  const int T = config_.iters;
  TraceSchedule sched = schedule.value_or(TraceSchedule{false, {0, 1, T}});
  auto wanted = [&](int t) {
    if (sched.full) return true;
    return std::find(sched.at.begin(), sched.at.end(), t) != sched.at.end();
  };

  SolveTrace trace;
  SolverState state = initial_state();
  if (wanted(0)) trace.snapshots.emplace_back(0, state.x_hat);
  for (int t = 0; t < T; ++t) {
    state = step(state);
    if (wanted(state.t)) trace.snapshots.emplace_back(state.t, state.x_hat);
  }
  trace.final_state = std::move(state);
  return trace;
}

SolverState cocoa_step(const SolverState& state, const ProblemInstance& instance,
                       const PartitionSpec& spec, const SolverConfig& config) {
  return CocoaSolver(instance, spec, config).step(state);
}

SolveTrace cocoa_run(const ProblemInstance& instance, const PartitionSpec& spec,
                     const SolverConfig& config,
                     const std::optional<TraceSchedule>& schedule) {
  return CocoaSolver(instance, spec, config).run(schedule);
}

Matrix stacked_block_pinv(const Matrix& a, const PartitionSpec& spec, double rel_tol) {
  if (a.cols() != spec.p) {
    throw std::invalid_argument("stacked_block_pinv: matrix width disagrees with partition");
  }
  Matrix out(a.cols(), a.rows());
  for (int k = 0; k < spec.node_count(); ++k) {
    out.middleRows(spec.offset(k), spec.sizes[static_cast<std::size_t>(k)]) =
        pseudoinverse(slice_block(a, spec, k), rel_tol);
  }
  return out;
}

Vector closed_form_step(const Vector& x_hat, const Matrix& a_bar, const Matrix& a,
                        const Vector& y, int K) {
  if (a_bar.rows() != a.cols() || a_bar.cols() != a.rows() ||
      x_hat.size() != a.cols() || y.size() != a.rows()) {
    throw std::invalid_argument("closed_form_step: dimension mismatch");
  }
  if (K < 1) throw std::invalid_argument("closed_form_step: K must be >= 1");
  return x_hat + (a_bar * (y - a * x_hat)) / static_cast<double>(K);
}

Vector centralized_ls(const Matrix& a, const Vector& y, double rel_tol) {
  if (y.size() != a.rows()) throw std::invalid_argument("centralized_ls: size mismatch");
  return pseudoinverse(a, rel_tol) * y;
}

}  // namespace distlr
