// Command-line front end for the distlr library: single solves, closed-form
// error predictions, partition advice, Monte Carlo sweeps, and the
// statistical validators. Exit codes: 0 success, 1 a validated claim failed,
// 2 usage error, 3 numerical failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "distlr/harness.hpp"

namespace {

using distlr::ExtendedReal;
using distlr::Matrix;
using distlr::PartitionSpec;
using distlr::ProblemInstance;
using distlr::RngStream;
using distlr::SweepConfig;
using distlr::SweepResult;
using distlr::SweepRow;
using distlr::Vector;

std::string g6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return std::string(buf);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  out << content;
}

int default_jobs() {
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

// Options shared by the problem-shaped subcommands.
struct ShapeOpts {
  int n = 50;
  int p = 150;
  int k = 2;
  std::vector<int> sizes;
  std::uint64_t seed = 42;
};

void add_shape_options(CLI::App* cmd, ShapeOpts* opts) {
  cmd->add_option("--n", opts->n, "Rows (observations)")->capture_default_str();
  cmd->add_option("--p", opts->p, "Columns (unknowns)")->capture_default_str();
  cmd->add_option("--k", opts->k, "Nodes (column blocks)")->capture_default_str();
  cmd->add_option("--sizes", opts->sizes,
                  "Explicit per-node block sizes, e.g. 75,75 (overrides --k "
                  "balancing; must sum to --p)")
      ->delimiter(',');
  cmd->add_option("--seed", opts->seed, "Base RNG seed")->capture_default_str();
}

PartitionSpec spec_from_opts(const ShapeOpts& opts) {
  if (!opts.sizes.empty()) {
    int sum = 0;
    for (int s : opts.sizes) sum += s;
    if (sum != opts.p) {
      throw std::invalid_argument("--sizes must sum to --p (got " +
                                  std::to_string(sum) + ", expected " +
                                  std::to_string(opts.p) + ")");
    }
    return distlr::make_partition(opts.p, static_cast<int>(opts.sizes.size()),
                                  opts.sizes);
  }
  return distlr::make_partition(opts.p, opts.k);
}

nlohmann::json row_to_json(const SweepRow& row) {
  nlohmann::json j;
  j["n"] = row.n;
  j["p"] = row.p;
  j["K"] = row.K;
  j["sizes"] = row.sizes;
  j["lambda"] = row.lambda;
  j["N"] = row.trials;
  j["T"] = row.iters;
  j["seed"] = row.seed;
  auto metric = [](double v) {
    return std::isnan(v) ? nlohmann::json() : nlohmann::json(v);
  };
  j["empirical_first_iter"] = metric(row.empirical_first_iter);
  if (row.theory_first_iter) {
    if (row.theory_first_iter->is_infinite()) {
      j["theory_first_iter"] = "inf";
    } else {
      j["theory_first_iter"] = row.theory_first_iter->value();
    }
  } else {
    j["theory_first_iter"] = nlohmann::json();
  }
  j["gen_error"] = metric(row.gen_error);
  j["train_error"] = metric(row.train_error);
  j["failures"] = row.failures;
  j["wall_time_ms"] = metric(row.wall_time_ms);
  return j;
}

std::string rows_to_json(const std::vector<SweepRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const SweepRow& row : rows) arr.push_back(row_to_json(row));
  return arr.dump(2);
}

std::string join_sizes(const std::vector<int>& sizes) {
  std::string out;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i) out.push_back('|');
    out += std::to_string(sizes[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// solve

struct SolveOpts {
  ShapeOpts shape;
  double lambda = 0.0;
  int iters = 200;
  int test_rows = 0;
  std::string instance_path;
  std::string save_instance_path;
  std::string out_path;
};

int run_solve(const SolveOpts& opts) {
  const PartitionSpec spec = spec_from_opts(opts.shape);

  ProblemInstance instance;
  if (!opts.instance_path.empty()) {
    instance = distlr::instance_from_json(read_file(opts.instance_path));
    if (instance.p() != spec.p) {
      throw std::invalid_argument(
          "replayed instance has p=" + std::to_string(instance.p()) +
          " but the partition covers p=" + std::to_string(spec.p));
    }
  } else {
    RngStream x_stream(opts.shape.seed, 1ULL << 62);
    const Vector x = distlr::sample_gaussian_matrix(opts.shape.p, 1, x_stream).col(0);
    RngStream base(opts.shape.seed, 0);
    instance = distlr::generate_instance(opts.shape.n, opts.shape.p, x, 0.0,
                                         base.substream(0));
  }
  if (!opts.save_instance_path.empty()) {
    write_file(opts.save_instance_path, distlr::instance_to_json(instance));
  }

  const int n = static_cast<int>(instance.n());
  const int test_rows = opts.test_rows > 0 ? opts.test_rows : 10 * n;
  distlr::SolverConfig config =
      distlr::make_config(opts.lambda, opts.iters, spec.node_count());
  distlr::CocoaSolver solver(instance, spec, config);
  distlr::TraceSchedule schedule;
  schedule.at = {1, opts.iters};
  distlr::SolveTrace trace = solver.run(schedule);

  const double first_iter = (instance.x_true - trace.at(1)).squaredNorm();
  const Vector& x_hat = trace.final_state.x_hat;
  const double train = distlr::training_error(instance, x_hat);
  RngStream base(opts.shape.seed, 0);
  const Matrix test =
      distlr::sample_gaussian_matrix(test_rows, static_cast<int>(instance.p()),
                                     base.substream(2));
  const distlr::GenError gen =
      distlr::generalization_error(instance.x_true, x_hat, test);

  std::printf("solve: n=%d p=%d K=%d sizes=%s lambda=%s T=%d seed=%llu\n", n,
              static_cast<int>(instance.p()), spec.node_count(),
              join_sizes(spec.sizes).c_str(), g6(opts.lambda).c_str(), opts.iters,
              static_cast<unsigned long long>(opts.shape.seed));
  std::printf("  first-iteration error  ||x - x^(1)||^2 = %s\n",
              g6(first_iter).c_str());
  nlohmann::json j;
  if (opts.lambda == 0.0) {
    const distlr::TheoryPrediction pred =
        distlr::predict_first_iteration_error(instance.x_true, spec, n);
    std::printf("  predicted mean         E||x - x^(1)||^2 = %s\n",
                pred.epsilon_g.pretty().c_str());
    j["theory_first_iter"] = pred.epsilon_g.is_infinite()
                                 ? nlohmann::json("inf")
                                 : nlohmann::json(pred.epsilon_g.value());
  }
  std::printf("  training error         (1/n)||A(x - x^)||^2 = %s\n",
              g6(train).c_str());
  std::printf("  generalization error   empirical (rows=%d) = %s, population = %s\n",
              test_rows, g6(gen.empirical).c_str(), g6(gen.population).c_str());

  if (!opts.out_path.empty()) {
    j["n"] = n;
    j["p"] = static_cast<int>(instance.p());
    j["K"] = spec.node_count();
    j["sizes"] = spec.sizes;
    j["lambda"] = opts.lambda;
    j["iters"] = opts.iters;
    j["seed"] = opts.shape.seed;
    j["test_rows"] = test_rows;
    j["first_iter_error"] = first_iter;
    j["train_error"] = train;
    j["gen_error_empirical"] = gen.empirical;
    j["gen_error_population"] = gen.population;
    write_file(opts.out_path, j.dump(2) + "\n");
    std::printf("  wrote %s\n", opts.out_path.c_str());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// predict

struct PredictOpts {
  ShapeOpts shape;
  std::vector<double> block_norms;
  int steps = 0;
  std::string out_path;
};

int run_predict(const PredictOpts& opts) {
  const PartitionSpec spec = spec_from_opts(opts.shape);
  const int K = spec.node_count();

  std::vector<double> norms = opts.block_norms;
  bool proxy = norms.empty();
  if (proxy) {
    norms.reserve(static_cast<std::size_t>(K));
    for (int s : spec.sizes) norms.push_back(static_cast<double>(s));
  } else if (static_cast<int>(norms.size()) != K) {
    throw std::invalid_argument("--block-norms must supply one value per node");
  }

  const distlr::TheoryPrediction pred =
      distlr::predict_first_iteration_error_from_norms(norms, spec, opts.shape.n);

  std::printf("predict: n=%d p=%d K=%d sizes=%s%s\n", opts.shape.n, spec.p, K,
              join_sizes(spec.sizes).c_str(),
              proxy ? "  (proxy block norms E||x_k||^2 = p_k)" : "");
  for (int k = 0; k < K; ++k) {
    std::printf("  block %d (size %d): gamma = %s, alpha = %s\n", k + 1,
                spec.sizes[static_cast<std::size_t>(k)],
                pred.gamma[static_cast<std::size_t>(k)].pretty().c_str(),
                pred.alpha[static_cast<std::size_t>(k)].pretty().c_str());
    if (pred.gamma[static_cast<std::size_t>(k)].is_infinite()) {
      std::printf(
          "    critical: block size %d is within 1 of n=%d, the expected "
          "error diverges\n",
          spec.sizes[static_cast<std::size_t>(k)], opts.shape.n);
    }
  }
  std::printf("  expected first-iteration error E||x - x^(1)||^2 = %s\n",
              pred.epsilon_g.pretty().c_str());

  nlohmann::json extrapolated = nlohmann::json::array();
  if (opts.steps > 0) {
    const std::vector<ExtendedReal> traj =
        distlr::extrapolate_error(norms, spec, opts.shape.n, opts.steps);
    std::printf("  approximate per-block extrapolation (independence "
                "approximation, not an exact law):\n");
    for (std::size_t t = 0; t < traj.size(); ++t) {
      std::printf("    step %zu: %s\n", t + 1, traj[t].pretty().c_str());
      extrapolated.push_back(traj[t].is_infinite() ? nlohmann::json("inf")
                                                   : nlohmann::json(traj[t].value()));
    }
  }

  if (!opts.out_path.empty()) {
    nlohmann::json j = nlohmann::json::parse(distlr::prediction_to_json(pred));
    j["proxy_block_norms"] = proxy;
    if (opts.steps > 0) {
      j["extrapolated"] = extrapolated;
      j["extrapolation_note"] =
          "approximate per-block recursion; exact only under the independence "
          "approximation";
    }
    write_file(opts.out_path, j.dump(2) + "\n");
    std::printf("  wrote %s\n", opts.out_path.c_str());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// advise

struct AdviseOpts {
  ShapeOpts shape;
  int margin = 2;
  std::string out_path;
};

int run_advise(const AdviseOpts& opts) {
  distlr::AdviceReport report;
  if (!opts.shape.sizes.empty()) {
    report = distlr::evaluate_partition(spec_from_opts(opts.shape), opts.shape.n,
                                        opts.margin);
  } else {
    report = distlr::advise_partition(opts.shape.n, opts.shape.p, opts.shape.k,
                                      opts.margin);
  }

  std::printf("advise: n=%d p=%d K=%d margin=%d\n", report.n, report.spec.p,
              report.spec.node_count(), opts.margin);
  std::printf("  %s: sizes=%s score=%s\n",
              report.feasible ? "recommended" : "infeasible; least-violating",
              join_sizes(report.spec.sizes).c_str(), report.score.pretty().c_str());
  if (!report.note.empty()) std::printf("  note: %s\n", report.note.c_str());
  if (!report.candidates.empty()) {
    std::printf("  candidates (best first):\n");
    for (const auto& c : report.candidates) {
      std::string violation;
      if (c.margin_violation > 0) {
        violation = "  margin_violation=" + std::to_string(c.margin_violation);
      }
      std::printf("    sizes=%-12s score=%-12s balance_gap=%d%s\n",
                  join_sizes(c.sizes).c_str(), c.score.pretty().c_str(),
                  c.balance_gap, violation.c_str());
    }
  }
  if (!report.band_gammas.empty()) {
    std::printf("  gamma near the critical band (block size: gamma):\n    ");
    for (const auto& [size, gamma] : report.band_gammas) {
      std::printf("%d: %s  ", size, gamma.pretty().c_str());
    }
    std::printf("\n");
  }

  if (!opts.out_path.empty()) {
    write_file(opts.out_path, distlr::advice_to_json(report) + "\n");
    std::printf("  wrote %s\n", opts.out_path.c_str());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// sweeps

struct SweepOpts {
  ShapeOpts shape;
  std::vector<double> lambdas;
  int trials = 100;
  int iters = 200;
  int test_rows = 0;
  int jobs = default_jobs();
  bool record_first = false;
  bool record_timing = false;
  std::string config_path;
  std::string from_file;
  std::string out_path;
  std::string format = "csv";
};

void add_sweep_options(CLI::App* cmd, SweepOpts* opts, bool converged) {
  add_shape_options(cmd, &opts->shape);
  if (converged) {
    cmd->add_option("--lambda", opts->lambdas,
                    "Regularization value(s), comma separated (default 0)")
        ->delimiter(',');
    cmd->add_option("--iters", opts->iters, "Iterations T per solve")
        ->capture_default_str();
    cmd->add_flag("--record-first-iter", opts->record_first,
                  "Also record the mean first-iteration error per cell");
  }
  cmd->add_option("--trials", opts->trials, "Monte Carlo trials N per cell")
      ->capture_default_str();
  cmd->add_option("--test-rows", opts->test_rows,
                  "Held-out rows for generalization error (0 = 10*n)")
      ->capture_default_str();
  cmd->add_option("--jobs", opts->jobs,
                  "Worker threads (results are identical for any value)")
      ->capture_default_str();
  cmd->add_flag("--record-timing", opts->record_timing,
                "Record wall time per cell (makes the CSV run-dependent)");
  cmd->add_option("--config", opts->config_path,
                  "JSON sweep config; explicit flags override its fields");
  cmd->add_option("--from-file", opts->from_file,
                  "Skip running: load a previously written sweep CSV and "
                  "summarize (with --out, re-emit it)");
  cmd->add_option("--out", opts->out_path, "Write CSV/JSON here instead of stdout");
  cmd->add_option("--format", opts->format, "Output format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
}

SweepConfig sweep_config_from_opts(const CLI::App* cmd, const SweepOpts& opts,
                                   bool first_iter_mode) {
  // Not every option exists on both sweep subcommands (e.g. --iters is
  // converged-only), so probe without throwing.
  const auto given = [cmd](const std::string& name) {
    const CLI::Option* opt = cmd->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  SweepConfig config;
  if (!opts.config_path.empty()) {
    config = distlr::sweep_config_from_json(read_file(opts.config_path));
  }
  if (given("--n")) config.n = opts.shape.n;
  if (given("--p")) config.p = opts.shape.p;
  if (given("--k")) config.K = opts.shape.k;
  if (given("--sizes")) {
    config.K = static_cast<int>(opts.shape.sizes.size());
    config.partition_grid = {opts.shape.sizes};
  }
  if (given("--seed")) config.seed = opts.shape.seed;
  if (given("--trials")) config.trials = opts.trials;
  if (given("--iters")) config.iters = opts.iters;
  if (given("--test-rows")) config.test_rows = opts.test_rows;
  if (given("--jobs")) config.jobs = opts.jobs;
  if (given("--lambda")) config.lambdas = opts.lambdas;
  if (given("--record-first-iter")) config.record_first_iteration = true;
  if (given("--record-timing")) config.record_timing = true;
  if (first_iter_mode) {
    config.record_first_iteration = true;
    config.lambdas = {0.0};
  }
  if (!given("--jobs") && !given("--config")) config.jobs = opts.jobs;
  return config;
}

void summarize_rows(const std::vector<SweepRow>& rows, bool first_iter_mode) {
  if (rows.empty()) {
    std::printf("  no cells\n");
    return;
  }
  if (first_iter_mode) {
    double worst = -1.0;
    const SweepRow* worst_row = nullptr;
    int infinite_cells = 0;
    for (const SweepRow& row : rows) {
      if (!row.theory_first_iter || std::isnan(row.empirical_first_iter)) continue;
      if (row.theory_first_iter->is_infinite()) {
        ++infinite_cells;
        continue;
      }
      const double theory = row.theory_first_iter->value();
      if (theory <= 0) continue;
      const double dev = std::abs(row.empirical_first_iter - theory) / theory;
      if (dev > worst) {
        worst = dev;
        worst_row = &row;
      }
    }
    std::printf("  %zu cells", rows.size());
    if (infinite_cells) {
      std::printf(" (%d with divergent prediction)", infinite_cells);
    }
    if (worst_row) {
      std::printf("; worst relative deviation vs prediction %s at sizes=%s",
                  g6(worst).c_str(), join_sizes(worst_row->sizes).c_str());
    }
    std::printf("\n");
    return;
  }
  const SweepRow* peak = nullptr;
  double max_train = 0.0;
  for (const SweepRow& row : rows) {
    if (!std::isnan(row.gen_error) && (!peak || row.gen_error > peak->gen_error)) {
      peak = &row;
    }
    if (!std::isnan(row.train_error)) max_train = std::max(max_train, row.train_error);
  }
  std::printf("  %zu cells", rows.size());
  if (peak) {
    std::printf("; peak generalization error %s at sizes=%s lambda=%s",
                g6(peak->gen_error).c_str(), join_sizes(peak->sizes).c_str(),
                g6(peak->lambda).c_str());
  }
  std::printf("; max training error %s\n", g6(max_train).c_str());
}

int run_sweep_command(const CLI::App* cmd, const SweepOpts& opts, bool first_iter_mode) {
  std::vector<SweepRow> rows;
  if (!opts.from_file.empty()) {
    rows = distlr::parse_sweep_csv(read_file(opts.from_file));
    std::printf("loaded %s\n", opts.from_file.c_str());
  } else {
    const SweepConfig config = sweep_config_from_opts(cmd, opts, first_iter_mode);
    const SweepResult result = first_iter_mode
                                   ? distlr::run_first_iteration_experiment(config)
                                   : distlr::run_convergence_sweep(config);
    rows = result.rows;
  }

  const std::string payload =
      opts.format == "json" ? rows_to_json(rows) + "\n" : distlr::sweep_rows_to_csv(rows);
  if (opts.out_path.empty()) {
    std::fputs(payload.c_str(), stdout);
  } else {
    write_file(opts.out_path, payload);
    std::printf("%s: wrote %s (%s)\n",
                first_iter_mode ? "sweep-first-iter" : "sweep-converged",
                opts.out_path.c_str(), opts.format.c_str());
    summarize_rows(rows, first_iter_mode);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// validators

struct ValidateOpts {
  ShapeOpts shape;
  int trials = 0;  // defaulted per validator below
  int iters = 50;
  std::string out_path;
};

int finish_validator(const distlr::ValidatorReport& report, const std::string& out_path,
                     const std::string& extra_json = std::string()) {
  std::printf("%s: %s\n", report.name.c_str(), report.pass ? "PASS" : "FAIL");
  if (std::isfinite(report.analytic)) {
    std::printf("  analytic = %s, empirical mean = %s, SE = %s, trials = %d\n",
                g6(report.analytic).c_str(), g6(report.empirical_mean).c_str(),
                g6(report.std_error).c_str(), report.trials);
  } else {
    std::printf("  analytic target divergent; empirical mean = %s after %d trials\n",
                g6(report.empirical_mean).c_str(), report.trials);
  }
  if (!report.detail.empty()) std::printf("  %s\n", report.detail.c_str());
  if (!out_path.empty()) {
    std::string payload = extra_json.empty()
                              ? distlr::validator_report_to_json(report) + "\n"
                              : extra_json;
    write_file(out_path, payload);
    std::printf("  wrote %s\n", out_path.c_str());
  }
  return report.pass ? 0 : 1;
}

int run_validate_closed_form(const ValidateOpts& opts) {
  const PartitionSpec spec = spec_from_opts(opts.shape);
  const int trials = opts.trials > 0 ? opts.trials : 5;
  RngStream rng(opts.shape.seed, 1);
  const distlr::ClosedFormReport report = distlr::validate_closed_form(
      opts.shape.n, spec.p, spec, opts.iters, trials, rng);
  return finish_validator(report.base, opts.out_path);
}

int run_validate_projection(const ValidateOpts& opts) {
  const int trials = opts.trials > 0 ? opts.trials : 5000;
  const Vector z = Vector::Ones(opts.shape.p);
  RngStream rng(opts.shape.seed, 2);
  const distlr::ValidatorReport report = distlr::validate_projection_expectation(
      opts.shape.n, opts.shape.p, z, trials, rng);
  return finish_validator(report, opts.out_path);
}

int run_validate_wishart(const ValidateOpts& opts) {
  const int trials = opts.trials > 0 ? opts.trials : 2000;
  RngStream rng(opts.shape.seed, 3);
  const distlr::WishartReport report =
      distlr::validate_wishart_moment(opts.shape.n, opts.shape.p, trials, rng);
  std::string extra;
  if (!opts.out_path.empty()) {
    nlohmann::json j =
        nlohmann::json::parse(distlr::validator_report_to_json(report.base));
    j["offdiag_mean_abs"] = report.offdiag_mean_abs;
    j["diag_max_rel_dev"] = report.diag_max_rel_dev;
    j["divergence_demo"] = report.divergence_demo;
    j["running_diag_means"] = report.running_diag_means;
    extra = j.dump(2) + "\n";
  }
  if (report.divergence_demo && !report.running_diag_means.empty()) {
    std::printf("wishart moment: critical sizes, running diagonal means:\n  ");
    for (double m : report.running_diag_means) std::printf("%s ", g6(m).c_str());
    std::printf("\n");
  }
  return finish_validator(report.base, opts.out_path, extra);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "distlr: distributed least-squares solver, closed-form generalization "
      "error predictions, and Monte Carlo experiment harness.\n"
      "Defaults mirror the reference experiment: n=50, p=150, K=2, N=100 "
      "trials, T=200 iterations, test_rows=10*n."};
  app.require_subcommand(1);

  SolveOpts solve_opts;
  CLI::App* solve = app.add_subcommand(
      "solve", "Generate (or replay) one instance and run the distributed solver");
  add_shape_options(solve, &solve_opts.shape);
  solve->add_option("--lambda", solve_opts.lambda, "Regularization strength")
      ->capture_default_str();
  solve->add_option("--iters", solve_opts.iters, "Iterations T")->capture_default_str();
  solve->add_option("--test-rows", solve_opts.test_rows,
                    "Held-out rows for generalization error (0 = 10*n)")
      ->capture_default_str();
  solve->add_option("--instance", solve_opts.instance_path,
                    "Replay a JSON instance written by --save-instance");
  solve->add_option("--save-instance", solve_opts.save_instance_path,
                    "Write the solved instance as JSON for later replay");
  solve->add_option("--out", solve_opts.out_path, "Write a JSON result here");

  PredictOpts predict_opts;
  CLI::App* predict = app.add_subcommand(
      "predict", "Closed-form expected first-iteration error for a partition");
  add_shape_options(predict, &predict_opts.shape);
  predict
      ->add_option("--block-norms", predict_opts.block_norms,
                   "Per-block ||x_k||^2, comma separated (default: proxy "
                   "E||x_k||^2 = p_k)")
      ->delimiter(',');
  predict
      ->add_option("--steps", predict_opts.steps,
                   "Also print an approximate multi-step error extrapolation")
      ->capture_default_str();
  predict->add_option("--out", predict_opts.out_path, "Write a JSON report here");

  AdviseOpts advise_opts;
  CLI::App* advise = app.add_subcommand(
      "advise", "Recommend a partition whose block sizes avoid the critical band");
  add_shape_options(advise, &advise_opts.shape);
  advise
      ->add_option("--margin", advise_opts.margin,
                   "Required distance |p_k - n| > margin for every block")
      ->capture_default_str();
  advise->add_option("--out", advise_opts.out_path, "Write a JSON report here");

  SweepOpts first_opts;
  CLI::App* sweep_first = app.add_subcommand(
      "sweep-first-iter",
      "Monte Carlo mean first-iteration error vs the closed-form prediction "
      "across a partition grid");
  add_sweep_options(sweep_first, &first_opts, /*converged=*/false);

  SweepOpts conv_opts;
  CLI::App* sweep_conv = app.add_subcommand(
      "sweep-converged",
      "Monte Carlo training and generalization error of the converged solver "
      "across a partition grid and lambda list");
  add_sweep_options(sweep_conv, &conv_opts, /*converged=*/true);

  ValidateOpts cf_opts, proj_opts, wish_opts;
  CLI::App* validate = app.add_subcommand(
      "validate", "Statistical validators for the library's analytic claims");
  validate->require_subcommand(1);
  CLI::App* v_cf = validate->add_subcommand(
      "closed-form",
      "Iterative solver matches the equivalent one-matrix affine update");
  add_shape_options(v_cf, &cf_opts.shape);
  v_cf->add_option("--iters", cf_opts.iters, "Iterations per instance")
      ->capture_default_str();
  v_cf->add_option("--trials", cf_opts.trials, "Random instances (default 5)");
  v_cf->add_option("--out", cf_opts.out_path, "Write a JSON report here");
  CLI::App* v_proj = validate->add_subcommand(
      "projection",
      "Monte Carlo E[z^T C^+ C z] matches ||z||^2 min(n,p)/p for Gaussian C "
      "(--p is the column count of C)");
  add_shape_options(v_proj, &proj_opts.shape);
  v_proj->add_option("--trials", proj_opts.trials, "Trials (default 5000)");
  v_proj->add_option("--out", proj_opts.out_path, "Write a JSON report here");
  CLI::App* v_wish = validate->add_subcommand(
      "wishart",
      "Monte Carlo E[(AA^T)^+] matches its analytic diagonal for Gaussian A "
      "(--p is the column count of A)");
  add_shape_options(v_wish, &wish_opts.shape);
  v_wish->add_option("--trials", wish_opts.trials, "Trials (default 2000)");
  v_wish->add_option("--out", wish_opts.out_path, "Write a JSON report here");

  try {
    app.parse(argc, argv);
    if (solve->parsed()) return run_solve(solve_opts);
    if (predict->parsed()) return run_predict(predict_opts);
    if (advise->parsed()) return run_advise(advise_opts);
    if (sweep_first->parsed())
      return run_sweep_command(sweep_first, first_opts, /*first_iter_mode=*/true);
    if (sweep_conv->parsed())
      return run_sweep_command(sweep_conv, conv_opts, /*first_iter_mode=*/false);
    if (v_cf->parsed()) return run_validate_closed_form(cf_opts);
    if (v_proj->parsed()) return run_validate_projection(proj_opts);
    if (v_wish->parsed()) return run_validate_wishart(wish_opts);
    std::fprintf(stderr, "error: no subcommand dispatched\n");
    return 2;
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const distlr::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::out_of_range& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
