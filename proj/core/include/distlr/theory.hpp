#pragma once

#include "distlr/problem.hpp"

#include <string>
#include <vector>

namespace distlr {

// Nonnegative real extended with a tagged +infinity. Divergent predictions
// are carried as an explicit state, never as a floating-point infinity, so
// reports can distinguish "theory diverges" from numeric overflow.
// Arithmetic follows the convention 0 * inf = 0.
class ExtendedReal {
 public:
  ExtendedReal() : value_(0.0), infinite_(false) {}
  ExtendedReal(double v);  // NOLINT(google-explicit-constructor) value semantics intended
  static ExtendedReal infinity();

  bool is_infinite() const noexcept { return infinite_; }
  bool is_finite() const noexcept { return !infinite_; }
  // Finite value; throws std::logic_error when infinite so divergence can
  // never silently leak into downstream arithmetic.
  double value() const;

  ExtendedReal& operator+=(const ExtendedReal& o);
  friend ExtendedReal operator+(ExtendedReal a, const ExtendedReal& b) { return a += b; }
  friend ExtendedReal operator*(const ExtendedReal& a, const ExtendedReal& b);
  friend bool operator==(const ExtendedReal& a, const ExtendedReal& b);
  friend bool operator!=(const ExtendedReal& a, const ExtendedReal& b) { return !(a == b); }

  // "inf" or a shortest-lossless decimal rendering; used for CSV/JSON.
  std::string to_string() const;
  // Human-oriented rendering at 6 significant digits.
  std::string pretty() const;

 private:
  double value_;
  bool infinite_;
};

// Per-block Wishart-trace coefficient gamma(p_k, n): r_min / (r_max - r_min - 1)
// when p_k is outside {n-1, n, n+1}, +infinity inside that critical band,
// where r_min = min(p_k, n), r_max = max(p_k, n).
ExtendedReal gamma_coefficient(int p_k, int n);

// Coefficient gamma' with E[(A_k A_k^T)^+] = gamma' * I for an n-by-p_k
// standard Gaussian A_k: 1/(p_k-n-1) for p_k > n+1, p_k/(n(n-p_k-1)) for
// p_k < n-1, +infinity in the critical band. Satisfies gamma = n * gamma'.
ExtendedReal wishart_pinv_coefficient(int p_k, int n);

// First-iteration error weight for block k (0-based):
// alpha_k = (1/K^2) (K^2 + (1-2K) r_min_k / p_k + sum_{i != k} gamma_i).
// Infinite exactly when some OTHER block sits in the critical band.
ExtendedReal alpha_coefficient(int k, const PartitionSpec& spec, int n);

struct TheoryPrediction {
  int n = 0;
  PartitionSpec spec;
  std::vector<ExtendedReal> gamma;        // per block
  std::vector<ExtendedReal> alpha;        // per block
  std::vector<double> block_norms_sq;     // ||x_k||^2 per block
  ExtendedReal epsilon_g;                 // sum_k ||x_k||^2 alpha_k, 0 * inf = 0
};

// Expected squared estimation error after the first iteration of the
// distributed solver started from zero, for the given ground-truth x.
TheoryPrediction predict_first_iteration_error(const Vector& x_true,
                                               const PartitionSpec& spec, int n);

// Same prediction from externally supplied per-block squared norms (for
// callers without a concrete x, e.g. the E||x_k||^2 = p_k proxy).
TheoryPrediction predict_first_iteration_error_from_norms(
    const std::vector<double>& block_norms_sq, const PartitionSpec& spec, int n);

// One step of the error recursion: sum_k alpha_k * e_k from current per-block
// squared errors e_k. Valid in the large-t regime; the underlying
// independence approximation carries a constant finite gap (see README).
ExtendedReal recurse_error(const std::vector<double>& block_errors,
                           const PartitionSpec& spec, int n);

// Multi-step extrapolation iterating the per-block form e_k <- alpha_k e_k.
// The per-block recursion is an extrapolation beyond the stated aggregate
// one-step map; every consumer must label results as approximate.
std::vector<ExtendedReal> extrapolate_error(const std::vector<double>& block_errors,
                                            const PartitionSpec& spec, int n,
                                            int steps);

// JSON report for a TheoryPrediction:
// {n, p, K, sizes, gamma[], alpha[], epsilon_G, block_norms_sq[]} with
// "inf" as the literal token for divergent entries.
std::string prediction_to_json(const TheoryPrediction& prediction);

struct PartitionCandidate {
  std::vector<int> sizes;
  ExtendedReal score;   // proxy epsilon_G with E||x_k||^2 = p_k
  int balance_gap = 0;  // max size - min size
  int margin_violation = 0;  // how far inside the forbidden band the worst block sits
};

struct AdviceReport {
  bool feasible = false;
  PartitionSpec spec;            // chosen (or least-violating) partition
  ExtendedReal score;            // proxy epsilon_G of the chosen partition
  int n = 0;
  int margin = 0;
  std::vector<PartitionCandidate> candidates;        // examined, best first
  // gamma for block sizes in [n - margin - 1, n + margin + 1]: the forbidden
  // band and its immediate neighbors, showing how steep the divergence is.
  std::vector<std::pair<int, ExtendedReal>> band_gammas;
  std::string note;
};

// Recommends a balanced-as-possible partition of p unknowns over K nodes in
// which every block size stays margin-away from n: |p_k - n| > margin.
// When no such partition exists the report says so explicitly and carries the
// least-violating candidate instead of silently returning it as feasible.
AdviceReport advise_partition(int n, int p, int K, int margin = 2);

// Scores an explicit candidate partition against the same feasibility rule.
AdviceReport evaluate_partition(const PartitionSpec& spec, int n, int margin = 2);

std::string advice_to_json(const AdviceReport& report);

}  // namespace distlr
