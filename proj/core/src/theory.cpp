#include "distlr/theory.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace distlr {

ExtendedReal::ExtendedReal(double v) : value_(v), infinite_(false) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument(
        "ExtendedReal: non-finite double; use ExtendedReal::infinity()");
  }
  if (v < 0.0) {
    throw std::invalid_argument("ExtendedReal: values must be nonnegative");
  }
}

ExtendedReal ExtendedReal::infinity() {
  ExtendedReal r;
  r.infinite_ = true;
  r.value_ = 0.0;
  return r;
}

double ExtendedReal::value() const {
  if (infinite_) {
    throw std::logic_error("ExtendedReal::value: divergent (infinite) quantity");
  }
  return value_;
}

ExtendedReal& ExtendedReal::operator+=(const ExtendedReal& o) {
  infinite_ = infinite_ || o.infinite_;
  value_ = infinite_ ? 0.0 : value_ + o.value_;
  return *this;
}

ExtendedReal operator*(const ExtendedReal& a, const ExtendedReal& b) {
  // 0 * inf = 0: a divergent coefficient contributes nothing when its weight
  // is exactly zero.
  if ((a.is_finite() && a.value_ == 0.0) || (b.is_finite() && b.value_ == 0.0)) {
    return ExtendedReal(0.0);
  }
  if (a.infinite_ || b.infinite_) return ExtendedReal::infinity();
  return ExtendedReal(a.value_ * b.value_);
}

bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
  if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
  return a.value_ == b.value_;
}

std::string ExtendedReal::to_string() const {
  if (infinite_) return "inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value_);
  return buf;
}

std::string ExtendedReal::pretty() const {
  if (infinite_) return "inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", value_);
  return buf;
}

namespace {

void check_counts(int p_k, int n) {
  if (p_k < 1 || n < 1) {
    throw std::invalid_argument("theory coefficients: counts must be >= 1");
  }
}

bool in_critical_band(int p_k, int n) { return p_k >= n - 1 && p_k <= n + 1; }

}  // namespace

ExtendedReal gamma_coefficient(int p_k, int n) {
  check_counts(p_k, n);
  if (in_critical_band(p_k, n)) return ExtendedReal::infinity();
  const double r_min = std::min(p_k, n);
  const double r_max = std::max(p_k, n);
  return ExtendedReal(r_min / (r_max - r_min - 1.0));
}

ExtendedReal wishart_pinv_coefficient(int p_k, int n) {
  check_counts(p_k, n);
  if (in_critical_band(p_k, n)) return ExtendedReal::infinity();
  if (p_k > n + 1) {
    return ExtendedReal(1.0 / (static_cast<double>(p_k) - n - 1.0));
  }
  return ExtendedReal(static_cast<double>(p_k) /
                      (static_cast<double>(n) * (n - static_cast<double>(p_k) - 1.0)));
}

ExtendedReal alpha_coefficient(int k, const PartitionSpec& spec, int n) {
  const int K = spec.node_count();
  if (k < 0 || k >= K) {
    throw std::out_of_range("alpha_coefficient: block index out of range");
  }
  const int p_k = spec.sizes[static_cast<std::size_t>(k)];
  check_counts(p_k, n);
  const double r_min = std::min(p_k, n);
  double acc = static_cast<double>(K) * K +
               (1.0 - 2.0 * K) * r_min / static_cast<double>(p_k);
  for (int i = 0; i < K; ++i) {
    if (i == k) continue;
    const ExtendedReal g = gamma_coefficient(spec.sizes[static_cast<std::size_t>(i)], n);
    if (g.is_infinite()) return ExtendedReal::infinity();
    acc += g.value();
  }
  return ExtendedReal(acc / (static_cast<double>(K) * K));
}

namespace {

std::vector<double> block_norms(const Vector& x, const PartitionSpec& spec) {
  if (x.size() != spec.p) {
    throw std::invalid_argument("predict_first_iteration_error: x length mismatch");
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(spec.node_count()));
  for (int k = 0; k < spec.node_count(); ++k) {
    out.push_back(x.segment(spec.offset(k), spec.sizes[static_cast<std::size_t>(k)])
                      .squaredNorm());
  }
  return out;
}

}  // namespace

TheoryPrediction predict_first_iteration_error_from_norms(
    const std::vector<double>& block_norms_sq, const PartitionSpec& spec, int n) {
  if (static_cast<int>(block_norms_sq.size()) != spec.node_count()) {
    throw std::invalid_argument("prediction: one squared norm per block required");
  }
  TheoryPrediction out;
  out.n = n;
  out.spec = spec;
  out.block_norms_sq = block_norms_sq;
  ExtendedReal total(0.0);
  for (int k = 0; k < spec.node_count(); ++k) {
    out.gamma.push_back(gamma_coefficient(spec.sizes[static_cast<std::size_t>(k)], n));
    out.alpha.push_back(alpha_coefficient(k, spec, n));
    total += ExtendedReal(block_norms_sq[static_cast<std::size_t>(k)]) *
             out.alpha.back();
  }
  out.epsilon_g = total;
  return out;
}

TheoryPrediction predict_first_iteration_error(const Vector& x_true,
                                               const PartitionSpec& spec, int n) {
  return predict_first_iteration_error_from_norms(block_norms(x_true, spec), spec, n);
}

ExtendedReal recurse_error(const std::vector<double>& block_errors,
                           const PartitionSpec& spec, int n) {
  if (static_cast<int>(block_errors.size()) != spec.node_count()) {
    throw std::invalid_argument("recurse_error: one error per block required");
  }
  ExtendedReal total(0.0);
  for (int k = 0; k < spec.node_count(); ++k) {
    const double e = block_errors[static_cast<std::size_t>(k)];
    if (e < 0.0) throw std::invalid_argument("recurse_error: errors must be >= 0");
    total += ExtendedReal(e) * alpha_coefficient(k, spec, n);
  }
  return total;
}

std::vector<ExtendedReal> extrapolate_error(const std::vector<double>& block_errors,
                                            const PartitionSpec& spec, int n,
                                            int steps) {
  if (steps < 1) throw std::invalid_argument("extrapolate_error: steps must be >= 1");
  if (static_cast<int>(block_errors.size()) != spec.node_count()) {
    throw std::invalid_argument("extrapolate_error: one error per block required");
  }
  std::vector<ExtendedReal> e;
  e.reserve(block_errors.size());
  for (double v : block_errors) e.push_back(ExtendedReal(v));
  std::vector<ExtendedReal> alphas;
  for (int k = 0; k < spec.node_count(); ++k) alphas.push_back(alpha_coefficient(k, spec, n));

  std::vector<ExtendedReal> totals;
  totals.reserve(static_cast<std::size_t>(steps));
  for (int t = 0; t < steps; ++t) {
    ExtendedReal total(0.0);
    for (std::size_t k = 0; k < e.size(); ++k) {
      e[k] = e[k] * alphas[k];
      total += e[k];
    }
    totals.push_back(total);
  }
  return totals;
}

namespace {

nlohmann::json extended_to_json(const ExtendedReal& v) {
  if (v.is_infinite()) return nlohmann::json("inf");
  return nlohmann::json(v.value());
}

}  // namespace

std::string prediction_to_json(const TheoryPrediction& prediction) {
  nlohmann::json j;
  j["n"] = prediction.n;
  j["p"] = prediction.spec.p;
  j["K"] = prediction.spec.node_count();
  j["sizes"] = prediction.spec.sizes;
  nlohmann::json gj = nlohmann::json::array();
  for (const auto& g : prediction.gamma) gj.push_back(extended_to_json(g));
  nlohmann::json aj = nlohmann::json::array();
  for (const auto& a : prediction.alpha) aj.push_back(extended_to_json(a));
  j["gamma"] = gj;
  j["alpha"] = aj;
  j["epsilon_G"] = extended_to_json(prediction.epsilon_g);
  j["block_norms_sq"] = prediction.block_norms_sq;
  return j.dump(2);
}

namespace {

int violation_of(const std::vector<int>& sizes, int n, int margin) {
  // 0 when every block satisfies |p_k - n| > margin; otherwise the largest
  // shortfall margin + 1 - |p_k - n| over offending blocks.
  int worst = 0;
  for (int s : sizes) {
    const int gap = std::abs(s - n);
    if (gap <= margin) worst = std::max(worst, margin + 1 - gap);
  }
  return worst;
}

PartitionCandidate score_candidate(const std::vector<int>& sizes, int p, int n,
                                   int margin) {
  PartitionSpec spec{p, sizes};
  std::vector<double> proxy;
  proxy.reserve(sizes.size());
  for (int s : sizes) proxy.push_back(static_cast<double>(s));  // E||x_k||^2 = p_k
  const auto pred = predict_first_iteration_error_from_norms(proxy, spec, n);
  PartitionCandidate c;
  c.sizes = sizes;
  c.score = pred.epsilon_g;
  c.balance_gap = *std::max_element(sizes.begin(), sizes.end()) -
                  *std::min_element(sizes.begin(), sizes.end());
  c.margin_violation = violation_of(sizes, n, margin);
  return c;
}

// Candidate enumeration. K=2 is scanned exhaustively; for larger K we examine
// the family of "j blocks below the forbidden band, K-j above", each group as
// balanced as the group sum allows, plus the plain balanced split.
std::vector<std::vector<int>> enumerate_candidates(int n, int p, int K, int margin) {
  std::vector<std::vector<int>> cands;
  if (K == 1) {
    cands.push_back({p});
    return cands;
  }
  if (K == 2) {
    for (int p1 = 1; p1 <= p - 1; ++p1) cands.push_back({p1, p - p1});
    return cands;
  }
  cands.push_back(make_partition(p, K).sizes);
  const int lo_cap = n - margin - 1;   // largest size allowed below the band
  const int hi_floor = n + margin + 1; // smallest size allowed above the band
  for (int j = 0; j <= K; ++j) {
    const int n_lo = j, n_hi = K - j;
    // Feasible group sums: low group in [n_lo, n_lo*lo_cap], the high group
    // gets the remainder and needs at least n_hi*hi_floor.
    if (lo_cap < 1 && n_lo > 0) continue;
    const int lo_sum_max = n_lo * lo_cap;
    const int lo_sum_min = n_lo;
    if (n_hi == 0) {
      if (p >= lo_sum_min && p <= lo_sum_max) {
        cands.push_back(make_partition(p, K).sizes);
      }
      continue;
    }
    for (int lo_sum = std::min(lo_sum_max, p - n_hi * hi_floor); lo_sum >= lo_sum_min;
         --lo_sum) {
      const int hi_sumv = p - lo_sum;
      if (hi_sumv < n_hi * hi_floor) break;
      std::vector<int> sizes;
      if (n_lo > 0) {
        auto lo = make_partition(lo_sum, n_lo).sizes;
        sizes.insert(sizes.end(), lo.begin(), lo.end());
        if (sizes.front() > lo_cap) continue;  // cannot balance under the cap
      }
      auto hi = make_partition(hi_sumv, n_hi).sizes;
      sizes.insert(sizes.end(), hi.begin(), hi.end());
      if (hi.back() < hi_floor) continue;
      cands.push_back(sizes);
      break;  // most balanced option for this (j) split
    }
  }
  return cands;
}

bool better_candidate(const PartitionCandidate& a, const PartitionCandidate& b) {
  // Feasibility first, then balance, then proxy score, then lexicographic
  // order for determinism.
  if ((a.margin_violation == 0) != (b.margin_violation == 0)) {
    return a.margin_violation == 0;
  }
  if (a.margin_violation != b.margin_violation) {
    return a.margin_violation < b.margin_violation;
  }
  if (a.balance_gap != b.balance_gap) return a.balance_gap < b.balance_gap;
  const bool af = a.score.is_finite(), bf = b.score.is_finite();
  if (af != bf) return af;
  if (af && bf && a.score.value() != b.score.value()) {
    return a.score.value() < b.score.value();
  }
  return a.sizes < b.sizes;
}

std::vector<std::pair<int, ExtendedReal>> band_gamma_table(int n, int margin) {
  std::vector<std::pair<int, ExtendedReal>> out;
  for (int s = n - margin - 1; s <= n + margin + 1; ++s) {
    if (s < 1) continue;
    out.emplace_back(s, gamma_coefficient(s, n));
  }
  return out;
}

}  // namespace

AdviceReport advise_partition(int n, int p, int K, int margin) {
  if (n < 1 || p < 1 || K < 1) {
    throw std::invalid_argument("advise_partition: counts must be >= 1");
  }
  if (K > p) throw std::invalid_argument("advise_partition: K must not exceed p");
  if (margin < 0) throw std::invalid_argument("advise_partition: margin must be >= 0");

  auto raw = enumerate_candidates(n, p, K, margin);
  std::vector<PartitionCandidate> scored;
  scored.reserve(raw.size());
  for (auto& sizes : raw) scored.push_back(score_candidate(sizes, p, n, margin));
  std::sort(scored.begin(), scored.end(), better_candidate);
  scored.erase(std::unique(scored.begin(), scored.end(),
                           [](const PartitionCandidate& a, const PartitionCandidate& b) {
                             return a.sizes == b.sizes;
                           }),
               scored.end());

  AdviceReport report;
  report.n = n;
  report.margin = margin;
  report.band_gammas = band_gamma_table(n, margin);
  const PartitionCandidate& best = scored.front();
  report.feasible = best.margin_violation == 0;
  report.spec = PartitionSpec{p, best.sizes};
  report.score = best.score;
  const std::size_t keep = std::min<std::size_t>(scored.size(), 8);
  report.candidates.assign(scored.begin(), scored.begin() + static_cast<long>(keep));
  if (report.feasible) {
    report.note = "balanced partition with every block size at distance > margin from n";
  } else {
    report.note =
        "no partition keeps every block size at distance > margin from n; "
        "reporting the least-violating candidate";
  }
  return report;
}

AdviceReport evaluate_partition(const PartitionSpec& spec, int n, int margin) {
  if (n < 1) throw std::invalid_argument("evaluate_partition: n must be >= 1");
  if (margin < 0) throw std::invalid_argument("evaluate_partition: margin must be >= 0");
  PartitionCandidate c = score_candidate(spec.sizes, spec.p, n, margin);
  AdviceReport report;
  report.n = n;
  report.margin = margin;
  report.feasible = c.margin_violation == 0;
  report.spec = spec;
  report.score = c.score;
  report.candidates = {c};
  report.band_gammas = band_gamma_table(n, margin);
  report.note = report.feasible
                    ? "partition keeps every block size at distance > margin from n"
                    : "partition has a block size within margin of n";
  return report;
}

std::string advice_to_json(const AdviceReport& report) {
  nlohmann::json j;
  j["feasible"] = report.feasible;
  j["n"] = report.n;
  j["p"] = report.spec.p;
  j["K"] = report.spec.node_count();
  j["margin"] = report.margin;
  j["sizes"] = report.spec.sizes;
  j["score"] = extended_to_json(report.score);
  j["note"] = report.note;
  nlohmann::json cj = nlohmann::json::array();
  for (const auto& c : report.candidates) {
    cj.push_back({{"sizes", c.sizes},
                  {"score", extended_to_json(c.score)},
                  {"balance_gap", c.balance_gap},
                  {"margin_violation", c.margin_violation}});
  }
  j["candidates"] = cj;
  nlohmann::json bj = nlohmann::json::array();
  for (const auto& [size, g] : report.band_gammas) {
    bj.push_back({{"size", size}, {"gamma", extended_to_json(g)}});
  }
  j["band_gammas"] = bj;
  return j.dump(2);
}

}  // namespace distlr
