#pragma once

#include "distlr/numerics.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace distlr {

// Ordered column-block partition of p unknowns across K nodes.
struct PartitionSpec {
  int p = 0;
  std::vector<int> sizes;  // (p_1, ..., p_K), each >= 1, summing to p

  int node_count() const { return static_cast<int>(sizes.size()); }
  // Column offset of block k (0-based).
  int offset(int k) const;
};

// Validates and builds a PartitionSpec. With explicit sizes they are checked
// against p; otherwise the balanced default is used: the first (p mod K)
// blocks get ceil(p/K) columns, the rest floor(p/K).
PartitionSpec make_partition(int p, int K,
                             const std::optional<std::vector<int>>& sizes = std::nullopt);

// Contiguous column block A_k of width sizes[k]; k is 0-based.
Matrix slice_block(const Matrix& a, const PartitionSpec& spec, int k);

// One linear-model instance y = A x_true + w. Immutable after construction.
struct ProblemInstance {
  Matrix a;            // n-by-p regressors, i.i.d. standard normal rows
  Vector x_true;       // ground-truth coefficients, length p
  Vector y;            // observations, length n
  double noise_std = 0.0;

  // Provenance of the A draw (and noise draw when noise_std > 0), when known;
  // kept so instances can be exported for replay.
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> stream_id;

  Index n() const { return a.rows(); }
  Index p() const { return a.cols(); }
};

// Samples A with i.i.d. N(0,1) entries and assembles y = A x_true + w where w
// has i.i.d. N(0, noise_std^2) entries (w = 0 exactly when noise_std = 0).
ProblemInstance generate_instance(Index n, Index p, const Vector& x_true,
                                  double noise_std, RngStream& rng);
ProblemInstance generate_instance(Index n, Index p, const Vector& x_true,
                                  double noise_std, RngStream&& rng);

// Self-describing JSON document (dimensions, provenance, flattened row-major
// matrices) for experiment replay. Round-trips losslessly.
std::string instance_to_json(const ProblemInstance& instance);
ProblemInstance instance_from_json(const std::string& text);

}  // namespace distlr
