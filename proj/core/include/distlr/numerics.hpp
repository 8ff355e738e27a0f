#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace distlr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Thrown when a matrix decomposition fails to converge. Carries the shape of
// the offending matrix so sweep drivers can log which cell went bad.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, Index rows, Index cols);

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }

 private:
  Index rows_;
  Index cols_;
};

// Splittable deterministic RNG stream. Identical (seed, stream_id) pairs
// reproduce identical draw sequences; distinct stream_ids give statistically
// independent sequences, so parallel and serial sweeps can draw the same
// numbers for the same logical trial.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  // Derives an independent child stream; deterministic in (this, child).
  RngStream substream(std::uint64_t child) const noexcept;

  std::uint64_t next_u64();
  double normal();  // one N(0, 1) draw

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

// n-by-p matrix with i.i.d. standard normal entries, filled in row-major
// order so the draw sequence is part of the reproducibility contract.
Matrix sample_gaussian_matrix(Index n, Index p, RngStream& rng);

// Convenience overload: consumes the stream without exposing its state.
Matrix sample_gaussian_matrix(Index n, Index p, RngStream&& rng);

// Default singular-value cutoff factor: max(rows, cols) * machine epsilon.
double default_pinv_rel_tol(Index rows, Index cols);

// Moore-Penrose pseudoinverse via SVD. Singular values below
// rel_tol * sigma_max are treated as zero; rel_tol <= 0 selects the default.
// Throws NumericalError if the SVD does not converge.
Matrix pseudoinverse(const Matrix& m, double rel_tol = 0.0);

// Returns (G + lambda*I)^+ b for symmetric positive semidefinite G, via a
// symmetric eigendecomposition. For lambda > 0 this is the unique solution
// of (G + lambda*I) z = b.
Vector solve_regularized(const Matrix& g, const Vector& b, double lambda,
                         double rel_tol = 0.0);

// Eigendecomposition-based pseudoinverse of (G + lambda*I) for symmetric PSD
// G; used to precompute per-node operators that are applied many times.
Matrix regularized_pinv(const Matrix& g, double lambda, double rel_tol = 0.0);

}  // namespace distlr
