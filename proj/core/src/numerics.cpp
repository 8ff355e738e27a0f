#include "distlr/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace distlr {

namespace {

constexpr std::uint64_t kStreamSalt = 0xA3C59AC2F1E3B791ULL;

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

NumericalError::NumericalError(const std::string& what, Index rows, Index cols)
    : std::runtime_error(what + " (" + std::to_string(rows) + "x" +
                         std::to_string(cols) + ")"),
      rows_(rows),
      cols_(cols) {}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
    : seed_(seed),
      stream_id_(stream_id),
      engine_(splitmix64(splitmix64(seed) ^ splitmix64(stream_id ^ kStreamSalt))) {}

RngStream RngStream::substream(std::uint64_t child) const noexcept {
  return RngStream(seed_, splitmix64(stream_id_ ^ (0xD6E8FEB86659FD93ULL * (child + 1))));
}

std::uint64_t RngStream::next_u64() { return engine_(); }

double RngStream::normal() {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(engine_);
}

Matrix sample_gaussian_matrix(Index n, Index p, RngStream& rng) {
  if (n < 1 || p < 1) {
    throw std::invalid_argument("sample_gaussian_matrix: dimensions must be >= 1");
  }
  // One distribution object per matrix so the draw sequence depends only on
  // (seed, stream_id, n, p), not on prior uses of the stream's distribution.
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) {
      m(i, j) = dist(rng.engine());
    }
  }
  return m;
}

Matrix sample_gaussian_matrix(Index n, Index p, RngStream&& rng) {
  return sample_gaussian_matrix(n, p, rng);
}

double default_pinv_rel_tol(Index rows, Index cols) {
  return static_cast<double>(std::max(rows, cols)) *
         std::numeric_limits<double>::epsilon();
}

Matrix pseudoinverse(const Matrix& m, double rel_tol) {
  if (m.rows() < 1 || m.cols() < 1) {
    throw std::invalid_argument("pseudoinverse: empty matrix");
  }
  if (!m.allFinite()) {
    throw std::invalid_argument("pseudoinverse: non-finite entries");
  }
  if (rel_tol <= 0.0) rel_tol = default_pinv_rel_tol(m.rows(), m.cols());

  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw NumericalError("SVD failed to converge", m.rows(), m.cols());
  }
  const Vector& s = svd.singularValues();
  const double cutoff = rel_tol * (s.size() > 0 ? s(0) : 0.0);
  Vector inv = Vector::Zero(s.size());
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

namespace {

// Shared core for the (G + lambda*I)^+ operations.
Eigen::SelfAdjointEigenSolver<Matrix> shifted_eigs(const Matrix& g, double lambda) {
  if (g.rows() != g.cols()) {
    throw std::invalid_argument("solve_regularized: matrix must be square");
  }
  if (lambda < 0.0) {
    throw std::invalid_argument("solve_regularized: lambda must be >= 0");
  }
  if (!g.allFinite()) {
    throw std::invalid_argument("solve_regularized: non-finite entries");
  }
  Matrix shifted = g;
  shifted.diagonal().array() += lambda;
  Eigen::SelfAdjointEigenSolver<Matrix> es(shifted);
  if (es.info() != Eigen::Success) {
    throw NumericalError("symmetric eigendecomposition failed to converge",
                         g.rows(), g.cols());
  }
  return es;
}

Vector reciprocal_spectrum(const Vector& evals, Index rows, Index cols, double rel_tol) {
  if (rel_tol <= 0.0) rel_tol = default_pinv_rel_tol(rows, cols);
  const double top = evals.size() > 0 ? std::abs(evals(evals.size() - 1)) : 0.0;
  const double cutoff = rel_tol * top;
  Vector inv = Vector::Zero(evals.size());
  for (Index i = 0; i < evals.size(); ++i) {
    if (evals(i) > cutoff) inv(i) = 1.0 / evals(i);
  }
  return inv;
}

}  // namespace

Vector solve_regularized(const Matrix& g, const Vector& b, double lambda,
                         double rel_tol) {
  if (b.size() != g.rows()) {
    throw std::invalid_argument("solve_regularized: rhs size mismatch");
  }
  auto es = shifted_eigs(g, lambda);
  const Vector inv = reciprocal_spectrum(es.eigenvalues(), g.rows(), g.cols(), rel_tol);
  return es.eigenvectors() * (inv.asDiagonal() * (es.eigenvectors().transpose() * b));
}

Matrix regularized_pinv(const Matrix& g, double lambda, double rel_tol) {
  auto es = shifted_eigs(g, lambda);
  const Vector inv = reciprocal_spectrum(es.eigenvalues(), g.rows(), g.cols(), rel_tol);
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace distlr
