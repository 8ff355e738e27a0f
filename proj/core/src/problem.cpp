#include "distlr/problem.hpp"

#include <json.hpp>

#include <numeric>
#include <stdexcept>

namespace distlr {

int PartitionSpec::offset(int k) const {
  if (k < 0 || k >= node_count()) {
    throw std::out_of_range("PartitionSpec::offset: block index out of range");
  }
  int off = 0;
  for (int j = 0; j < k; ++j) off += sizes[j];
  return off;
}

PartitionSpec make_partition(int p, int K,
                             const std::optional<std::vector<int>>& sizes) {
  if (p < 1) throw std::invalid_argument("make_partition: p must be >= 1");
  if (sizes.has_value()) {
    const auto& s = *sizes;
    if (s.empty()) throw std::invalid_argument("make_partition: empty size list");
    if (K != 0 && K != static_cast<int>(s.size())) {
      throw std::invalid_argument("make_partition: K disagrees with size list");
    }
    int total = 0;
    for (int v : s) {
      if (v < 1) throw std::invalid_argument("make_partition: every block size must be >= 1");
      total += v;
    }
    if (total != p) throw std::invalid_argument("make_partition: block sizes must sum to p");
    return PartitionSpec{p, s};
  }
  if (K < 1) throw std::invalid_argument("make_partition: K must be >= 1");
  if (K > p) throw std::invalid_argument("make_partition: K must not exceed p");
  std::vector<int> out(static_cast<std::size_t>(K), p / K);
  for (int k = 0; k < p % K; ++k) out[static_cast<std::size_t>(k)] += 1;
  return PartitionSpec{p, out};
}

Matrix slice_block(const Matrix& a, const PartitionSpec& spec, int k) {
  if (a.cols() != spec.p) {
    throw std::invalid_argument("slice_block: matrix width disagrees with partition");
  }
  const int off = spec.offset(k);  // range-checks k
  return a.middleCols(off, spec.sizes[static_cast<std::size_t>(k)]);
}

ProblemInstance generate_instance(Index n, Index p, const Vector& x_true,
                                  double noise_std, RngStream& rng) {
  if (x_true.size() != p) {
    throw std::invalid_argument("generate_instance: x_true length must equal p");
  }
  if (noise_std < 0.0) {
    throw std::invalid_argument("generate_instance: noise_std must be >= 0");
  }
  ProblemInstance out;
  out.seed = rng.seed();
  out.stream_id = rng.stream_id();
  out.a = sample_gaussian_matrix(n, p, rng);
  out.x_true = x_true;
  out.y = out.a * x_true;
  out.noise_std = noise_std;
  if (noise_std > 0.0) {
    std::normal_distribution<double> dist(0.0, noise_std);
    for (Index i = 0; i < n; ++i) out.y(i) += dist(rng.engine());
  }
  return out;
}

ProblemInstance generate_instance(Index n, Index p, const Vector& x_true,
                                  double noise_std, RngStream&& rng) {
  return generate_instance(n, p, x_true, noise_std, rng);
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rowsj = nlohmann::json::array();
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) flat.push_back(m(i, j));
  }
  return nlohmann::json(flat);
}

Matrix matrix_from_json(const nlohmann::json& j, Index rows, Index cols) {
  const auto flat = j.get<std::vector<double>>();
  if (static_cast<Index>(flat.size()) != rows * cols) {
    throw std::invalid_argument("instance_from_json: matrix entry count mismatch");
  }
  Matrix m(rows, cols);
  std::size_t idx = 0;
  for (Index i = 0; i < rows; ++i) {
    for (Index j2 = 0; j2 < cols; ++j2) m(i, j2) = flat[idx++];
  }
  return m;
}

}  // namespace

std::string instance_to_json(const ProblemInstance& instance) {
  nlohmann::json j;
  j["n"] = instance.n();
  j["p"] = instance.p();
  j["noise_std"] = instance.noise_std;
  j["seed"] = instance.seed.has_value() ? nlohmann::json(*instance.seed)
                                        : nlohmann::json(nullptr);
  j["stream_id"] = instance.stream_id.has_value() ? nlohmann::json(*instance.stream_id)
                                                  : nlohmann::json(nullptr);
  j["a"] = matrix_to_json(instance.a);
  j["x_true"] = std::vector<double>(instance.x_true.data(),
                                    instance.x_true.data() + instance.x_true.size());
  j["y"] = std::vector<double>(instance.y.data(),
                               instance.y.data() + instance.y.size());
  return j.dump(2);
}

ProblemInstance instance_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  const Index n = j.at("n").get<Index>();
  const Index p = j.at("p").get<Index>();
  if (n < 1 || p < 1) throw std::invalid_argument("instance_from_json: bad dimensions");

  ProblemInstance out;
  out.noise_std = j.at("noise_std").get<double>();
  if (j.contains("seed") && !j.at("seed").is_null()) {
    out.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("stream_id") && !j.at("stream_id").is_null()) {
    out.stream_id = j.at("stream_id").get<std::uint64_t>();
  }
  out.a = matrix_from_json(j.at("a"), n, p);

  const auto xt = j.at("x_true").get<std::vector<double>>();
  if (static_cast<Index>(xt.size()) != p) {
    throw std::invalid_argument("instance_from_json: x_true length mismatch");
  }
  out.x_true = Eigen::Map<const Vector>(xt.data(), p);

  const auto yv = j.at("y").get<std::vector<double>>();
  if (static_cast<Index>(yv.size()) != n) {
    throw std::invalid_argument("instance_from_json: y length mismatch");
  }
  out.y = Eigen::Map<const Vector>(yv.data(), n);
  return out;
}

}  // namespace distlr
