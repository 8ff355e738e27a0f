#include "distlr/problem.hpp"

#include <stdexcept>

#include "doctest.h"

using distlr::Matrix;
using distlr::PartitionSpec;
using distlr::ProblemInstance;
using distlr::RngStream;
using distlr::Vector;

TEST_CASE("balanced partitions put the remainder up front") {
  const PartitionSpec even = distlr::make_partition(150, 2);
  CHECK(even.sizes == std::vector<int>{75, 75});
  CHECK(even.node_count() == 2);

  const PartitionSpec uneven = distlr::make_partition(10, 3);
  CHECK(uneven.sizes == std::vector<int>{4, 3, 3});

  const PartitionSpec single = distlr::make_partition(7, 1);
  CHECK(single.sizes == std::vector<int>{7});
}

TEST_CASE("explicit sizes are validated") {
  CHECK_NOTHROW(distlr::make_partition(150, 2, std::vector<int>{50, 100}));
  CHECK_THROWS_AS(distlr::make_partition(150, 2, std::vector<int>{50, 99}),
                  std::invalid_argument);
  CHECK_THROWS_AS(distlr::make_partition(150, 2, std::vector<int>{150, 0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(distlr::make_partition(150, 3, std::vector<int>{75, 75}),
                  std::invalid_argument);
  CHECK_THROWS_AS(distlr::make_partition(2, 3), std::invalid_argument);  // K > p
  CHECK_THROWS_AS(distlr::make_partition(0, 1), std::invalid_argument);
}

TEST_CASE("offsets are prefix sums with range checking") {
  const PartitionSpec spec = distlr::make_partition(150, 2, std::vector<int>{75, 75});
  CHECK(spec.offset(0) == 0);
  CHECK(spec.offset(1) == 75);
  CHECK_THROWS_AS(spec.offset(2), std::out_of_range);
  CHECK_THROWS_AS(spec.offset(-1), std::out_of_range);
}

TEST_CASE("block slices tile the matrix exactly") {
  RngStream rng(11, 0);
  const Matrix a = distlr::sample_gaussian_matrix(6, 10, rng);
  const PartitionSpec spec = distlr::make_partition(10, 3, std::vector<int>{2, 5, 3});

  Matrix rebuilt(6, 10);
  int col = 0;
  for (int k = 0; k < spec.node_count(); ++k) {
    const Matrix block = distlr::slice_block(a, spec, k);
    REQUIRE(block.rows() == 6);
    REQUIRE(block.cols() == spec.sizes[static_cast<std::size_t>(k)]);
    rebuilt.middleCols(col, block.cols()) = block;
    col += static_cast<int>(block.cols());
  }
  CHECK(rebuilt == a);  // bitwise: slicing must not touch values
}

TEST_CASE("noiseless instances satisfy y = A x exactly") {
  RngStream rng(12, 0);
  const Vector x = distlr::sample_gaussian_matrix(8, 1, rng).col(0);
  RngStream gen(12, 1);
  const ProblemInstance instance = distlr::generate_instance(5, 8, x, 0.0, gen);
  REQUIRE(instance.n() == 5);
  REQUIRE(instance.p() == 8);
  CHECK(instance.y == instance.a * instance.x_true);  // no noise term added
  CHECK(instance.x_true == x);
  CHECK(instance.noise_std == 0.0);
}

TEST_CASE("noisy instances perturb y") {
  RngStream rng(13, 0);
  const Vector x = Vector::Ones(4);
  RngStream gen(13, 1);
  const ProblemInstance instance = distlr::generate_instance(6, 4, x, 0.5, gen);
  CHECK((instance.y - instance.a * instance.x_true).norm() > 0.0);
}

TEST_CASE("instance JSON round-trips bitwise") {
  RngStream rng(14, 0);
  const Vector x = distlr::sample_gaussian_matrix(7, 1, rng).col(0);
  RngStream gen(14, 5);
  const ProblemInstance instance = distlr::generate_instance(4, 7, x, 0.0, gen);

  const std::string text = distlr::instance_to_json(instance);
  const ProblemInstance back = distlr::instance_from_json(text);
  CHECK(back.a == instance.a);
  CHECK(back.x_true == instance.x_true);
  CHECK(back.y == instance.y);
  CHECK(back.noise_std == instance.noise_std);
  CHECK(back.seed == instance.seed);
  CHECK(back.stream_id == instance.stream_id);
}

TEST_CASE("instance JSON rejects inconsistent payloads") {
  CHECK_THROWS(distlr::instance_from_json("{}"));
  CHECK_THROWS(distlr::instance_from_json("not json"));
}
