#include <doctest.h>

#include <cstdlib>

#include "cacl/error.hpp"
#include "cacl/kernels.hpp"
#include "test_util.hpp"

using namespace cacl;

TEST_CASE("serial and omp kernels agree bit for bit") {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = testutil::random_matrix(37 + trial, 5, rng);
    const auto b = testutil::random_matrix(23, 5, rng);
    CHECK(kernels::serial::pairwise_sq_dists(a, b) == kernels::omp::pairwise_sq_dists(a, b));
    CHECK(kernels::serial::gaussian_block_sum(a, b, 1.3) == kernels::omp::gaussian_block_sum(a, b, 1.3));
    CHECK(kernels::serial::radius_neighbors(a, 2.0) == kernels::omp::radius_neighbors(a, 2.0));
    const auto w = testutil::random_matrix(7, 5, rng);
    std::vector<double> bias(7, 0.25);
    CHECK(kernels::serial::affine(a, w, bias) == kernels::omp::affine(a, w, bias));
    CHECK(kernels::serial::affine(a, w, {}) == kernels::omp::affine(a, w, {}));
  }
}

TEST_CASE("thread count does not change results") {
  Rng rng(3);
  const auto a = testutil::random_matrix(200, 8, rng);
  kernels::set_num_threads(1);
  const double one = kernels::omp::gaussian_block_sum(a, a, 2.0);
  kernels::set_num_threads(4);
  const double four = kernels::omp::gaussian_block_sum(a, a, 2.0);
  kernels::set_num_threads(0);
  CHECK(one == four);
}

TEST_CASE("pairwise distances") {
  Matrix a(2, 2), b(1, 2);
  a(0, 0) = 0; a(0, 1) = 0;
  a(1, 0) = 3; a(1, 1) = 4;
  b(0, 0) = 0; b(0, 1) = 0;
  const auto d = kernels::pairwise_sq_dists(a, b);
  CHECK(d(0, 0) == 0.0);
  CHECK(d(1, 0) == 25.0);
}

TEST_CASE("radius neighbours are inclusive and contain self") {
  Matrix x(3, 1);
  x(0, 0) = 0.0;
  x(1, 0) = 1.0;
  x(2, 0) = 2.5;
  const auto nb = kernels::radius_neighbors(x, 1.0);
  CHECK(nb[0] == std::vector<std::size_t>{0, 1});
  CHECK(nb[1] == std::vector<std::size_t>{0, 1});
  CHECK(nb[2] == std::vector<std::size_t>{2});
}

TEST_CASE("affine adds bias") {
  Matrix x(1, 2), w(1, 2);
  x(0, 0) = 1; x(0, 1) = 2;
  w(0, 0) = 3; w(0, 1) = 4;
  std::vector<double> bias{0.5};
  CHECK(kernels::affine(x, w, bias)(0, 0) == 11.5);
}

TEST_CASE("CACL_THREADS validation") {
  ::setenv("CACL_THREADS", "2", 1);
  CHECK_NOTHROW(kernels::apply_thread_env());
  ::setenv("CACL_THREADS", "two", 1);
  CHECK_THROWS_AS(kernels::apply_thread_env(), ValidationError);
  ::setenv("CACL_THREADS", "4x", 1);
  CHECK_THROWS_AS(kernels::apply_thread_env(), ValidationError);
  ::setenv("CACL_THREADS", "-1", 1);
  CHECK_THROWS_AS(kernels::apply_thread_env(), ValidationError);
  ::unsetenv("CACL_THREADS");
  CHECK_NOTHROW(kernels::apply_thread_env());
  kernels::set_num_threads(0);
}
