#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cacl/error.hpp"
#include "cacl/mmd.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace cacl;

TEST_CASE("gaussian kernel values") {
  const std::vector<double> x{0.0, 0.0}, y{1.0, 1.0};
  // ||x - y||^2 = 2 = 2 sigma^2 with sigma = 1.
  CHECK(gaussian_kernel(x, y, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(gaussian_kernel(x, x, 0.3) == 1.0);
  CHECK_THROWS_AS(gaussian_kernel(x, y, 0.0), ValidationError);
}

TEST_CASE("median bandwidth") {
  Matrix two(2, 1);
  two(1, 0) = 2.0;
  CHECK(median_bandwidth(two, 2048, 0) == doctest::Approx(std::sqrt(2.0)));
  Matrix same(3, 2);
  CHECK(median_bandwidth(same, 2048, 0) == 1.0);
  CHECK_THROWS_AS(median_bandwidth(Matrix(1, 2), 2048, 0), ValidationError);
}

TEST_CASE("mmd matches the double-loop reference") {
  Rng rng(5);
  for (int t = 0; t < 30; ++t) {
    const std::size_t d = 1 + rng.index(8);
    const auto a = testutil::random_matrix(1 + rng.index(16), d, rng);
    const auto b = testutil::random_matrix(1 + rng.index(16), d, rng, 1.5);
    const double sigma = 0.3 + rng.uniform() * 3.0;
    CHECK(std::abs(mmd_squared(a, b, sigma) - std::max(0.0, oracle::mmd_squared(a, b, sigma))) <= 1e-12);
  }
}

TEST_CASE("mmd is exactly symmetric and permutation invariant") {
  Rng rng(9);
  for (int t = 0; t < 20; ++t) {
    const auto a = testutil::random_matrix(3 + rng.index(12), 4, rng);
    const auto b = testutil::random_matrix(3 + rng.index(12), 4, rng);
    const double v = mmd_squared(a, b, 1.1);
    CHECK(v == mmd_squared(b, a, 1.1));
    std::vector<std::size_t> perm(a.rows());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    rng.shuffle(perm);
    CHECK(v == mmd_squared(a.gather_rows(perm), b, 1.1));
  }
}

TEST_CASE("identical sets give zero") {
  Rng rng(2);
  const auto a = testutil::random_matrix(10, 3, rng);
  CHECK(mmd_squared(a, a, 1.0) == 0.0);
}

TEST_CASE("schedule sorts ascending with camera-id tie break") {
  Rng rng(1);
  const auto src = testutil::random_matrix(20, 3, rng);
  auto shifted = [&](double s) {
    Matrix m = src;
    for (double& x : m.data()) x += s;
    return m;
  };
  KernelConfig cfg;
  cfg.bandwidth_mode = BandwidthMode::Fixed;
  cfg.bandwidth = 2.0;
  const std::vector<CameraFeatures> subs{{7, shifted(2.0)}, {3, shifted(0.5)}, {5, shifted(0.5)}, {4, shifted(1.0)}};
  const auto sched = build_curriculum(src, subs, cfg);
  CHECK(sched.camera_order() == std::vector<std::uint32_t>{3, 5, 4, 7});
  CHECK(sched.entries[0].mmd_sq == sched.entries[1].mmd_sq);
  CHECK(sched.sigma == 2.0);

  // Reordering the input subsets does not change the result.
  const std::vector<CameraFeatures> rev(subs.rbegin(), subs.rend());
  CHECK(build_curriculum(src, rev, cfg).camera_order() == sched.camera_order());
}

TEST_CASE("schedule subsamples large sets and validates input") {
  Rng rng(4);
  const auto src = testutil::random_matrix(50, 2, rng);
  KernelConfig cfg;
  cfg.max_samples_per_set = 16;
  cfg.seed = 3;
  const auto sched = build_curriculum(src, {{1, testutil::random_matrix(40, 2, rng)}}, cfg);
  CHECK(sched.source_size == 16);
  CHECK(sched.entries[0].subset_size == 16);
  CHECK(sched.sigma > 0.0);
  CHECK_THROWS_AS(build_curriculum(src, {}, cfg), ValidationError);
  CHECK_THROWS_AS(build_curriculum(src, {{1, Matrix(0, 2)}}, cfg), ValidationError);
  CHECK_THROWS_AS(build_curriculum(src, {{1, Matrix(3, 5)}}, cfg), ValidationError);
  CHECK_THROWS_AS(build_curriculum(src, {{1, src}, {1, src}}, cfg), ValidationError);
  cfg.bandwidth_mode = BandwidthMode::Fixed;
  cfg.bandwidth = 0.0;
  CHECK_THROWS_AS(build_curriculum(src, {{1, src}}, cfg), ValidationError);
}
