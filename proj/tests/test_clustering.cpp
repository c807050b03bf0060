#include <doctest.h>

#include <cmath>

#include "cacl/clustering.hpp"
#include "cacl/error.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace cacl;

namespace {

Matrix blobs(Rng& rng, std::size_t per, std::size_t k, double spread, double noise) {
  Matrix m(per * k, 2);
  for (std::size_t c = 0; c < k; ++c) {
    const double cx = rng.normal() * spread, cy = rng.normal() * spread;
    for (std::size_t i = 0; i < per; ++i) {
      m(c * per + i, 0) = cx + rng.normal() * noise;
      m(c * per + i, 1) = cy + rng.normal() * noise;
    }
  }
  return m;
}

DbscanConfig euclid(double eps, std::size_t min_pts) {
  DbscanConfig c;
  c.metric = DistanceMetric::Euclidean;
  c.eps = eps;
  c.min_pts = min_pts;
  return c;
}

}  // namespace

TEST_CASE("dbscan reproduces the reference labels exactly") {
  Rng rng(21);
  for (int t = 0; t < 60; ++t) {
    const auto x = blobs(rng, 2 + rng.index(10), 1 + rng.index(5), 3.0, 0.2 + rng.uniform());
    const double eps = 0.1 + rng.uniform();
    const std::size_t min_pts = 1 + rng.index(6);
    const auto got = dbscan(x, euclid(eps, min_pts));
    const auto ref = oracle::dbscan(x, eps, min_pts);
    CHECK(got.labels == ref.labels);
    CHECK(got.core == ref.core);
    CHECK(got.eps_used == eps);
  }
}

TEST_CASE("l2-normalised metric equals Euclidean on normalised rows") {
  Rng rng(8);
  const auto x = blobs(rng, 8, 4, 3.0, 0.3);
  DbscanConfig c;
  c.eps = 0.2;
  c.min_pts = 3;
  CHECK(dbscan(x, c).labels == oracle::dbscan(l2_normalize(x), 0.2, 3).labels);
}

TEST_CASE("neighbourhood is inclusive and counts self") {
  Matrix x(2, 1);
  x(1, 0) = 1.0;
  const auto a = dbscan(x, euclid(1.0, 2));
  CHECK(a.labels == std::vector<int>{0, 0});
  const auto b = dbscan(x, euclid(0.999, 2));
  CHECK(b.labels == std::vector<int>{kNoise, kNoise});
  const auto c = dbscan(x, euclid(0.5, 1));
  CHECK(c.labels == std::vector<int>{0, 1});
}

TEST_CASE("border point joins the first cluster that reaches it") {
  // Cores at 0,1 and 3,4 (min_pts 2, eps 1); the point at 2 touches both.
  Matrix x(5, 1);
  const double pos[] = {2.0, 0.0, 1.0, 3.0, 4.0};
  for (int i = 0; i < 5; ++i) x(i, 0) = pos[i];
  const auto a = dbscan(x, euclid(1.0, 3));
  CHECK(a.core == std::vector<bool>{true, false, true, true, false});
  // Point 0 (at 2) is core here, so everything merges.
  CHECK(a.num_clusters == 1);
  const auto b = dbscan(x, euclid(1.0, 2));
  CHECK(b.num_clusters == 1);
  Matrix y(5, 1);
  const double pos2[] = {2.0, 0.0, 0.9, 3.1, 4.0};
  for (int i = 0; i < 5; ++i) y(i, 0) = pos2[i];
  const auto c = dbscan(y, euclid(1.1, 3));
  CHECK(c.labels == oracle::dbscan(y, 1.1, 3).labels);
}

TEST_CASE("percentile eps uses nearest rank") {
  Matrix x(4, 1);
  const double pos[] = {0.0, 1.0, 3.0, 6.0};
  for (int i = 0; i < 4; ++i) x(i, 0) = pos[i];
  // Pairwise: 1,2,3,3,5,6.
  DbscanConfig c = euclid(0.5, 1);
  c.eps_from_percentile = true;
  c.eps_percentile = 50.0;
  CHECK(resolve_eps(x, c) == 3.0);
  c.eps_percentile = 1.0;
  CHECK(resolve_eps(x, c) == 1.0);
  c.eps_percentile = 100.0;
  CHECK(resolve_eps(x, c) == 6.0);
  CHECK(dbscan(x, c).eps_used == 6.0);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(dbscan(Matrix(3, 2), euclid(0.0, 2)), ValidationError);
  CHECK_THROWS_AS(dbscan(Matrix(3, 2), euclid(1.0, 0)), ValidationError);
  CHECK_THROWS_AS(dbscan(Matrix(0, 2), euclid(1.0, 2)), ValidationError);
  DbscanConfig c;
  c.eps_from_percentile = true;
  c.eps_percentile = 0.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("pseudo labels are contiguous and skip noise") {
  ClusterAssignment a;
  a.labels = {2, kNoise, 0, 2, 5};
  a.num_clusters = 6;
  const std::vector<std::size_t> idx{10, 11, 12, 13, 14};
  const auto t = generate_pseudo_labels(a, idx);
  CHECK(t.num_classes == 3);
  CHECK(t.samples == std::vector<std::size_t>{10, 12, 13, 14});
  CHECK(t.labels == std::vector<std::size_t>{1, 0, 1, 2});

  ClusterAssignment noise;
  noise.labels = {kNoise, kNoise};
  CHECK_THROWS_AS(generate_pseudo_labels(noise, std::vector<std::size_t>{0, 1}), NoClustersError);
}

TEST_CASE("camera diagnostics") {
  ClusterAssignment a;
  a.labels = {0, 0, 1, 1, 2, kNoise};
  a.num_clusters = 3;
  const std::vector<std::uint32_t> cams{1, 1, 1, 2, 3, 1};
  const auto h = unique_camera_histogram(a, cams);
  CHECK(h.at(1) == 2);
  CHECK(h.at(2) == 1);
  CHECK(single_camera_cluster_fraction(a, cams) == doctest::Approx(2.0 / 3.0));
  CHECK(a.noise_count() == 1);
  CHECK(a.cluster_sizes() == std::vector<std::size_t>{2, 2, 1});
  ClusterAssignment none;
  none.labels = {kNoise};
  CHECK(single_camera_cluster_fraction(none, std::vector<std::uint32_t>{1}) == 0.0);
}

TEST_CASE("oracle agreement on random 2-d instances up to renaming") {
  Rng rng(77);
  for (int t = 0; t < 40; ++t) {
    const auto x = testutil::random_matrix(5 + rng.index(40), 2, rng);
    const double eps = 0.2 + rng.uniform() * 0.6;
    const std::size_t mp = 1 + rng.index(5);
    CHECK(oracle::same_partition(dbscan(x, euclid(eps, mp)).labels, oracle::dbscan(x, eps, mp).labels));
  }
}
