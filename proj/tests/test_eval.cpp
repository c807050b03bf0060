#include <doctest.h>

#include <cmath>

#include "cacl/error.hpp"
#include "cacl/eval.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace cacl;

namespace {

RetrievalSet line(std::vector<double> xs, std::vector<std::int64_t> ids, std::vector<std::uint32_t> cams) {
  RetrievalSet s;
  s.embeddings = Matrix(xs.size(), 1);
  for (std::size_t i = 0; i < xs.size(); ++i) s.embeddings(i, 0) = xs[i];
  s.ids = std::move(ids);
  s.cameras = std::move(cams);
  return s;
}

}  // namespace

TEST_CASE("second-ranked match gives AP one half") {
  const auto q = line({0.0}, {1}, {1});
  const auto g = line({0.5, 1.0}, {2, 1}, {2, 2});
  const auto m = evaluate(q, g);
  CHECK(m.mAP == doctest::Approx(0.5));
  CHECK(m.cmc.at(1) == 0.0);
  CHECK(m.cmc.at(5) == 1.0);
  CHECK(m.num_valid_queries == 1);
}

TEST_CASE("same id and same camera is excluded, other same-camera items are not") {
  const auto q = line({0.0}, {1}, {1});
  // Nearest is the same id in the same camera (ignored); then a distractor
  // from the query camera, then the true cross-camera match.
  const auto g = line({0.1, 0.2, 0.3}, {1, 2, 1}, {1, 1, 2});
  const auto m = evaluate(q, g);
  CHECK(m.mAP == doctest::Approx(0.5));
  CHECK(m.cmc.at(1) == 0.0);
}

TEST_CASE("queries without a cross-camera match are skipped") {
  const auto q = line({0.0, 5.0}, {1, 3}, {1, 1});
  const auto g = line({0.1, 5.1}, {1, 3}, {2, 1});
  const auto m = evaluate(q, g);
  CHECK(m.num_valid_queries == 1);
  CHECK(m.mAP == 1.0);
}

TEST_CASE("ties go to the lower gallery index") {
  const auto q = line({0.0}, {1}, {1});
  const auto before = evaluate(q, line({1.0, 1.0}, {1, 2}, {2, 2}));
  const auto after = evaluate(q, line({1.0, 1.0}, {2, 1}, {2, 2}));
  CHECK(before.mAP == 1.0);
  CHECK(after.mAP == 0.5);
}

TEST_CASE("matches the brute-force oracle") {
  Rng rng(17);
  for (int t = 0; t < 20; ++t) {
    const std::size_t ids = 2 + rng.index(4), cams = 1 + rng.index(3);
    RetrievalSet q, g;
    q.embeddings = testutil::random_matrix(6, 3, rng);
    g.embeddings = testutil::random_matrix(20, 3, rng);
    for (std::size_t i = 0; i < 6; ++i) {
      q.ids.push_back(static_cast<std::int64_t>(rng.index(ids)));
      q.cameras.push_back(static_cast<std::uint32_t>(1 + rng.index(cams)));
    }
    for (std::size_t i = 0; i < 20; ++i) {
      g.ids.push_back(static_cast<std::int64_t>(rng.index(ids)));
      g.cameras.push_back(static_cast<std::uint32_t>(1 + rng.index(cams)));
    }
    const auto got = evaluate(q, g);
    const auto ref = oracle::retrieval(q.embeddings, q.ids, q.cameras, g.embeddings, g.ids, g.cameras, {1, 5, 10});
    CHECK(got.num_valid_queries == ref.valid);
    CHECK(std::abs(got.mAP - ref.mAP) <= 1e-12);
    for (auto [k, v] : ref.cmc) CHECK(std::abs(got.cmc.at(k) - v) <= 1e-12);
  }
}

TEST_CASE("input validation") {
  auto q = line({0.0}, {1}, {1});
  CHECK_THROWS_AS(evaluate(q, line({}, {}, {})), ValidationError);
  q.ids.clear();
  CHECK_THROWS_AS(evaluate(q, line({1.0}, {1}, {2})), ValidationError);
}

TEST_CASE("query/gallery split takes the first sample of each id-camera pair") {
  const std::vector<std::int64_t> ids{1, 1, 2, 1, 2};
  const std::vector<std::uint32_t> cams{1, 1, 1, 2, 1};
  const auto s = split_query_gallery(ids, cams);
  CHECK(s.query == std::vector<std::size_t>{0, 2, 3});
  CHECK(s.gallery == std::vector<std::size_t>{1, 4});
}
