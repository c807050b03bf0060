#include "cacl/eval.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <utility>

#include "cacl/kernels.hpp"

namespace cacl {

namespace {

void check_set(const RetrievalSet& s, const char* name) {
  require(s.ids.size() == s.embeddings.rows() && s.cameras.size() == s.embeddings.rows(),
          std::string("evaluate: ") + name + " ids/cameras do not match embeddings");
}

struct QueryResult {
  bool valid = false;
  double ap = 0.0;
  std::size_t first_hit = 0;  // 1-based rank among non-ignored entries
};

}  // namespace

RetrievalMetrics evaluate(const RetrievalSet& query, const RetrievalSet& gallery, std::span<const std::size_t> ranks) {
  check_set(query, "query");
  check_set(gallery, "gallery");
  require(gallery.embeddings.rows() > 0, "evaluate: empty gallery");
  require(query.embeddings.cols() == gallery.embeddings.cols(), "evaluate: dimension mismatch");

  const Matrix d2 = kernels::pairwise_sq_dists(query.embeddings, gallery.embeddings);
  const std::size_t nq = query.embeddings.rows();
  const std::size_t ng = gallery.embeddings.rows();
  std::vector<QueryResult> results(nq);

  const auto nq_signed = static_cast<std::ptrdiff_t>(nq);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t qi = 0; qi < nq_signed; ++qi) {
    const auto q = static_cast<std::size_t>(qi);
    std::vector<std::size_t> order(ng);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto row = d2.row(q);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return row[a] != row[b] ? row[a] < row[b] : a < b;
    });
    std::size_t pos = 0, hits = 0;
    double precision_sum = 0.0;
    QueryResult r;
    for (std::size_t g : order) {
      const bool same_id = gallery.ids[g] == query.ids[q];
      if (same_id && gallery.cameras[g] == query.cameras[q]) continue;
      ++pos;
      if (!same_id) continue;
      ++hits;
      if (hits == 1) r.first_hit = pos;
      precision_sum += static_cast<double>(hits) / static_cast<double>(pos);
    }
    if (hits > 0) {
      r.valid = true;
      r.ap = precision_sum / static_cast<double>(hits);
    }
    results[q] = r;
  }

  RetrievalMetrics m;
  for (std::size_t k : ranks) m.cmc[k] = 0.0;
  double ap_sum = 0.0;
  for (const auto& r : results) {
    if (!r.valid) continue;
    ++m.num_valid_queries;
    ap_sum += r.ap;
    for (auto& [k, v] : m.cmc) {
      if (r.first_hit <= k) v += 1.0;
    }
  }
  if (m.num_valid_queries > 0) {
    const double n = static_cast<double>(m.num_valid_queries);
    m.mAP = ap_sum / n;
    for (auto& [k, v] : m.cmc) v /= n;
  }
  return m;
}

QueryGallerySplit split_query_gallery(std::span<const std::int64_t> ids, std::span<const std::uint32_t> cameras) {
  require(ids.size() == cameras.size(), "split_query_gallery: size mismatch");
  QueryGallerySplit s;
  std::set<std::pair<std::int64_t, std::uint32_t>> seen;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (seen.emplace(ids[i], cameras[i]).second) {
      s.query.push_back(i);
    } else {
      s.gallery.push_back(i);
    }
  }
  return s;
}

}  // namespace cacl
