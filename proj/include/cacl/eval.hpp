#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "cacl/matrix.hpp"

namespace cacl {

struct RetrievalSet {
  Matrix embeddings;
  std::vector<std::int64_t> ids;
  std::vector<std::uint32_t> cameras;
};

struct RetrievalMetrics {
  double mAP = 0.0;
  std::map<std::size_t, double> cmc;  // rank -> fraction of valid queries
  std::size_t num_valid_queries = 0;
};

inline const std::vector<std::size_t> kDefaultCmcRanks = {1, 5, 10};

// Cross-camera retrieval by ascending L2 distance. Gallery entries sharing
// both identity and camera with the query are ignored; queries left without
// any relevant entry are excluded from every average. Distance ties go to the
// lower gallery index.
RetrievalMetrics evaluate(const RetrievalSet& query, const RetrievalSet& gallery,
                          std::span<const std::size_t> ranks = kDefaultCmcRanks);

struct QueryGallerySplit {
  std::vector<std::size_t> query;
  std::vector<std::size_t> gallery;
};

// First sample of every (identity, camera) pair becomes a query; everything
// else is gallery.
QueryGallerySplit split_query_gallery(std::span<const std::int64_t> ids, std::span<const std::uint32_t> cameras);

}  // namespace cacl
