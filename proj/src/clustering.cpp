#include "cacl/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

namespace cacl {

void DbscanConfig::validate() const {
  require(eps_from_percentile || eps > 0.0, "dbscan eps must be > 0");
  require(min_pts >= 1, "dbscan min_pts must be >= 1");
  require(!eps_from_percentile || (eps_percentile > 0.0 && eps_percentile <= 100.0),
          "dbscan eps_percentile must be in (0, 100]");
}

std::size_t ClusterAssignment::noise_count() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kNoise));
}

std::vector<std::size_t> ClusterAssignment::cluster_sizes() const {
  std::vector<std::size_t> sizes(num_clusters, 0);
  for (int l : labels) {
    if (l != kNoise) ++sizes[static_cast<std::size_t>(l)];
  }
  return sizes;
}

Matrix l2_normalize(const Matrix& features) {
  Matrix out = features;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    double s = 0.0;
    for (double v : r) s += v * v;
    if (s == 0.0) continue;
    const double inv = 1.0 / std::sqrt(s);
    for (double& v : r) v *= inv;
  }
  return out;
}

double resolve_eps(const Matrix& points, const DbscanConfig& cfg) {
  if (!cfg.eps_from_percentile) return cfg.eps;
  require(points.rows() >= 2, "percentile eps needs at least 2 points");
  const Matrix d2 = kernels::pairwise_sq_dists(points, points);
  std::vector<double> dists;
  dists.reserve(points.rows() * (points.rows() - 1) / 2);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    for (std::size_t j = i + 1; j < points.rows(); ++j) dists.push_back(std::sqrt(d2(i, j)));
  }
  // nearest-rank percentile
  const auto rank = static_cast<std::size_t>(std::ceil(cfg.eps_percentile / 100.0 * static_cast<double>(dists.size())));
  const std::size_t k = std::clamp<std::size_t>(rank, 1, dists.size()) - 1;
  std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(k), dists.end());
  // A zero eps would make every non-duplicate point noise.
  return std::max(dists[k], 1e-12);
}

ClusterAssignment dbscan_expand(const kernels::NeighborLists& neighbors, std::size_t min_pts) {
  constexpr int kUnvisited = -2;
  const std::size_t n = neighbors.size();
  ClusterAssignment out;
  out.labels.assign(n, kUnvisited);
  out.core.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) out.core[i] = neighbors[i].size() >= min_pts;

  int next_id = 0;
  std::deque<std::size_t> queue;
  for (std::size_t i = 0; i < n; ++i) {
    if (out.labels[i] != kUnvisited) continue;
    if (!out.core[i]) {
      out.labels[i] = kNoise;  // may be claimed later as a border point
      continue;
    }
    const int id = next_id++;
    out.labels[i] = id;
    queue.push_back(i);
    while (!queue.empty()) {
      const std::size_t p = queue.front();
      queue.pop_front();
      if (!out.core[p]) continue;
      for (std::size_t q : neighbors[p]) {
        if (out.labels[q] == kUnvisited) {
          out.labels[q] = id;
          queue.push_back(q);
        } else if (out.labels[q] == kNoise) {
          out.labels[q] = id;
        }
      }
    }
  }
  out.num_clusters = static_cast<std::size_t>(next_id);
  return out;
}

ClusterAssignment dbscan(const Matrix& features, const DbscanConfig& cfg) {
  cfg.validate();
  require(features.rows() > 0, "dbscan: empty feature list");
  const Matrix points = cfg.metric == DistanceMetric::EuclideanL2Norm ? l2_normalize(features) : features;
  const double eps = points.rows() >= 2 ? resolve_eps(points, cfg) : cfg.eps;
  auto out = dbscan_expand(kernels::radius_neighbors(points, eps), cfg.min_pts);
  out.eps_used = eps;
  return out;
}

PseudoLabelTable generate_pseudo_labels(const ClusterAssignment& assignment,
                                        std::span<const std::size_t> target_indices) {
  require(assignment.labels.size() == target_indices.size(),
          "generate_pseudo_labels: assignment does not cover target indices");
  std::set<int> present;
  for (int l : assignment.labels) {
    if (l != kNoise) present.insert(l);
  }
  if (present.empty()) throw NoClustersError();
  std::map<int, std::size_t> remap;
  for (int l : present) remap.emplace(l, remap.size());

  PseudoLabelTable table;
  table.num_classes = remap.size();
  for (std::size_t i = 0; i < assignment.labels.size(); ++i) {
    const int l = assignment.labels[i];
    if (l == kNoise) continue;
    table.samples.push_back(target_indices[i]);
    table.labels.push_back(remap.at(l));
  }
  return table;
}

std::map<std::size_t, std::size_t> unique_camera_histogram(const ClusterAssignment& assignment,
                                                           std::span<const std::uint32_t> cameras) {
  require(assignment.labels.size() == cameras.size(), "unique_camera_histogram: size mismatch");
  std::vector<std::set<std::uint32_t>> cams(assignment.num_clusters);
  for (std::size_t i = 0; i < cameras.size(); ++i) {
    const int l = assignment.labels[i];
    if (l != kNoise) cams[static_cast<std::size_t>(l)].insert(cameras[i]);
  }
  std::map<std::size_t, std::size_t> hist;
  for (const auto& s : cams) ++hist[s.size()];
  return hist;
}

double single_camera_cluster_fraction(const ClusterAssignment& assignment, std::span<const std::uint32_t> cameras) {
  if (assignment.num_clusters == 0) return 0.0;
  const auto hist = unique_camera_histogram(assignment, cameras);
  const auto it = hist.find(1);
  const std::size_t single = it == hist.end() ? 0 : it->second;
  return static_cast<double>(single) / static_cast<double>(assignment.num_clusters);
}

}  // namespace cacl
