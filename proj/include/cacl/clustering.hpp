#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "cacl/kernels.hpp"
#include "cacl/matrix.hpp"

namespace cacl {

enum class DistanceMetric {
  EuclideanL2Norm,  // Euclidean distance after scaling each row to unit norm
  Euclidean,        // raw Euclidean distance
};

struct DbscanConfig {
  double eps = 0.5;
  std::size_t min_pts = 4;
  DistanceMetric metric = DistanceMetric::EuclideanL2Norm;
  // When set, eps is recomputed per call as this percentile of pairwise
  // distances (in percent, e.g. 1.6).
  bool eps_from_percentile = false;
  double eps_percentile = 1.6;

  void validate() const;
};

inline constexpr int kNoise = -1;

struct ClusterAssignment {
  std::vector<int> labels;  // cluster id in [0, num_clusters) or kNoise
  std::vector<bool> core;   // core-point flags, same length as labels
  std::size_t num_clusters = 0;
  double eps_used = 0.0;

  std::size_t noise_count() const;
  std::vector<std::size_t> cluster_sizes() const;
};

// Rows scaled to unit Euclidean norm; zero rows stay zero.
Matrix l2_normalize(const Matrix& features);

// eps for this round: cfg.eps, or the configured percentile of the pairwise
// distances of `points` (already in metric space).
double resolve_eps(const Matrix& points, const DbscanConfig& cfg);

// DBSCAN over precomputed neighbourhoods (each list ascending, containing the
// point itself). Clusters are numbered in order of discovery while scanning
// points by ascending index; a border point joins the first cluster whose
// expansion reaches it.
ClusterAssignment dbscan_expand(const kernels::NeighborLists& neighbors, std::size_t min_pts);

ClusterAssignment dbscan(const Matrix& features, const DbscanConfig& cfg);

// Non-noise samples of one clustering round with contiguous labels.
struct PseudoLabelTable {
  std::vector<std::size_t> samples;  // dataset indices, in assignment order
  std::vector<std::size_t> labels;   // parallel to samples
  std::size_t num_classes = 0;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

// `target_indices[i]` is the dataset index of assignment.labels[i]. Throws
// NoClustersError when every sample is noise.
PseudoLabelTable generate_pseudo_labels(const ClusterAssignment& assignment,
                                        std::span<const std::size_t> target_indices);

// Number of clusters keyed by how many distinct cameras they contain.
std::map<std::size_t, std::size_t> unique_camera_histogram(const ClusterAssignment& assignment,
                                                           std::span<const std::uint32_t> cameras);

// Share of clusters whose members all come from one camera; 0 without clusters.
double single_camera_cluster_fraction(const ClusterAssignment& assignment, std::span<const std::uint32_t> cameras);

}  // namespace cacl
