#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <span>
#include <vector>

#include "cacl/clustering.hpp"
#include "cacl/matrix.hpp"

namespace cacl {

using CameraCounts = std::map<std::uint32_t, std::size_t>;

// Shannon entropy (nats) of the camera distribution r(c) = n(c) / sum n.
// Terms are accumulated in ascending-count order so relabelling cameras
// cannot change the result.
double camera_entropy(const CameraCounts& counts);

// log(H + 1)
double cluster_weight(double entropy);

struct ClusterWeight {
  CameraCounts camera_counts;
  double entropy = 0.0;
  double weight = 0.0;
};

struct ClusterWeightTable {
  std::vector<ClusterWeight> clusters;

  std::size_t size() const { return clusters.size(); }
  std::vector<double> weights() const;
};

// `camera_of_sample` is indexed by dataset index (the values in table.samples).
ClusterWeightTable build_weight_table(const PseudoLabelTable& table, std::span<const std::uint32_t> camera_of_sample);

struct LossOutput {
  double value = 0.0;
  Matrix grad;
};

// (1/B) sum_i -w[label_i] * log softmax(logits_i)[label_i], with its gradient
// w.r.t. the logits. Rows whose weight is zero contribute nothing.
LossOutput cd_cross_entropy(const Matrix& logits, std::span<const std::size_t> labels,
                            std::span<const double> weights);

// FIFO bank of recent (embedding, pseudo-label) pairs used to widen triplet
// mining. Entries are constants to the loss. Single writer: the training loop.
class CrossBatchMemory {
 public:
  explicit CrossBatchMemory(std::size_t capacity = 512) : capacity_(capacity) {}

  void push(const Matrix& embeddings, std::span<const std::size_t> labels);
  void clear();

  std::size_t size() const { return labels_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return labels_.empty(); }

  // Oldest first.
  Matrix embeddings() const;
  std::vector<std::size_t> labels() const { return {labels_.begin(), labels_.end()}; }

 private:
  std::size_t capacity_;
  std::deque<std::vector<double>> rows_;
  std::deque<std::size_t> labels_;
};

struct TripletOutput {
  double value = 0.0;
  Matrix grad;                    // w.r.t. the in-batch embeddings
  std::vector<double> per_anchor; // weighted hinge per batch row; 0 for skipped anchors
  std::vector<bool> valid_anchor; // anchor had both a positive and a negative
  std::size_t num_valid = 0;
  bool no_valid_anchors = false;
};

// Batch-hard triplet loss where each anchor's hinge is scaled by its cluster
// weight: w[l_a] * max(0, max_p ||e_a - e_p|| - min_n ||e_a - e_n|| + margin),
// averaged over anchors that have at least one positive and one negative in
// batch + memory. Selection ties go to the lowest pool index (batch rows
// first, then memory oldest first).
TripletOutput cd_triplet(const Matrix& embeddings, std::span<const std::size_t> labels,
                         std::span<const double> weights, double margin, const CrossBatchMemory* memory = nullptr);

}  // namespace cacl
