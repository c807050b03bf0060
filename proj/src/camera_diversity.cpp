#include "cacl/camera_diversity.hpp"

#include <utility>
#include <algorithm>
#include <cmath>
#include <string>

#include "cacl/kernels.hpp"

namespace cacl {

double camera_entropy(const CameraCounts& counts) {
  std::vector<std::size_t> nz;
  std::size_t total = 0;
  for (const auto& [cam, n] : counts) {
    if (n == 0) continue;
    nz.push_back(n);
    total += n;
  }
  require(total > 0, "camera_entropy: all counts zero");
  std::sort(nz.begin(), nz.end());
  double h = 0.0;
  for (std::size_t n : nz) {
    const double r = static_cast<double>(n) / static_cast<double>(total);
    h -= r * std::log(r);
  }
  // A lone camera gives -1 * log(1) = -0.0.
  return nz.size() == 1 ? 0.0 : std::max(h, 0.0);
}

double cluster_weight(double entropy) {
  require(entropy >= 0.0, "cluster_weight: negative entropy");
  return std::log(entropy + 1.0);
}

std::vector<double> ClusterWeightTable::weights() const {
  std::vector<double> w;
  w.reserve(clusters.size());
  for (const auto& c : clusters) w.push_back(c.weight);
  return w;
}

ClusterWeightTable build_weight_table(const PseudoLabelTable& table, std::span<const std::uint32_t> camera_of_sample) {
  ClusterWeightTable out;
  out.clusters.resize(table.num_classes);
  for (std::size_t i = 0; i < table.size(); ++i) {
    require(table.labels[i] < table.num_classes, "build_weight_table: label out of range");
    require(table.samples[i] < camera_of_sample.size(), "build_weight_table: sample index out of range");
    ++out.clusters[table.labels[i]].camera_counts[camera_of_sample[table.samples[i]]];
  }
  for (auto& c : out.clusters) {
    if (c.camera_counts.empty()) continue;  // empty cluster: no samples, weight 0
    c.entropy = camera_entropy(c.camera_counts);
    c.weight = cluster_weight(c.entropy);
  }
  return out;
}

LossOutput cd_cross_entropy(const Matrix& logits, std::span<const std::size_t> labels,
                            std::span<const double> weights) {
  const std::size_t batch = logits.rows();
  const std::size_t classes = logits.cols();
  require(labels.size() == batch, "cd_cross_entropy: label count mismatch");
  require(weights.size() == classes, "cd_cross_entropy: weight count must equal class count");
  LossOutput out{0.0, Matrix(batch, classes)};
  if (batch == 0) return out;
  const double inv_b = 1.0 / static_cast<double>(batch);
  std::vector<double> prob(classes);
  for (std::size_t i = 0; i < batch; ++i) {
    const auto z = logits.row(i);
    for (double v : z) {
      if (!std::isfinite(v)) throw ValidationError("cd_cross_entropy: non-finite logit in row " + std::to_string(i));
    }
    const std::size_t y = labels[i];
    if (y >= classes) throw ValidationError("cd_cross_entropy: label out of range in row " + std::to_string(i));
    const double w = weights[y];
    require(w >= 0.0, "cd_cross_entropy: negative weight");
    if (w == 0.0) continue;
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (std::size_t k = 0; k < classes; ++k) {
      prob[k] = std::exp(z[k] - zmax);
      sum += prob[k];
    }
    const double log_sum = std::log(sum);
    out.value += -w * (z[y] - zmax - log_sum) * inv_b;
    auto g = out.grad.row(i);
    for (std::size_t k = 0; k < classes; ++k) {
      const double p = prob[k] / sum;
      g[k] = w * inv_b * (p - (k == y ? 1.0 : 0.0));
    }
  }
  return out;
}

void CrossBatchMemory::push(const Matrix& embeddings, std::span<const std::size_t> labels) {
  require(embeddings.rows() == labels.size(), "CrossBatchMemory::push: size mismatch");
  if (capacity_ == 0) return;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto r = embeddings.row(i);
    rows_.emplace_back(r.begin(), r.end());
    labels_.push_back(labels[i]);
    if (labels_.size() > capacity_) {
      rows_.pop_front();
      labels_.pop_front();
    }
  }
}

void CrossBatchMemory::clear() {
  rows_.clear();
  labels_.clear();
}

Matrix CrossBatchMemory::embeddings() const {
  const std::size_t d = rows_.empty() ? 0 : rows_.front().size();
  Matrix m(rows_.size(), d);
  for (std::size_t i = 0; i < rows_.size(); ++i) std::copy(rows_[i].begin(), rows_[i].end(), m.row(i).begin());
  return m;
}

TripletOutput cd_triplet(const Matrix& embeddings, std::span<const std::size_t> labels,
                         std::span<const double> weights, double margin, const CrossBatchMemory* memory) {
  const std::size_t batch = embeddings.rows();
  const std::size_t dim = embeddings.cols();
  require(labels.size() == batch, "cd_triplet: label count mismatch");
  for (std::size_t l : labels) require(l < weights.size(), "cd_triplet: label out of range");

  // Mining pool: batch rows, then memory rows.
  Matrix mem_emb;
  std::vector<std::size_t> mem_labels;
  if (memory != nullptr && !memory->empty()) {
    mem_emb = memory->embeddings();
    mem_labels = memory->labels();
    require(mem_emb.cols() == dim, "cd_triplet: memory dimension mismatch");
  }
  const std::size_t pool = batch + mem_labels.size();
  auto pool_row = [&](std::size_t j) -> std::span<const double> {
    return j < batch ? embeddings.row(j) : std::as_const(mem_emb).row(j - batch);
  };
  auto pool_label = [&](std::size_t j) { return j < batch ? labels[j] : mem_labels[j - batch]; };

  TripletOutput out;
  out.grad = Matrix(batch, dim);
  out.per_anchor.assign(batch, 0.0);
  out.valid_anchor.assign(batch, false);

  struct Selection {
    std::size_t pos = 0, neg = 0;
    double d_pos = 0.0, d_neg = 0.0;
  };
  std::vector<Selection> sel(batch);
  for (std::size_t a = 0; a < batch; ++a) {
    const auto ea = embeddings.row(a);
    bool has_pos = false, has_neg = false;
    for (std::size_t j = 0; j < pool; ++j) {
      if (j == a) continue;
      const double d = std::sqrt(kernels::squared_distance(ea, pool_row(j)));
      if (pool_label(j) == labels[a]) {
        if (!has_pos || d > sel[a].d_pos) {
          sel[a].pos = j;
          sel[a].d_pos = d;
        }
        has_pos = true;
      } else {
        if (!has_neg || d < sel[a].d_neg) {
          sel[a].neg = j;
          sel[a].d_neg = d;
        }
        has_neg = true;
      }
    }
    out.valid_anchor[a] = has_pos && has_neg;
    if (out.valid_anchor[a]) ++out.num_valid;
  }
  if (out.num_valid == 0) {
    out.no_valid_anchors = true;
    return out;
  }

  const double inv_n = 1.0 / static_cast<double>(out.num_valid);
  for (std::size_t a = 0; a < batch; ++a) {
    if (!out.valid_anchor[a]) continue;
    const double w = weights[labels[a]];
    require(w >= 0.0, "cd_triplet: negative weight");
    const auto& s = sel[a];
    const double hinge = s.d_pos - s.d_neg + margin;
    if (w == 0.0 || hinge <= 0.0) continue;
    out.per_anchor[a] = w * hinge;
    out.value += w * hinge * inv_n;

    const double scale = w * inv_n;
    const auto ea = embeddings.row(a);
    const auto ep = pool_row(s.pos);
    const auto en = pool_row(s.neg);
    auto ga = out.grad.row(a);
    for (std::size_t k = 0; k < dim; ++k) {
      // Unit directions; a zero distance has no defined direction and gets a zero subgradient.
      const double up = s.d_pos > 0.0 ? (ea[k] - ep[k]) / s.d_pos : 0.0;
      const double un = s.d_neg > 0.0 ? (ea[k] - en[k]) / s.d_neg : 0.0;
      ga[k] += scale * (up - un);
      if (s.pos < batch) out.grad(s.pos, k) -= scale * up;
      if (s.neg < batch) out.grad(s.neg, k) += scale * un;
    }
  }
  return out;
}

}  // namespace cacl
