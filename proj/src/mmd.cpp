#include "cacl/mmd.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "cacl/kernels.hpp"
#include "cacl/rng.hpp"

namespace cacl {

void KernelConfig::validate() const {
  if (bandwidth_mode == BandwidthMode::Fixed) require(bandwidth > 0.0, "kernel bandwidth must be > 0");
  require(max_samples_per_set >= 2, "max_samples_per_set must be >= 2");
}

std::vector<std::uint32_t> CurriculumSchedule::camera_order() const {
  std::vector<std::uint32_t> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.camera);
  return out;
}

double gaussian_kernel(std::span<const double> x, std::span<const double> y, double sigma) {
  require(x.size() == y.size(), "gaussian_kernel: dimension mismatch");
  require(sigma > 0.0, "gaussian_kernel: sigma must be > 0");
  return std::exp(-kernels::squared_distance(x, y) / (2.0 * sigma * sigma));
}

double median_bandwidth(const Matrix& features, std::size_t cap, std::uint64_t seed) {
  require(features.rows() >= 2, "median_bandwidth: need at least 2 vectors");
  require(cap >= 2, "median_bandwidth: cap must be >= 2");
  Rng rng(seed);
  const auto idx = rng.sample_without_replacement(features.rows(), cap);
  const Matrix sub = features.gather_rows(idx);
  const Matrix d2 = kernels::pairwise_sq_dists(sub, sub);
  std::vector<double> dists;
  dists.reserve(sub.rows() * (sub.rows() - 1) / 2);
  for (std::size_t i = 0; i < sub.rows(); ++i) {
    for (std::size_t j = i + 1; j < sub.rows(); ++j) dists.push_back(std::sqrt(d2(i, j)));
  }
  std::sort(dists.begin(), dists.end());
  const std::size_t m = dists.size();
  const double median = (m % 2 == 1) ? dists[m / 2] : 0.5 * (dists[m / 2 - 1] + dists[m / 2]);
  if (median == 0.0) return 1.0;
  return median / std::sqrt(2.0);
}

namespace {

// Strict weak order used only to pick which set drives the cross-term loop.
bool canonically_before(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) return a.rows() < b.rows();
  return std::lexicographical_compare(a.data().begin(), a.data().end(), b.data().begin(), b.data().end());
}

// Rows in lexicographic order, so the sums below do not depend on input order.
Matrix sorted_rows(const Matrix& m) {
  std::vector<std::size_t> order(m.rows());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const auto rx = m.row(x);
    const auto ry = m.row(y);
    return std::lexicographical_compare(rx.begin(), rx.end(), ry.begin(), ry.end());
  });
  return m.gather_rows(order);
}

}  // namespace

double mmd_squared(const Matrix& a_in, const Matrix& b_in, double sigma) {
  require(a_in.rows() > 0 && b_in.rows() > 0, "mmd_squared: empty set");
  require(a_in.cols() == b_in.cols(), "mmd_squared: dimension mismatch");
  require(sigma > 0.0, "mmd_squared: sigma must be > 0");
  const Matrix a = sorted_rows(a_in);
  const Matrix b = sorted_rows(b_in);
  const double n = static_cast<double>(a.rows());
  const double m = static_cast<double>(b.rows());
  const double self_a = kernels::gaussian_block_sum(a, a, sigma) / (n * n);
  const double self_b = kernels::gaussian_block_sum(b, b, sigma) / (m * m);
  const double cross = (canonically_before(b, a) ? kernels::gaussian_block_sum(b, a, sigma)
                                                 : kernels::gaussian_block_sum(a, b, sigma)) /
                       (n * m);
  const double value = (self_a + self_b) - 2.0 * cross;
  if (value < 0.0) {
    if (value < -kMmdClampEps) {
      throw RuntimeError("mmd_squared: negative value " + std::to_string(value) + " beyond clamp tolerance");
    }
    return 0.0;
  }
  return value;
}

CurriculumSchedule build_curriculum(const Matrix& source, const std::vector<CameraFeatures>& subsets,
                                    const KernelConfig& cfg) {
  cfg.validate();
  require(source.rows() > 0, "build_curriculum: empty source set");
  require(!subsets.empty(), "build_curriculum: no target subsets");
  Rng rng(cfg.seed);
  const auto src_idx = rng.sample_without_replacement(source.rows(), cfg.max_samples_per_set);
  const Matrix src = source.gather_rows(src_idx);

  std::vector<Matrix> subs;
  subs.reserve(subsets.size());
  std::set<std::uint32_t> seen;
  for (const auto& s : subsets) {
    require(seen.insert(s.camera).second, "build_curriculum: duplicate camera " + std::to_string(s.camera));
    require(s.features.rows() > 0, "build_curriculum: empty subset for camera " + std::to_string(s.camera));
    require(s.features.cols() == source.cols(), "build_curriculum: dimension mismatch");
    const auto idx = rng.sample_without_replacement(s.features.rows(), cfg.max_samples_per_set);
    subs.push_back(s.features.gather_rows(idx));
  }

  CurriculumSchedule out;
  out.source_size = src.rows();
  if (cfg.bandwidth_mode == BandwidthMode::Fixed) {
    out.sigma = cfg.bandwidth;
  } else {
    std::size_t total = src.rows();
    for (const auto& s : subs) total += s.rows();
    Matrix pooled(total, source.cols());
    std::size_t r = 0;
    auto append = [&](const Matrix& m) {
      std::copy(m.data().begin(), m.data().end(), pooled.data().begin() + static_cast<std::ptrdiff_t>(r * m.cols()));
      r += m.rows();
    };
    append(src);
    for (const auto& s : subs) append(s);
    out.sigma = pooled.rows() >= 2 ? median_bandwidth(pooled, cfg.max_samples_per_set, cfg.seed) : 1.0;
  }

  for (std::size_t c = 0; c < subsets.size(); ++c) {
    out.entries.push_back({subsets[c].camera, mmd_squared(src, subs[c], out.sigma), subs[c].rows()});
  }
  std::sort(out.entries.begin(), out.entries.end(), [](const ScheduleEntry& x, const ScheduleEntry& y) {
    if (x.mmd_sq != y.mmd_sq) return x.mmd_sq < y.mmd_sq;
    return x.camera < y.camera;
  });
  return out;
}

}  // namespace cacl
