#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cacl/matrix.hpp"

namespace cacl {

enum class BandwidthMode { Fixed, MedianHeuristic };

struct KernelConfig {
  double bandwidth = 1.0;  // sigma; used only in Fixed mode
  BandwidthMode bandwidth_mode = BandwidthMode::MedianHeuristic;
  std::size_t max_samples_per_set = 2048;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ScheduleEntry {
  std::uint32_t camera = 0;
  double mmd_sq = 0.0;
  std::size_t subset_size = 0;  // samples actually used after subsampling
};

// Target cameras ordered by ascending squared MMD to the source set; ties go
// to the smaller camera id.
struct CurriculumSchedule {
  double sigma = 1.0;
  std::size_t source_size = 0;
  std::vector<ScheduleEntry> entries;

  std::vector<std::uint32_t> camera_order() const;
};

// exp(-||x - y||^2 / (2 sigma^2))
double gaussian_kernel(std::span<const double> x, std::span<const double> y, double sigma);

// Median pairwise Euclidean distance over a seeded subsample of at most `cap`
// rows, divided by sqrt(2). Falls back to 1 when the median is zero.
double median_bandwidth(const Matrix& features, std::size_t cap, std::uint64_t seed);

inline constexpr double kMmdClampEps = 1e-12;

// Biased (V-statistic) squared MMD with a Gaussian kernel:
//   mean k(a, a') + mean k(b, b') - 2 mean k(a, b).
// Rows are summed in lexicographic order and the cross term always runs with
// the canonically smaller set as the outer loop, so the result is exactly
// symmetric and exactly invariant to row permutations.
double mmd_squared(const Matrix& a, const Matrix& b, double sigma);

struct CameraFeatures {
  std::uint32_t camera = 0;
  Matrix features;
};

// One squared MMD per target camera against the source, sharing one sigma.
// Subsampling draws from a generator seeded with cfg.seed: the source set
// first, then each subset in the given order.
CurriculumSchedule build_curriculum(const Matrix& source, const std::vector<CameraFeatures>& subsets,
                                    const KernelConfig& cfg);

}  // namespace cacl
