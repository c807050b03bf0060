#pragma once

// Data-parallel inner loops shared by the scheduler, clustering, evaluation
// and the embedding head. Each kernel exists twice: `serial::` is the plain
// reference kept for tests and benchmarks, `omp::` parallelizes over rows.
// Both produce bit-identical results: every row is reduced sequentially and
// row partials are combined in ascending index order.

#include <cstddef>
#include <span>
#include <vector>

#include "cacl/matrix.hpp"

namespace cacl::kernels {

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

using NeighborLists = std::vector<std::vector<std::size_t>>;

namespace serial {

// out(i, j) = ||a_i - b_j||^2
Matrix pairwise_sq_dists(const Matrix& a, const Matrix& b);

// Sum over i (outer, ascending) of sum over j of exp(-||a_i - b_j||^2 / (2 sigma^2)).
double gaussian_block_sum(const Matrix& a, const Matrix& b, double sigma);

// For every row i, the ascending list of rows j (including i) with
// ||x_i - x_j|| <= eps.
NeighborLists radius_neighbors(const Matrix& x, double eps);

// out = x * w^T + bias (bias may be empty). w is out_dim x in_dim.
Matrix affine(const Matrix& x, const Matrix& w, std::span<const double> bias);

}  // namespace serial

namespace omp {

Matrix pairwise_sq_dists(const Matrix& a, const Matrix& b);
double gaussian_block_sum(const Matrix& a, const Matrix& b, double sigma);
NeighborLists radius_neighbors(const Matrix& x, double eps);
Matrix affine(const Matrix& x, const Matrix& w, std::span<const double> bias);

}  // namespace omp

// Library-wide entry points; route to omp:: when built with OpenMP.
Matrix pairwise_sq_dists(const Matrix& a, const Matrix& b);
double gaussian_block_sum(const Matrix& a, const Matrix& b, double sigma);
NeighborLists radius_neighbors(const Matrix& x, double eps);
Matrix affine(const Matrix& x, const Matrix& w, std::span<const double> bias);

// Caps worker threads; 0 restores the runtime default. No-op without OpenMP.
void set_num_threads(int n);
// Reads CACL_THREADS from the environment and applies it.
void apply_thread_env();

}  // namespace cacl::kernels
