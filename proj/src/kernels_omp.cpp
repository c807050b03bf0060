#include "cacl/kernels.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cacl::kernels {

namespace omp {

Matrix pairwise_sq_dists(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.cols(), "pairwise_sq_dists: dimension mismatch");
  Matrix out(a.rows(), b.rows());
  const auto n = static_cast<std::ptrdiff_t>(a.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto ai = a.row(static_cast<std::size_t>(i));
    for (std::size_t j = 0; j < b.rows(); ++j) {
      out(static_cast<std::size_t>(i), j) = squared_distance(ai, b.row(j));
    }
  }
  return out;
}

double gaussian_block_sum(const Matrix& a, const Matrix& b, double sigma) {
  require(a.cols() == b.cols(), "gaussian_block_sum: dimension mismatch");
  const double inv = 1.0 / (2.0 * sigma * sigma);
  std::vector<double> row_sums(a.rows(), 0.0);
  const auto n = static_cast<std::ptrdiff_t>(a.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto ai = a.row(static_cast<std::size_t>(i));
    double s = 0.0;
    for (std::size_t j = 0; j < b.rows(); ++j) s += std::exp(-squared_distance(ai, b.row(j)) * inv);
    row_sums[static_cast<std::size_t>(i)] = s;
  }
  double total = 0.0;
  for (double s : row_sums) total += s;
  return total;
}

NeighborLists radius_neighbors(const Matrix& x, double eps) {
  const double eps_sq = eps * eps;
  NeighborLists out(x.rows());
  const auto n = static_cast<std::ptrdiff_t>(x.rows());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto xi = x.row(static_cast<std::size_t>(i));
    auto& list = out[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < x.rows(); ++j) {
      if (squared_distance(xi, x.row(j)) <= eps_sq) list.push_back(j);
    }
  }
  return out;
}

Matrix affine(const Matrix& x, const Matrix& w, std::span<const double> bias) {
  require(x.cols() == w.cols(), "affine: input dimension mismatch");
  require(bias.empty() || bias.size() == w.rows(), "affine: bias size mismatch");
  Matrix out(x.rows(), w.rows());
  const auto n = static_cast<std::ptrdiff_t>(x.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto xi = x.row(static_cast<std::size_t>(i));
    for (std::size_t o = 0; o < w.rows(); ++o) {
      const auto wo = w.row(o);
      double s = bias.empty() ? 0.0 : bias[o];
      for (std::size_t k = 0; k < xi.size(); ++k) s += wo[k] * xi[k];
      out(static_cast<std::size_t>(i), o) = s;
    }
  }
  return out;
}

}  // namespace omp

#ifdef _OPENMP
Matrix pairwise_sq_dists(const Matrix& a, const Matrix& b) { return omp::pairwise_sq_dists(a, b); }
double gaussian_block_sum(const Matrix& a, const Matrix& b, double sigma) {
  return omp::gaussian_block_sum(a, b, sigma);
}
NeighborLists radius_neighbors(const Matrix& x, double eps) { return omp::radius_neighbors(x, eps); }
Matrix affine(const Matrix& x, const Matrix& w, std::span<const double> bias) {
  return omp::affine(x, w, bias);
}
#else
Matrix pairwise_sq_dists(const Matrix& a, const Matrix& b) { return serial::pairwise_sq_dists(a, b); }
double gaussian_block_sum(const Matrix& a, const Matrix& b, double sigma) {
  return serial::gaussian_block_sum(a, b, sigma);
}
NeighborLists radius_neighbors(const Matrix& x, double eps) { return serial::radius_neighbors(x, eps); }
Matrix affine(const Matrix& x, const Matrix& w, std::span<const double> bias) {
  return serial::affine(x, w, bias);
}
#endif

void set_num_threads(int n) {
#ifdef _OPENMP
  static const int default_threads = omp_get_max_threads();
  omp_set_num_threads(n > 0 ? n : default_threads);
#else
  (void)n;
#endif
}

void apply_thread_env() {
  const char* v = std::getenv("CACL_THREADS");
  if (v == nullptr || *v == '\0') return;
  int n = 0;
  const char* end = v + std::strlen(v);
  const auto [ptr, ec] = std::from_chars(v, end, n);
  if (ec != std::errc() || ptr != end) throw ValidationError(std::string("CACL_THREADS is not an integer: ") + v);
  require(n >= 0, "CACL_THREADS must be >= 0");
  set_num_threads(n);
}

}  // namespace cacl::kernels
