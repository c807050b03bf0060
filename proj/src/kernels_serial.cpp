#include "cacl/kernels.hpp"

#include <cmath>

namespace cacl::kernels::serial {

Matrix pairwise_sq_dists(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.cols(), "pairwise_sq_dists: dimension mismatch");
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto ai = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) out(i, j) = squared_distance(ai, b.row(j));
  }
  return out;
}

double gaussian_block_sum(const Matrix& a, const Matrix& b, double sigma) {
  require(a.cols() == b.cols(), "gaussian_block_sum: dimension mismatch");
  const double inv = 1.0 / (2.0 * sigma * sigma);
  double total = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto ai = a.row(i);
    double row_sum = 0.0;
    for (std::size_t j = 0; j < b.rows(); ++j) row_sum += std::exp(-squared_distance(ai, b.row(j)) * inv);
    total += row_sum;
  }
  return total;
}

NeighborLists radius_neighbors(const Matrix& x, double eps) {
  const double eps_sq = eps * eps;
  NeighborLists out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto xi = x.row(i);
    for (std::size_t j = 0; j < x.rows(); ++j) {
      if (squared_distance(xi, x.row(j)) <= eps_sq) out[i].push_back(j);
    }
  }
  return out;
}

Matrix affine(const Matrix& x, const Matrix& w, std::span<const double> bias) {
  require(x.cols() == w.cols(), "affine: input dimension mismatch");
  require(bias.empty() || bias.size() == w.rows(), "affine: bias size mismatch");
  Matrix out(x.rows(), w.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto xi = x.row(i);
    for (std::size_t o = 0; o < w.rows(); ++o) {
      const auto wo = w.row(o);
      double s = bias.empty() ? 0.0 : bias[o];
      for (std::size_t k = 0; k < xi.size(); ++k) s += wo[k] * xi[k];
      out(i, o) = s;
    }
  }
  return out;
}

}  // namespace cacl::kernels::serial
