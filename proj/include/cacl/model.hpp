#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "cacl/matrix.hpp"
#include "cacl/rng.hpp"

namespace cacl {

// Affine map y = W x + b with W stored out_dim x in_dim.
struct Dense {
  Matrix weight;
  std::vector<double> bias;

  std::size_t in_dim() const { return weight.cols(); }
  std::size_t out_dim() const { return weight.rows(); }

  friend bool operator==(const Dense&, const Dense&) = default;
};

// Seeded uniform init in [-1/sqrt(in), 1/sqrt(in)], weights row-major then bias.
Dense make_dense(std::size_t in, std::size_t out, Rng& rng);

// One or two affine layers with max(0, .) between them.
struct EncoderParams {
  std::vector<Dense> layers;
  // Bumped by every optimizer step; caches remember the version they saw.
  std::uint64_t version = 0;

  std::size_t input_dim() const { return layers.front().in_dim(); }
  std::size_t output_dim() const { return layers.back().out_dim(); }
};

// hidden == 0 builds the single-layer encoder.
EncoderParams make_encoder(std::size_t input_dim, std::size_t hidden, std::size_t embed_dim, Rng& rng);

struct EncoderCache {
  Matrix input;
  Matrix pre_activation;  // first-layer output before ReLU (two-layer only)
  std::uint64_t version = 0;
};

Matrix encoder_forward(const EncoderParams& params, const Matrix& batch, EncoderCache* cache = nullptr);

struct EncoderGrads {
  std::vector<Dense> layers;
  Matrix input;
};

// Exact reverse-mode gradients for the forward pass recorded in `cache`.
// Throws if the parameters changed since that forward pass.
EncoderGrads encoder_backward(const EncoderParams& params, const EncoderCache& cache, const Matrix& grad_out);

using ClassifierParams = Dense;

// L uniform-initialized classes over d_e inputs, from a generator seeded with `seed`.
ClassifierParams reinit_classifier(std::size_t embed_dim, std::size_t num_classes, std::uint64_t seed);

Matrix dense_forward(const Dense& layer, const Matrix& x);

// Returns parameter gradients; writes the input gradient into `grad_in` when given.
Dense dense_backward(const Dense& layer, const Matrix& x, const Matrix& grad_out, Matrix* grad_in);

// Row-wise softmax; each row sums to 1.
Matrix softmax_rows(const Matrix& logits);

// y = x / ||x|| per row; zero rows stay zero.
struct NormalizeCache {
  Matrix output;
  std::vector<double> norms;
};
Matrix normalize_forward(const Matrix& x, NormalizeCache* cache = nullptr);
Matrix normalize_backward(const NormalizeCache& cache, const Matrix& grad_out);

// Adam with bias correction. One moment buffer per parameter tensor.
struct AdamState {
  double lr = 3.5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

AdamState make_adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

// Flat views over every tensor of a parameter set, in a fixed order:
// for each layer, weight then bias.
std::vector<std::span<double>> parameter_views(std::vector<Dense>& layers);
std::vector<std::span<const double>> gradient_views(const std::vector<Dense>& grads);

// One Adam step over matching parameter and gradient tensors. Moment buffers
// are allocated lazily on the first call.
void adam_update(AdamState& state, std::span<const std::span<double>> params,
                 std::span<const std::span<const double>> grads);

void adam_update(AdamState& state, EncoderParams& params, const EncoderGrads& grads);
void adam_update(AdamState& state, Dense& params, const Dense& grads);

// Everything needed to resume or evaluate a run.
struct Checkpoint {
  EncoderParams encoder;
  AdamState encoder_opt;
  Dense source_head;
  AdamState source_opt;
  std::optional<Dense> target_head;
  AdamState target_opt;
  std::uint32_t stage = 0;
};

// Little-endian: "CKPT", u32 version, then shapes, f64 parameters and Adam state.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace cacl
