#include "cacl/model.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <string>

#include "binary_io.hpp"
#include "cacl/kernels.hpp"

namespace cacl {

Dense make_dense(std::size_t in, std::size_t out, Rng& rng) {
  require(in >= 1 && out >= 1, "make_dense: dimensions must be >= 1");
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  Dense d{Matrix(out, in), std::vector<double>(out, 0.0)};
  for (double& w : d.weight.data()) w = rng.uniform(-bound, bound);
  for (double& b : d.bias) b = rng.uniform(-bound, bound);
  return d;
}

EncoderParams make_encoder(std::size_t input_dim, std::size_t hidden, std::size_t embed_dim, Rng& rng) {
  EncoderParams p;
  if (hidden == 0) {
    p.layers.push_back(make_dense(input_dim, embed_dim, rng));
  } else {
    p.layers.push_back(make_dense(input_dim, hidden, rng));
    p.layers.push_back(make_dense(hidden, embed_dim, rng));
  }
  return p;
}

Matrix dense_forward(const Dense& layer, const Matrix& x) { return kernels::affine(x, layer.weight, layer.bias); }

Dense dense_backward(const Dense& layer, const Matrix& x, const Matrix& grad_out, Matrix* grad_in) {
  require(grad_out.rows() == x.rows() && grad_out.cols() == layer.out_dim(), "dense_backward: shape mismatch");
  Dense g{Matrix(layer.out_dim(), layer.in_dim()), std::vector<double>(layer.out_dim(), 0.0)};
  // dW = grad_out^T x, db = column sums; accumulated over rows in order.
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto xi = x.row(i);
    const auto gi = grad_out.row(i);
    for (std::size_t o = 0; o < layer.out_dim(); ++o) {
      const double go = gi[o];
      if (go == 0.0) continue;
      auto wrow = g.weight.row(o);
      for (std::size_t k = 0; k < xi.size(); ++k) wrow[k] += go * xi[k];
      g.bias[o] += go;
    }
  }
  if (grad_in != nullptr) {
    *grad_in = Matrix(x.rows(), layer.in_dim());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const auto gi = grad_out.row(i);
      auto out = grad_in->row(i);
      for (std::size_t o = 0; o < layer.out_dim(); ++o) {
        const double go = gi[o];
        if (go == 0.0) continue;
        const auto wrow = layer.weight.row(o);
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += go * wrow[k];
      }
    }
  }
  return g;
}

Matrix encoder_forward(const EncoderParams& params, const Matrix& batch, EncoderCache* cache) {
  require(!params.layers.empty() && params.layers.size() <= 2, "encoder must have one or two layers");
  require(batch.cols() == params.input_dim(), "encoder_forward: input dimension mismatch");
  if (params.layers.size() == 1) {
    if (cache != nullptr) *cache = EncoderCache{batch, Matrix(), params.version};
    return dense_forward(params.layers[0], batch);
  }
  Matrix pre = dense_forward(params.layers[0], batch);
  Matrix hidden = pre;
  for (double& v : hidden.data()) v = v > 0.0 ? v : 0.0;
  Matrix out = dense_forward(params.layers[1], hidden);
  if (cache != nullptr) *cache = EncoderCache{batch, std::move(pre), params.version};
  return out;
}

EncoderGrads encoder_backward(const EncoderParams& params, const EncoderCache& cache, const Matrix& grad_out) {
  if (cache.version != params.version) throw RuntimeError("encoder_backward: stale cache");
  require(grad_out.rows() == cache.input.rows() && grad_out.cols() == params.output_dim(),
          "encoder_backward: gradient shape mismatch");
  EncoderGrads g;
  if (params.layers.size() == 1) {
    g.layers.push_back(dense_backward(params.layers[0], cache.input, grad_out, &g.input));
    return g;
  }
  require(cache.pre_activation.rows() == cache.input.rows(), "encoder_backward: stale cache");
  Matrix hidden = cache.pre_activation;
  for (double& v : hidden.data()) v = v > 0.0 ? v : 0.0;
  Matrix grad_hidden;
  Dense g2 = dense_backward(params.layers[1], hidden, grad_out, &grad_hidden);
  for (std::size_t i = 0; i < grad_hidden.size(); ++i) {
    if (cache.pre_activation.data()[i] <= 0.0) grad_hidden.data()[i] = 0.0;
  }
  Dense g1 = dense_backward(params.layers[0], cache.input, grad_hidden, &g.input);
  g.layers.push_back(std::move(g1));
  g.layers.push_back(std::move(g2));
  return g;
}

ClassifierParams reinit_classifier(std::size_t embed_dim, std::size_t num_classes, std::uint64_t seed) {
  require(num_classes >= 1, "reinit_classifier: need at least one class");
  Rng rng(seed);
  return make_dense(embed_dim, num_classes, rng);
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto z = logits.row(i);
    double zmax = z[0];
    for (double v : z) zmax = std::max(zmax, v);
    double sum = 0.0;
    auto out = p.row(i);
    for (std::size_t k = 0; k < z.size(); ++k) {
      out[k] = std::exp(z[k] - zmax);
      sum += out[k];
    }
    for (double& v : out) v /= sum;
  }
  return p;
}

Matrix normalize_forward(const Matrix& x, NormalizeCache* cache) {
  Matrix y = x;
  std::vector<double> norms(x.rows(), 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = y.row(i);
    double s = 0.0;
    for (double v : r) s += v * v;
    norms[i] = std::sqrt(s);
    if (norms[i] == 0.0) continue;
    for (double& v : r) v /= norms[i];
  }
  if (cache != nullptr) *cache = NormalizeCache{y, std::move(norms)};
  return y;
}

Matrix normalize_backward(const NormalizeCache& cache, const Matrix& grad_out) {
  require(grad_out.rows() == cache.output.rows() && grad_out.cols() == cache.output.cols(),
          "normalize_backward: shape mismatch");
  Matrix g(grad_out.rows(), grad_out.cols());
  for (std::size_t i = 0; i < g.rows(); ++i) {
    if (cache.norms[i] == 0.0) continue;
    const auto y = cache.output.row(i);
    const auto go = grad_out.row(i);
    double dot = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) dot += y[k] * go[k];
    auto out = g.row(i);
    for (std::size_t k = 0; k < y.size(); ++k) out[k] = (go[k] - y[k] * dot) / cache.norms[i];
  }
  return g;
}

AdamState make_adam(double lr, double beta1, double beta2, double eps) {
  require(lr > 0.0, "adam: lr must be > 0");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, "adam: betas must be in [0, 1)");
  AdamState s;
  s.lr = lr;
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.eps = eps;
  return s;
}

std::vector<std::span<double>> parameter_views(std::vector<Dense>& layers) {
  std::vector<std::span<double>> out;
  for (auto& l : layers) {
    out.emplace_back(l.weight.data());
    out.emplace_back(l.bias);
  }
  return out;
}

std::vector<std::span<const double>> gradient_views(const std::vector<Dense>& grads) {
  std::vector<std::span<const double>> out;
  for (const auto& l : grads) {
    out.emplace_back(l.weight.data());
    out.emplace_back(l.bias);
  }
  return out;
}

void adam_update(AdamState& state, std::span<const std::span<double>> params,
                 std::span<const std::span<const double>> grads) {
  require(params.size() == grads.size(), "adam_update: tensor count mismatch");
  for (std::size_t t = 0; t < params.size(); ++t) {
    require(params[t].size() == grads[t].size(), "adam_update: tensor shape mismatch");
    for (double g : grads[t]) {
      if (!std::isfinite(g)) throw RuntimeError("adam_update: non-finite gradient");
    }
  }
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.size(), 0.0);
      state.v.emplace_back(p.size(), 0.0);
    }
  }
  require(state.m.size() == params.size(), "adam_update: moment buffers do not match parameters");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& m = state.m[k];
    auto& v = state.v[k];
    require(m.size() == params[k].size(), "adam_update: moment shape mismatch");
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double g = grads[k][i];
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      params[k][i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

void adam_update(AdamState& state, EncoderParams& params, const EncoderGrads& grads) {
  const auto p = parameter_views(params.layers);
  const auto g = gradient_views(grads.layers);
  adam_update(state, p, g);
  ++params.version;
}

void adam_update(AdamState& state, Dense& params, const Dense& grads) {
  const std::array<std::span<double>, 2> p{std::span<double>(params.weight.data()), std::span<double>(params.bias)};
  const std::array<std::span<const double>, 2> g{std::span<const double>(grads.weight.data()),
                                                 std::span<const double>(grads.bias)};
  adam_update(state, p, g);
}

// ---------------------------------------------------------------------------
// Checkpoint I/O
// ---------------------------------------------------------------------------

namespace {

constexpr std::array<char, 4> kCkptMagic = {'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCkptVersion = 1;

void write_dense(std::ostream& out, const Dense& d) {
  binio::put_le(out, static_cast<std::uint32_t>(d.out_dim()));
  binio::put_le(out, static_cast<std::uint32_t>(d.in_dim()));
  for (double w : d.weight.data()) binio::put_f64(out, w);
  for (double b : d.bias) binio::put_f64(out, b);
}

Dense read_dense(std::istream& in) {
  const auto out_dim = binio::get_le<std::uint32_t>(in, "layer shape");
  const auto in_dim = binio::get_le<std::uint32_t>(in, "layer shape");
  Dense d{Matrix(out_dim, in_dim), std::vector<double>(out_dim)};
  for (double& w : d.weight.data()) w = binio::get_f64(in, "weights");
  for (double& b : d.bias) b = binio::get_f64(in, "bias");
  return d;
}

void write_adam(std::ostream& out, const AdamState& s) {
  binio::put_f64(out, s.lr);
  binio::put_f64(out, s.beta1);
  binio::put_f64(out, s.beta2);
  binio::put_f64(out, s.eps);
  binio::put_le(out, s.step);
  binio::put_le(out, static_cast<std::uint32_t>(s.m.size()));
  for (std::size_t k = 0; k < s.m.size(); ++k) {
    binio::put_le(out, static_cast<std::uint64_t>(s.m[k].size()));
    for (double v : s.m[k]) binio::put_f64(out, v);
    for (double v : s.v[k]) binio::put_f64(out, v);
  }
}

AdamState read_adam(std::istream& in) {
  AdamState s;
  s.lr = binio::get_f64(in, "adam");
  s.beta1 = binio::get_f64(in, "adam");
  s.beta2 = binio::get_f64(in, "adam");
  s.eps = binio::get_f64(in, "adam");
  s.step = binio::get_le<std::uint64_t>(in, "adam");
  const auto tensors = binio::get_le<std::uint32_t>(in, "adam");
  for (std::uint32_t k = 0; k < tensors; ++k) {
    const auto n = binio::get_le<std::uint64_t>(in, "adam moments");
    std::vector<double> m(n), v(n);
    for (double& x : m) x = binio::get_f64(in, "adam moments");
    for (double& x : v) x = binio::get_f64(in, "adam moments");
    s.m.push_back(std::move(m));
    s.v.push_back(std::move(v));
  }
  return s;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kCkptMagic.data(), 4);
  binio::put_le(out, kCkptVersion);
  binio::put_le(out, ckpt.stage);
  binio::put_le(out, static_cast<std::uint32_t>(ckpt.encoder.layers.size()));
  for (const auto& l : ckpt.encoder.layers) write_dense(out, l);
  write_adam(out, ckpt.encoder_opt);
  write_dense(out, ckpt.source_head);
  write_adam(out, ckpt.source_opt);
  binio::put_le(out, static_cast<std::uint8_t>(ckpt.target_head.has_value() ? 1 : 0));
  if (ckpt.target_head) {
    write_dense(out, *ckpt.target_head);
    write_adam(out, ckpt.target_opt);
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (!in || magic != kCkptMagic) throw ValidationError(path.string() + ": bad magic (expected CKPT)");
  const auto version = binio::get_le<std::uint32_t>(in, "version");
  if (version != kCkptVersion) throw ValidationError(path.string() + ": unsupported checkpoint version");
  Checkpoint c;
  c.stage = binio::get_le<std::uint32_t>(in, "stage");
  const auto layers = binio::get_le<std::uint32_t>(in, "layer count");
  if (layers < 1 || layers > 2) throw ValidationError(path.string() + ": encoder must have 1 or 2 layers");
  for (std::uint32_t i = 0; i < layers; ++i) c.encoder.layers.push_back(read_dense(in));
  c.encoder_opt = read_adam(in);
  c.source_head = read_dense(in);
  c.source_opt = read_adam(in);
  if (binio::get_le<std::uint8_t>(in, "target head flag") != 0) {
    c.target_head = read_dense(in);
    c.target_opt = read_adam(in);
  }
  return c;
}

}  // namespace cacl
