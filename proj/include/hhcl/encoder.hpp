#pragma once

#include <string>
#include <vector>

#include "hhcl/core.hpp"

namespace hhcl {

/// Feed-forward embedding network: affine layers with tanh between them and
/// row-wise L2 normalization on the output. Parameters live in one flat
/// vector, layer by layer, each layer stored as W (out x in, row-major) then b.
class EncoderModel {
 public:
  static constexpr double kNormEpsilon = 1e-12;

  EncoderModel() = default;

  explicit EncoderModel(std::vector<std::size_t> widths) : widths_(std::move(widths)) {
    if (widths_.size() < 2) throw ParameterError("encoder needs at least input and output widths");
    for (auto w : widths_)
      if (w == 0) throw ParameterError("encoder layer width must be positive");
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
      offsets_.push_back(total);
      total += widths_[l + 1] * widths_[l] + widths_[l + 1];
    }
    params_.assign(total, 0.0);
  }

  /// Xavier-normal weights, zero biases.
  static EncoderModel random(std::vector<std::size_t> widths, std::uint64_t seed) {
    EncoderModel m(std::move(widths));
    Rng rng(seed);
    for (std::size_t l = 0; l < m.num_layers(); ++l) {
      const double scale = std::sqrt(2.0 / static_cast<double>(m.fan_in(l) + m.fan_out(l)));
      for (double& w : m.weights(l)) w = scale * standard_normal(rng);
    }
    return m;
  }

  /// Single linear layer computing the identity map.
  static EncoderModel identity(std::size_t dims) {
    EncoderModel m({dims, dims});
    auto w = m.weights(0);
    for (std::size_t i = 0; i < dims; ++i) w[i * dims + i] = 1.0;
    return m;
  }

  const std::vector<std::size_t>& widths() const noexcept { return widths_; }
  std::size_t input_dims() const { return widths_.front(); }
  std::size_t output_dims() const { return widths_.back(); }
  std::size_t num_layers() const noexcept { return offsets_.size(); }
  std::size_t fan_in(std::size_t l) const { return widths_[l]; }
  std::size_t fan_out(std::size_t l) const { return widths_[l + 1]; }

  std::vector<double>& params() noexcept { return params_; }
  const std::vector<double>& params() const noexcept { return params_; }

  std::span<double> weights(std::size_t l) { return weights_of(std::span<double>(params_), l); }
  std::span<const double> weights(std::size_t l) const { return weights_of(std::span<const double>(params_), l); }
  std::span<double> bias(std::size_t l) { return bias_of(std::span<double>(params_), l); }
  std::span<const double> bias(std::size_t l) const { return bias_of(std::span<const double>(params_), l); }

  /// Layer blocks of any vector laid out like `params()` (e.g. gradients).
  template <typename T>
  std::span<T> weights_of(std::span<T> flat, std::size_t l) const {
    return flat.subspan(offsets_[l], fan_out(l) * fan_in(l));
  }
  template <typename T>
  std::span<T> bias_of(std::span<T> flat, std::size_t l) const {
    return flat.subspan(offsets_[l] + fan_out(l) * fan_in(l), fan_out(l));
  }

  bool operator==(const EncoderModel&) const = default;

 private:
  std::vector<std::size_t> widths_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

/// Intermediates kept by `forward` for `backward`.
struct ForwardCache {
  std::vector<Matrix> inputs;  // input to each layer (post-activation of the previous one)
  std::vector<Matrix> pre;     // affine output of each layer
  std::vector<double> norms;   // regularized norm of each output row
};

struct ForwardResult {
  EmbeddingMatrix embeddings;
  ForwardCache cache;
};

namespace detail {

inline Matrix affine(const EncoderModel& m, std::size_t l, const Matrix& x) {
  const std::size_t in = m.fan_in(l), out = m.fan_out(l);
  auto w = m.weights(l);
  auto b = m.bias(l);
  Matrix z(x.rows(), out);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto xr = x.row(r);
    auto zr = z.row(r);
    for (std::size_t o = 0; o < out; ++o) {
      double s = b[o];
      const double* wo = w.data() + o * in;
      for (std::size_t i = 0; i < in; ++i) s += wo[i] * xr[i];
      zr[o] = s;
    }
  }
  return z;
}

}  // namespace detail

inline ForwardResult forward(const EncoderModel& model, const Matrix& inputs) {
  if (inputs.cols() != model.input_dims())
    throw ParameterError("input has " + std::to_string(inputs.cols()) + " dims, encoder expects " +
                         std::to_string(model.input_dims()));
  if (!all_finite(inputs.data())) throw ValidationError("non-finite encoder input");
  ForwardCache cache;
  Matrix x = inputs;
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    Matrix z = detail::affine(model, l, x);
    cache.inputs.push_back(std::move(x));
    if (l + 1 < model.num_layers()) {
      x = z;
      for (double& v : x.data()) v = std::tanh(v);
    }
    cache.pre.push_back(std::move(z));
  }
  Matrix out = cache.pre.back();
  cache.norms.resize(out.rows());
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const double n = std::sqrt(dot(row, row) + EncoderModel::kNormEpsilon);
    cache.norms[r] = n;
    for (double& v : row) v /= n;
  }
  if (!all_finite(out.data())) throw NumericError("non-finite encoder output");
  return {EmbeddingMatrix::trusted(std::move(out)), std::move(cache)};
}

/// Gradients w.r.t. the flat parameter vector, summed over the batch.
inline std::vector<double> backward(const EncoderModel& model, const ForwardCache& cache, const Matrix& grad_embeddings) {
  const std::size_t batch = cache.norms.size();
  if (cache.pre.size() != model.num_layers() || grad_embeddings.rows() != batch ||
      grad_embeddings.cols() != model.output_dims())
    throw ParameterError("backward: gradient shape does not match forward cache");

  std::vector<double> grads(model.params().size(), 0.0);
  const std::span<double> flat(grads);

  // Through the normalization: d u / d v = I / n - v v^T / n^3.
  Matrix delta(batch, model.output_dims());
  const Matrix& v = cache.pre.back();
  for (std::size_t r = 0; r < batch; ++r) {
    auto vr = v.row(r);
    auto gr = grad_embeddings.row(r);
    const double n = cache.norms[r];
    const double proj = dot(vr, gr) / (n * n * n);
    auto dr = delta.row(r);
    for (std::size_t d = 0; d < dr.size(); ++d) dr[d] = gr[d] / n - vr[d] * proj;
  }

  for (std::size_t l = model.num_layers(); l-- > 0;) {
    const std::size_t in = model.fan_in(l), out = model.fan_out(l);
    const Matrix& x = cache.inputs[l];
    auto gw = model.weights_of(flat, l);
    auto gb = model.bias_of(flat, l);
    for (std::size_t r = 0; r < batch; ++r) {
      auto dr = delta.row(r);
      auto xr = x.row(r);
      for (std::size_t o = 0; o < out; ++o) {
        gb[o] += dr[o];
        double* gwo = gw.data() + o * in;
        for (std::size_t i = 0; i < in; ++i) gwo[i] += dr[o] * xr[i];
      }
    }
    if (l == 0) break;
    // Into the previous layer's pre-activation: W^T delta, times tanh'.
    auto w = model.weights(l);
    Matrix prev(batch, in);
    const Matrix& z_prev = cache.pre[l - 1];
    for (std::size_t r = 0; r < batch; ++r) {
      auto dr = delta.row(r);
      auto pr = prev.row(r);
      for (std::size_t o = 0; o < out; ++o) {
        const double* wo = w.data() + o * in;
        for (std::size_t i = 0; i < in; ++i) pr[i] += wo[i] * dr[o];
      }
      auto zr = z_prev.row(r);
      for (std::size_t i = 0; i < in; ++i) {
        const double t = std::tanh(zr[i]);
        pr[i] *= 1.0 - t * t;
      }
    }
    delta = std::move(prev);
  }
  return grads;
}

/// Forward pass in chunks of `chunk` rows, embeddings only.
inline EmbeddingMatrix embed(const EncoderModel& model, const Matrix& inputs, std::size_t chunk = 256) {
  if (chunk == 0) throw ParameterError("chunk size must be positive");
  Matrix out(inputs.rows(), model.output_dims());
  for (std::size_t lo = 0; lo < inputs.rows(); lo += chunk) {
    const std::size_t hi = std::min(inputs.rows(), lo + chunk);
    Matrix part(hi - lo, inputs.cols());
    std::copy(inputs.data().begin() + static_cast<std::ptrdiff_t>(lo * inputs.cols()),
              inputs.data().begin() + static_cast<std::ptrdiff_t>(hi * inputs.cols()), part.data().begin());
    const auto res = forward(model, part);
    std::copy(res.embeddings.matrix().data().begin(), res.embeddings.matrix().data().end(),
              out.data().begin() + static_cast<std::ptrdiff_t>(lo * out.cols()));
  }
  return EmbeddingMatrix::trusted(std::move(out));
}

// ---------------------------------------------------------------------------
// Adam with decoupled weight decay and a step learning-rate schedule
// ---------------------------------------------------------------------------

struct OptimizerState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;
  double base_lr = 3.5e-4;
  double weight_decay = 5e-4;
  double decay_factor = 0.1;
  std::uint32_t decay_every = 20;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint32_t epoch = 0;  // drives the schedule

  OptimizerState() = default;
  OptimizerState(std::size_t num_params, double lr, double wd, double factor, std::uint32_t every)
      : m(num_params, 0.0), v(num_params, 0.0), base_lr(lr), weight_decay(wd), decay_factor(factor),
        decay_every(every) {}

  /// base_lr * factor^floor(epoch / every)
  double lr_at(std::uint32_t e) const {
    return base_lr * std::pow(decay_factor, static_cast<double>(decay_every == 0 ? 0 : e / decay_every));
  }
  double lr() const { return lr_at(epoch); }

  bool operator==(const OptimizerState&) const = default;
};

/// theta <- theta - lr * wd * theta, then one bias-corrected Adam update.
inline void adam_step(EncoderModel& model, std::span<const double> grads, OptimizerState& s) {
  auto& p = model.params();
  if (grads.size() != p.size() || s.m.size() != p.size() || s.v.size() != p.size())
    throw ParameterError("adam_step: gradient/state size does not match parameters");
  ++s.step;
  const double lr = s.lr();
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] -= lr * s.weight_decay * p[i];
    s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * grads[i];
    s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * grads[i] * grads[i];
    const double mhat = s.m[i] / c1;
    const double vhat = s.v[i] / c2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + s.eps);
  }
}

// ---------------------------------------------------------------------------
// Checkpoint
//
//   "HHCK" | u32 version=1 | u32 L | L x u32 width | u64 P | P x f64 param |
//   u64 step | f64 base_lr | f64 weight_decay | f64 decay_factor |
//   u32 decay_every | f64 beta1 | f64 beta2 | f64 eps | P x f64 m | P x f64 v |
//   u32 epoch
// ---------------------------------------------------------------------------

inline constexpr char kCheckpointMagic[4] = {'H', 'H', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  EncoderModel model;
  OptimizerState optimizer;
  std::uint32_t epoch = 0;
};

inline void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path + " for writing");
  using binio::put;
  const auto& p = ck.model.params();
  const auto& o = ck.optimizer;
  if (o.m.size() != p.size() || o.v.size() != p.size()) throw ParameterError("optimizer state does not match model");
  os.write(kCheckpointMagic, 4);
  put<std::uint32_t>(os, kCheckpointVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(ck.model.widths().size()));
  for (auto w : ck.model.widths()) put<std::uint32_t>(os, static_cast<std::uint32_t>(w));
  put<std::uint64_t>(os, p.size());
  for (double x : p) put<double>(os, x);
  put<std::uint64_t>(os, o.step);
  put<double>(os, o.base_lr);
  put<double>(os, o.weight_decay);
  put<double>(os, o.decay_factor);
  put<std::uint32_t>(os, o.decay_every);
  put<double>(os, o.beta1);
  put<double>(os, o.beta2);
  put<double>(os, o.eps);
  for (double x : o.m) put<double>(os, x);
  for (double x : o.v) put<double>(os, x);
  put<std::uint32_t>(os, ck.epoch);
  if (!os.flush()) throw IoError("write failed for " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  using binio::get;
  char magic[4];
  if (!is.read(magic, 4)) throw IoError("truncated checkpoint " + path);
  if (std::memcmp(magic, kCheckpointMagic, 4) != 0) throw FormatError("bad checkpoint magic in " + path);
  if (const auto ver = get<std::uint32_t>(is, "version"); ver != kCheckpointVersion)
    throw FormatError("unsupported checkpoint version " + std::to_string(ver));
  const auto nw = get<std::uint32_t>(is, "layer count");
  if (nw < 2 || nw > 64) throw FormatError("implausible layer count in " + path);
  std::vector<std::size_t> widths(nw);
  for (auto& w : widths) w = get<std::uint32_t>(is, "width");
  Checkpoint ck;
  ck.model = EncoderModel(widths);
  if (get<std::uint64_t>(is, "parameter count") != ck.model.params().size())
    throw FormatError("parameter count does not match widths in " + path);
  for (double& x : ck.model.params()) x = get<double>(is, "parameter");
  auto& o = ck.optimizer;
  o.step = get<std::uint64_t>(is, "step");
  o.base_lr = get<double>(is, "base_lr");
  o.weight_decay = get<double>(is, "weight_decay");
  o.decay_factor = get<double>(is, "decay_factor");
  o.decay_every = get<std::uint32_t>(is, "decay_every");
  o.beta1 = get<double>(is, "beta1");
  o.beta2 = get<double>(is, "beta2");
  o.eps = get<double>(is, "eps");
  o.m.resize(ck.model.params().size());
  o.v.resize(ck.model.params().size());
  for (double& x : o.m) x = get<double>(is, "moment");
  for (double& x : o.v) x = get<double>(is, "moment");
  ck.epoch = get<std::uint32_t>(is, "epoch");
  o.epoch = ck.epoch;
  return ck;
}

}  // namespace hhcl
