#include "resyn/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "resyn/kernels.hpp"

namespace resyn::nn {

namespace {
constexpr double kSeluAlpha = 1.6732632423543772848170429916717;
constexpr double kSeluLambda = 1.0507009873554804934193349852946;

void init_uniform(Param& p, DetRng& rng, int fan_in) {
  const double bound = std::sqrt(6.0 / fan_in);
  for (double& v : p.value) v = rng.uniform(-bound, bound);
}
}  // namespace

Conv2d::Conv2d(std::string name, int in_c_, int out_c_, int k_, int stride_, int pad_)
    : in_c(in_c_), out_c(out_c_), k(k_), stride(stride_), pad(pad_) {
  weight.name = name + ".weight";
  bias.name = name + ".bias";
  weight.resize(static_cast<size_t>(out_c) * k * k * in_c);
  bias.resize(static_cast<size_t>(out_c));
}

void Conv2d::init_he(DetRng& rng) { init_uniform(weight, rng, k * k * in_c); }

Tensor Conv2d::forward(const Tensor& in) const {
  require(in.c == in_c, "Conv2d " + weight.name + ": channel mismatch");
  Tensor out;
  kernels::conv2d_forward(in, weight.value, bias.value, out_c, k, stride, pad, out);
  return out;
}

Tensor Conv2d::backward(const Tensor& in, const Tensor& grad_out, bool accumulate) {
  if (accumulate && weight.trainable)
    kernels::conv2d_backward_params(in, grad_out, k, stride, pad, weight.grad, bias.grad);
  Tensor grad_in;
  kernels::conv2d_backward_input(grad_out, weight.value, in_c, in.h, in.w, k, stride,
                                 pad, grad_in);
  return grad_in;
}

Upconv2x::Upconv2x(std::string name, int in_c_, int out_c_) : in_c(in_c_), out_c(out_c_) {
  weight.name = name + ".weight";
  bias.name = name + ".bias";
  weight.resize(static_cast<size_t>(out_c) * 4 * in_c);
  bias.resize(static_cast<size_t>(out_c));
}

void Upconv2x::init_he(DetRng& rng) { init_uniform(weight, rng, 4 * in_c); }

Tensor Upconv2x::forward(const Tensor& in) const {
  require(in.c == in_c, "Upconv2x " + weight.name + ": channel mismatch");
  Tensor out;
  kernels::upconv2x_forward(in, weight.value, bias.value, out_c, out);
  return out;
}

Tensor Upconv2x::backward(const Tensor& in, const Tensor& grad_out, bool accumulate) {
  if (accumulate && weight.trainable)
    kernels::upconv2x_backward_params(in, grad_out, weight.grad, bias.grad);
  Tensor grad_in;
  kernels::upconv2x_backward_input(grad_out, weight.value, in_c, grad_in);
  return grad_in;
}

Tensor relu(const Tensor& in) {
  Tensor out = in;
  for (double& v : out.data) v = v > 0.0 ? v : 0.0;
  return out;
}

Tensor relu_backward(const Tensor& saved_in, const Tensor& grad_out) {
  Tensor g = grad_out;
  for (size_t i = 0; i < g.data.size(); ++i)
    if (saved_in.data[i] <= 0.0) g.data[i] = 0.0;
  return g;
}

Tensor selu(const Tensor& in) {
  Tensor out = in;
  for (double& v : out.data)
    v = v > 0.0 ? kSeluLambda * v : kSeluLambda * kSeluAlpha * (std::exp(v) - 1.0);
  return out;
}

Tensor selu_backward(const Tensor& saved_in, const Tensor& grad_out) {
  Tensor g = grad_out;
  for (size_t i = 0; i < g.data.size(); ++i) {
    const double x = saved_in.data[i];
    g.data[i] *= x > 0.0 ? kSeluLambda : kSeluLambda * kSeluAlpha * std::exp(x);
  }
  return g;
}

Tensor softmax_channels(const Tensor& logits) {
  Tensor out(logits.h, logits.w, logits.c);
  const int C = logits.c;
#pragma omp parallel for schedule(static)
  for (int y = 0; y < logits.h; ++y)
    for (int x = 0; x < logits.w; ++x) {
      double mx = logits.at(y, x, 0);
      for (int c = 1; c < C; ++c) mx = std::max(mx, logits.at(y, x, c));
      double sum = 0.0;
      for (int c = 0; c < C; ++c) {
        const double e = std::exp(logits.at(y, x, c) - mx);
        out.at(y, x, c) = e;
        sum += e;
      }
      for (int c = 0; c < C; ++c) out.at(y, x, c) /= sum;
    }
  return out;
}

CeResult softmax_cross_entropy(const Tensor& logits,
                               const std::vector<int32_t>& targets,
                               int ignore_label,
                               const std::vector<double>& class_weights) {
  require(targets.size() == static_cast<size_t>(logits.h) * logits.w,
          "softmax_cross_entropy: target size mismatch");
  require(static_cast<int>(class_weights.size()) == logits.c,
          "softmax_cross_entropy: weight count mismatch");
  const Tensor probs = softmax_channels(logits);
  CeResult res;
  res.dlogits = Tensor(logits.h, logits.w, logits.c);

  size_t valid = 0;
  for (int32_t t : targets)
    if (t != ignore_label) ++valid;
  if (valid == 0) throw DataError("softmax_cross_entropy: all pixels ignored");
  res.valid_pixels = valid;
  const double inv_n = 1.0 / static_cast<double>(valid);

  double loss = 0.0;
  for (int y = 0; y < logits.h; ++y)
    for (int x = 0; x < logits.w; ++x) {
      const int32_t t = targets[static_cast<size_t>(y) * logits.w + x];
      if (t == ignore_label) continue;
      require(t >= 0 && t < logits.c, "softmax_cross_entropy: target out of range");
      const double w = class_weights[static_cast<size_t>(t)];
      loss += -w * std::log(std::max(probs.at(y, x, t), 1e-300));
      for (int c = 0; c < logits.c; ++c) {
        const double indicator = (c == t) ? 1.0 : 0.0;
        res.dlogits.at(y, x, c) = w * (probs.at(y, x, c) - indicator) * inv_n;
      }
    }
  res.mean_loss = loss * inv_n;
  return res;
}

Tensor Dropout::forward(const Tensor& in, DetRng& rng, bool stochastic) {
  last_stochastic_ = stochastic;
  if (!stochastic || rate_ == 0.0) return in;
  mask_.assign(in.data.size(), 0);
  Tensor out = in;
  const double scale = 1.0 / (1.0 - rate_);
  for (size_t i = 0; i < out.data.size(); ++i) {
    if (rng.uniform01() >= rate_) {
      mask_[i] = 1;
      out.data[i] *= scale;
    } else {
      out.data[i] = 0.0;
    }
  }
  return out;
}

Tensor Dropout::backward(const Tensor& grad_out) const {
  if (!last_stochastic_ || rate_ == 0.0) return grad_out;
  require(mask_.size() == grad_out.data.size(), "Dropout: no mask for backward");
  Tensor g = grad_out;
  const double scale = 1.0 / (1.0 - rate_);
  for (size_t i = 0; i < g.data.size(); ++i) g.data[i] = mask_[i] ? g.data[i] * scale : 0.0;
  return g;
}

void Adam::step(const std::vector<Param*>& params) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (Param* p : params) {
    if (!p->trainable) continue;
    State& s = state_[p];
    if (s.m.size() != p->value.size()) {
      s.m.assign(p->value.size(), 0.0);
      s.v.assign(p->value.size(), 0.0);
    }
    for (size_t i = 0; i < p->value.size(); ++i) {
      const double g = p->grad[i];
      s.m[i] = beta1_ * s.m[i] + (1.0 - beta1_) * g;
      s.v[i] = beta2_ * s.v[i] + (1.0 - beta2_) * g * g;
      const double mhat = s.m[i] / bc1;
      const double vhat = s.v[i] / bc2;
      p->value[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

namespace {
constexpr char kBlobMagic[8] = {'R', 'S', 'Y', 'N', 'W', 'B', '0', '1'};

template <typename T>
void write_raw(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
void read_raw(std::ifstream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
}
}  // namespace

void save_weight_blob(const std::string& path, const std::vector<const Param*>& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("save_weight_blob: cannot open " + path);
  out.write(kBlobMagic, sizeof(kBlobMagic));
  const uint32_t count = static_cast<uint32_t>(params.size());
  write_raw(out, count);
  for (const Param* p : params) {
    const uint32_t name_len = static_cast<uint32_t>(p->name.size());
    write_raw(out, name_len);
    out.write(p->name.data(), name_len);
    const uint64_t n = p->value.size();
    write_raw(out, n);
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(n * sizeof(double)));
  }
  if (!out) throw DataError("save_weight_blob: write failed for " + path);
}

void load_weight_blob(const std::string& path, const std::vector<Param*>& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("load_weight_blob: cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kBlobMagic, sizeof(magic)) != 0)
    throw DataError("load_weight_blob: bad magic in " + path);
  uint32_t count = 0;
  read_raw(in, count);
  std::map<std::string, std::vector<double>> loaded;
  for (uint32_t i = 0; i < count; ++i) {
    uint32_t name_len = 0;
    read_raw(in, name_len);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    uint64_t n = 0;
    read_raw(in, n);
    std::vector<double> vals(n);
    in.read(reinterpret_cast<char*>(vals.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw DataError("load_weight_blob: truncated blob " + path);
    loaded.emplace(std::move(name), std::move(vals));
  }
  for (Param* p : params) {
    auto it = loaded.find(p->name);
    if (it == loaded.end())
      throw DataError("load_weight_blob: missing parameter " + p->name);
    if (it->second.size() != p->value.size())
      throw DataError("load_weight_blob: size mismatch for " + p->name);
    p->value = it->second;
    p->grad.assign(p->value.size(), 0.0);
  }
}

}  // namespace resyn::nn
