#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "resyn/common.hpp"
#include "resyn/tensor.hpp"

// Minimal double-precision layers with hand-written backprop. Layers hold
// parameters only; activations are cached by the caller and passed back to
// backward(), which makes shared-weight streams (one extractor applied to
// two images) straightforward.

namespace resyn::nn {

struct Param {
  std::string name;
  std::vector<double> value;
  std::vector<double> grad;
  bool trainable = true;

  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
  void resize(size_t n) {
    value.assign(n, 0.0);
    grad.assign(n, 0.0);
  }
};

class Conv2d {
 public:
  Conv2d(std::string name, int in_c, int out_c, int k, int stride, int pad);

  void init_he(DetRng& rng);
  Tensor forward(const Tensor& in) const;
  // Returns grad wrt input. Accumulates weight/bias grads unless the layer
  // is frozen or accumulate is false.
  Tensor backward(const Tensor& in, const Tensor& grad_out, bool accumulate = true);

  Param weight;  // [out_c][k][k][in_c]
  Param bias;    // [out_c]
  int in_c, out_c, k, stride, pad;
};

// Transposed convolution, kernel 2 stride 2: output dims exactly double.
class Upconv2x {
 public:
  Upconv2x(std::string name, int in_c, int out_c);

  void init_he(DetRng& rng);
  Tensor forward(const Tensor& in) const;
  Tensor backward(const Tensor& in, const Tensor& grad_out, bool accumulate = true);

  Param weight;  // [out_c][2][2][in_c]
  Param bias;
  int in_c, out_c;
};

Tensor relu(const Tensor& in);
Tensor relu_backward(const Tensor& saved_in, const Tensor& grad_out);
Tensor selu(const Tensor& in);
Tensor selu_backward(const Tensor& saved_in, const Tensor& grad_out);

// Per-pixel softmax over channels.
Tensor softmax_channels(const Tensor& logits);

struct CeResult {
  double mean_loss = 0.0;
  size_t valid_pixels = 0;
  Tensor dlogits;
};

// Weighted per-pixel cross-entropy; targets hold class indices (or
// ignore_label, which contributes neither loss nor gradient). Loss and
// gradients are normalized by the number of non-ignored pixels.
CeResult softmax_cross_entropy(const Tensor& logits,
                               const std::vector<int32_t>& targets,
                               int ignore_label,
                               const std::vector<double>& class_weights);

// Inverted dropout; identity when stochastic is false.
class Dropout {
 public:
  explicit Dropout(double rate) : rate_(rate) { require(rate >= 0.0 && rate < 1.0, "Dropout: rate in [0,1)"); }
  Tensor forward(const Tensor& in, DetRng& rng, bool stochastic);
  Tensor backward(const Tensor& grad_out) const;
  double rate() const { return rate_; }

 private:
  double rate_;
  bool last_stochastic_ = false;
  std::vector<uint8_t> mask_;
};

class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    require(lr > 0.0, "Adam: learning rate must be > 0");
  }
  void step(const std::vector<Param*>& params);

 private:
  struct State {
    std::vector<double> m, v;
  };
  double lr_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::map<const Param*, State> state_;
};

// Binary weight blob keyed by parameter name.
void save_weight_blob(const std::string& path, const std::vector<const Param*>& params);
void load_weight_blob(const std::string& path, const std::vector<Param*>& params);

}  // namespace resyn::nn
