#pragma once

#include <memory>
#include <vector>

#include "resyn/datamodel.hpp"
#include "resyn/nn.hpp"

namespace resyn {

struct BackendCaps {
  bool stochastic_forward = false;
  bool gradient_access = false;
};

class SegmentationBackend {
 public:
  virtual ~SegmentationBackend() = default;

  // H x W x num_classes logits, finite.
  virtual Tensor predict_logits(const ImageRGB& image) = 0;
  virtual BackendCaps capabilities() const = 0;
  virtual const LabelSpec& label_spec() const = 0;

  // Gradient of sum(coeffs * logits) with respect to the input image,
  // returned as an H x W x 3 tensor. Only for gradient_access backends.
  virtual Tensor input_gradient(const ImageRGB& image, const Tensor& logit_coeffs);

  // Toggle stochastic forward passes (dropout sampling).
  virtual void set_stochastic(bool enabled);
};

// Per-pixel argmax over logits; ties break to the lowest class index.
SemanticMap predict_labels(SegmentationBackend& backend, const ImageRGB& image);
SemanticMap argmax_labels(const Tensor& logits);

// Variance of the per-class softmax probabilities across n stochastic
// forward passes, averaged over classes.
ScoreMap mc_dropout_uncertainty(SegmentationBackend& backend, const ImageRGB& image,
                                int n_samples);

// Same aggregation across ensemble members.
ScoreMap ensemble_uncertainty(
    const std::vector<std::shared_ptr<SegmentationBackend>>& backends,
    const ImageRGB& image);

struct ToySegmenterConfig {
  int hidden_channels = 16;
  double dropout_rate = 0.0;
  double learning_rate = 1e-3;
  int epochs = 4;
  int max_train_scenes = 50;
  uint64_t seed = 1;
};

// Small trainable conv classifier over the toy world's classes. Gradient
// access is always available; stochastic forwards when dropout_rate > 0.
class ToySegmenter : public SegmentationBackend {
 public:
  ToySegmenter(LabelSpec spec, ToySegmenterConfig cfg);

  // Expects samples with ground-truth semantic maps.
  void train(const std::vector<Sample>& samples);

  Tensor predict_logits(const ImageRGB& image) override;
  BackendCaps capabilities() const override;
  const LabelSpec& label_spec() const override { return spec_; }
  Tensor input_gradient(const ImageRGB& image, const Tensor& logit_coeffs) override;
  void set_stochastic(bool enabled) override { stochastic_ = enabled; }

  double pixel_accuracy(const std::vector<Sample>& samples);

 private:
  Tensor forward(const Tensor& input, bool stochastic, Tensor* hidden_pre,
                 Tensor* hidden_post);

  LabelSpec spec_;
  ToySegmenterConfig cfg_;
  nn::Conv2d conv1_;
  nn::Conv2d conv2_;
  nn::Dropout dropout_;
  DetRng rng_;
  bool stochastic_ = false;
};

}  // namespace resyn
