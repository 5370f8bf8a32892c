#include "resyn/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace resyn {

Tensor SegmentationBackend::input_gradient(const ImageRGB&, const Tensor&) {
  throw CapabilityError("backend does not expose input gradients");
}

void SegmentationBackend::set_stochastic(bool enabled) {
  if (enabled) throw CapabilityError("backend has no stochastic forward mode");
}

SemanticMap argmax_labels(const Tensor& logits) {
  SemanticMap out(logits.h, logits.w);
  for (int y = 0; y < logits.h; ++y)
    for (int x = 0; x < logits.w; ++x) {
      int best = 0;
      double best_v = logits.at(y, x, 0);
      for (int c = 1; c < logits.c; ++c) {
        const double v = logits.at(y, x, c);
        if (v > best_v) {  // strict: ties keep the lowest index
          best_v = v;
          best = c;
        }
      }
      out.at(y, x) = best;
    }
  return out;
}

SemanticMap predict_labels(SegmentationBackend& backend, const ImageRGB& image) {
  const Tensor logits = backend.predict_logits(image);
  require(logits.all_finite(), "predict_labels: backend produced non-finite logits");
  require(logits.c == backend.label_spec().num_classes(),
          "predict_labels: logit channels != num_classes");
  return argmax_labels(logits);
}

namespace {

// Accumulates softmax samples and reduces to mean per-class variance.
class VarianceAccumulator {
 public:
  VarianceAccumulator(int h, int w, int c) : sum_(h, w, c), sumsq_(h, w, c) {}

  void add(const Tensor& probs) {
    for (size_t i = 0; i < probs.data.size(); ++i) {
      sum_.data[i] += probs.data[i];
      sumsq_.data[i] += probs.data[i] * probs.data[i];
    }
    ++n_;
  }

  ScoreMap reduce() const {
    require(n_ >= 2, "variance: need at least 2 samples");
    ScoreMap out(sum_.h, sum_.w);
    const double inv_n = 1.0 / n_;
    for (int y = 0; y < sum_.h; ++y)
      for (int x = 0; x < sum_.w; ++x) {
        double acc = 0.0;
        for (int c = 0; c < sum_.c; ++c) {
          const double mean = sum_.at(y, x, c) * inv_n;
          const double var = sumsq_.at(y, x, c) * inv_n - mean * mean;
          acc += std::max(var, 0.0);
        }
        out.at(y, x) = acc / sum_.c;
      }
    return out;
  }

 private:
  Tensor sum_, sumsq_;
  int n_ = 0;
};

}  // namespace

ScoreMap mc_dropout_uncertainty(SegmentationBackend& backend, const ImageRGB& image,
                                int n_samples) {
  if (!backend.capabilities().stochastic_forward)
    throw CapabilityError("mc_dropout_uncertainty: backend is deterministic");
  require(n_samples >= 2, "mc_dropout_uncertainty: n_samples must be >= 2");
  backend.set_stochastic(true);
  VarianceAccumulator acc(image.h, image.w, backend.label_spec().num_classes());
  for (int i = 0; i < n_samples; ++i)
    acc.add(nn::softmax_channels(backend.predict_logits(image)));
  backend.set_stochastic(false);
  return acc.reduce();
}

ScoreMap ensemble_uncertainty(
    const std::vector<std::shared_ptr<SegmentationBackend>>& backends,
    const ImageRGB& image) {
  require(backends.size() >= 2, "ensemble_uncertainty: need at least 2 backends");
  const LabelSpec& spec = backends.front()->label_spec();
  for (const auto& b : backends)
    if (!(b->label_spec() == spec))
      throw DataError("ensemble_uncertainty: mismatched label specs");
  VarianceAccumulator acc(image.h, image.w, spec.num_classes());
  for (const auto& b : backends)
    acc.add(nn::softmax_channels(b->predict_logits(image)));
  return acc.reduce();
}

ToySegmenter::ToySegmenter(LabelSpec spec, ToySegmenterConfig cfg)
    : spec_(std::move(spec)),
      cfg_(cfg),
      conv1_("segmenter.conv1", 3, cfg.hidden_channels, 3, 1, 1),
      conv2_("segmenter.conv2", cfg.hidden_channels, spec_.num_classes(), 3, 1, 1),
      dropout_(cfg.dropout_rate),
      rng_(cfg.seed) {
  spec_.validate();
  conv1_.init_he(rng_);
  conv2_.init_he(rng_);
}

BackendCaps ToySegmenter::capabilities() const {
  return {cfg_.dropout_rate > 0.0, true};
}

Tensor ToySegmenter::forward(const Tensor& input, bool stochastic, Tensor* hidden_pre,
                             Tensor* hidden_post) {
  Tensor pre = conv1_.forward(input);
  Tensor post = nn::relu(pre);
  Tensor dropped = dropout_.forward(post, rng_, stochastic);
  if (hidden_pre) *hidden_pre = std::move(pre);
  if (hidden_post) *hidden_post = std::move(dropped);
  return conv2_.forward(hidden_post ? *hidden_post : dropped);
}

Tensor ToySegmenter::predict_logits(const ImageRGB& image) {
  return forward(image.as_tensor(), stochastic_, nullptr, nullptr);
}

Tensor ToySegmenter::input_gradient(const ImageRGB& image, const Tensor& logit_coeffs) {
  const Tensor input = image.as_tensor();
  Tensor pre, post;
  const Tensor logits = forward(input, false, &pre, &post);
  require(logit_coeffs.same_shape(logits), "input_gradient: coeff shape mismatch");
  Tensor g = conv2_.backward(post, logit_coeffs, /*accumulate=*/false);
  g = nn::relu_backward(pre, g);
  return conv1_.backward(input, g, /*accumulate=*/false);
}

void ToySegmenter::train(const std::vector<Sample>& samples) {
  require(!samples.empty(), "ToySegmenter::train: no samples");
  std::vector<size_t> order(std::min(samples.size(),
                                     static_cast<size_t>(cfg_.max_train_scenes)));
  std::iota(order.begin(), order.end(), 0);

  nn::Adam adam(cfg_.learning_rate);
  std::vector<nn::Param*> params{&conv1_.weight, &conv1_.bias, &conv2_.weight,
                                 &conv2_.bias};
  const std::vector<double> weights(static_cast<size_t>(spec_.num_classes()), 1.0);
  const bool use_dropout = cfg_.dropout_rate > 0.0;

  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    rng_.shuffle(order);
    for (size_t idx : order) {
      const Sample& s = samples[idx];
      require(s.semantic.has_value(), "ToySegmenter::train: sample lacks semantic map");
      const Tensor input = s.image.as_tensor();
      Tensor pre, post;
      const Tensor logits = forward(input, use_dropout, &pre, &post);
      auto ce = nn::softmax_cross_entropy(logits, s.semantic->labels, spec_.void_id,
                                          weights);
      for (nn::Param* p : params) p->zero_grad();
      Tensor g = conv2_.backward(post, ce.dlogits);
      g = dropout_.backward(g);
      g = nn::relu_backward(pre, g);
      conv1_.backward(input, g);
      adam.step(params);
    }
  }
}

double ToySegmenter::pixel_accuracy(const std::vector<Sample>& samples) {
  size_t correct = 0, total = 0;
  for (const Sample& s : samples) {
    require(s.semantic.has_value(), "pixel_accuracy: sample lacks semantic map");
    const SemanticMap pred = predict_labels(*this, s.image);
    for (size_t i = 0; i < pred.labels.size(); ++i) {
      if (s.semantic->labels[i] == spec_.void_id) continue;
      ++total;
      correct += (pred.labels[i] == s.semantic->labels[i]);
    }
  }
  require(total > 0, "pixel_accuracy: no labeled pixels");
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace resyn
