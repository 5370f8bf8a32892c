#pragma once

#include <memory>
#include <string>
#include <vector>

#include "resyn/datamodel.hpp"
#include "resyn/nn.hpp"
#include "resyn/synthesis.hpp"

namespace resyn {

// Architecture descriptor for the discrepancy network: two weight-shared
// image streams (real / resynthesized), a label stream over the one-hot map,
// per-level 1x1 fusions with a correlation channel, and a SELU up-convolution
// decoder ending in a 2-class per-pixel head.
struct DiscrepancyConfig {
  int pyramid_levels = 3;
  std::vector<int> image_stream_channels;
  std::vector<int> label_stream_channels;
  std::vector<int> reduce_channels;
  std::vector<int> upconv_channels;
  std::string correlation = "cosine";  // "cosine" or "dot"
  bool freeze_image_streams = true;
  int num_label_classes = 0;
  int num_output_classes = 2;
  uint64_t init_seed = 1;

  void validate() const;
  std::string to_json() const;
  static DiscrepancyConfig from_json(const std::string& text);
  static DiscrepancyConfig toy_defaults(int num_label_classes);
  // Small enough for finite-difference gradient checks (< 5k params).
  static DiscrepancyConfig tiny(int num_label_classes);
};

// Per-location similarity of two feature maps. "cosine" maps zero vectors
// to 0; "dot" is the unnormalized alternative.
Tensor pointwise_correlation(const Tensor& feat_a, const Tensor& feat_b,
                             const std::string& mode = "cosine");

// Concat(real, resynth, label) -> 1x1 projection -> concat correlation
// channel; output has reduce_to + 1 channels.
class LevelFusion {
 public:
  LevelFusion(std::string name, int img_c, int lbl_c, int reduce_to,
              std::string corr_mode);

  Tensor forward(const Tensor& real_f, const Tensor& resynth_f,
                 const Tensor& label_f) const;
  void backward(const Tensor& real_f, const Tensor& resynth_f,
                const Tensor& label_f, const Tensor& grad_out, Tensor& g_real,
                Tensor& g_resynth, Tensor& g_label, bool accumulate,
                bool need_image_grads);

  nn::Conv2d proj;
  std::string corr_mode;
  int reduce_to;
};

struct TrainConfig {
  int epochs = 50;
  double learning_rate = 1e-4;
  int batch_size = 4;
  double weight_c = 1.02;
  uint64_t seed = 1;
};

// w_k = 1 / ln(c + p_k); strictly decreasing in the class frequency.
std::vector<double> class_weights(const std::vector<double>& pixel_fraction_per_class,
                                  double c);

class DiscrepancyNet {
 public:
  explicit DiscrepancyNet(DiscrepancyConfig cfg);

  // Softmax probability of the discrepancy class per pixel.
  ScoreMap forward(const ImageRGB& image, const ImageRGB& resynth,
                   const Tensor& sem_onehot) const;

  // Weighted-CE loss of one pair; accumulates parameter gradients when
  // with_gradients is set. targets: 0 background, 1 discrepancy, 255 ignore.
  double pair_loss(const ImageRGB& image, const ImageRGB& resynth,
                   const Tensor& sem_onehot, const AnomalyMask& target,
                   const std::vector<double>& weights, bool with_gradients,
                   double grad_scale = 1.0);

  // Per-epoch mean losses.
  std::vector<double> train(const std::vector<TrainingPair>& pairs,
                            const LabelSpec& spec, const TrainConfig& cfg);

  std::vector<nn::Param*> parameters();
  std::vector<nn::Param*> trainable_parameters();
  const DiscrepancyConfig& config() const { return cfg_; }

  void save_checkpoint(const std::string& dir) const;
  static std::unique_ptr<DiscrepancyNet> load_checkpoint(const std::string& dir);

 private:
  struct Cache;
  Tensor forward_logits(const Tensor& image, const Tensor& resynth,
                        const Tensor& onehot, Cache* cache) const;
  void backward(const Cache& cache, const Tensor& dlogits);
  void extract_pyramid(const std::vector<nn::Conv2d>& convs, const Tensor& input,
                       std::vector<Tensor>& pre, std::vector<Tensor>& post) const;

  DiscrepancyConfig cfg_;
  std::vector<nn::Conv2d> ext_convs_;  // shared image-stream pyramid
  std::vector<nn::Conv2d> lbl_convs_;
  std::vector<LevelFusion> fusions_;
  nn::Conv2d dtop_;
  std::vector<nn::Upconv2x> ups_;    // deep -> shallow
  std::vector<nn::Conv2d> mixes_;    // after each skip concat
  nn::Conv2d head_;
};

}  // namespace resyn
