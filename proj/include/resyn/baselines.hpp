#pragma once

#include <array>
#include <string>
#include <vector>

#include "resyn/datamodel.hpp"

namespace resyn {

struct RbmConfig {
  int patch_size = 8;
  int stride = 6;
  int hidden_units = 20;
  double noise_sigma = 0.1;  // Gaussian corruption std, standardized units
  int cd_steps = 1;
  double learning_rate = 0.01;
  int epochs = 30;
  uint64_t seed = 1;

  void validate() const;
};

// Gaussian-visible / Bernoulli-hidden RBM over flattened RGB patches.
// Reconstruction at inference is one deterministic mean-field up-down pass.
struct RbmModel {
  RbmConfig cfg;
  int visible_dim = 0;  // 3 * patch_size^2
  std::vector<double> weights;  // visible_dim x hidden_units
  std::vector<double> vbias;
  std::vector<double> hbias;
  std::array<double, 3> channel_mean{0, 0, 0};
  std::array<double, 3> channel_std{1, 1, 1};
  std::vector<double> epoch_mse;  // clean-reconstruction MSE per epoch

  std::vector<double> standardize(const std::vector<double>& raw_patch) const;
  std::vector<double> reconstruct(const std::vector<double>& v) const;
  double patch_score(const std::vector<double>& raw_patch) const;

  void save(const std::string& dir) const;
  static RbmModel load(const std::string& dir);
};

// All stride-spaced patches fully contained in road-labeled pixels of the
// ground-truth semantic maps. Raw RGB values, flattened channel-interleaved.
std::vector<std::vector<double>> extract_road_patches(const std::vector<Sample>& samples,
                                                      const LabelSpec& spec,
                                                      const RbmConfig& cfg);

RbmModel train_rbm(const std::vector<std::vector<double>>& patches,
                   const RbmConfig& cfg, DetRng& rng);

// Patch scores averaged into pixels over the stride grid; pixels covered by
// no patch get the image's max patch score.
ScoreMap rbm_score(const RbmModel& model, const ImageRGB& image);

}  // namespace resyn
