#pragma once

#include <string>
#include <utility>
#include <vector>

#include "resyn/datamodel.hpp"
#include "resyn/segmentation.hpp"
#include "resyn/synthesis.hpp"

namespace resyn {

enum class TargetKind { kShift, kPure };

std::string target_kind_name(TargetKind kind);

struct AttackConfig {
  int max_iter = 200;
  double step_linf = 0.05;         // per-iteration step
  double total_linf_budget = 0.05; // ball around the original image
  TargetKind target_kind = TargetKind::kShift;
  int shift_offset = 1;
  int pure_label = 0;

  void validate() const;
};

struct HogConfig {
  int cell = 8;   // pixels per cell side
  int block = 2;  // cells per block side
  int bins = 9;   // unsigned orientation bins
  double clip = 0.2;

  void validate() const;
};

struct LogisticDetector {
  double weight = 0.0;
  double bias = 0.0;
  double threshold = 0.5;

  double probability(double distance) const;
  bool is_adversarial(double distance) const { return probability(distance) >= threshold; }
  void save(const std::string& path) const;  // 2-number JSON
  static LogisticDetector load(const std::string& path);
};

struct DetectorMetrics {
  double train_accuracy = 0.0;
  double holdout_accuracy = 0.0;
  double holdout_auroc = 0.0;
  int train_pairs = 0;
  int holdout_pairs = 0;
};

// target[p] = (pred[p] + offset) mod num_classes; void pixels unchanged.
SemanticMap make_shift_target(const SemanticMap& pred, int offset, const LabelSpec& spec);
SemanticMap make_pure_target(int h, int w, int label, const LabelSpec& spec);

struct AttackResult {
  ImageRGB adversarial;
  int iterations_used = 0;
  double success_rate = 0.0;
  double linf_norm = 0.0;
};

// Iterative targeted attack: step along sign(d(sum target_logit - pred_logit)
// / d image) over still-unconverted pixels, clamped to the L-inf ball around
// the original and to [0,1].
AttackResult dag_attack(const ImageRGB& image, SegmentationBackend& backend,
                        const SemanticMap& target, const AttackConfig& cfg);

// Dalal-Triggs style descriptor on luminance: cell orientation histograms,
// overlapping blocks, L2 clip-renormalize. Dims crop to whole cells.
std::vector<double> hog_features(const ImageRGB& image, const HogConfig& cfg);

// L2 distance between HOG of the image and HOG of its resynthesis from the
// predicted semantic map.
double resynth_distance(const ImageRGB& image, SegmentationBackend& backend,
                        const GeneratorBackend& gen, const HogConfig& cfg);

// Paired 80/20 split (attacked sample stays with its clean counterpart),
// logistic regression on the scalar distance, held-out accuracy and AUROC.
std::pair<LogisticDetector, DetectorMetrics> fit_detector(
    const std::vector<double>& distances_clean,
    const std::vector<double>& distances_adv, double train_fraction, DetRng& rng);

// Spatial-consistency score: mean mIoU of independently segmented random
// overlapping patch pairs; lower values point to an attack.
double sc_score(const ImageRGB& image, SegmentationBackend& backend, int n_pairs,
                int patch, DetRng& rng);

}  // namespace resyn
