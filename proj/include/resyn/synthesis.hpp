#pragma once

#include <memory>
#include <string>
#include <vector>

#include "resyn/datamodel.hpp"

namespace resyn {

// Conditional generator contract: semantic map in, image out. Same input and
// fixed weights must give bit-identical output.
class GeneratorBackend {
 public:
  virtual ~GeneratorBackend() = default;
  virtual ImageRGB generate(const SemanticMap& sem) const = 0;
  virtual bool concurrent_safe() const { return false; }
};

struct SwapRecord {
  int32_t instance_id = 0;
  int32_t old_class = 0;
  int32_t new_class = 0;
  int64_t pixel_count = 0;
};

struct TrainingPair {
  std::string id;
  ImageRGB image;
  ImageRGB resynth;
  SemanticMap altered_sem;
  AnomalyMask target;  // 1 exactly on swapped pixels; void pixels are IGNORE
  std::vector<SwapRecord> swaps;
};

struct SwapResult {
  SemanticMap sem;
  AnomalyMask mask;  // strictly {0, 1}
  std::vector<SwapRecord> swaps;
};

// Each foreground instance is independently selected with probability
// swap_prob and relabeled with a uniformly random known class != original.
// Background pixels are never touched. Deterministic under a fixed rng.
SwapResult swap_instance_labels(const SemanticMap& sem, const InstanceMap& inst,
                                const LabelSpec& spec, double swap_prob,
                                DetRng& rng);

TrainingPair build_training_pair(const Sample& sample, const GeneratorBackend& gen,
                                 const LabelSpec& spec, double swap_prob,
                                 DetRng& rng);

// Desk-scale generator: renders each class as its palette color modulated by
// a fixed procedural texture keyed on (x, y, style_seed).
class ToyGenerator : public GeneratorBackend {
 public:
  ToyGenerator(LabelSpec spec, uint64_t style_seed, double texture_amplitude = 0.04);

  ImageRGB generate(const SemanticMap& sem) const override;
  bool concurrent_safe() const override { return true; }

  double amplitude() const { return amplitude_; }

  // Texture value in [-1, 1], a pure function of (x, y, seed).
  static double texture_value(int x, int y, uint64_t seed);
  static std::array<double, 3> render_pixel(const std::array<uint8_t, 3>& color,
                                            int x, int y, uint64_t seed,
                                            double amplitude);

 private:
  LabelSpec spec_;
  uint64_t style_seed_;
  double amplitude_;
};

std::unique_ptr<GeneratorBackend> toy_generator(const LabelSpec& spec,
                                                uint64_t style_seed,
                                                double texture_amplitude = 0.04);

}  // namespace resyn
