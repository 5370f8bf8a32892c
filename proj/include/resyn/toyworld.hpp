#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "resyn/datamodel.hpp"

namespace resyn::toyworld {

// Desk-scale procedural street scenes: sky over road, a few colored
// foreground shapes, and (for test scenes) anomaly shapes whose colors never
// appear in the label spec.

LabelSpec toy_label_spec();

struct ShapeClassConfig {
  std::string class_name;
  int min_count = 0;
  int max_count = 0;
  int min_size = 6;
  int max_size = 16;
};

struct AnomalyDef {
  std::string name;
  std::array<uint8_t, 3> color{0, 0, 0};
};

struct ToySceneConfig {
  int width = 64;
  int height = 64;
  double horizon_frac = 0.40;
  double texture_amplitude = 0.04;
  uint64_t seed = 1;
  std::vector<ShapeClassConfig> foreground;
  std::vector<AnomalyDef> anomaly_shapes;
  int anomaly_min_count = 1;
  int anomaly_max_count = 2;
  int anomaly_min_size = 8;
  int anomaly_max_size = 16;

  static ToySceneConfig defaults();
  void validate() const;
};

// Deterministic under the rng; the anomaly mask marks anomaly-shape pixels,
// and the semantic map labels those pixels with the color-nearest known
// class (what a color-driven segmenter would predict there).
Sample generate_scene(const ToySceneConfig& cfg, DetRng& rng);

// Train scenes contain only known classes; test scenes contain anomalies.
std::pair<std::vector<Sample>, std::vector<Sample>> generate_split(
    const ToySceneConfig& cfg, int n_train, int n_test, DetRng& rng);

}  // namespace resyn::toyworld
