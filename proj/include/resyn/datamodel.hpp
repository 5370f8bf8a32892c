#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "resyn/common.hpp"
#include "resyn/tensor.hpp"

namespace resyn {

struct ClassDef {
  std::string name;
  int train_id = 0;
  bool is_foreground = false;
  std::array<uint8_t, 3> color{0, 0, 0};
};

// Ordered class table plus the void sentinel. train_ids must be contiguous
// in [0, num_classes); at least one class must be foreground (the swap
// generator only alters foreground instances).
struct LabelSpec {
  std::vector<ClassDef> classes;
  int void_id = 255;

  int num_classes() const { return static_cast<int>(classes.size()); }
  void validate() const;
  bool is_known(int label) const {
    return label >= 0 && label < num_classes();
  }
  const ClassDef& class_by_id(int train_id) const;
  std::optional<int> id_by_name(const std::string& name) const;
  bool operator==(const LabelSpec& o) const;
};

// The fixed 19-class palette commonly used for urban street scenes.
LabelSpec cityscapes_label_spec();

struct ImageRGB {
  int h = 0, w = 0;
  std::vector<double> pixels;  // H x W x 3 interleaved, values in [0, 1]

  ImageRGB() = default;
  ImageRGB(int h_, int w_, double fill = 0.0)
      : h(h_), w(w_), pixels(static_cast<size_t>(h_) * w_ * 3, fill) {
    require(h_ >= 1 && w_ >= 1, "ImageRGB: dims must be >= 1");
  }
  double& at(int y, int x, int c) { return pixels[(static_cast<size_t>(y) * w + x) * 3 + c]; }
  double at(int y, int x, int c) const { return pixels[(static_cast<size_t>(y) * w + x) * 3 + c]; }
  void validate() const;
  Tensor as_tensor() const;
  static ImageRGB from_tensor(const Tensor& t);
};

struct SemanticMap {
  int h = 0, w = 0;
  std::vector<int32_t> labels;

  SemanticMap() = default;
  SemanticMap(int h_, int w_, int32_t fill = 0)
      : h(h_), w(w_), labels(static_cast<size_t>(h_) * w_, fill) {}
  int32_t& at(int y, int x) { return labels[static_cast<size_t>(y) * w + x]; }
  int32_t at(int y, int x) const { return labels[static_cast<size_t>(y) * w + x]; }
  void validate(const LabelSpec& spec) const;
};

// 0 means "no instance"; all pixels of a nonzero id must share one semantic
// label in the paired SemanticMap (checked by validate_instances).
struct InstanceMap {
  int h = 0, w = 0;
  std::vector<int32_t> ids;

  InstanceMap() = default;
  InstanceMap(int h_, int w_) : h(h_), w(w_), ids(static_cast<size_t>(h_) * w_, 0) {}
  int32_t& at(int y, int x) { return ids[static_cast<size_t>(y) * w + x]; }
  int32_t at(int y, int x) const { return ids[static_cast<size_t>(y) * w + x]; }
};

void validate_instances(const SemanticMap& sem, const InstanceMap& inst);

inline constexpr uint8_t kNormal = 0;
inline constexpr uint8_t kAnomaly = 1;
inline constexpr uint8_t kIgnore = 255;

struct AnomalyMask {
  int h = 0, w = 0;
  std::vector<uint8_t> values;

  AnomalyMask() = default;
  AnomalyMask(int h_, int w_, uint8_t fill = kNormal)
      : h(h_), w(w_), values(static_cast<size_t>(h_) * w_, fill) {}
  uint8_t& at(int y, int x) { return values[static_cast<size_t>(y) * w + x]; }
  uint8_t at(int y, int x) const { return values[static_cast<size_t>(y) * w + x]; }
  void validate() const;
};

// Higher score = more anomalous; all scores must be finite.
struct ScoreMap {
  int h = 0, w = 0;
  std::vector<double> scores;

  ScoreMap() = default;
  ScoreMap(int h_, int w_, double fill = 0.0)
      : h(h_), w(w_), scores(static_cast<size_t>(h_) * w_, fill) {}
  double& at(int y, int x) { return scores[static_cast<size_t>(y) * w + x]; }
  double at(int y, int x) const { return scores[static_cast<size_t>(y) * w + x]; }
  void validate() const;
};

struct RoiMask {
  int h = 0, w = 0;
  std::vector<uint8_t> valid;  // 0 or 1

  RoiMask() = default;
  RoiMask(int h_, int w_, uint8_t fill = 1)
      : h(h_), w(w_), valid(static_cast<size_t>(h_) * w_, fill) {}
  uint8_t& at(int y, int x) { return valid[static_cast<size_t>(y) * w + x]; }
  uint8_t at(int y, int x) const { return valid[static_cast<size_t>(y) * w + x]; }
  size_t count() const;
};

struct Sample {
  std::string id;
  ImageRGB image;
  std::optional<SemanticMap> semantic;
  std::optional<InstanceMap> instances;
  std::optional<AnomalyMask> anomaly;
  std::optional<RoiMask> roi;
  // Drivable-road annotation, used to build the road-only evaluation ROI.
  std::optional<RoiMask> freespace;

  void validate() const;  // all present rasters share image dims
};

// Image is resized bilinearly, all label-like rasters nearest-neighbor so no
// new label values can appear.
Sample resize_sample(const Sample& sample, int target_w, int target_h);

// Channel c is 1 where label == c, else 0; void pixels are all-zero.
Tensor one_hot(const SemanticMap& sem, const LabelSpec& spec);

// Score maps persist as 16-bit grayscale PNG (linear quantization of
// [min, max]) plus a JSON sidecar {"min": .., "max": ..} next to the PNG.
void save_score_map(const ScoreMap& s, const std::string& png_path);
ScoreMap load_score_map(const std::string& png_path);

void save_image(const ImageRGB& img, const std::string& path);
ImageRGB load_image(const std::string& path);
void save_semantic(const SemanticMap& sem, const std::string& path);
SemanticMap load_semantic(const std::string& path, const LabelSpec& spec);
void save_instances(const InstanceMap& inst, const std::string& path);
InstanceMap load_instances(const std::string& path);
void save_mask(const AnomalyMask& mask, const std::string& path);
AnomalyMask load_mask(const std::string& path);
void save_roi(const RoiMask& roi, const std::string& path);
RoiMask load_roi(const std::string& path);

std::string label_spec_to_json(const LabelSpec& spec);
LabelSpec label_spec_from_json(const std::string& text);

}  // namespace resyn
