#include "resyn/datamodel.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "resyn/kernels.hpp"
#include "resyn/png_io.hpp"

namespace resyn {

namespace {

std::string sidecar_path(const std::string& png_path) {
  std::filesystem::path p(png_path);
  p.replace_extension(".json");
  return p.string();
}

uint8_t to_u8(double v) {
  return static_cast<uint8_t>(std::llround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

void LabelSpec::validate() const {
  require(!classes.empty(), "LabelSpec: no classes");
  std::set<int> ids;
  bool any_fg = false;
  for (const auto& c : classes) {
    require(ids.insert(c.train_id).second, "LabelSpec: duplicate train_id");
    any_fg = any_fg || c.is_foreground;
  }
  for (int i = 0; i < num_classes(); ++i)
    require(ids.count(i) == 1, "LabelSpec: train_ids must be contiguous in [0, C)");
  require(void_id < 0 || void_id >= num_classes(),
          "LabelSpec: void_id must lie outside [0, C)");
  require(any_fg, "LabelSpec: at least one class must be foreground");
}

const ClassDef& LabelSpec::class_by_id(int train_id) const {
  for (const auto& c : classes)
    if (c.train_id == train_id) return c;
  throw DataError("LabelSpec: unknown train_id " + std::to_string(train_id));
}

std::optional<int> LabelSpec::id_by_name(const std::string& name) const {
  for (const auto& c : classes)
    if (c.name == name) return c.train_id;
  return std::nullopt;
}

bool LabelSpec::operator==(const LabelSpec& o) const {
  if (void_id != o.void_id || classes.size() != o.classes.size()) return false;
  for (size_t i = 0; i < classes.size(); ++i) {
    const auto& a = classes[i];
    const auto& b = o.classes[i];
    if (a.name != b.name || a.train_id != b.train_id ||
        a.is_foreground != b.is_foreground || a.color != b.color)
      return false;
  }
  return true;
}

LabelSpec cityscapes_label_spec() {
  LabelSpec spec;
  spec.void_id = 255;
  auto add = [&spec](const char* name, int id, bool fg, uint8_t r, uint8_t g, uint8_t b) {
    spec.classes.push_back({name, id, fg, {r, g, b}});
  };
  add("road", 0, false, 128, 64, 128);
  add("sidewalk", 1, false, 244, 35, 232);
  add("building", 2, false, 70, 70, 70);
  add("wall", 3, false, 102, 102, 156);
  add("fence", 4, false, 190, 153, 153);
  add("pole", 5, false, 153, 153, 153);
  add("traffic_light", 6, false, 250, 170, 30);
  add("traffic_sign", 7, false, 220, 220, 0);
  add("vegetation", 8, false, 107, 142, 35);
  add("terrain", 9, false, 152, 251, 152);
  add("sky", 10, false, 70, 130, 180);
  add("person", 11, true, 220, 20, 60);
  add("rider", 12, true, 255, 0, 0);
  add("car", 13, true, 0, 0, 142);
  add("truck", 14, true, 0, 0, 70);
  add("bus", 15, true, 0, 60, 100);
  add("train", 16, true, 0, 80, 100);
  add("motorcycle", 17, true, 0, 0, 230);
  add("bicycle", 18, true, 119, 11, 32);
  spec.validate();
  return spec;
}

void ImageRGB::validate() const {
  require(h >= 1 && w >= 1, "ImageRGB: dims must be >= 1");
  require(pixels.size() == static_cast<size_t>(h) * w * 3, "ImageRGB: size mismatch");
  for (double v : pixels)
    require(std::isfinite(v) && v >= 0.0 && v <= 1.0, "ImageRGB: value outside [0,1]");
}

Tensor ImageRGB::as_tensor() const {
  Tensor t(h, w, 3);
  t.data = pixels;
  return t;
}

ImageRGB ImageRGB::from_tensor(const Tensor& t) {
  require(t.c == 3, "ImageRGB::from_tensor: need 3 channels");
  ImageRGB img(t.h, t.w);
  img.pixels = t.data;
  return img;
}

void SemanticMap::validate(const LabelSpec& spec) const {
  for (int32_t v : labels)
    require(spec.is_known(v) || v == spec.void_id,
            "SemanticMap: undeclared label value " + std::to_string(v));
}

void validate_instances(const SemanticMap& sem, const InstanceMap& inst) {
  require(sem.h == inst.h && sem.w == inst.w, "instance map dims differ from semantic map");
  std::map<int32_t, int32_t> id_label;
  for (size_t i = 0; i < inst.ids.size(); ++i) {
    const int32_t id = inst.ids[i];
    if (id == 0) continue;
    require(id > 0, "InstanceMap: negative id");
    auto [it, inserted] = id_label.emplace(id, sem.labels[i]);
    require(inserted || it->second == sem.labels[i],
            "InstanceMap: instance " + std::to_string(id) + " spans multiple classes");
  }
}

void AnomalyMask::validate() const {
  for (uint8_t v : values)
    require(v == kNormal || v == kAnomaly || v == kIgnore,
            "AnomalyMask: value must be one of {0, 1, 255}");
}

void ScoreMap::validate() const {
  for (double v : scores) require(std::isfinite(v), "ScoreMap: non-finite score");
}

size_t RoiMask::count() const {
  size_t n = 0;
  for (uint8_t v : valid) n += (v != 0);
  return n;
}

void Sample::validate() const {
  image.validate();
  auto check = [&](int rh, int rw, const char* what) {
    require(rh == image.h && rw == image.w,
            std::string("Sample: ") + what + " dims differ from image");
  };
  if (semantic) check(semantic->h, semantic->w, "semantic");
  if (instances) check(instances->h, instances->w, "instances");
  if (anomaly) check(anomaly->h, anomaly->w, "anomaly");
  if (roi) check(roi->h, roi->w, "roi");
  if (freespace) check(freespace->h, freespace->w, "freespace");
}

Sample resize_sample(const Sample& sample, int target_w, int target_h) {
  require(target_w >= 1 && target_h >= 1, "resize_sample: target dims must be >= 1");
  sample.validate();
  Sample out;
  out.id = sample.id;
  out.image = ImageRGB::from_tensor(
      kernels::resize_bilinear(sample.image.as_tensor(), target_h, target_w));
  for (double& v : out.image.pixels) v = std::clamp(v, 0.0, 1.0);

  const int ih = sample.image.h, iw = sample.image.w;
  if (sample.semantic) {
    SemanticMap m(target_h, target_w);
    m.labels = kernels::resize_nearest_i32(sample.semantic->labels, ih, iw, target_h, target_w);
    out.semantic = std::move(m);
  }
  if (sample.instances) {
    InstanceMap m(target_h, target_w);
    m.ids = kernels::resize_nearest_i32(sample.instances->ids, ih, iw, target_h, target_w);
    out.instances = std::move(m);
  }
  if (sample.anomaly) {
    AnomalyMask m(target_h, target_w);
    m.values = kernels::resize_nearest_u8(sample.anomaly->values, ih, iw, target_h, target_w);
    out.anomaly = std::move(m);
  }
  if (sample.roi) {
    RoiMask m(target_h, target_w);
    m.valid = kernels::resize_nearest_u8(sample.roi->valid, ih, iw, target_h, target_w);
    out.roi = std::move(m);
  }
  if (sample.freespace) {
    RoiMask m(target_h, target_w);
    m.valid = kernels::resize_nearest_u8(sample.freespace->valid, ih, iw, target_h, target_w);
    out.freespace = std::move(m);
  }
  return out;
}

Tensor one_hot(const SemanticMap& sem, const LabelSpec& spec) {
  const int C = spec.num_classes();
  Tensor out(sem.h, sem.w, C);
  for (int y = 0; y < sem.h; ++y)
    for (int x = 0; x < sem.w; ++x) {
      const int32_t v = sem.at(y, x);
      if (v == spec.void_id) continue;  // all-zero row
      require(spec.is_known(v), "one_hot: undeclared label value " + std::to_string(v));
      out.at(y, x, v) = 1.0;
    }
  return out;
}

void save_score_map(const ScoreMap& s, const std::string& png_path) {
  s.validate();
  double lo = s.scores[0], hi = s.scores[0];
  for (double v : s.scores) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::vector<uint16_t> q(s.scores.size(), 0);
  if (hi > lo) {
    const double scale = 65535.0 / (hi - lo);
    for (size_t i = 0; i < q.size(); ++i)
      q[i] = static_cast<uint16_t>(std::llround((s.scores[i] - lo) * scale));
  }
  png_io::write_png_gray16(png_path, q, s.w, s.h);
  nlohmann::ordered_json j;
  j["min"] = lo;
  j["max"] = hi;
  std::ofstream out(sidecar_path(png_path));
  if (!out) throw DataError("save_score_map: cannot write sidecar for " + png_path);
  out << j.dump(2) << "\n";
}

ScoreMap load_score_map(const std::string& png_path) {
  std::ifstream side(sidecar_path(png_path));
  if (!side) throw DataError("load_score_map: missing sidecar " + sidecar_path(png_path));
  nlohmann::json j;
  try {
    side >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("load_score_map: bad sidecar: " + std::string(e.what()));
  }
  const double lo = j.at("min").get<double>();
  const double hi = j.at("max").get<double>();
  const auto img = png_io::read_png(png_path);
  require(img.channels == 1, "load_score_map: expected grayscale png");
  ScoreMap s(img.height, img.width);
  const double span = hi - lo;
  for (size_t i = 0; i < s.scores.size(); ++i)
    s.scores[i] = lo + (span > 0.0 ? img.pixels[i] / 65535.0 * span : 0.0);
  return s;
}

void save_image(const ImageRGB& img, const std::string& path) {
  std::vector<uint8_t> px(img.pixels.size());
  for (size_t i = 0; i < px.size(); ++i) px[i] = to_u8(img.pixels[i]);
  png_io::write_png_rgb8(path, px, img.w, img.h);
}

ImageRGB load_image(const std::string& path) {
  const auto png = png_io::read_png(path);
  const double scale = 1.0 / ((1 << png.bit_depth) - 1);
  ImageRGB img(png.height, png.width);
  if (png.channels == 3) {
    for (size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = png.pixels[i] * scale;
  } else {
    for (size_t i = 0; i < png.pixels.size(); ++i) {
      const double v = png.pixels[i] * scale;
      img.pixels[3 * i] = img.pixels[3 * i + 1] = img.pixels[3 * i + 2] = v;
    }
  }
  return img;
}

void save_semantic(const SemanticMap& sem, const std::string& path) {
  std::vector<uint8_t> px(sem.labels.size());
  for (size_t i = 0; i < px.size(); ++i) {
    require(sem.labels[i] >= 0 && sem.labels[i] <= 255,
            "save_semantic: label does not fit 8-bit raster");
    px[i] = static_cast<uint8_t>(sem.labels[i]);
  }
  png_io::write_png_gray8(path, px, sem.w, sem.h);
}

SemanticMap load_semantic(const std::string& path, const LabelSpec& spec) {
  const auto png = png_io::read_png(path);
  require(png.channels == 1, "load_semantic: expected grayscale png: " + path);
  SemanticMap sem(png.height, png.width);
  for (size_t i = 0; i < sem.labels.size(); ++i) sem.labels[i] = png.pixels[i];
  sem.validate(spec);
  return sem;
}

void save_instances(const InstanceMap& inst, const std::string& path) {
  std::vector<uint16_t> px(inst.ids.size());
  for (size_t i = 0; i < px.size(); ++i) {
    require(inst.ids[i] >= 0 && inst.ids[i] <= 65535,
            "save_instances: id does not fit 16-bit raster");
    px[i] = static_cast<uint16_t>(inst.ids[i]);
  }
  png_io::write_png_gray16(path, px, inst.w, inst.h);
}

InstanceMap load_instances(const std::string& path) {
  const auto png = png_io::read_png(path);
  require(png.channels == 1, "load_instances: expected grayscale png: " + path);
  InstanceMap inst(png.height, png.width);
  for (size_t i = 0; i < inst.ids.size(); ++i) inst.ids[i] = png.pixels[i];
  return inst;
}

void save_mask(const AnomalyMask& mask, const std::string& path) {
  mask.validate();
  png_io::write_png_gray8(path, mask.values, mask.w, mask.h);
}

AnomalyMask load_mask(const std::string& path) {
  const auto png = png_io::read_png(path);
  require(png.channels == 1 && png.bit_depth == 8,
          "load_mask: expected 8-bit grayscale png: " + path);
  AnomalyMask mask(png.height, png.width);
  for (size_t i = 0; i < mask.values.size(); ++i)
    mask.values[i] = static_cast<uint8_t>(png.pixels[i]);
  mask.validate();
  return mask;
}

void save_roi(const RoiMask& roi, const std::string& path) {
  std::vector<uint8_t> px(roi.valid.size());
  for (size_t i = 0; i < px.size(); ++i) px[i] = roi.valid[i] ? 255 : 0;
  png_io::write_png_gray8(path, px, roi.w, roi.h);
}

RoiMask load_roi(const std::string& path) {
  const auto png = png_io::read_png(path);
  require(png.channels == 1, "load_roi: expected grayscale png: " + path);
  RoiMask roi(png.height, png.width);
  for (size_t i = 0; i < roi.valid.size(); ++i) roi.valid[i] = png.pixels[i] != 0;
  return roi;
}

std::string label_spec_to_json(const LabelSpec& spec) {
  nlohmann::ordered_json j;
  j["void_id"] = spec.void_id;
  j["classes"] = nlohmann::ordered_json::array();
  for (const auto& c : spec.classes) {
    nlohmann::ordered_json jc;
    jc["name"] = c.name;
    jc["train_id"] = c.train_id;
    jc["is_foreground"] = c.is_foreground;
    jc["color"] = {c.color[0], c.color[1], c.color[2]};
    j["classes"].push_back(jc);
  }
  return j.dump(2);
}

LabelSpec label_spec_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("label spec: bad json: " + std::string(e.what()));
  }
  LabelSpec spec;
  try {
    spec.void_id = j.at("void_id").get<int>();
    for (const auto& jc : j.at("classes")) {
      ClassDef c;
      c.name = jc.at("name").get<std::string>();
      c.train_id = jc.at("train_id").get<int>();
      c.is_foreground = jc.at("is_foreground").get<bool>();
      const auto col = jc.at("color");
      c.color = {col.at(0).get<uint8_t>(), col.at(1).get<uint8_t>(), col.at(2).get<uint8_t>()};
      spec.classes.push_back(c);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("label spec: missing field: " + std::string(e.what()));
  }
  spec.validate();
  return spec;
}

}  // namespace resyn
