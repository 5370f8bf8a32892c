#include "resyn/toyworld.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

#include "resyn/synthesis.hpp"

namespace resyn::toyworld {

namespace {

int color_l1(const std::array<uint8_t, 3>& a, const std::array<uint8_t, 3>& b) {
  int d = 0;
  for (int c = 0; c < 3; ++c)
    d += std::abs(static_cast<int>(a[static_cast<size_t>(c)]) -
                  static_cast<int>(b[static_cast<size_t>(c)]));
  return d;
}

int nearest_known_class(const LabelSpec& spec, const std::array<uint8_t, 3>& color) {
  int best = spec.classes.front().train_id;
  int best_d = color_l1(spec.classes.front().color, color);
  for (const auto& c : spec.classes) {
    const int d = color_l1(c.color, color);
    if (d < best_d || (d == best_d && c.train_id < best)) {
      best = c.train_id;
      best_d = d;
    }
  }
  return best;
}

enum class ShapeKind { kBox, kBlob, kPost, kDiamond, kCross };

ShapeKind kind_for_class(const std::string& name) {
  if (name == "box") return ShapeKind::kBox;
  if (name == "blob") return ShapeKind::kBlob;
  if (name == "post") return ShapeKind::kPost;
  return ShapeKind::kBox;
}

// Calls put(y, x) for every pixel of the shape; bbox is kept inside [0,h)x[0,w).
void rasterize(ShapeKind kind, int cy, int cx, int size,
               const std::function<void(int, int)>& put) {
  const int r = std::max(1, size / 2);
  switch (kind) {
    case ShapeKind::kBox: {
      const int hw = std::max(1, static_cast<int>(std::lround(r * 1.1)));
      for (int y = cy - r; y <= cy + r; ++y)
        for (int x = cx - hw; x <= cx + hw; ++x) put(y, x);
      break;
    }
    case ShapeKind::kBlob: {
      for (int y = cy - r; y <= cy + r; ++y)
        for (int x = cx - r; x <= cx + r; ++x)
          if ((y - cy) * (y - cy) + (x - cx) * (x - cx) <= r * r) put(y, x);
      break;
    }
    case ShapeKind::kPost: {
      const int hw = std::max(1, r / 4);
      const int hh = std::max(2, static_cast<int>(std::lround(r * 1.5)));
      for (int y = cy - hh; y <= cy + hh; ++y)
        for (int x = cx - hw; x <= cx + hw; ++x) put(y, x);
      break;
    }
    case ShapeKind::kDiamond: {
      for (int y = cy - r; y <= cy + r; ++y)
        for (int x = cx - r; x <= cx + r; ++x)
          if (std::abs(y - cy) + std::abs(x - cx) <= r) put(y, x);
      break;
    }
    case ShapeKind::kCross: {
      const int arm = std::max(1, r / 3);
      for (int y = cy - r; y <= cy + r; ++y)
        for (int x = cx - r; x <= cx + r; ++x)
          if (std::abs(y - cy) <= arm || std::abs(x - cx) <= arm) put(y, x);
      break;
    }
  }
}

struct ShapeExtent {
  int up, down, left, right;  // max offsets from center
};

ShapeExtent extent_of(ShapeKind kind, int size) {
  const int r = std::max(1, size / 2);
  switch (kind) {
    case ShapeKind::kBox: {
      const int hw = std::max(1, static_cast<int>(std::lround(r * 1.1)));
      return {r, r, hw, hw};
    }
    case ShapeKind::kPost: {
      const int hh = std::max(2, static_cast<int>(std::lround(r * 1.5)));
      const int hw = std::max(1, r / 4);
      return {hh, hh, hw, hw};
    }
    default:
      return {r, r, r, r};
  }
}

std::string format_id(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%04d", prefix, i);
  return buf;
}

}  // namespace

LabelSpec toy_label_spec() {
  LabelSpec spec;
  spec.void_id = 255;
  spec.classes = {
      {"road", 0, false, {70, 70, 75}},
      {"sky", 1, false, {135, 206, 235}},
      {"box", 2, true, {200, 45, 45}},
      {"blob", 3, true, {45, 180, 60}},
      {"post", 4, true, {235, 200, 40}},
  };
  spec.validate();
  return spec;
}

ToySceneConfig ToySceneConfig::defaults() {
  ToySceneConfig cfg;
  cfg.foreground = {
      {"box", 1, 3, 8, 18},
      {"blob", 0, 2, 8, 16},
      {"post", 0, 2, 10, 18},
  };
  cfg.anomaly_shapes = {
      {"cross", {230, 40, 230}},
      {"diamond", {20, 240, 240}},
  };
  return cfg;
}

void ToySceneConfig::validate() const {
  require(width >= 32 && height >= 32, "toy scene: dims must be >= 32x32");
  require(horizon_frac > 0.05 && horizon_frac < 0.9, "toy scene: bad horizon");
  require(texture_amplitude >= 0.0 && texture_amplitude < 0.5,
          "toy scene: bad texture amplitude");
  const LabelSpec spec = toy_label_spec();
  for (const auto& a : anomaly_shapes)
    for (const auto& c : spec.classes)
      require(color_l1(a.color, c.color) > 0,
              "toy scene: anomaly color collides with known class " + c.name);
  require(anomaly_min_count <= anomaly_max_count && anomaly_min_size <= anomaly_max_size,
          "toy scene: bad anomaly ranges");
}

Sample generate_scene(const ToySceneConfig& cfg, DetRng& rng) {
  cfg.validate();
  const LabelSpec spec = toy_label_spec();
  const int h = cfg.height, w = cfg.width;
  const int road_id = *spec.id_by_name("road");
  const int sky_id = *spec.id_by_name("sky");

  const uint64_t style_seed = rng.next_u64();
  const int horizon = std::clamp(
      static_cast<int>(std::lround(h * cfg.horizon_frac)) +
          static_cast<int>(rng.uniform_int(-2, 2)),
      2, h - 4);

  SemanticMap sem(h, w, sky_id);
  for (int y = horizon; y < h; ++y)
    for (int x = 0; x < w; ++x) sem.at(y, x) = road_id;
  InstanceMap inst(h, w);
  std::vector<int16_t> anom_idx(static_cast<size_t>(h) * w, -1);

  // Picks a center so the shape's extent fits the image and its center sits
  // in the road band; bounded retries, then a hard error.
  auto place = [&](const ShapeExtent& ext) -> std::pair<int, int> {
    const int y_lo = std::max(ext.up, horizon);
    const int y_hi = h - 1 - ext.down;
    const int x_lo = ext.left;
    const int x_hi = w - 1 - ext.right;
    for (int attempt = 0; attempt < 64; ++attempt) {
      if (y_lo > y_hi || x_lo > x_hi) break;
      const int cy = static_cast<int>(rng.uniform_int(y_lo, y_hi));
      const int cx = static_cast<int>(rng.uniform_int(x_lo, x_hi));
      return {cy, cx};
    }
    throw DataError("toy scene: shape cannot fit scene dims");
  };

  int32_t next_instance = 1;
  for (const auto& shape_cfg : cfg.foreground) {
    const auto id = spec.id_by_name(shape_cfg.class_name);
    require(id.has_value(), "toy scene: unknown foreground class " + shape_cfg.class_name);
    const ShapeKind kind = kind_for_class(shape_cfg.class_name);
    const int count = static_cast<int>(rng.uniform_int(shape_cfg.min_count, shape_cfg.max_count));
    for (int i = 0; i < count; ++i) {
      const int size = static_cast<int>(rng.uniform_int(shape_cfg.min_size, shape_cfg.max_size));
      const auto [cy, cx] = place(extent_of(kind, size));
      const int32_t inst_id = next_instance++;
      rasterize(kind, cy, cx, size, [&](int y, int x) {
        if (y < 0 || y >= h || x < 0 || x >= w) return;
        sem.at(y, x) = *id;
        inst.at(y, x) = inst_id;
        anom_idx[static_cast<size_t>(y) * w + x] = -1;
      });
    }
  }

  AnomalyMask anomaly(h, w, kNormal);
  if (!cfg.anomaly_shapes.empty() && cfg.anomaly_max_count > 0) {
    const int count =
        static_cast<int>(rng.uniform_int(cfg.anomaly_min_count, cfg.anomaly_max_count));
    for (int i = 0; i < count; ++i) {
      const int which = static_cast<int>(
          rng.uniform_int(0, static_cast<int64_t>(cfg.anomaly_shapes.size()) - 1));
      const auto& def = cfg.anomaly_shapes[static_cast<size_t>(which)];
      const ShapeKind kind = def.name == "cross" ? ShapeKind::kCross : ShapeKind::kDiamond;
      const int size = static_cast<int>(rng.uniform_int(cfg.anomaly_min_size, cfg.anomaly_max_size));
      const int confused_label = nearest_known_class(spec, def.color);
      const auto [cy, cx] = place(extent_of(kind, size));
      rasterize(kind, cy, cx, size, [&](int y, int x) {
        if (y < 0 || y >= h || x < 0 || x >= w) return;
        sem.at(y, x) = confused_label;
        inst.at(y, x) = 0;
        anomaly.at(y, x) = kAnomaly;
        anom_idx[static_cast<size_t>(y) * w + x] = static_cast<int16_t>(which);
      });
    }
  }

  ImageRGB image(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int16_t ai = anom_idx[static_cast<size_t>(y) * w + x];
      const std::array<uint8_t, 3> color =
          ai >= 0 ? cfg.anomaly_shapes[static_cast<size_t>(ai)].color
                  : spec.class_by_id(sem.at(y, x)).color;
      const auto px =
          ToyGenerator::render_pixel(color, x, y, style_seed, cfg.texture_amplitude);
      for (int c = 0; c < 3; ++c) image.at(y, x, c) = px[static_cast<size_t>(c)];
    }

  RoiMask freespace(h, w, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      freespace.at(y, x) = (sem.at(y, x) == road_id && anomaly.at(y, x) == kNormal) ? 1 : 0;

  Sample sample;
  sample.id = "scene";
  sample.image = std::move(image);
  sample.semantic = std::move(sem);
  sample.instances = std::move(inst);
  sample.anomaly = std::move(anomaly);
  sample.roi = RoiMask(h, w, 1);
  sample.freespace = std::move(freespace);
  sample.validate();
  return sample;
}

std::pair<std::vector<Sample>, std::vector<Sample>> generate_split(
    const ToySceneConfig& cfg, int n_train, int n_test, DetRng& rng) {
  require(n_train > 0 && n_test > 0, "generate_split: counts must be > 0");
  cfg.validate();
  const uint64_t base = rng.next_u64();

  ToySceneConfig train_cfg = cfg;
  train_cfg.anomaly_min_count = 0;
  train_cfg.anomaly_max_count = 0;

  std::vector<Sample> train, test;
  train.reserve(static_cast<size_t>(n_train));
  test.reserve(static_cast<size_t>(n_test));
  for (int i = 0; i < n_train; ++i) {
    DetRng scene_rng(derive_seed(base, static_cast<uint64_t>(i)));
    Sample s = generate_scene(train_cfg, scene_rng);
    s.id = format_id("train", i);
    train.push_back(std::move(s));
  }
  for (int j = 0; j < n_test; ++j) {
    DetRng scene_rng(derive_seed(base, 0x100000ull + static_cast<uint64_t>(j)));
    Sample s = generate_scene(cfg, scene_rng);
    s.id = format_id("test", j);
    test.push_back(std::move(s));
  }
  return {std::move(train), std::move(test)};
}

}  // namespace resyn::toyworld
