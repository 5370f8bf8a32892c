#include "resyn/advdetect.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <json.hpp>

namespace resyn {

namespace {

constexpr double kPi = 3.14159265358979323846;

double luminance(const ImageRGB& img, int y, int x) {
  return 0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) + 0.114 * img.at(y, x, 2);
}

ImageRGB crop_image(const ImageRGB& img, int y0, int x0, int h, int w) {
  ImageRGB out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = img.at(y0 + y, x0 + x, c);
  return out;
}

double pairwise_auroc(const std::vector<double>& neg, const std::vector<double>& pos) {
  require(!neg.empty() && !pos.empty(), "pairwise_auroc: empty class");
  double acc = 0.0;
  for (double p : pos)
    for (double n : neg) acc += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
  return acc / (static_cast<double>(neg.size()) * static_cast<double>(pos.size()));
}

}  // namespace

std::string target_kind_name(TargetKind kind) {
  return kind == TargetKind::kShift ? "shift" : "pure";
}

void AttackConfig::validate() const {
  require(max_iter >= 1, "AttackConfig: max_iter must be >= 1");
  require(step_linf > 0.0 && total_linf_budget > 0.0,
          "AttackConfig: step sizes must be > 0");
}

void HogConfig::validate() const {
  require(cell >= 1 && block >= 1 && bins >= 1, "HogConfig: bad geometry");
  require(clip > 0.0, "HogConfig: clip must be > 0");
}

double LogisticDetector::probability(double distance) const {
  return 1.0 / (1.0 + std::exp(-(weight * distance + bias)));
}

void LogisticDetector::save(const std::string& path) const {
  nlohmann::ordered_json j;
  j["weight"] = weight;
  j["bias"] = bias;
  std::ofstream out(path);
  if (!out) throw DataError("LogisticDetector::save: cannot write " + path);
  out << j.dump(2) << "\n";
}

LogisticDetector LogisticDetector::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("LogisticDetector::load: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("LogisticDetector::load: bad json: " + std::string(e.what()));
  }
  LogisticDetector d;
  d.weight = j.at("weight").get<double>();
  d.bias = j.at("bias").get<double>();
  return d;
}

SemanticMap make_shift_target(const SemanticMap& pred, int offset, const LabelSpec& spec) {
  const int C = spec.num_classes();
  const int eff = ((offset % C) + C) % C;
  if (eff == 0) throw DataError("make_shift_target: offset is zero modulo num_classes");
  SemanticMap out = pred;
  for (int32_t& v : out.labels) {
    if (v == spec.void_id) continue;
    require(spec.is_known(v), "make_shift_target: undeclared label in prediction");
    v = (v + eff) % C;
  }
  return out;
}

SemanticMap make_pure_target(int h, int w, int label, const LabelSpec& spec) {
  if (!spec.is_known(label))
    throw DataError("make_pure_target: label " + std::to_string(label) +
                    " is not a known class");
  return SemanticMap(h, w, label);
}

AttackResult dag_attack(const ImageRGB& image, SegmentationBackend& backend,
                        const SemanticMap& target, const AttackConfig& cfg) {
  cfg.validate();
  if (!backend.capabilities().gradient_access)
    throw CapabilityError("dag_attack: backend lacks gradient access");
  require(target.h == image.h && target.w == image.w, "dag_attack: target dims differ");
  const LabelSpec& spec = backend.label_spec();
  const int C = spec.num_classes();

  AttackResult res;
  res.adversarial = image;
  int iterations = 0;

  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    const Tensor logits = backend.predict_logits(res.adversarial);
    const SemanticMap pred = argmax_labels(logits);
    Tensor coeffs(image.h, image.w, C);
    size_t active = 0;
    for (int y = 0; y < image.h; ++y)
      for (int x = 0; x < image.w; ++x) {
        const int32_t t = target.at(y, x);
        if (t == spec.void_id) continue;  // no logit to steer toward
        if (pred.at(y, x) == t) continue;
        coeffs.at(y, x, t) += 1.0;
        coeffs.at(y, x, pred.at(y, x)) -= 1.0;
        ++active;
      }
    if (active == 0) break;

    const Tensor grad = backend.input_gradient(res.adversarial, coeffs);
    ++iterations;
    for (int y = 0; y < image.h; ++y)
      for (int x = 0; x < image.w; ++x)
        for (int c = 0; c < 3; ++c) {
          const double g = grad.at(y, x, c);
          const double step = g > 0.0 ? cfg.step_linf : (g < 0.0 ? -cfg.step_linf : 0.0);
          const double orig = image.at(y, x, c);
          double v = res.adversarial.at(y, x, c) + step;
          v = std::clamp(v, orig - cfg.total_linf_budget, orig + cfg.total_linf_budget);
          res.adversarial.at(y, x, c) = std::clamp(v, 0.0, 1.0);
        }
  }

  res.iterations_used = iterations;
  const SemanticMap final_pred = predict_labels(backend, res.adversarial);
  size_t hit = 0, considered = 0;
  for (size_t i = 0; i < final_pred.labels.size(); ++i) {
    if (target.labels[i] == spec.void_id) continue;
    ++considered;
    hit += final_pred.labels[i] == target.labels[i];
  }
  res.success_rate =
      considered ? static_cast<double>(hit) / static_cast<double>(considered) : 1.0;
  double linf = 0.0;
  for (size_t i = 0; i < image.pixels.size(); ++i)
    linf = std::max(linf, std::abs(res.adversarial.pixels[i] - image.pixels[i]));
  res.linf_norm = linf;
  return res;
}

std::vector<double> hog_features(const ImageRGB& image, const HogConfig& cfg) {
  cfg.validate();
  const int min_px = cfg.cell * cfg.block;
  if (image.h < min_px || image.w < min_px)
    throw DataError("hog_features: image smaller than one block");

  const int cells_y = image.h / cfg.cell;
  const int cells_x = image.w / cfg.cell;
  const int ch = cells_y * cfg.cell;  // cell-aligned crop
  const int cw = cells_x * cfg.cell;

  // Cell histograms, hard orientation binning over [0, pi).
  std::vector<double> hist(static_cast<size_t>(cells_y) * cells_x * cfg.bins, 0.0);
  for (int y = 0; y < ch; ++y)
    for (int x = 0; x < cw; ++x) {
      const int xm = std::max(x - 1, 0), xp = std::min(x + 1, cw - 1);
      const int ym = std::max(y - 1, 0), yp = std::min(y + 1, ch - 1);
      const double gx = luminance(image, y, xp) - luminance(image, y, xm);
      const double gy = luminance(image, yp, x) - luminance(image, ym, x);
      const double mag = std::hypot(gx, gy);
      if (mag == 0.0) continue;
      double theta = std::atan2(gy, gx);
      if (theta < 0.0) theta += kPi;
      if (theta >= kPi) theta -= kPi;
      const int bin = std::min(cfg.bins - 1, static_cast<int>(theta / kPi * cfg.bins));
      const int cy = y / cfg.cell, cx = x / cfg.cell;
      hist[(static_cast<size_t>(cy) * cells_x + cx) * cfg.bins + bin] += mag;
    }

  const int blocks_y = cells_y - cfg.block + 1;
  const int blocks_x = cells_x - cfg.block + 1;
  const int block_len = cfg.block * cfg.block * cfg.bins;
  std::vector<double> feat;
  feat.reserve(static_cast<size_t>(blocks_y) * blocks_x * block_len);
  std::vector<double> block(static_cast<size_t>(block_len));
  for (int by = 0; by < blocks_y; ++by)
    for (int bx = 0; bx < blocks_x; ++bx) {
      int k = 0;
      for (int dy = 0; dy < cfg.block; ++dy)
        for (int dx = 0; dx < cfg.block; ++dx)
          for (int b = 0; b < cfg.bins; ++b)
            block[static_cast<size_t>(k++)] =
                hist[(static_cast<size_t>(by + dy) * cells_x + (bx + dx)) * cfg.bins + b];
      double norm = 0.0;
      for (double v : block) norm += v * v;
      norm = std::sqrt(norm);
      if (norm > 0.0) {
        for (double& v : block) v = std::min(v / norm, cfg.clip);
        double norm2 = 0.0;
        for (double v : block) norm2 += v * v;
        norm2 = std::sqrt(norm2);
        if (norm2 > 0.0)
          for (double& v : block) v /= norm2;
      }
      feat.insert(feat.end(), block.begin(), block.end());
    }
  return feat;
}

double resynth_distance(const ImageRGB& image, SegmentationBackend& backend,
                        const GeneratorBackend& gen, const HogConfig& cfg) {
  const SemanticMap pred = predict_labels(backend, image);
  const ImageRGB resynth = gen.generate(pred);
  require(resynth.h == image.h && resynth.w == image.w,
          "resynth_distance: generator changed dims");
  const std::vector<double> ha = hog_features(image, cfg);
  const std::vector<double> hb = hog_features(resynth, cfg);
  require(ha.size() == hb.size(), "resynth_distance: descriptor size mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < ha.size(); ++i) {
    const double d = ha[i] - hb[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

std::pair<LogisticDetector, DetectorMetrics> fit_detector(
    const std::vector<double>& distances_clean,
    const std::vector<double>& distances_adv, double train_fraction, DetRng& rng) {
  require(!distances_clean.empty() && !distances_adv.empty(),
          "fit_detector: empty distance list");
  require(distances_clean.size() == distances_adv.size(),
          "fit_detector: clean/adv lists must be paired");
  require(train_fraction > 0.0 && train_fraction < 1.0,
          "fit_detector: train_fraction in (0,1)");

  const size_t n = distances_clean.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  const size_t train_n =
      static_cast<size_t>(std::llround(train_fraction * static_cast<double>(n)));
  if (train_n == 0 || train_n == n)
    throw DataError("fit_detector: degenerate train/holdout split");

  std::vector<double> train_d, train_y, hold_clean, hold_adv;
  for (size_t i = 0; i < n; ++i) {
    const size_t idx = order[i];
    if (i < train_n) {
      train_d.push_back(distances_clean[idx]);
      train_y.push_back(0.0);
      train_d.push_back(distances_adv[idx]);
      train_y.push_back(1.0);
    } else {
      hold_clean.push_back(distances_clean[idx]);
      hold_adv.push_back(distances_adv[idx]);
    }
  }

  // Standardize for conditioning, then fold the affine map back out.
  double mu = 0.0;
  for (double d : train_d) mu += d;
  mu /= static_cast<double>(train_d.size());
  double var = 0.0;
  for (double d : train_d) var += (d - mu) * (d - mu);
  const double sd = std::max(std::sqrt(var / static_cast<double>(train_d.size())), 1e-12);

  double w = 0.0, b = 0.0;
  const double lr = 0.5;
  const int iters = 4000;
  const double inv_m = 1.0 / static_cast<double>(train_d.size());
  for (int it = 0; it < iters; ++it) {
    double gw = 0.0, gb = 0.0;
    for (size_t i = 0; i < train_d.size(); ++i) {
      const double z = (train_d[i] - mu) / sd;
      const double p = 1.0 / (1.0 + std::exp(-(w * z + b)));
      gw += (p - train_y[i]) * z;
      gb += (p - train_y[i]);
    }
    gw *= inv_m;
    gb *= inv_m;
    w -= lr * gw;
    b -= lr * gb;
    if (std::abs(gw) < 1e-10 && std::abs(gb) < 1e-10) break;
  }

  LogisticDetector det;
  det.weight = w / sd;
  det.bias = b - w * mu / sd;

  DetectorMetrics metrics;
  metrics.train_pairs = static_cast<int>(train_n);
  metrics.holdout_pairs = static_cast<int>(n - train_n);
  size_t correct = 0;
  for (size_t i = 0; i < train_d.size(); ++i)
    correct += (det.probability(train_d[i]) >= det.threshold) == (train_y[i] > 0.5);
  metrics.train_accuracy = static_cast<double>(correct) / static_cast<double>(train_d.size());

  correct = 0;
  std::vector<double> hold_scores_clean, hold_scores_adv;
  for (double d : hold_clean) {
    correct += !det.is_adversarial(d);
    hold_scores_clean.push_back(det.weight * d + det.bias);
  }
  for (double d : hold_adv) {
    correct += det.is_adversarial(d);
    hold_scores_adv.push_back(det.weight * d + det.bias);
  }
  metrics.holdout_accuracy =
      static_cast<double>(correct) / static_cast<double>(hold_clean.size() + hold_adv.size());
  metrics.holdout_auroc = pairwise_auroc(hold_scores_clean, hold_scores_adv);
  return {det, metrics};
}

double sc_score(const ImageRGB& image, SegmentationBackend& backend, int n_pairs,
                int patch, DetRng& rng) {
  require(n_pairs >= 1 && patch >= 1, "sc_score: bad parameters");
  if (image.h < patch || image.w < patch)
    throw DataError("sc_score: image smaller than patch");

  const int max_y = image.h - patch;
  const int max_x = image.w - patch;
  double total = 0.0;
  for (int k = 0; k < n_pairs; ++k) {
    const int y1 = static_cast<int>(rng.uniform_int(0, max_y));
    const int x1 = static_cast<int>(rng.uniform_int(0, max_x));
    int y2 = y1, x2 = x1;
    for (int attempt = 0; attempt < 100; ++attempt) {
      const int cy = static_cast<int>(rng.uniform_int(0, max_y));
      const int cx = static_cast<int>(rng.uniform_int(0, max_x));
      if (std::abs(cy - y1) < patch && std::abs(cx - x1) < patch) {
        y2 = cy;
        x2 = cx;
        break;
      }
    }

    const SemanticMap p1 = predict_labels(backend, crop_image(image, y1, x1, patch, patch));
    const SemanticMap p2 = predict_labels(backend, crop_image(image, y2, x2, patch, patch));

    // Overlap rectangle in global coordinates.
    const int oy0 = std::max(y1, y2), oy1 = std::min(y1, y2) + patch;
    const int ox0 = std::max(x1, x2), ox1 = std::min(x1, x2) + patch;

    std::set<int32_t> present;
    std::map<int32_t, std::array<int64_t, 2>> inter_union;  // class -> {inter, union}
    for (int y = oy0; y < oy1; ++y)
      for (int x = ox0; x < ox1; ++x) {
        const int32_t a = p1.at(y - y1, x - x1);
        const int32_t b = p2.at(y - y2, x - x2);
        present.insert(a);
        present.insert(b);
        auto& ia = inter_union[a];
        auto& ib = inter_union[b];
        if (a == b) {
          ia[0] += 1;
          ia[1] += 1;
        } else {
          ia[1] += 1;
          ib[1] += 1;
        }
      }
    double miou = 0.0;
    for (int32_t cls : present) {
      const auto& iu = inter_union[cls];
      miou += iu[1] > 0 ? static_cast<double>(iu[0]) / static_cast<double>(iu[1]) : 0.0;
    }
    total += present.empty() ? 1.0 : miou / static_cast<double>(present.size());
  }
  return total / static_cast<double>(n_pairs);
}

}  // namespace resyn
