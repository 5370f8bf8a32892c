#include "resyn/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "resyn/nn.hpp"

namespace resyn {

namespace {

constexpr double kStdFloor = 1e-2;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<double> grab_patch(const ImageRGB& img, int y0, int x0, int p) {
  std::vector<double> v;
  v.reserve(static_cast<size_t>(p) * p * 3);
  for (int y = y0; y < y0 + p; ++y)
    for (int x = x0; x < x0 + p; ++x)
      for (int c = 0; c < 3; ++c) v.push_back(img.at(y, x, c));
  return v;
}

// Hidden probabilities sigma(hbias + W^T v).
void hidden_probs(const RbmModel& m, const std::vector<double>& v,
                  std::vector<double>& h) {
  const int H = m.cfg.hidden_units;
  h.assign(static_cast<size_t>(H), 0.0);
  for (int j = 0; j < H; ++j) {
    double acc = m.hbias[static_cast<size_t>(j)];
    for (int i = 0; i < m.visible_dim; ++i)
      acc += v[static_cast<size_t>(i)] * m.weights[static_cast<size_t>(i) * H + j];
    h[static_cast<size_t>(j)] = sigmoid(acc);
  }
}

// Visible means vbias + W h.
void visible_means(const RbmModel& m, const std::vector<double>& h,
                   std::vector<double>& v) {
  const int H = m.cfg.hidden_units;
  v.assign(static_cast<size_t>(m.visible_dim), 0.0);
  for (int i = 0; i < m.visible_dim; ++i) {
    double acc = m.vbias[static_cast<size_t>(i)];
    for (int j = 0; j < H; ++j)
      acc += m.weights[static_cast<size_t>(i) * H + j] * h[static_cast<size_t>(j)];
    v[static_cast<size_t>(i)] = acc;
  }
}

}  // namespace

void RbmConfig::validate() const {
  require(patch_size >= 1 && stride >= 1 && hidden_units >= 1,
          "RbmConfig: patch_size, stride and hidden_units must be >= 1");
  require(noise_sigma >= 0.0, "RbmConfig: noise_sigma must be >= 0");
  require(cd_steps >= 1 && epochs >= 1 && learning_rate > 0.0,
          "RbmConfig: bad training parameters");
}

std::vector<double> RbmModel::standardize(const std::vector<double>& raw_patch) const {
  require(static_cast<int>(raw_patch.size()) == visible_dim,
          "rbm: patch dim mismatch");
  std::vector<double> v(raw_patch.size());
  for (size_t i = 0; i < raw_patch.size(); ++i) {
    const size_t c = i % 3;
    v[i] = (raw_patch[i] - channel_mean[c]) / channel_std[c];
  }
  return v;
}

std::vector<double> RbmModel::reconstruct(const std::vector<double>& v) const {
  std::vector<double> h, out;
  hidden_probs(*this, v, h);
  visible_means(*this, h, out);
  return out;
}

double RbmModel::patch_score(const std::vector<double>& raw_patch) const {
  const std::vector<double> v = standardize(raw_patch);
  const std::vector<double> r = reconstruct(v);
  double acc = 0.0;
  for (size_t i = 0; i < v.size(); ++i) {
    const double d = v[i] - r[i];
    acc += d * d;
  }
  return acc / static_cast<double>(v.size());
}

std::vector<std::vector<double>> extract_road_patches(const std::vector<Sample>& samples,
                                                      const LabelSpec& spec,
                                                      const RbmConfig& cfg) {
  cfg.validate();
  const auto road = spec.id_by_name("road");
  if (!road) throw DataError("extract_road_patches: label spec declares no road class");

  std::vector<std::vector<double>> patches;
  bool any_road = false;
  for (const Sample& s : samples) {
    if (!s.semantic) throw DataError("extract_road_patches: sample '" + s.id +
                                     "' lacks a ground-truth semantic map");
    const SemanticMap& sem = *s.semantic;
    const int p = cfg.patch_size;
    for (int y0 = 0; y0 + p <= s.image.h; y0 += cfg.stride)
      for (int x0 = 0; x0 + p <= s.image.w; x0 += cfg.stride) {
        bool all_road = true;
        for (int y = y0; all_road && y < y0 + p; ++y)
          for (int x = x0; x < x0 + p; ++x)
            if (sem.at(y, x) != *road) {
              all_road = false;
              break;
            }
        if (!all_road) continue;
        any_road = true;
        patches.push_back(grab_patch(s.image, y0, x0, p));
      }
  }
  if (!any_road) throw DataError("extract_road_patches: no road patches found");
  return patches;
}

RbmModel train_rbm(const std::vector<std::vector<double>>& patches,
                   const RbmConfig& cfg, DetRng& rng) {
  cfg.validate();
  require(!patches.empty(), "train_rbm: empty patch set");
  require(static_cast<int>(patches.size()) >= cfg.hidden_units,
          "train_rbm: need at least hidden_units patches");

  RbmModel m;
  m.cfg = cfg;
  m.visible_dim = 3 * cfg.patch_size * cfg.patch_size;
  for (const auto& p : patches)
    require(static_cast<int>(p.size()) == m.visible_dim, "train_rbm: patch dim mismatch");

  // Per-channel standardization statistics from the training corpus.
  std::array<double, 3> sum{0, 0, 0}, sumsq{0, 0, 0};
  size_t per_channel = patches.size() * static_cast<size_t>(m.visible_dim) / 3;
  for (const auto& p : patches)
    for (size_t i = 0; i < p.size(); ++i) {
      sum[i % 3] += p[i];
      sumsq[i % 3] += p[i] * p[i];
    }
  for (size_t c = 0; c < 3; ++c) {
    m.channel_mean[c] = sum[c] / static_cast<double>(per_channel);
    const double var = sumsq[c] / static_cast<double>(per_channel) -
                       m.channel_mean[c] * m.channel_mean[c];
    m.channel_std[c] = std::max(std::sqrt(std::max(var, 0.0)), kStdFloor);
  }

  const int H = cfg.hidden_units;
  m.weights.assign(static_cast<size_t>(m.visible_dim) * H, 0.0);
  for (double& w : m.weights) w = rng.normal(0.0, 0.01);
  m.vbias.assign(static_cast<size_t>(m.visible_dim), 0.0);
  m.hbias.assign(static_cast<size_t>(H), 0.0);

  std::vector<std::vector<double>> data;
  data.reserve(patches.size());
  for (const auto& p : patches) data.push_back(m.standardize(p));

  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> v0, h0, h_sample, v1, h1;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (size_t idx : order) {
      // Positive phase on the noise-corrupted visible.
      v0 = data[idx];
      for (double& v : v0) v += rng.normal(0.0, cfg.noise_sigma);
      hidden_probs(m, v0, h0);
      h_sample.assign(h0.size(), 0.0);
      for (size_t j = 0; j < h0.size(); ++j) h_sample[j] = rng.bernoulli(h0[j]) ? 1.0 : 0.0;
      // CD-k chain (mean-field visibles, sampled hiddens).
      v1 = v0;
      h1 = h_sample;
      for (int step = 0; step < cfg.cd_steps; ++step) {
        visible_means(m, h1, v1);
        hidden_probs(m, v1, h1);
        if (step + 1 < cfg.cd_steps)
          for (double& hv : h1) hv = rng.bernoulli(hv) ? 1.0 : 0.0;
      }
      const double lr = cfg.learning_rate;
      for (int i = 0; i < m.visible_dim; ++i) {
        const double v0i = v0[static_cast<size_t>(i)];
        const double v1i = v1[static_cast<size_t>(i)];
        for (int j = 0; j < H; ++j)
          m.weights[static_cast<size_t>(i) * H + j] +=
              lr * (v0i * h0[static_cast<size_t>(j)] - v1i * h1[static_cast<size_t>(j)]);
        m.vbias[static_cast<size_t>(i)] += lr * (v0i - v1i);
      }
      for (int j = 0; j < H; ++j)
        m.hbias[static_cast<size_t>(j)] += lr * (h0[static_cast<size_t>(j)] - h1[static_cast<size_t>(j)]);
    }
    // Epoch metric: clean reconstruction MSE over the corpus.
    double mse = 0.0;
    for (const auto& v : data) {
      const std::vector<double> r = m.reconstruct(v);
      double acc = 0.0;
      for (size_t i = 0; i < v.size(); ++i) {
        const double d = v[i] - r[i];
        acc += d * d;
      }
      mse += acc / static_cast<double>(v.size());
    }
    m.epoch_mse.push_back(mse / static_cast<double>(data.size()));
  }
  return m;
}

ScoreMap rbm_score(const RbmModel& model, const ImageRGB& image) {
  const int p = model.cfg.patch_size;
  if (image.h < p || image.w < p)
    throw DataError("rbm_score: image smaller than one patch");

  std::vector<int> ys, xs;
  for (int y0 = 0; y0 + p <= image.h; y0 += model.cfg.stride) ys.push_back(y0);
  for (int x0 = 0; x0 + p <= image.w; x0 += model.cfg.stride) xs.push_back(x0);

  const size_t n_patches = ys.size() * xs.size();
  std::vector<double> patch_scores(n_patches, 0.0);
#pragma omp parallel for schedule(static)
  for (size_t pi = 0; pi < n_patches; ++pi) {
    const int y0 = ys[pi / xs.size()];
    const int x0 = xs[pi % xs.size()];
    patch_scores[pi] = model.patch_score(grab_patch(image, y0, x0, p));
  }

  ScoreMap out(image.h, image.w, 0.0);
  std::vector<int> cover(static_cast<size_t>(image.h) * image.w, 0);
  for (size_t pi = 0; pi < n_patches; ++pi) {
    const int y0 = ys[pi / xs.size()];
    const int x0 = xs[pi % xs.size()];
    for (int y = y0; y < y0 + p; ++y)
      for (int x = x0; x < x0 + p; ++x) {
        out.at(y, x) += patch_scores[pi];
        ++cover[static_cast<size_t>(y) * image.w + x];
      }
  }
  const double max_score =
      n_patches ? *std::max_element(patch_scores.begin(), patch_scores.end()) : 0.0;
  for (int y = 0; y < image.h; ++y)
    for (int x = 0; x < image.w; ++x) {
      const int n = cover[static_cast<size_t>(y) * image.w + x];
      out.at(y, x) = n > 0 ? out.at(y, x) / n : max_score;
    }
  return out;
}

void RbmModel::save(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json j;
  j["patch_size"] = cfg.patch_size;
  j["stride"] = cfg.stride;
  j["hidden_units"] = cfg.hidden_units;
  j["noise_sigma"] = cfg.noise_sigma;
  j["cd_steps"] = cfg.cd_steps;
  j["learning_rate"] = cfg.learning_rate;
  j["epochs"] = cfg.epochs;
  j["seed"] = cfg.seed;
  j["visible_dim"] = visible_dim;
  j["channel_mean"] = channel_mean;
  j["channel_std"] = channel_std;
  std::ofstream out(std::filesystem::path(dir) / "rbm.json");
  if (!out) throw DataError("RbmModel::save: cannot write rbm.json in " + dir);
  out << j.dump(2) << "\n";

  nn::Param w{"rbm.weights", weights, {}, true};
  nn::Param vb{"rbm.vbias", vbias, {}, true};
  nn::Param hb{"rbm.hbias", hbias, {}, true};
  nn::save_weight_blob((std::filesystem::path(dir) / "weights.bin").string(),
                       {&w, &vb, &hb});
}

RbmModel RbmModel::load(const std::string& dir) {
  std::ifstream in(std::filesystem::path(dir) / "rbm.json");
  if (!in) throw DataError("RbmModel::load: missing rbm.json in " + dir);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("RbmModel::load: bad json: " + std::string(e.what()));
  }
  RbmModel m;
  m.cfg.patch_size = j.at("patch_size").get<int>();
  m.cfg.stride = j.at("stride").get<int>();
  m.cfg.hidden_units = j.at("hidden_units").get<int>();
  m.cfg.noise_sigma = j.at("noise_sigma").get<double>();
  m.cfg.cd_steps = j.at("cd_steps").get<int>();
  m.cfg.learning_rate = j.at("learning_rate").get<double>();
  m.cfg.epochs = j.at("epochs").get<int>();
  m.cfg.seed = j.at("seed").get<uint64_t>();
  m.visible_dim = j.at("visible_dim").get<int>();
  m.channel_mean = j.at("channel_mean").get<std::array<double, 3>>();
  m.channel_std = j.at("channel_std").get<std::array<double, 3>>();

  m.weights.assign(static_cast<size_t>(m.visible_dim) * m.cfg.hidden_units, 0.0);
  m.vbias.assign(static_cast<size_t>(m.visible_dim), 0.0);
  m.hbias.assign(static_cast<size_t>(m.cfg.hidden_units), 0.0);
  nn::Param w{"rbm.weights", {}, {}, true};
  nn::Param vb{"rbm.vbias", {}, {}, true};
  nn::Param hb{"rbm.hbias", {}, {}, true};
  w.value = m.weights;
  vb.value = m.vbias;
  hb.value = m.hbias;
  nn::load_weight_blob((std::filesystem::path(dir) / "weights.bin").string(),
                       {&w, &vb, &hb});
  m.weights = w.value;
  m.vbias = vb.value;
  m.hbias = hb.value;
  return m;
}

}  // namespace resyn
