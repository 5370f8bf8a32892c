#include "resyn/discrepancy.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "resyn/kernels.hpp"

namespace resyn {

namespace {

void check_channel_list(const std::vector<int>& v, int levels, const char* what) {
  require(static_cast<int>(v.size()) == levels,
          std::string(what) + ": need one entry per pyramid level");
  for (int c : v) require(c >= 1, std::string(what) + ": channels must be >= 1");
}

Tensor crop_top_left(const Tensor& t, int h, int w) {
  if (t.h == h && t.w == w) return t;
  require(t.h >= h && t.w >= w, "crop: target larger than input");
  Tensor out(h, w, t.c);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < t.c; ++c) out.at(y, x, c) = t.at(y, x, c);
  return out;
}

Tensor pad_to(const Tensor& g, int h, int w) {
  if (g.h == h && g.w == w) return g;
  Tensor out(h, w, g.c);
  for (int y = 0; y < g.h; ++y)
    for (int x = 0; x < g.w; ++x)
      for (int c = 0; c < g.c; ++c) out.at(y, x, c) = g.at(y, x, c);
  return out;
}

void add_into(Tensor& dst, const Tensor& src) {
  require(dst.same_shape(src), "add_into: shape mismatch");
  for (size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += src.data[i];
}

void dot_correlation(const Tensor& a, const Tensor& b, Tensor& out) {
  out = Tensor(a.h, a.w, 1);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < a.h; ++y)
    for (int x = 0; x < a.w; ++x) {
      double acc = 0.0;
      for (int c = 0; c < a.c; ++c) acc += a.at(y, x, c) * b.at(y, x, c);
      out.at(y, x, 0) = acc;
    }
}

void dot_correlation_backward(const Tensor& a, const Tensor& b, const Tensor& g,
                              Tensor& ga, Tensor& gb) {
  ga = Tensor(a.h, a.w, a.c);
  gb = Tensor(a.h, a.w, a.c);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < a.h; ++y)
    for (int x = 0; x < a.w; ++x) {
      const double gv = g.at(y, x, 0);
      for (int c = 0; c < a.c; ++c) {
        ga.at(y, x, c) = gv * b.at(y, x, c);
        gb.at(y, x, c) = gv * a.at(y, x, c);
      }
    }
}

void corr_backward(const Tensor& a, const Tensor& b, const Tensor& g,
                   const std::string& mode, Tensor& ga, Tensor& gb) {
  if (mode == "cosine")
    kernels::cosine_correlation_backward(a, b, g, ga, gb);
  else
    dot_correlation_backward(a, b, g, ga, gb);
}

}  // namespace

void DiscrepancyConfig::validate() const {
  require(pyramid_levels >= 2, "DiscrepancyConfig: pyramid_levels must be >= 2");
  check_channel_list(image_stream_channels, pyramid_levels, "image_stream_channels");
  check_channel_list(label_stream_channels, pyramid_levels, "label_stream_channels");
  check_channel_list(reduce_channels, pyramid_levels, "reduce_channels");
  check_channel_list(upconv_channels, pyramid_levels, "upconv_channels");
  require(correlation == "cosine" || correlation == "dot",
          "DiscrepancyConfig: correlation must be 'cosine' or 'dot'");
  require(num_label_classes >= 2, "DiscrepancyConfig: num_label_classes must be >= 2");
  require(num_output_classes == 2, "DiscrepancyConfig: output head is 2-class");
}

std::string DiscrepancyConfig::to_json() const {
  nlohmann::ordered_json j;
  j["pyramid_levels"] = pyramid_levels;
  j["image_stream_channels"] = image_stream_channels;
  j["label_stream_channels"] = label_stream_channels;
  j["reduce_channels"] = reduce_channels;
  j["upconv_channels"] = upconv_channels;
  j["correlation"] = correlation;
  j["freeze_image_streams"] = freeze_image_streams;
  j["num_label_classes"] = num_label_classes;
  j["num_output_classes"] = num_output_classes;
  j["init_seed"] = init_seed;
  return j.dump(2);
}

DiscrepancyConfig DiscrepancyConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    DiscrepancyConfig cfg;
    cfg.pyramid_levels = j.at("pyramid_levels").get<int>();
    cfg.image_stream_channels = j.at("image_stream_channels").get<std::vector<int>>();
    cfg.label_stream_channels = j.at("label_stream_channels").get<std::vector<int>>();
    cfg.reduce_channels = j.at("reduce_channels").get<std::vector<int>>();
    cfg.upconv_channels = j.at("upconv_channels").get<std::vector<int>>();
    cfg.correlation = j.at("correlation").get<std::string>();
    cfg.freeze_image_streams = j.at("freeze_image_streams").get<bool>();
    cfg.num_label_classes = j.at("num_label_classes").get<int>();
    cfg.num_output_classes = j.at("num_output_classes").get<int>();
    cfg.init_seed = j.at("init_seed").get<uint64_t>();
    cfg.validate();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("DiscrepancyConfig: bad json: " + std::string(e.what()));
  }
}

DiscrepancyConfig DiscrepancyConfig::toy_defaults(int num_label_classes) {
  DiscrepancyConfig cfg;
  cfg.pyramid_levels = 3;
  cfg.image_stream_channels = {8, 12, 16};
  cfg.label_stream_channels = {4, 6, 8};
  cfg.reduce_channels = {8, 8, 8};
  cfg.upconv_channels = {8, 12, 16};
  cfg.num_label_classes = num_label_classes;
  return cfg;
}

DiscrepancyConfig DiscrepancyConfig::tiny(int num_label_classes) {
  DiscrepancyConfig cfg;
  cfg.pyramid_levels = 2;
  cfg.image_stream_channels = {3, 4};
  cfg.label_stream_channels = {3, 4};
  cfg.reduce_channels = {4, 4};
  cfg.upconv_channels = {4, 4};
  cfg.freeze_image_streams = false;
  cfg.num_label_classes = num_label_classes;
  cfg.init_seed = 7;
  return cfg;
}

Tensor pointwise_correlation(const Tensor& feat_a, const Tensor& feat_b,
                             const std::string& mode) {
  require(feat_a.same_shape(feat_b), "pointwise_correlation: shape mismatch");
  Tensor out;
  if (mode == "cosine")
    kernels::cosine_correlation(feat_a, feat_b, out);
  else if (mode == "dot")
    dot_correlation(feat_a, feat_b, out);
  else
    throw DataError("pointwise_correlation: unknown mode " + mode);
  return out;
}

LevelFusion::LevelFusion(std::string name, int img_c, int lbl_c, int reduce_to_,
                         std::string corr_mode_)
    : proj(name + ".proj", 2 * img_c + lbl_c, reduce_to_, 1, 1, 0),
      corr_mode(std::move(corr_mode_)),
      reduce_to(reduce_to_) {}

Tensor LevelFusion::forward(const Tensor& real_f, const Tensor& resynth_f,
                            const Tensor& label_f) const {
  require(real_f.same_shape(resynth_f), "fuse_level: image stream shapes differ");
  require(label_f.h == real_f.h && label_f.w == real_f.w,
          "fuse_level: label stream resolution mismatch");
  const Tensor cat = concat_channels(concat_channels(real_f, resynth_f), label_f);
  const Tensor reduced = proj.forward(cat);
  const Tensor corr = pointwise_correlation(real_f, resynth_f, corr_mode);
  return concat_channels(reduced, corr);
}

void LevelFusion::backward(const Tensor& real_f, const Tensor& resynth_f,
                           const Tensor& label_f, const Tensor& grad_out,
                           Tensor& g_real, Tensor& g_resynth, Tensor& g_label,
                           bool accumulate, bool need_image_grads) {
  Tensor g_reduced, g_corr;
  split_channels(grad_out, reduce_to, g_reduced, g_corr);

  const Tensor cat = concat_channels(concat_channels(real_f, resynth_f), label_f);
  const Tensor g_cat = proj.backward(cat, g_reduced, accumulate);
  Tensor g_imgpair;
  split_channels(g_cat, 2 * real_f.c, g_imgpair, g_label);
  split_channels(g_imgpair, real_f.c, g_real, g_resynth);

  if (need_image_grads) {
    Tensor ga, gb;
    corr_backward(real_f, resynth_f, g_corr, corr_mode, ga, gb);
    add_into(g_real, ga);
    add_into(g_resynth, gb);
  }
}

std::vector<double> class_weights(const std::vector<double>& pixel_fraction_per_class,
                                  double c) {
  require(!pixel_fraction_per_class.empty(), "class_weights: empty fractions");
  double sum = 0.0;
  for (double p : pixel_fraction_per_class) {
    require(p >= 0.0 && p <= 1.0, "class_weights: fraction outside [0,1]");
    sum += p;
  }
  require(std::abs(sum - 1.0) < 1e-6, "class_weights: fractions must sum to 1");
  std::vector<double> w;
  w.reserve(pixel_fraction_per_class.size());
  for (double p : pixel_fraction_per_class) {
    if (c + p <= 1.0)
      throw DataError("class_weights: c + p <= 1 gives a non-positive log");
    w.push_back(1.0 / std::log(c + p));
  }
  return w;
}

struct DiscrepancyNet::Cache {
  Tensor img_in, syn_in, onehot_in;
  std::vector<Tensor> real_pre, real_post;
  std::vector<Tensor> syn_pre, syn_post;
  std::vector<Tensor> lbl_pre, lbl_post;
  std::vector<Tensor> fused;
  Tensor dtop_pre;
  std::vector<Tensor> xs;       // decoder activations, xs[0] after dtop
  std::vector<Tensor> up_pre;   // pre-SELU upconv outputs
  std::vector<Tensor> cat;      // skip concatenations
  std::vector<Tensor> mix_pre;  // pre-SELU mix conv outputs
};

DiscrepancyNet::DiscrepancyNet(DiscrepancyConfig cfg)
    : cfg_(std::move(cfg)),
      dtop_("dtop", 1, 1, 3, 1, 1),  // placeholder, rebuilt below
      head_("head", 1, 1, 1, 1, 0) {
  cfg_.validate();
  const int L = cfg_.pyramid_levels;
  const auto& ic = cfg_.image_stream_channels;
  const auto& lc = cfg_.label_stream_channels;
  const auto& rc = cfg_.reduce_channels;
  const auto& uc = cfg_.upconv_channels;

  for (int l = 0; l < L; ++l) {
    const int in_c = l == 0 ? 3 : ic[static_cast<size_t>(l - 1)];
    ext_convs_.emplace_back("ext" + std::to_string(l), in_c, ic[static_cast<size_t>(l)], 3,
                            l == 0 ? 1 : 2, 1);
    const int lbl_in = l == 0 ? cfg_.num_label_classes : lc[static_cast<size_t>(l - 1)];
    lbl_convs_.emplace_back("lbl" + std::to_string(l), lbl_in, lc[static_cast<size_t>(l)], 3,
                            l == 0 ? 1 : 2, 1);
    fusions_.emplace_back("fuse" + std::to_string(l), ic[static_cast<size_t>(l)],
                          lc[static_cast<size_t>(l)], rc[static_cast<size_t>(l)],
                          cfg_.correlation);
  }
  dtop_ = nn::Conv2d("dtop", rc[static_cast<size_t>(L - 1)] + 1,
                     uc[static_cast<size_t>(L - 1)], 3, 1, 1);
  for (int l = L - 1; l >= 1; --l) {
    ups_.emplace_back("up" + std::to_string(l), uc[static_cast<size_t>(l)],
                      uc[static_cast<size_t>(l - 1)]);
    mixes_.emplace_back("mix" + std::to_string(l - 1),
                        uc[static_cast<size_t>(l - 1)] + rc[static_cast<size_t>(l - 1)] + 1,
                        uc[static_cast<size_t>(l - 1)], 3, 1, 1);
  }
  head_ = nn::Conv2d("head", uc[0], cfg_.num_output_classes, 1, 1, 0);

  DetRng rng(cfg_.init_seed);
  for (auto& conv : ext_convs_) conv.init_he(rng);
  for (auto& conv : lbl_convs_) conv.init_he(rng);
  for (auto& f : fusions_) f.proj.init_he(rng);
  dtop_.init_he(rng);
  for (auto& u : ups_) u.init_he(rng);
  for (auto& m : mixes_) m.init_he(rng);
  head_.init_he(rng);

  if (cfg_.freeze_image_streams)
    for (auto& conv : ext_convs_) {
      conv.weight.trainable = false;
      conv.bias.trainable = false;
    }
}

std::vector<nn::Param*> DiscrepancyNet::parameters() {
  std::vector<nn::Param*> out;
  auto add = [&out](nn::Conv2d& c) {
    out.push_back(&c.weight);
    out.push_back(&c.bias);
  };
  for (auto& c : ext_convs_) add(c);
  for (auto& c : lbl_convs_) add(c);
  for (auto& f : fusions_) add(f.proj);
  add(dtop_);
  for (auto& u : ups_) {
    out.push_back(&u.weight);
    out.push_back(&u.bias);
  }
  for (auto& m : mixes_) add(m);
  add(head_);
  return out;
}

std::vector<nn::Param*> DiscrepancyNet::trainable_parameters() {
  std::vector<nn::Param*> out;
  for (nn::Param* p : parameters())
    if (p->trainable) out.push_back(p);
  return out;
}

void DiscrepancyNet::extract_pyramid(const std::vector<nn::Conv2d>& convs,
                                     const Tensor& input, std::vector<Tensor>& pre,
                                     std::vector<Tensor>& post) const {
  pre.clear();
  post.clear();
  const Tensor* cur = &input;
  for (const auto& conv : convs) {
    pre.push_back(conv.forward(*cur));
    post.push_back(nn::relu(pre.back()));
    cur = &post.back();
  }
}

Tensor DiscrepancyNet::forward_logits(const Tensor& image, const Tensor& resynth,
                                      const Tensor& onehot, Cache* cache) const {
  require(image.h == resynth.h && image.w == resynth.w,
          "discrepancy forward: image/resynth dims differ");
  require(onehot.h == image.h && onehot.w == image.w,
          "discrepancy forward: label map dims differ");
  require(onehot.c == cfg_.num_label_classes,
          "discrepancy forward: one-hot channel count mismatch");
  const int L = cfg_.pyramid_levels;

  Cache local;
  Cache& cc = cache ? *cache : local;
  cc.img_in = image;
  cc.syn_in = resynth;
  cc.onehot_in = onehot;
  extract_pyramid(ext_convs_, cc.img_in, cc.real_pre, cc.real_post);
  extract_pyramid(ext_convs_, cc.syn_in, cc.syn_pre, cc.syn_post);
  extract_pyramid(lbl_convs_, cc.onehot_in, cc.lbl_pre, cc.lbl_post);

  cc.fused.clear();
  for (int l = 0; l < L; ++l)
    cc.fused.push_back(fusions_[static_cast<size_t>(l)].forward(
        cc.real_post[static_cast<size_t>(l)], cc.syn_post[static_cast<size_t>(l)],
        cc.lbl_post[static_cast<size_t>(l)]));

  cc.dtop_pre = dtop_.forward(cc.fused[static_cast<size_t>(L - 1)]);
  cc.xs.clear();
  cc.up_pre.clear();
  cc.cat.clear();
  cc.mix_pre.clear();
  cc.xs.push_back(nn::selu(cc.dtop_pre));

  for (size_t i = 0; i < ups_.size(); ++i) {
    const int l = L - 1 - static_cast<int>(i);
    const Tensor& skip = cc.fused[static_cast<size_t>(l - 1)];
    cc.up_pre.push_back(ups_[i].forward(cc.xs.back()));
    Tensor up_act = nn::selu(cc.up_pre.back());
    Tensor cropped = crop_top_left(up_act, skip.h, skip.w);
    cc.cat.push_back(concat_channels(cropped, skip));
    cc.mix_pre.push_back(mixes_[i].forward(cc.cat.back()));
    cc.xs.push_back(nn::selu(cc.mix_pre.back()));
  }
  return head_.forward(cc.xs.back());
}

void DiscrepancyNet::backward(const Cache& cc, const Tensor& dlogits) {
  const int L = cfg_.pyramid_levels;
  const bool image_grads = !cfg_.freeze_image_streams;

  std::vector<Tensor> fused_g(static_cast<size_t>(L));
  Tensor g = head_.backward(cc.xs.back(), dlogits);

  for (int i = static_cast<int>(ups_.size()) - 1; i >= 0; --i) {
    const size_t ui = static_cast<size_t>(i);
    const int l = L - 1 - i;
    g = nn::selu_backward(cc.mix_pre[ui], g);
    Tensor g_cat = mixes_[ui].backward(cc.cat[ui], g);
    Tensor g_upcrop, g_skip;
    split_channels(g_cat, cc.cat[ui].c - cc.fused[static_cast<size_t>(l - 1)].c,
                   g_upcrop, g_skip);
    fused_g[static_cast<size_t>(l - 1)] = std::move(g_skip);
    Tensor g_upact = pad_to(g_upcrop, cc.up_pre[ui].h, cc.up_pre[ui].w);
    Tensor g_uppre = nn::selu_backward(cc.up_pre[ui], g_upact);
    g = ups_[ui].backward(cc.xs[ui], g_uppre);
  }
  g = nn::selu_backward(cc.dtop_pre, g);
  fused_g[static_cast<size_t>(L - 1)] =
      dtop_.backward(cc.fused[static_cast<size_t>(L - 1)], g);

  std::vector<Tensor> g_real(static_cast<size_t>(L)), g_syn(static_cast<size_t>(L)),
      g_lbl(static_cast<size_t>(L));
  for (int l = 0; l < L; ++l)
    fusions_[static_cast<size_t>(l)].backward(
        cc.real_post[static_cast<size_t>(l)], cc.syn_post[static_cast<size_t>(l)],
        cc.lbl_post[static_cast<size_t>(l)], fused_g[static_cast<size_t>(l)],
        g_real[static_cast<size_t>(l)], g_syn[static_cast<size_t>(l)],
        g_lbl[static_cast<size_t>(l)], true, image_grads);

  // Label stream: chain gradients from deep levels to the input.
  Tensor acc = g_lbl[static_cast<size_t>(L - 1)];
  for (int l = L - 1; l >= 0; --l) {
    Tensor g_pre = nn::relu_backward(cc.lbl_pre[static_cast<size_t>(l)], acc);
    const Tensor& layer_in = l == 0 ? cc.onehot_in : cc.lbl_post[static_cast<size_t>(l - 1)];
    Tensor down = lbl_convs_[static_cast<size_t>(l)].backward(layer_in, g_pre);
    if (l == 0) break;
    acc = g_lbl[static_cast<size_t>(l - 1)];
    add_into(acc, down);
  }

  if (image_grads) {
    auto run_stream = [&](const std::vector<Tensor>& pre, const std::vector<Tensor>& post,
                          const Tensor& input, std::vector<Tensor>& gs) {
      Tensor sacc = gs[static_cast<size_t>(L - 1)];
      for (int l = L - 1; l >= 0; --l) {
        Tensor g_pre = nn::relu_backward(pre[static_cast<size_t>(l)], sacc);
        const Tensor& layer_in = l == 0 ? input : post[static_cast<size_t>(l - 1)];
        Tensor down = ext_convs_[static_cast<size_t>(l)].backward(layer_in, g_pre);
        if (l == 0) break;
        sacc = gs[static_cast<size_t>(l - 1)];
        add_into(sacc, down);
      }
    };
    run_stream(cc.real_pre, cc.real_post, cc.img_in, g_real);
    run_stream(cc.syn_pre, cc.syn_post, cc.syn_in, g_syn);
  }
}

ScoreMap DiscrepancyNet::forward(const ImageRGB& image, const ImageRGB& resynth,
                                 const Tensor& sem_onehot) const {
  const Tensor logits =
      forward_logits(image.as_tensor(), resynth.as_tensor(), sem_onehot, nullptr);
  if (!logits.all_finite())
    throw DataError("discrepancy forward: non-finite activations");
  const Tensor probs = nn::softmax_channels(logits);
  ScoreMap score(image.h, image.w);
  for (int y = 0; y < image.h; ++y)
    for (int x = 0; x < image.w; ++x) score.at(y, x) = probs.at(y, x, 1);
  return score;
}

double DiscrepancyNet::pair_loss(const ImageRGB& image, const ImageRGB& resynth,
                                 const Tensor& sem_onehot, const AnomalyMask& target,
                                 const std::vector<double>& weights,
                                 bool with_gradients, double grad_scale) {
  Cache cache;
  const Tensor logits =
      forward_logits(image.as_tensor(), resynth.as_tensor(), sem_onehot, &cache);
  if (!logits.all_finite())
    throw DataError("discrepancy training: non-finite activations");
  std::vector<int32_t> targets(target.values.begin(), target.values.end());
  auto ce = nn::softmax_cross_entropy(logits, targets, kIgnore, weights);
  if (with_gradients) {
    Tensor dl = ce.dlogits;
    if (grad_scale != 1.0)
      for (double& v : dl.data) v *= grad_scale;
    backward(cache, dl);
  }
  return ce.mean_loss;
}

std::vector<double> DiscrepancyNet::train(const std::vector<TrainingPair>& pairs,
                                          const LabelSpec& spec,
                                          const TrainConfig& cfg) {
  require(!pairs.empty(), "discrepancy train: no training pairs");
  require(cfg.epochs >= 1, "discrepancy train: epochs must be >= 1");
  require(cfg.learning_rate > 0.0, "discrepancy train: learning rate must be > 0");

  // Pixel statistics over the full pair set drive the class weighting.
  int64_t n_bg = 0, n_disc = 0;
  for (const auto& p : pairs)
    for (uint8_t v : p.target.values) {
      if (v == kNormal) ++n_bg;
      else if (v == kAnomaly) ++n_disc;
    }
  if (n_bg + n_disc == 0) throw DataError("discrepancy train: all targets are IGNORE");
  require(n_disc > 0, "discrepancy train: no discrepancy pixels in targets");
  require(n_bg > 0, "discrepancy train: no background pixels in targets");
  const double total = static_cast<double>(n_bg + n_disc);
  const std::vector<double> weights =
      class_weights({n_bg / total, n_disc / total}, cfg.weight_c);

  std::vector<Tensor> onehots;
  onehots.reserve(pairs.size());
  for (const auto& p : pairs) onehots.push_back(one_hot(p.altered_sem, spec));

  nn::Adam adam(cfg.learning_rate);
  std::vector<nn::Param*> trainable = trainable_parameters();
  DetRng rng(cfg.seed);
  std::vector<size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<double> epoch_losses;
  const int batch = std::max(1, cfg.batch_size);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    size_t done = 0;
    while (done < order.size()) {
      const size_t take = std::min(static_cast<size_t>(batch), order.size() - done);
      for (nn::Param* p : trainable) p->zero_grad();
      const double scale = 1.0 / static_cast<double>(take);
      for (size_t b = 0; b < take; ++b) {
        const auto& pr = pairs[order[done + b]];
        loss_sum += pair_loss(pr.image, pr.resynth, onehots[order[done + b]],
                              pr.target, weights, true, scale);
      }
      adam.step(trainable);
      done += take;
    }
    epoch_losses.push_back(loss_sum / static_cast<double>(order.size()));
  }
  return epoch_losses;
}

void DiscrepancyNet::save_checkpoint(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  std::ofstream arch(std::filesystem::path(dir) / "arch.json");
  if (!arch) throw DataError("save_checkpoint: cannot write arch.json in " + dir);
  arch << cfg_.to_json() << "\n";
  std::vector<const nn::Param*> params;
  for (nn::Param* p : const_cast<DiscrepancyNet*>(this)->parameters()) params.push_back(p);
  nn::save_weight_blob((std::filesystem::path(dir) / "weights.bin").string(), params);
}

std::unique_ptr<DiscrepancyNet> DiscrepancyNet::load_checkpoint(const std::string& dir) {
  std::ifstream arch(std::filesystem::path(dir) / "arch.json");
  if (!arch) throw DataError("load_checkpoint: missing arch.json in " + dir);
  std::string text((std::istreambuf_iterator<char>(arch)), std::istreambuf_iterator<char>());
  auto net = std::make_unique<DiscrepancyNet>(DiscrepancyConfig::from_json(text));
  nn::load_weight_blob((std::filesystem::path(dir) / "weights.bin").string(),
                       net->parameters());
  return net;
}

}  // namespace resyn
