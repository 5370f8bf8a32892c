#include "resyn/synthesis.hpp"

#include <algorithm>
#include <map>

namespace resyn {

SwapResult swap_instance_labels(const SemanticMap& sem, const InstanceMap& inst,
                                const LabelSpec& spec, double swap_prob,
                                DetRng& rng) {
  require(swap_prob > 0.0 && swap_prob <= 1.0, "swap: swap_prob must be in (0, 1]");
  if (spec.num_classes() < 2)
    throw DataError("swap: need at least 2 known classes");
  sem.validate(spec);
  validate_instances(sem, inst);

  struct InstanceInfo {
    int32_t label = 0;
    std::vector<size_t> pixels;
  };
  std::map<int32_t, InstanceInfo> instances;  // ordered by id for stable rng use
  for (size_t i = 0; i < inst.ids.size(); ++i) {
    const int32_t id = inst.ids[i];
    if (id == 0) continue;
    auto& info = instances[id];
    info.label = sem.labels[i];
    info.pixels.push_back(i);
  }

  SwapResult res;
  res.sem = sem;
  res.mask = AnomalyMask(sem.h, sem.w, kNormal);
  for (const auto& [id, info] : instances) {
    require(spec.is_known(info.label),
            "swap: instance " + std::to_string(id) + " carries a non-known label");
    if (!spec.class_by_id(info.label).is_foreground) continue;
    if (!rng.bernoulli(swap_prob)) continue;
    // Uniform over known classes minus the original.
    int64_t pick = rng.uniform_int(0, spec.num_classes() - 2);
    const int32_t new_class =
        static_cast<int32_t>(pick >= info.label ? pick + 1 : pick);
    for (size_t px : info.pixels) {
      res.sem.labels[px] = new_class;
      res.mask.values[px] = kAnomaly;
    }
    res.swaps.push_back(
        {id, info.label, new_class, static_cast<int64_t>(info.pixels.size())});
  }
  return res;
}

TrainingPair build_training_pair(const Sample& sample, const GeneratorBackend& gen,
                                 const LabelSpec& spec, double swap_prob,
                                 DetRng& rng) {
  if (!sample.semantic || !sample.instances)
    throw DataError("build_training_pair: sample '" + sample.id +
                    "' lacks semantic or instance maps");
  sample.validate();
  SwapResult swap = swap_instance_labels(*sample.semantic, *sample.instances, spec,
                                         swap_prob, rng);
  TrainingPair pair;
  pair.id = sample.id;
  pair.image = sample.image;
  pair.resynth = gen.generate(swap.sem);
  require(pair.resynth.h == sample.image.h && pair.resynth.w == sample.image.w,
          "build_training_pair: generator changed dims");
  pair.altered_sem = std::move(swap.sem);
  pair.target = std::move(swap.mask);
  // Void pixels carry no discrepancy supervision.
  for (size_t i = 0; i < pair.target.values.size(); ++i)
    if (pair.altered_sem.labels[i] == spec.void_id) pair.target.values[i] = kIgnore;
  pair.swaps = std::move(swap.swaps);
  return pair;
}

ToyGenerator::ToyGenerator(LabelSpec spec, uint64_t style_seed, double texture_amplitude)
    : spec_(std::move(spec)), style_seed_(style_seed), amplitude_(texture_amplitude) {
  spec_.validate();
  require(texture_amplitude >= 0.0 && texture_amplitude < 0.5,
          "ToyGenerator: amplitude out of range");
}

double ToyGenerator::texture_value(int x, int y, uint64_t seed) {
  const uint64_t key = seed ^ (static_cast<uint64_t>(static_cast<uint32_t>(x)) * 0x9E3779B97F4A7C15ull) ^
                       (static_cast<uint64_t>(static_cast<uint32_t>(y)) * 0xC2B2AE3D27D4EB4Full);
  const double u = static_cast<double>(splitmix64(key) >> 11) * 0x1.0p-53;
  return 2.0 * u - 1.0;
}

std::array<double, 3> ToyGenerator::render_pixel(const std::array<uint8_t, 3>& color,
                                                 int x, int y, uint64_t seed,
                                                 double amplitude) {
  const double t = texture_value(x, y, seed) * amplitude;
  std::array<double, 3> out{};
  for (int c = 0; c < 3; ++c)
    out[static_cast<size_t>(c)] = std::clamp(color[static_cast<size_t>(c)] / 255.0 + t, 0.0, 1.0);
  return out;
}

ImageRGB ToyGenerator::generate(const SemanticMap& sem) const {
  sem.validate(spec_);
  ImageRGB img(sem.h, sem.w);
  for (int y = 0; y < sem.h; ++y)
    for (int x = 0; x < sem.w; ++x) {
      const int32_t label = sem.at(y, x);
      if (label == spec_.void_id) continue;  // void renders black
      const auto px = render_pixel(spec_.class_by_id(label).color, x, y, style_seed_,
                                   amplitude_);
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = px[static_cast<size_t>(c)];
    }
  return img;
}

std::unique_ptr<GeneratorBackend> toy_generator(const LabelSpec& spec,
                                                uint64_t style_seed,
                                                double texture_amplitude) {
  return std::make_unique<ToyGenerator>(spec, style_seed, texture_amplitude);
}

}  // namespace resyn
