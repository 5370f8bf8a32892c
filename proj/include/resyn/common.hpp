#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace resyn {

// Error categories, mapped to CLI exit codes (config=2, data=3, capability=4).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};
struct CapabilityError : std::runtime_error {
  explicit CapabilityError(const std::string& msg) : std::runtime_error(msg) {}
};

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Stable derivation of per-worker / per-sample seeds from a run seed.
inline uint64_t derive_seed(uint64_t base, uint64_t stream) {
  return splitmix64(base ^ splitmix64(stream + 1));
}

// Deterministic random source. All distributions are implemented here rather
// than with std::*_distribution, so that identical seeds give identical
// streams on every platform and standard library.
class DetRng {
 public:
  explicit DetRng(uint64_t seed) : state_(splitmix64(seed ^ 0xA5A5A5A5DEADBEEFull)) {}

  uint64_t next_u64() {
    state_ = splitmix64(state_);
    return state_;
  }

  // [0, 1)
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Inclusive range, rejection-sampled for exact uniformity.
  int64_t uniform_int(int64_t lo, int64_t hi) {
    if (lo > hi) throw DataError("uniform_int: empty range");
    uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<int64_t>(next_u64());  // full 64-bit range
    uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return lo + static_cast<int64_t>(v % span);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  double normal(double mean = 0.0, double stddev = 1.0) {
    // Box-Muller, cosine branch only; u1 shifted away from zero.
    double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = uniform01();
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    return mean + stddev * z;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(0, static_cast<int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  uint64_t state_;
};

// FNV-1a over a byte string; used for config hashes in manifests.
inline uint64_t fnv1a64(const std::string& bytes) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string to_hex(uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return out;
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw DataError(msg);
}

}  // namespace resyn
