#pragma once

#include <cstdint>
#include <vector>

#include "resyn/common.hpp"

namespace resyn {

// Dense H x W x C tensor, row-major with interleaved channels.
// Index (y, x, c) -> (y * w + x) * c_count + c.
struct Tensor {
  int h = 0;
  int w = 0;
  int c = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int h_, int w_, int c_, double fill = 0.0)
      : h(h_), w(w_), c(c_), data(static_cast<size_t>(h_) * w_ * c_, fill) {
    require(h_ >= 1 && w_ >= 1 && c_ >= 1, "Tensor: dims must be >= 1");
  }

  size_t size() const { return data.size(); }

  double& at(int y, int x, int ch) {
    return data[(static_cast<size_t>(y) * w + x) * c + ch];
  }
  double at(int y, int x, int ch) const {
    return data[(static_cast<size_t>(y) * w + x) * c + ch];
  }

  bool same_shape(const Tensor& o) const { return h == o.h && w == o.w && c == o.c; }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

inline Tensor concat_channels(const Tensor& a, const Tensor& b) {
  require(a.h == b.h && a.w == b.w, "concat_channels: spatial dims differ");
  Tensor out(a.h, a.w, a.c + b.c);
  for (int y = 0; y < a.h; ++y)
    for (int x = 0; x < a.w; ++x) {
      for (int ch = 0; ch < a.c; ++ch) out.at(y, x, ch) = a.at(y, x, ch);
      for (int ch = 0; ch < b.c; ++ch) out.at(y, x, a.c + ch) = b.at(y, x, ch);
    }
  return out;
}

// Inverse of concat_channels for gradients.
inline void split_channels(const Tensor& g, int c_first, Tensor& ga, Tensor& gb) {
  ga = Tensor(g.h, g.w, c_first);
  gb = Tensor(g.h, g.w, g.c - c_first);
  for (int y = 0; y < g.h; ++y)
    for (int x = 0; x < g.w; ++x) {
      for (int ch = 0; ch < c_first; ++ch) ga.at(y, x, ch) = g.at(y, x, ch);
      for (int ch = c_first; ch < g.c; ++ch) gb.at(y, x, ch - c_first) = g.at(y, x, ch);
    }
}

}  // namespace resyn
