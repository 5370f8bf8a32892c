#include "resyn/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace resyn::kernels {

namespace {

inline void check_conv_args(const Tensor& in, const std::vector<double>& w,
                            const std::vector<double>& b, int out_c, int k,
                            int stride, int pad) {
  require(k >= 1 && stride >= 1 && pad >= 0, "conv2d: bad geometry");
  require(static_cast<int>(w.size()) == out_c * k * k * in.c,
          "conv2d: weight size mismatch");
  require(static_cast<int>(b.size()) == out_c, "conv2d: bias size mismatch");
}

// One output pixel of a convolution; fixed summation order (ky, kx, ic).
inline double conv_pixel(const Tensor& in, const double* w_oc, int k, int stride,
                         int pad, int yo, int xo) {
  double acc = 0.0;
  const int in_c = in.c;
  for (int ky = 0; ky < k; ++ky) {
    const int yi = yo * stride - pad + ky;
    if (yi < 0 || yi >= in.h) continue;
    for (int kx = 0; kx < k; ++kx) {
      const int xi = xo * stride - pad + kx;
      if (xi < 0 || xi >= in.w) continue;
      const double* src = &in.data[(static_cast<size_t>(yi) * in.w + xi) * in_c];
      const double* wk = w_oc + (ky * k + kx) * in_c;
      for (int ic = 0; ic < in_c; ++ic) acc += src[ic] * wk[ic];
    }
  }
  return acc;
}

inline double conv_input_grad_pixel(const Tensor& grad_out,
                                    const std::vector<double>& w, int in_c, int k,
                                    int stride, int pad, int yi, int xi, int ic) {
  double acc = 0.0;
  const int out_c = grad_out.c;
  for (int ky = 0; ky < k; ++ky) {
    const int ynum = yi + pad - ky;
    if (ynum < 0 || ynum % stride != 0) continue;
    const int yo = ynum / stride;
    if (yo >= grad_out.h) continue;
    for (int kx = 0; kx < k; ++kx) {
      const int xnum = xi + pad - kx;
      if (xnum < 0 || xnum % stride != 0) continue;
      const int xo = xnum / stride;
      if (xo >= grad_out.w) continue;
      const double* g = &grad_out.data[(static_cast<size_t>(yo) * grad_out.w + xo) * out_c];
      for (int oc = 0; oc < out_c; ++oc)
        acc += g[oc] * w[((static_cast<size_t>(oc) * k + ky) * k + kx) * in_c + ic];
    }
  }
  return acc;
}

// Accumulates weight/bias gradients for one output channel.
inline void conv_param_grad_channel(const Tensor& in, const Tensor& grad_out,
                                    int k, int stride, int pad, int oc,
                                    double* grad_w_oc, double& grad_b_oc) {
  const int in_c = in.c;
  double bacc = grad_b_oc;
  for (int yo = 0; yo < grad_out.h; ++yo)
    for (int xo = 0; xo < grad_out.w; ++xo) {
      const double g = grad_out.at(yo, xo, oc);
      bacc += g;
      if (g == 0.0) continue;
      for (int ky = 0; ky < k; ++ky) {
        const int yi = yo * stride - pad + ky;
        if (yi < 0 || yi >= in.h) continue;
        for (int kx = 0; kx < k; ++kx) {
          const int xi = xo * stride - pad + kx;
          if (xi < 0 || xi >= in.w) continue;
          const double* src = &in.data[(static_cast<size_t>(yi) * in.w + xi) * in_c];
          double* dst = grad_w_oc + (ky * k + kx) * in_c;
          for (int ic = 0; ic < in_c; ++ic) dst[ic] += g * src[ic];
        }
      }
    }
  grad_b_oc = bacc;
}

inline double cosine_at(const Tensor& a, const Tensor& b, int y, int x) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (int ch = 0; ch < a.c; ++ch) {
    const double av = a.at(y, x, ch);
    const double bv = b.at(y, x, ch);
    dot += av * bv;
    na += av * av;
    nb += bv * bv;
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline void cosine_grad_at(const Tensor& a, const Tensor& b, double g, int y,
                           int x, Tensor& ga, Tensor& gb) {
  double dot = 0.0, na2 = 0.0, nb2 = 0.0;
  for (int ch = 0; ch < a.c; ++ch) {
    const double av = a.at(y, x, ch);
    const double bv = b.at(y, x, ch);
    dot += av * bv;
    na2 += av * av;
    nb2 += bv * bv;
  }
  if (na2 == 0.0 || nb2 == 0.0) {
    for (int ch = 0; ch < a.c; ++ch) {
      ga.at(y, x, ch) = 0.0;
      gb.at(y, x, ch) = 0.0;
    }
    return;
  }
  const double na = std::sqrt(na2), nb = std::sqrt(nb2);
  const double c = dot / (na * nb);
  for (int ch = 0; ch < a.c; ++ch) {
    const double av = a.at(y, x, ch);
    const double bv = b.at(y, x, ch);
    ga.at(y, x, ch) = g * (bv / (na * nb) - c * av / na2);
    gb.at(y, x, ch) = g * (av / (na * nb) - c * bv / nb2);
  }
}

inline double bilinear_sample(const Tensor& in, double sy, double sx, int ch) {
  const int y0 = std::clamp(static_cast<int>(std::floor(sy)), 0, in.h - 1);
  const int x0 = std::clamp(static_cast<int>(std::floor(sx)), 0, in.w - 1);
  const int y1 = std::min(y0 + 1, in.h - 1);
  const int x1 = std::min(x0 + 1, in.w - 1);
  const double fy = std::clamp(sy - y0, 0.0, 1.0);
  const double fx = std::clamp(sx - x0, 0.0, 1.0);
  const double top = in.at(y0, x0, ch) * (1.0 - fx) + in.at(y0, x1, ch) * fx;
  const double bot = in.at(y1, x0, ch) * (1.0 - fx) + in.at(y1, x1, ch) * fx;
  return top * (1.0 - fy) + bot * fy;
}

template <typename T>
std::vector<T> resize_nearest_impl(const std::vector<T>& in, int in_h, int in_w,
                                   int out_h, int out_w) {
  require(in_h >= 1 && in_w >= 1 && out_h >= 1 && out_w >= 1,
          "resize_nearest: dims must be >= 1");
  require(static_cast<size_t>(in_h) * in_w == in.size(),
          "resize_nearest: size mismatch");
  std::vector<T> out(static_cast<size_t>(out_h) * out_w);
  const double sy = static_cast<double>(in_h) / out_h;
  const double sx = static_cast<double>(in_w) / out_w;
  for (int y = 0; y < out_h; ++y) {
    const int yi = std::min(in_h - 1, static_cast<int>((y + 0.5) * sy));
    for (int x = 0; x < out_w; ++x) {
      const int xi = std::min(in_w - 1, static_cast<int>((x + 0.5) * sx));
      out[static_cast<size_t>(y) * out_w + x] = in[static_cast<size_t>(yi) * in_w + xi];
    }
  }
  return out;
}

}  // namespace

void conv2d_forward(const Tensor& in, const std::vector<double>& w,
                    const std::vector<double>& b, int out_c, int k, int stride,
                    int pad, Tensor& out) {
  check_conv_args(in, w, b, out_c, k, stride, pad);
  const int oh = conv_out_dim(in.h, k, stride, pad);
  const int ow = conv_out_dim(in.w, k, stride, pad);
  require(oh >= 1 && ow >= 1, "conv2d: output would be empty");
  out = Tensor(oh, ow, out_c);
#pragma omp parallel for schedule(static)
  for (int yo = 0; yo < oh; ++yo)
    for (int xo = 0; xo < ow; ++xo)
      for (int oc = 0; oc < out_c; ++oc)
        out.at(yo, xo, oc) =
            b[oc] + conv_pixel(in, &w[static_cast<size_t>(oc) * k * k * in.c], k,
                               stride, pad, yo, xo);
}

void conv2d_backward_input(const Tensor& grad_out, const std::vector<double>& w,
                           int in_c, int in_h, int in_w, int k, int stride,
                           int pad, Tensor& grad_in) {
  grad_in = Tensor(in_h, in_w, in_c);
#pragma omp parallel for schedule(static)
  for (int yi = 0; yi < in_h; ++yi)
    for (int xi = 0; xi < in_w; ++xi)
      for (int ic = 0; ic < in_c; ++ic)
        grad_in.at(yi, xi, ic) =
            conv_input_grad_pixel(grad_out, w, in_c, k, stride, pad, yi, xi, ic);
}

void conv2d_backward_params(const Tensor& in, const Tensor& grad_out, int k,
                            int stride, int pad, std::vector<double>& grad_w,
                            std::vector<double>& grad_b) {
  const int out_c = grad_out.c;
  require(static_cast<int>(grad_w.size()) == out_c * k * k * in.c &&
              static_cast<int>(grad_b.size()) == out_c,
          "conv2d_backward_params: grad buffer size mismatch");
#pragma omp parallel for schedule(static)
  for (int oc = 0; oc < out_c; ++oc)
    conv_param_grad_channel(in, grad_out, k, stride, pad, oc,
                            &grad_w[static_cast<size_t>(oc) * k * k * in.c],
                            grad_b[oc]);
}

void upconv2x_forward(const Tensor& in, const std::vector<double>& w,
                      const std::vector<double>& b, int out_c, Tensor& out) {
  require(static_cast<int>(w.size()) == out_c * 4 * in.c,
          "upconv2x: weight size mismatch");
  out = Tensor(in.h * 2, in.w * 2, out_c);
#pragma omp parallel for schedule(static)
  for (int yo = 0; yo < out.h; ++yo)
    for (int xo = 0; xo < out.w; ++xo) {
      const int yi = yo >> 1, xi = xo >> 1;
      const int dy = yo & 1, dx = xo & 1;
      const double* src = &in.data[(static_cast<size_t>(yi) * in.w + xi) * in.c];
      for (int oc = 0; oc < out_c; ++oc) {
        const double* wk = &w[((static_cast<size_t>(oc) * 2 + dy) * 2 + dx) * in.c];
        double acc = b[oc];
        for (int ic = 0; ic < in.c; ++ic) acc += src[ic] * wk[ic];
        out.at(yo, xo, oc) = acc;
      }
    }
}

void upconv2x_backward_input(const Tensor& grad_out, const std::vector<double>& w,
                             int in_c, Tensor& grad_in) {
  require(grad_out.h % 2 == 0 && grad_out.w % 2 == 0,
          "upconv2x_backward_input: output dims must be even");
  const int ih = grad_out.h / 2, iw = grad_out.w / 2;
  const int out_c = grad_out.c;
  grad_in = Tensor(ih, iw, in_c);
#pragma omp parallel for schedule(static)
  for (int yi = 0; yi < ih; ++yi)
    for (int xi = 0; xi < iw; ++xi)
      for (int ic = 0; ic < in_c; ++ic) {
        double acc = 0.0;
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) {
            const double* g =
                &grad_out.data[(static_cast<size_t>(yi * 2 + dy) * grad_out.w +
                                (xi * 2 + dx)) * out_c];
            for (int oc = 0; oc < out_c; ++oc)
              acc += g[oc] * w[((static_cast<size_t>(oc) * 2 + dy) * 2 + dx) * in_c + ic];
          }
        grad_in.at(yi, xi, ic) = acc;
      }
}

void upconv2x_backward_params(const Tensor& in, const Tensor& grad_out,
                              std::vector<double>& grad_w,
                              std::vector<double>& grad_b) {
  const int out_c = grad_out.c;
  require(static_cast<int>(grad_w.size()) == out_c * 4 * in.c &&
              static_cast<int>(grad_b.size()) == out_c,
          "upconv2x_backward_params: grad buffer size mismatch");
#pragma omp parallel for schedule(static)
  for (int oc = 0; oc < out_c; ++oc) {
    double bacc = grad_b[oc];
    for (int yi = 0; yi < in.h; ++yi)
      for (int xi = 0; xi < in.w; ++xi) {
        const double* src = &in.data[(static_cast<size_t>(yi) * in.w + xi) * in.c];
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) {
            const double g = grad_out.at(yi * 2 + dy, xi * 2 + dx, oc);
            bacc += g;
            if (g == 0.0) continue;
            double* dst = &grad_w[((static_cast<size_t>(oc) * 2 + dy) * 2 + dx) * in.c];
            for (int ic = 0; ic < in.c; ++ic) dst[ic] += g * src[ic];
          }
      }
    grad_b[oc] = bacc;
  }
}

void cosine_correlation(const Tensor& a, const Tensor& b, Tensor& out) {
  require(a.same_shape(b), "cosine_correlation: shape mismatch");
  out = Tensor(a.h, a.w, 1);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < a.h; ++y)
    for (int x = 0; x < a.w; ++x) out.at(y, x, 0) = cosine_at(a, b, y, x);
}

void cosine_correlation_backward(const Tensor& a, const Tensor& b,
                                 const Tensor& grad_out, Tensor& grad_a,
                                 Tensor& grad_b) {
  require(a.same_shape(b), "cosine_correlation_backward: shape mismatch");
  require(grad_out.h == a.h && grad_out.w == a.w && grad_out.c == 1,
          "cosine_correlation_backward: grad shape mismatch");
  grad_a = Tensor(a.h, a.w, a.c);
  grad_b = Tensor(a.h, a.w, a.c);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < a.h; ++y)
    for (int x = 0; x < a.w; ++x)
      cosine_grad_at(a, b, grad_out.at(y, x, 0), y, x, grad_a, grad_b);
}

Tensor resize_bilinear(const Tensor& in, int out_h, int out_w) {
  require(out_h >= 1 && out_w >= 1, "resize_bilinear: dims must be >= 1");
  Tensor out(out_h, out_w, in.c);
  const double sy = static_cast<double>(in.h) / out_h;
  const double sx = static_cast<double>(in.w) / out_w;
#pragma omp parallel for schedule(static)
  for (int y = 0; y < out_h; ++y)
    for (int x = 0; x < out_w; ++x) {
      const double src_y = (y + 0.5) * sy - 0.5;
      const double src_x = (x + 0.5) * sx - 0.5;
      for (int ch = 0; ch < in.c; ++ch)
        out.at(y, x, ch) = bilinear_sample(in, src_y, src_x, ch);
    }
  return out;
}

std::vector<int32_t> resize_nearest_i32(const std::vector<int32_t>& in, int in_h,
                                        int in_w, int out_h, int out_w) {
  return resize_nearest_impl(in, in_h, in_w, out_h, out_w);
}

std::vector<uint8_t> resize_nearest_u8(const std::vector<uint8_t>& in, int in_h,
                                       int in_w, int out_h, int out_w) {
  return resize_nearest_impl(in, in_h, in_w, out_h, out_w);
}

namespace serial {

void conv2d_forward(const Tensor& in, const std::vector<double>& w,
                    const std::vector<double>& b, int out_c, int k, int stride,
                    int pad, Tensor& out) {
  check_conv_args(in, w, b, out_c, k, stride, pad);
  const int oh = conv_out_dim(in.h, k, stride, pad);
  const int ow = conv_out_dim(in.w, k, stride, pad);
  require(oh >= 1 && ow >= 1, "conv2d: output would be empty");
  out = Tensor(oh, ow, out_c);
  for (int yo = 0; yo < oh; ++yo)
    for (int xo = 0; xo < ow; ++xo)
      for (int oc = 0; oc < out_c; ++oc)
        out.at(yo, xo, oc) =
            b[oc] + conv_pixel(in, &w[static_cast<size_t>(oc) * k * k * in.c], k,
                               stride, pad, yo, xo);
}

void conv2d_backward_input(const Tensor& grad_out, const std::vector<double>& w,
                           int in_c, int in_h, int in_w, int k, int stride,
                           int pad, Tensor& grad_in) {
  grad_in = Tensor(in_h, in_w, in_c);
  for (int yi = 0; yi < in_h; ++yi)
    for (int xi = 0; xi < in_w; ++xi)
      for (int ic = 0; ic < in_c; ++ic)
        grad_in.at(yi, xi, ic) =
            conv_input_grad_pixel(grad_out, w, in_c, k, stride, pad, yi, xi, ic);
}

void conv2d_backward_params(const Tensor& in, const Tensor& grad_out, int k,
                            int stride, int pad, std::vector<double>& grad_w,
                            std::vector<double>& grad_b) {
  const int out_c = grad_out.c;
  require(static_cast<int>(grad_w.size()) == out_c * k * k * in.c &&
              static_cast<int>(grad_b.size()) == out_c,
          "conv2d_backward_params: grad buffer size mismatch");
  for (int oc = 0; oc < out_c; ++oc)
    conv_param_grad_channel(in, grad_out, k, stride, pad, oc,
                            &grad_w[static_cast<size_t>(oc) * k * k * in.c],
                            grad_b[oc]);
}

void upconv2x_forward(const Tensor& in, const std::vector<double>& w,
                      const std::vector<double>& b, int out_c, Tensor& out) {
  require(static_cast<int>(w.size()) == out_c * 4 * in.c,
          "upconv2x: weight size mismatch");
  out = Tensor(in.h * 2, in.w * 2, out_c);
  for (int yo = 0; yo < out.h; ++yo)
    for (int xo = 0; xo < out.w; ++xo) {
      const int yi = yo >> 1, xi = xo >> 1;
      const int dy = yo & 1, dx = xo & 1;
      for (int oc = 0; oc < out_c; ++oc) {
        double acc = b[oc];
        for (int ic = 0; ic < in.c; ++ic)
          acc += in.at(yi, xi, ic) *
                 w[((static_cast<size_t>(oc) * 2 + dy) * 2 + dx) * in.c + ic];
        out.at(yo, xo, oc) = acc;
      }
    }
}

void upconv2x_backward_input(const Tensor& grad_out, const std::vector<double>& w,
                             int in_c, Tensor& grad_in) {
  require(grad_out.h % 2 == 0 && grad_out.w % 2 == 0,
          "upconv2x_backward_input: output dims must be even");
  const int ih = grad_out.h / 2, iw = grad_out.w / 2;
  grad_in = Tensor(ih, iw, in_c);
  for (int yi = 0; yi < ih; ++yi)
    for (int xi = 0; xi < iw; ++xi)
      for (int ic = 0; ic < in_c; ++ic) {
        double acc = 0.0;
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx)
            for (int oc = 0; oc < grad_out.c; ++oc)
              acc += grad_out.at(yi * 2 + dy, xi * 2 + dx, oc) *
                     w[((static_cast<size_t>(oc) * 2 + dy) * 2 + dx) * in_c + ic];
        grad_in.at(yi, xi, ic) = acc;
      }
}

void upconv2x_backward_params(const Tensor& in, const Tensor& grad_out,
                              std::vector<double>& grad_w,
                              std::vector<double>& grad_b) {
  const int out_c = grad_out.c;
  require(static_cast<int>(grad_w.size()) == out_c * 4 * in.c &&
              static_cast<int>(grad_b.size()) == out_c,
          "upconv2x_backward_params: grad buffer size mismatch");
  for (int oc = 0; oc < out_c; ++oc) {
    double bacc = grad_b[oc];
    for (int yi = 0; yi < in.h; ++yi)
      for (int xi = 0; xi < in.w; ++xi) {
        const double* src = &in.data[(static_cast<size_t>(yi) * in.w + xi) * in.c];
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) {
            const double g = grad_out.at(yi * 2 + dy, xi * 2 + dx, oc);
            bacc += g;
            if (g == 0.0) continue;
            double* dst = &grad_w[((static_cast<size_t>(oc) * 2 + dy) * 2 + dx) * in.c];
            for (int ic = 0; ic < in.c; ++ic) dst[ic] += g * src[ic];
          }
      }
    grad_b[oc] = bacc;
  }
}

void cosine_correlation(const Tensor& a, const Tensor& b, Tensor& out) {
  require(a.same_shape(b), "cosine_correlation: shape mismatch");
  out = Tensor(a.h, a.w, 1);
  for (int y = 0; y < a.h; ++y)
    for (int x = 0; x < a.w; ++x) out.at(y, x, 0) = cosine_at(a, b, y, x);
}

void cosine_correlation_backward(const Tensor& a, const Tensor& b,
                                 const Tensor& grad_out, Tensor& grad_a,
                                 Tensor& grad_b) {
  require(a.same_shape(b), "cosine_correlation_backward: shape mismatch");
  grad_a = Tensor(a.h, a.w, a.c);
  grad_b = Tensor(a.h, a.w, a.c);
  for (int y = 0; y < a.h; ++y)
    for (int x = 0; x < a.w; ++x)
      cosine_grad_at(a, b, grad_out.at(y, x, 0), y, x, grad_a, grad_b);
}

Tensor resize_bilinear(const Tensor& in, int out_h, int out_w) {
  require(out_h >= 1 && out_w >= 1, "resize_bilinear: dims must be >= 1");
  Tensor out(out_h, out_w, in.c);
  const double sy = static_cast<double>(in.h) / out_h;
  const double sx = static_cast<double>(in.w) / out_w;
  for (int y = 0; y < out_h; ++y)
    for (int x = 0; x < out_w; ++x) {
      const double src_y = (y + 0.5) * sy - 0.5;
      const double src_x = (x + 0.5) * sx - 0.5;
      for (int ch = 0; ch < in.c; ++ch)
        out.at(y, x, ch) = bilinear_sample(in, src_y, src_x, ch);
    }
  return out;
}

}  // namespace serial

}  // namespace resyn::kernels
