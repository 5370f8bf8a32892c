#pragma once

#include <cstdint>
#include <vector>

#include "resyn/tensor.hpp"

// Data-parallel inner loops shared by the networks and the rasters.
//
// The top-level functions are OpenMP-parallel and are the production path.
// resyn::kernels::serial holds plain-loop reference implementations used by
// the tests and the benchmark. Both variants compute every output element
// with the same summation order, so results are bit-identical.
//
// conv2d weight layout: w[((oc*k + ky)*k + kx)*in_c + ic], bias: b[oc].
// upconv2x is a transposed convolution with kernel 2, stride 2; weight
// layout w[((oc*2 + dy)*2 + dx)*in_c + ic]; output dims are exactly doubled.

namespace resyn::kernels {

inline int conv_out_dim(int in, int k, int stride, int pad) {
  return (in + 2 * pad - k) / stride + 1;
}

void conv2d_forward(const Tensor& in, const std::vector<double>& w,
                    const std::vector<double>& b, int out_c, int k, int stride,
                    int pad, Tensor& out);
void conv2d_backward_input(const Tensor& grad_out, const std::vector<double>& w,
                           int in_c, int in_h, int in_w, int k, int stride,
                           int pad, Tensor& grad_in);
// Accumulates into grad_w / grad_b (callers zero them per step).
void conv2d_backward_params(const Tensor& in, const Tensor& grad_out, int k,
                            int stride, int pad, std::vector<double>& grad_w,
                            std::vector<double>& grad_b);

void upconv2x_forward(const Tensor& in, const std::vector<double>& w,
                      const std::vector<double>& b, int out_c, Tensor& out);
void upconv2x_backward_input(const Tensor& grad_out, const std::vector<double>& w,
                             int in_c, Tensor& grad_in);
void upconv2x_backward_params(const Tensor& in, const Tensor& grad_out,
                              std::vector<double>& grad_w,
                              std::vector<double>& grad_b);

// Per-pixel cosine similarity between two feature maps; zero vectors give 0.
void cosine_correlation(const Tensor& a, const Tensor& b, Tensor& out);
void cosine_correlation_backward(const Tensor& a, const Tensor& b,
                                 const Tensor& grad_out, Tensor& grad_a,
                                 Tensor& grad_b);

Tensor resize_bilinear(const Tensor& in, int out_h, int out_w);
std::vector<int32_t> resize_nearest_i32(const std::vector<int32_t>& in, int in_h,
                                        int in_w, int out_h, int out_w);
std::vector<uint8_t> resize_nearest_u8(const std::vector<uint8_t>& in, int in_h,
                                       int in_w, int out_h, int out_w);

namespace serial {

void conv2d_forward(const Tensor& in, const std::vector<double>& w,
                    const std::vector<double>& b, int out_c, int k, int stride,
                    int pad, Tensor& out);
void conv2d_backward_input(const Tensor& grad_out, const std::vector<double>& w,
                           int in_c, int in_h, int in_w, int k, int stride,
                           int pad, Tensor& grad_in);
void conv2d_backward_params(const Tensor& in, const Tensor& grad_out, int k,
                            int stride, int pad, std::vector<double>& grad_w,
                            std::vector<double>& grad_b);
void upconv2x_forward(const Tensor& in, const std::vector<double>& w,
                      const std::vector<double>& b, int out_c, Tensor& out);
void upconv2x_backward_input(const Tensor& grad_out, const std::vector<double>& w,
                             int in_c, Tensor& grad_in);
void upconv2x_backward_params(const Tensor& in, const Tensor& grad_out,
                              std::vector<double>& grad_w,
                              std::vector<double>& grad_b);
void cosine_correlation(const Tensor& a, const Tensor& b, Tensor& out);
void cosine_correlation_backward(const Tensor& a, const Tensor& b,
                                 const Tensor& grad_out, Tensor& grad_a,
                                 Tensor& grad_b);
Tensor resize_bilinear(const Tensor& in, int out_h, int out_w);

}  // namespace serial

}  // namespace resyn::kernels
