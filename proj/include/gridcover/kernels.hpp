#pragma once

#include <cstddef>

// Data-parallel inner loops of the value network, exposed as a kernel table.
// Two implementations exist: a scalar reference and an AVX2+FMA variant on
// x86-64. The variant in use is resolved once per process; set
// GRIDCOVER_KERNELS=scalar|avx2|auto to override the CPU-based choice.
//
// Layouts:
//   dense weights   w[out][in], row-major
//   conv activations HWC: a[y][x][c]
//   conv weights    w[ky][kx][c][f]   (transposed copy w_t[ky][kx][f][c]
//                                      is used for the input-gradient pass)
// Conv kernels take the input already padded to (H+K-1, W+K-1); padding
// values are the caller's concern.

namespace gridcover::kernels {

struct Ops {
    const char* name;

    // y[b][o] = bias[o] + sum_i w[o][i] * x[b][i]
    void (*dense_forward)(const float* w, const float* bias, const float* x,
                          float* y, int batch, int in_dim, int out_dim);
    // gx[b][i] = sum_o w[o][i] * gy[b][o]
    void (*dense_grad_input)(const float* w, const float* gy, float* gx,
                             int batch, int in_dim, int out_dim);
    // gw[o][i] += sum_b gy[b][o] * x[b][i];  gb[o] += sum_b gy[b][o]
    void (*dense_grad_params)(const float* x, const float* gy, float* gw,
                              float* gb, int batch, int in_dim, int out_dim);

    // out[y][x][f] = bias[f] + sum_{ky,kx,c} in[y+ky][x+kx][c] * w[ky][kx][c][f]
    void (*conv2d_forward)(const float* in_padded, const float* w,
                           const float* bias, float* out, int height,
                           int width, int in_ch, int out_ch, int kernel);
    // gin[y+ky][x+kx][c] += sum_f gout[y][x][f] * w_t[ky][kx][f][c]
    void (*conv2d_grad_input)(const float* w_t, const float* gout,
                              float* gin_padded, int height, int width,
                              int in_ch, int out_ch, int kernel);
    // gw[ky][kx][c][f] += sum_{y,x} in[y+ky][x+kx][c] * gout[y][x][f]
    // gb[f] += sum_{y,x} gout[y][x][f]
    void (*conv2d_grad_params)(const float* in_padded, const float* gout,
                               float* gw, float* gb, int height, int width,
                               int in_ch, int out_ch, int kernel);

    void (*relu)(float* x, std::size_t n);
    // grad[i] = activated[i] > 0 ? grad[i] : 0
    void (*relu_mask_grad)(const float* activated, float* grad, std::size_t n);

    // Adam with bias correction; inv_bc1 = 1/(1-beta1^t), inv_bc2 likewise.
    void (*adam_update)(float* p, float* m, float* v, const float* g,
                        std::size_t n, float lr, float beta1, float beta2,
                        float eps, float inv_bc1, float inv_bc2);

    // dst = (1-tau)*dst + tau*src
    void (*lerp_toward)(float* dst, const float* src, float tau,
                        std::size_t n);

    double (*sq_err_sum)(const float* a, const float* b, std::size_t n);
};

const Ops& scalar_ops();

// nullptr when the build target or the running CPU lacks AVX2+FMA.
const Ops* avx2_ops();

// Resolved once per process; stable for the process lifetime.
const Ops& active_ops();

}  // namespace gridcover::kernels
