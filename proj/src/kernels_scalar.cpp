#include "gridcover/kernels.hpp"

#include <cmath>

// Reference kernels. Plain loops, one accumulator per output element; the
// SIMD variants are checked against these.

namespace gridcover::kernels {
namespace {

void dense_forward(const float* w, const float* bias, const float* x, float* y,
                   int batch, int in_dim, int out_dim) {
    for (int o = 0; o < out_dim; ++o) {
        const float* wrow = w + static_cast<std::size_t>(o) * in_dim;
        for (int b = 0; b < batch; ++b) {
            const float* xb = x + static_cast<std::size_t>(b) * in_dim;
            float acc = bias[o];
            for (int i = 0; i < in_dim; ++i) acc += wrow[i] * xb[i];
            y[static_cast<std::size_t>(b) * out_dim + o] = acc;
        }
    }
}

void dense_grad_input(const float* w, const float* gy, float* gx, int batch,
                      int in_dim, int out_dim) {
    for (int b = 0; b < batch; ++b) {
        float* gxb = gx + static_cast<std::size_t>(b) * in_dim;
        for (int i = 0; i < in_dim; ++i) gxb[i] = 0.0f;
        const float* gyb = gy + static_cast<std::size_t>(b) * out_dim;
        for (int o = 0; o < out_dim; ++o) {
            const float g = gyb[o];
            const float* wrow = w + static_cast<std::size_t>(o) * in_dim;
            for (int i = 0; i < in_dim; ++i) gxb[i] += g * wrow[i];
        }
    }
}

void dense_grad_params(const float* x, const float* gy, float* gw, float* gb,
                       int batch, int in_dim, int out_dim) {
    for (int b = 0; b < batch; ++b) {
        const float* xb = x + static_cast<std::size_t>(b) * in_dim;
        const float* gyb = gy + static_cast<std::size_t>(b) * out_dim;
        for (int o = 0; o < out_dim; ++o) {
            const float g = gyb[o];
            gb[o] += g;
            float* gwrow = gw + static_cast<std::size_t>(o) * in_dim;
            for (int i = 0; i < in_dim; ++i) gwrow[i] += g * xb[i];
        }
    }
}

void conv2d_forward(const float* in, const float* w, const float* bias,
                    float* out, int height, int width, int in_ch, int out_ch,
                    int kernel) {
    const int wp = width + kernel - 1;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            float* o = out + (static_cast<std::size_t>(y) * width + x) * out_ch;
            for (int f = 0; f < out_ch; ++f) o[f] = bias[f];
            for (int ky = 0; ky < kernel; ++ky) {
                for (int kx = 0; kx < kernel; ++kx) {
                    const float* irow =
                        in + (static_cast<std::size_t>(y + ky) * wp + (x + kx)) * in_ch;
                    const float* wrow =
                        w + (static_cast<std::size_t>(ky) * kernel + kx) * in_ch * out_ch;
                    for (int c = 0; c < in_ch; ++c) {
                        const float v = irow[c];
                        const float* wf = wrow + static_cast<std::size_t>(c) * out_ch;
                        for (int f = 0; f < out_ch; ++f) o[f] += v * wf[f];
                    }
                }
            }
        }
    }
}

void conv2d_grad_input(const float* w_t, const float* gout, float* gin,
                       int height, int width, int in_ch, int out_ch,
                       int kernel) {
    const int wp = width + kernel - 1;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const float* go =
                gout + (static_cast<std::size_t>(y) * width + x) * out_ch;
            for (int ky = 0; ky < kernel; ++ky) {
                for (int kx = 0; kx < kernel; ++kx) {
                    float* gi =
                        gin + (static_cast<std::size_t>(y + ky) * wp + (x + kx)) * in_ch;
                    const float* wrow =
                        w_t + (static_cast<std::size_t>(ky) * kernel + kx) * out_ch * in_ch;
                    for (int f = 0; f < out_ch; ++f) {
                        const float g = go[f];
                        const float* wc = wrow + static_cast<std::size_t>(f) * in_ch;
                        for (int c = 0; c < in_ch; ++c) gi[c] += g * wc[c];
                    }
                }
            }
        }
    }
}

void conv2d_grad_params(const float* in, const float* gout, float* gw,
                        float* gb, int height, int width, int in_ch,
                        int out_ch, int kernel) {
    const int wp = width + kernel - 1;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const float* go =
                gout + (static_cast<std::size_t>(y) * width + x) * out_ch;
            for (int f = 0; f < out_ch; ++f) gb[f] += go[f];
            for (int ky = 0; ky < kernel; ++ky) {
                for (int kx = 0; kx < kernel; ++kx) {
                    const float* irow =
                        in + (static_cast<std::size_t>(y + ky) * wp + (x + kx)) * in_ch;
                    float* gwrow =
                        gw + (static_cast<std::size_t>(ky) * kernel + kx) * in_ch * out_ch;
                    for (int c = 0; c < in_ch; ++c) {
                        const float v = irow[c];
                        float* gwf = gwrow + static_cast<std::size_t>(c) * out_ch;
                        for (int f = 0; f < out_ch; ++f) gwf[f] += v * go[f];
                    }
                }
            }
        }
    }
}

void relu(float* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_mask_grad(const float* a, float* g, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) g[i] = a[i] > 0.0f ? g[i] : 0.0f;
}

void adam_update(float* p, float* m, float* v, const float* g, std::size_t n,
                 float lr, float beta1, float beta2, float eps, float inv_bc1,
                 float inv_bc2) {
    for (std::size_t i = 0; i < n; ++i) {
        const float gi = g[i];
        m[i] = beta1 * m[i] + (1.0f - beta1) * gi;
        v[i] = beta2 * v[i] + (1.0f - beta2) * (gi * gi);
        const float mhat = m[i] * inv_bc1;
        const float vhat = v[i] * inv_bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

void lerp_toward(float* dst, const float* src, float tau, std::size_t n) {
    const float keep = 1.0f - tau;
    for (std::size_t i = 0; i < n; ++i) dst[i] = keep * dst[i] + tau * src[i];
}

double sq_err_sum(const float* a, const float* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        s += d * d;
    }
    return s;
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops = {
        "scalar",         dense_forward, dense_grad_input, dense_grad_params,
        conv2d_forward,   conv2d_grad_input, conv2d_grad_params,
        relu,             relu_mask_grad,
        adam_update,      lerp_toward,   sq_err_sum,
    };
    return ops;
}

}  // namespace gridcover::kernels
