#include "gridcover/kernels.hpp"

// AVX2+FMA kernels. Vectorization runs across independent output elements
// (channels for conv, inputs for the axpy-style backward passes), so each
// output keeps one accumulator; reductions (dense_forward, sq_err_sum) use
// multiple lanes and are checked against the scalar reference with a small
// tolerance in the kernel equivalence tests.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

namespace gridcover::kernels {
namespace {

inline __m256i tail_mask(int n) {
    const __m256i idx = _mm256_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7);
    return _mm256_cmpgt_epi32(_mm256_set1_epi32(n), idx);
}

inline float hsum8(__m256 v) {
    __m128 lo = _mm256_castps256_ps128(v);
    const __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    lo = _mm_add_ps(lo, _mm_movehl_ps(lo, lo));
    lo = _mm_add_ss(lo, _mm_movehdup_ps(lo));
    return _mm_cvtss_f32(lo);
}

// Weight rows outer, batch rows inner: a handful of w rows stay in L1 while
// the activation batch streams from L2, instead of re-streaming the whole
// weight matrix per sample.

void dense_forward(const float* w, const float* bias, const float* x, float* y,
                   int batch, int in_dim, int out_dim) {
    const int vend = in_dim & ~7;
    int o = 0;
    for (; o + 4 <= out_dim; o += 4) {
        const float* w0 = w + static_cast<std::size_t>(o) * in_dim;
        const float* w1 = w0 + in_dim;
        const float* w2 = w1 + in_dim;
        const float* w3 = w2 + in_dim;
        for (int b = 0; b < batch; ++b) {
            const float* xb = x + static_cast<std::size_t>(b) * in_dim;
            float* yb = y + static_cast<std::size_t>(b) * out_dim;
            __m256 a0 = _mm256_setzero_ps();
            __m256 a1 = _mm256_setzero_ps();
            __m256 a2 = _mm256_setzero_ps();
            __m256 a3 = _mm256_setzero_ps();
            for (int i = 0; i < vend; i += 8) {
                const __m256 vx = _mm256_loadu_ps(xb + i);
                a0 = _mm256_fmadd_ps(_mm256_loadu_ps(w0 + i), vx, a0);
                a1 = _mm256_fmadd_ps(_mm256_loadu_ps(w1 + i), vx, a1);
                a2 = _mm256_fmadd_ps(_mm256_loadu_ps(w2 + i), vx, a2);
                a3 = _mm256_fmadd_ps(_mm256_loadu_ps(w3 + i), vx, a3);
            }
            float s0 = bias[o] + hsum8(a0);
            float s1 = bias[o + 1] + hsum8(a1);
            float s2 = bias[o + 2] + hsum8(a2);
            float s3 = bias[o + 3] + hsum8(a3);
            for (int i = vend; i < in_dim; ++i) {
                const float xv = xb[i];
                s0 += w0[i] * xv;
                s1 += w1[i] * xv;
                s2 += w2[i] * xv;
                s3 += w3[i] * xv;
            }
            yb[o] = s0;
            yb[o + 1] = s1;
            yb[o + 2] = s2;
            yb[o + 3] = s3;
        }
    }
    for (; o < out_dim; ++o) {
        const float* wrow = w + static_cast<std::size_t>(o) * in_dim;
        for (int b = 0; b < batch; ++b) {
            const float* xb = x + static_cast<std::size_t>(b) * in_dim;
            __m256 acc = _mm256_setzero_ps();
            for (int i = 0; i < vend; i += 8)
                acc = _mm256_fmadd_ps(_mm256_loadu_ps(wrow + i),
                                      _mm256_loadu_ps(xb + i), acc);
            float s = bias[o] + hsum8(acc);
            for (int i = vend; i < in_dim; ++i) s += wrow[i] * xb[i];
            y[static_cast<std::size_t>(b) * out_dim + o] = s;
        }
    }
}

void dense_grad_input(const float* w, const float* gy, float* gx, int batch,
                      int in_dim, int out_dim) {
    const int vend = in_dim & ~7;
    const __m256 vz = _mm256_setzero_ps();
    for (int b = 0; b < batch; ++b) {
        float* gxb = gx + static_cast<std::size_t>(b) * in_dim;
        for (int i = 0; i < vend; i += 8) _mm256_storeu_ps(gxb + i, vz);
        for (int i = vend; i < in_dim; ++i) gxb[i] = 0.0f;
    }
    for (int o = 0; o < out_dim; ++o) {
        const float* wrow = w + static_cast<std::size_t>(o) * in_dim;
        for (int b = 0; b < batch; ++b) {
            const float g = gy[static_cast<std::size_t>(b) * out_dim + o];
            if (g == 0.0f) continue;
            float* gxb = gx + static_cast<std::size_t>(b) * in_dim;
            const __m256 vg = _mm256_set1_ps(g);
            for (int i = 0; i < vend; i += 8) {
                const __m256 acc = _mm256_fmadd_ps(vg, _mm256_loadu_ps(wrow + i),
                                                   _mm256_loadu_ps(gxb + i));
                _mm256_storeu_ps(gxb + i, acc);
            }
            for (int i = vend; i < in_dim; ++i) gxb[i] += g * wrow[i];
        }
    }
}

void dense_grad_params(const float* x, const float* gy, float* gw, float* gb,
                       int batch, int in_dim, int out_dim) {
    const int vend = in_dim & ~7;
    for (int o = 0; o < out_dim; ++o) {
        float* gwrow = gw + static_cast<std::size_t>(o) * in_dim;
        for (int b = 0; b < batch; ++b) {
            const float g = gy[static_cast<std::size_t>(b) * out_dim + o];
            if (g == 0.0f) continue;
            gb[o] += g;
            const float* xb = x + static_cast<std::size_t>(b) * in_dim;
            const __m256 vg = _mm256_set1_ps(g);
            for (int i = 0; i < vend; i += 8) {
                const __m256 acc = _mm256_fmadd_ps(vg, _mm256_loadu_ps(xb + i),
                                                   _mm256_loadu_ps(gwrow + i));
                _mm256_storeu_ps(gwrow + i, acc);
            }
            for (int i = vend; i < in_dim; ++i) gwrow[i] += g * xb[i];
        }
    }
}

// Hot path for the default filter count: four output pixels walk the taps
// together, sharing both 16-wide weight registers.
static void conv2d_forward_f16(const float* in, const float* w, const float* bias,
                               float* out, int height, int width, int in_ch,
                               int kernel) {
    const int wp = width + kernel - 1;
    const int taps = kernel * kernel;
    const __m256 vb0 = _mm256_loadu_ps(bias);
    const __m256 vb1 = _mm256_loadu_ps(bias + 8);
    for (int y = 0; y < height; ++y) {
        int x = 0;
        for (; x + 4 <= width; x += 4) {
            __m256 a00 = vb0, a01 = vb1, a10 = vb0, a11 = vb1;
            __m256 a20 = vb0, a21 = vb1, a30 = vb0, a31 = vb1;
            for (int t = 0; t < taps; ++t) {
                const int ky = t / kernel, kx = t % kernel;
                const float* irow =
                    in + (static_cast<std::size_t>(y + ky) * wp + (x + kx)) * in_ch;
                const float* wrow = w + static_cast<std::size_t>(t) * in_ch * 16;
                for (int c = 0; c < in_ch; ++c) {
                    const __m256 w0 = _mm256_loadu_ps(wrow + static_cast<std::size_t>(c) * 16);
                    const __m256 w1 =
                        _mm256_loadu_ps(wrow + static_cast<std::size_t>(c) * 16 + 8);
                    const __m256 v0 = _mm256_set1_ps(irow[c]);
                    const __m256 v1 = _mm256_set1_ps(irow[c + in_ch]);
                    const __m256 v2 = _mm256_set1_ps(irow[c + 2 * in_ch]);
                    const __m256 v3 = _mm256_set1_ps(irow[c + 3 * in_ch]);
                    a00 = _mm256_fmadd_ps(v0, w0, a00);
                    a01 = _mm256_fmadd_ps(v0, w1, a01);
                    a10 = _mm256_fmadd_ps(v1, w0, a10);
                    a11 = _mm256_fmadd_ps(v1, w1, a11);
                    a20 = _mm256_fmadd_ps(v2, w0, a20);
                    a21 = _mm256_fmadd_ps(v2, w1, a21);
                    a30 = _mm256_fmadd_ps(v3, w0, a30);
                    a31 = _mm256_fmadd_ps(v3, w1, a31);
                }
            }
            float* o = out + (static_cast<std::size_t>(y) * width + x) * 16;
            _mm256_storeu_ps(o, a00);
            _mm256_storeu_ps(o + 8, a01);
            _mm256_storeu_ps(o + 16, a10);
            _mm256_storeu_ps(o + 24, a11);
            _mm256_storeu_ps(o + 32, a20);
            _mm256_storeu_ps(o + 40, a21);
            _mm256_storeu_ps(o + 48, a30);
            _mm256_storeu_ps(o + 56, a31);
        }
        for (; x < width; ++x) {
            __m256 a0 = vb0, a1 = vb1;
            for (int t = 0; t < taps; ++t) {
                const int ky = t / kernel, kx = t % kernel;
                const float* irow =
                    in + (static_cast<std::size_t>(y + ky) * wp + (x + kx)) * in_ch;
                const float* wrow = w + static_cast<std::size_t>(t) * in_ch * 16;
                for (int c = 0; c < in_ch; ++c) {
                    const __m256 v = _mm256_set1_ps(irow[c]);
                    a0 = _mm256_fmadd_ps(
                        v, _mm256_loadu_ps(wrow + static_cast<std::size_t>(c) * 16), a0);
                    a1 = _mm256_fmadd_ps(
                        v, _mm256_loadu_ps(wrow + static_cast<std::size_t>(c) * 16 + 8),
                        a1);
                }
            }
            float* o = out + (static_cast<std::size_t>(y) * width + x) * 16;
            _mm256_storeu_ps(o, a0);
            _mm256_storeu_ps(o + 8, a1);
        }
    }
}

void conv2d_forward(const float* in, const float* w, const float* bias,
                    float* out, int height, int width, int in_ch, int out_ch,
                    int kernel) {
    if (out_ch == 16) {
        conv2d_forward_f16(in, w, bias, out, height, width, in_ch, kernel);
        return;
    }
    const int wp = width + kernel - 1;
    const int taps = kernel * kernel;
    for (int f0 = 0; f0 < out_ch; f0 += 8) {
        const int rem = out_ch - f0;
        const bool full = rem >= 8;
        const __m256i mask = full ? _mm256_set1_epi32(-1) : tail_mask(rem);
        const __m256 vb = full ? _mm256_loadu_ps(bias + f0)
                               : _mm256_maskload_ps(bias + f0, mask);
        for (int y = 0; y < height; ++y) {
            int x = 0;
            for (; x + 2 <= width; x += 2) {
                __m256 a0 = vb;
                __m256 a1 = vb;
                for (int t = 0; t < taps; ++t) {
                    const int ky = t / kernel, kx = t % kernel;
                    const float* irow =
                        in + (static_cast<std::size_t>(y + ky) * wp + (x + kx)) * in_ch;
                    const float* wrow =
                        w + static_cast<std::size_t>(t) * in_ch * out_ch + f0;
                    for (int c = 0; c < in_ch; ++c) {
                        const __m256 vw =
                            full ? _mm256_loadu_ps(wrow + static_cast<std::size_t>(c) * out_ch)
                                 : _mm256_maskload_ps(
                                       wrow + static_cast<std::size_t>(c) * out_ch, mask);
                        a0 = _mm256_fmadd_ps(_mm256_set1_ps(irow[c]), vw, a0);
                        a1 = _mm256_fmadd_ps(_mm256_set1_ps(irow[c + in_ch]), vw, a1);
                    }
                }
                float* o0 = out + (static_cast<std::size_t>(y) * width + x) * out_ch + f0;
                if (full) {
                    _mm256_storeu_ps(o0, a0);
                    _mm256_storeu_ps(o0 + out_ch, a1);
                } else {
                    _mm256_maskstore_ps(o0, mask, a0);
                    _mm256_maskstore_ps(o0 + out_ch, mask, a1);
                }
            }
            for (; x < width; ++x) {
                __m256 a0 = vb;
                for (int t = 0; t < taps; ++t) {
                    const int ky = t / kernel, kx = t % kernel;
                    const float* irow =
                        in + (static_cast<std::size_t>(y + ky) * wp + (x + kx)) * in_ch;
                    const float* wrow =
                        w + static_cast<std::size_t>(t) * in_ch * out_ch + f0;
                    for (int c = 0; c < in_ch; ++c) {
                        const __m256 vw =
                            full ? _mm256_loadu_ps(wrow + static_cast<std::size_t>(c) * out_ch)
                                 : _mm256_maskload_ps(
                                       wrow + static_cast<std::size_t>(c) * out_ch, mask);
                        a0 = _mm256_fmadd_ps(_mm256_set1_ps(irow[c]), vw, a0);
                    }
                }
                float* o0 = out + (static_cast<std::size_t>(y) * width + x) * out_ch + f0;
                if (full)
                    _mm256_storeu_ps(o0, a0);
                else
                    _mm256_maskstore_ps(o0, mask, a0);
            }
        }
    }
}

void conv2d_grad_input(const float* w_t, const float* gout, float* gin,
                       int height, int width, int in_ch, int out_ch,
                       int kernel) {
    const int wp = width + kernel - 1;
    const int taps = kernel * kernel;
    const int vend = in_ch & ~7;
    const __m256i mask = (in_ch - vend) > 0 ? tail_mask(in_ch - vend)
                                            : _mm256_setzero_si256();
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const float* go =
                gout + (static_cast<std::size_t>(y) * width + x) * out_ch;
            for (int f = 0; f < out_ch; ++f) {
                const float g = go[f];
                if (g == 0.0f) continue;
                const __m256 vg = _mm256_set1_ps(g);
                const float* wf = w_t + static_cast<std::size_t>(f) * in_ch;
                for (int t = 0; t < taps; ++t) {
                    const int ky = t / kernel, kx = t % kernel;
                    float* gi =
                        gin + (static_cast<std::size_t>(y + ky) * wp + (x + kx)) * in_ch;
                    const float* wrow =
                        wf + static_cast<std::size_t>(t) * out_ch * in_ch;
                    for (int c = 0; c < vend; c += 8) {
                        const __m256 acc = _mm256_fmadd_ps(
                            vg, _mm256_loadu_ps(wrow + c), _mm256_loadu_ps(gi + c));
                        _mm256_storeu_ps(gi + c, acc);
                    }
                    if (vend < in_ch) {
                        const __m256 acc = _mm256_fmadd_ps(
                            vg, _mm256_maskload_ps(wrow + vend, mask),
                            _mm256_maskload_ps(gi + vend, mask));
                        _mm256_maskstore_ps(gi + vend, mask, acc);
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
    const int taps = kernel * kernel;
    for (int f0 = 0; f0 < out_ch; f0 += 8) {
        const int rem = out_ch - f0;
        const bool full = rem >= 8;
        const __m256i mask = full ? _mm256_set1_epi32(-1) : tail_mask(rem);
        __m256 vgb = full ? _mm256_loadu_ps(gb + f0)
                          : _mm256_maskload_ps(gb + f0, mask);
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                const float* go =
                    gout + (static_cast<std::size_t>(y) * width + x) * out_ch + f0;
                const __m256 vgo = full ? _mm256_loadu_ps(go)
                                        : _mm256_maskload_ps(go, mask);
                vgb = _mm256_add_ps(vgb, vgo);
                for (int t = 0; t < taps; ++t) {
                    const int ky = t / kernel, kx = t % kernel;
                    const float* irow =
                        in + (static_cast<std::size_t>(y + ky) * wp + (x + kx)) * in_ch;
                    float* gwrow =
                        gw + static_cast<std::size_t>(t) * in_ch * out_ch + f0;
                    for (int c = 0; c < in_ch; ++c) {
                        float* gwf = gwrow + static_cast<std::size_t>(c) * out_ch;
                        if (full) {
                            const __m256 acc = _mm256_fmadd_ps(
                                _mm256_set1_ps(irow[c]), vgo, _mm256_loadu_ps(gwf));
                            _mm256_storeu_ps(gwf, acc);
                        } else {
                            const __m256 acc = _mm256_fmadd_ps(
                                _mm256_set1_ps(irow[c]), vgo,
                                _mm256_maskload_ps(gwf, mask));
                            _mm256_maskstore_ps(gwf, mask, acc);
                        }
                    }
                }
            }
        }
        if (full)
            _mm256_storeu_ps(gb + f0, vgb);
        else
            _mm256_maskstore_ps(gb + f0, mask, vgb);
    }
}

void relu(float* x, std::size_t n) {
    const __m256 vz = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(x + i, _mm256_max_ps(_mm256_loadu_ps(x + i), vz));
    for (; i < n; ++i) x[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_mask_grad(const float* a, float* g, std::size_t n) {
    const __m256 vz = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 keep = _mm256_cmp_ps(_mm256_loadu_ps(a + i), vz, _CMP_GT_OQ);
        _mm256_storeu_ps(g + i, _mm256_and_ps(_mm256_loadu_ps(g + i), keep));
    }
    for (; i < n; ++i) g[i] = a[i] > 0.0f ? g[i] : 0.0f;
}

void adam_update(float* p, float* m, float* v, const float* g, std::size_t n,
                 float lr, float beta1, float beta2, float eps, float inv_bc1,
                 float inv_bc2) {
    const __m256 vb1 = _mm256_set1_ps(beta1);
    const __m256 vb2 = _mm256_set1_ps(beta2);
    const __m256 vc1 = _mm256_set1_ps(1.0f - beta1);
    const __m256 vc2 = _mm256_set1_ps(1.0f - beta2);
    const __m256 vlr = _mm256_set1_ps(lr);
    const __m256 veps = _mm256_set1_ps(eps);
    const __m256 vi1 = _mm256_set1_ps(inv_bc1);
    const __m256 vi2 = _mm256_set1_ps(inv_bc2);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 vg = _mm256_loadu_ps(g + i);
        const __m256 vm =
            _mm256_add_ps(_mm256_mul_ps(vb1, _mm256_loadu_ps(m + i)),
                          _mm256_mul_ps(vc1, vg));
        const __m256 vv =
            _mm256_add_ps(_mm256_mul_ps(vb2, _mm256_loadu_ps(v + i)),
                          _mm256_mul_ps(vc2, _mm256_mul_ps(vg, vg)));
        _mm256_storeu_ps(m + i, vm);
        _mm256_storeu_ps(v + i, vv);
        const __m256 mhat = _mm256_mul_ps(vm, vi1);
        const __m256 vhat = _mm256_mul_ps(vv, vi2);
        const __m256 denom = _mm256_add_ps(_mm256_sqrt_ps(vhat), veps);
        const __m256 stepv = _mm256_div_ps(_mm256_mul_ps(vlr, mhat), denom);
        _mm256_storeu_ps(p + i, _mm256_sub_ps(_mm256_loadu_ps(p + i), stepv));
    }
    for (; i < n; ++i) {
        const float gi = g[i];
        m[i] = beta1 * m[i] + (1.0f - beta1) * gi;
        v[i] = beta2 * v[i] + (1.0f - beta2) * (gi * gi);
        const float mhat = m[i] * inv_bc1;
        const float vhat = v[i] * inv_bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

void lerp_toward(float* dst, const float* src, float tau, std::size_t n) {
    const __m256 vk = _mm256_set1_ps(1.0f - tau);
    const __m256 vt = _mm256_set1_ps(tau);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 r =
            _mm256_add_ps(_mm256_mul_ps(vk, _mm256_loadu_ps(dst + i)),
                          _mm256_mul_ps(vt, _mm256_loadu_ps(src + i)));
        _mm256_storeu_ps(dst + i, r);
    }
    const float keep = 1.0f - tau;
    for (; i < n; ++i) dst[i] = keep * dst[i] + tau * src[i];
}

double sq_err_sum(const float* a, const float* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 va = _mm256_loadu_ps(a + i);
        const __m256 vb = _mm256_loadu_ps(b + i);
        const __m256d lo = _mm256_sub_pd(_mm256_cvtps_pd(_mm256_castps256_ps128(va)),
                                         _mm256_cvtps_pd(_mm256_castps256_ps128(vb)));
        const __m256d hi = _mm256_sub_pd(_mm256_cvtps_pd(_mm256_extractf128_ps(va, 1)),
                                         _mm256_cvtps_pd(_mm256_extractf128_ps(vb, 1)));
        acc0 = _mm256_fmadd_pd(lo, lo, acc0);
        acc1 = _mm256_fmadd_pd(hi, hi, acc1);
    }
    const __m256d acc = _mm256_add_pd(acc0, acc1);
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double s = lanes[0] + lanes[1] + lanes[2] + lanes[3];
    for (; i < n; ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        s += d * d;
    }
    return s;
}

bool cpu_supported() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

}  // namespace

const Ops* avx2_ops() {
    if (!cpu_supported()) return nullptr;
    static const Ops ops = {
        "avx2",           dense_forward, dense_grad_input, dense_grad_params,
        conv2d_forward,   conv2d_grad_input, conv2d_grad_params,
        relu,             relu_mask_grad,
        adam_update,      lerp_toward,   sq_err_sum,
    };
    return &ops;
}

}  // namespace gridcover::kernels

#endif  // x86-64
