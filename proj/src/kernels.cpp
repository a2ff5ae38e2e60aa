#include "c3/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <vector>

#include "c3/blas.hpp"

namespace c3::kern {

namespace {
std::atomic<Exec> g_exec{Exec::parallel};
const char* g_gemm_backend = "unset";
}  // namespace

Exec exec_mode() { return g_exec.load(std::memory_order_relaxed); }
void set_exec_mode(Exec e) { g_exec.store(e, std::memory_order_relaxed); }
const char* gemm_backend() { return g_gemm_backend; }

// ---------------------------------------------------------------------------
// GEMM
// ---------------------------------------------------------------------------

namespace {

template <class T>
void gemm_serial(bool ta, bool tb, i64 m, i64 n, i64 k, T alpha, const T* a,
                 i64 lda, const T* b, i64 ldb, T beta, T* c, i64 ldc) {
    for (i64 i = 0; i < m; ++i) {
        for (i64 j = 0; j < n; ++j) {
            double acc = 0.0;
            for (i64 p = 0; p < k; ++p) {
                T av = ta ? a[p * lda + i] : a[i * lda + p];
                T bv = tb ? b[j * ldb + p] : b[p * ldb + j];
                acc += (double)av * (double)bv;
            }
            c[i * ldc + j] = alpha * (T)acc + beta * c[i * ldc + j];
        }
    }
}

// Blocked OpenMP fallback used when OpenBLAS cannot be loaded.
template <class T>
void gemm_own(bool ta, bool tb, i64 m, i64 n, i64 k, T alpha, const T* a,
              i64 lda, const T* b, i64 ldb, T beta, T* c, i64 ldc) {
    constexpr i64 MB = 64, KB = 256;
#pragma omp parallel for schedule(static)
    for (i64 i0 = 0; i0 < m; i0 += MB) {
        i64 i1 = std::min(i0 + MB, m);
        for (i64 i = i0; i < i1; ++i) {
            T* crow = c + i * ldc;
            if (beta == T(0))
                std::memset(crow, 0, sizeof(T) * n);
            else if (beta != T(1))
                for (i64 j = 0; j < n; ++j) crow[j] *= beta;
        }
        if (!tb) {
            for (i64 k0 = 0; k0 < k; k0 += KB) {
                i64 k1 = std::min(k0 + KB, k);
                for (i64 i = i0; i < i1; ++i) {
                    T* crow = c + i * ldc;
                    for (i64 p = k0; p < k1; ++p) {
                        T av = alpha * (ta ? a[p * lda + i] : a[i * lda + p]);
                        const T* brow = b + p * ldb;
#pragma omp simd
                        for (i64 j = 0; j < n; ++j) crow[j] += av * brow[j];
                    }
                }
            }
        } else {
            for (i64 i = i0; i < i1; ++i) {
                T* crow = c + i * ldc;
                for (i64 j = 0; j < n; ++j) {
                    T acc = 0;
                    const T* brow = b + j * ldb;
                    if (!ta) {
                        const T* arow = a + i * lda;
#pragma omp simd reduction(+ : acc)
                        for (i64 p = 0; p < k; ++p) acc += arow[p] * brow[p];
                    } else {
                        for (i64 p = 0; p < k; ++p) acc += a[p * lda + i] * brow[p];
                    }
                    crow[j] += alpha * acc;
                }
            }
        }
    }
}

template <class T>
void gemm_blas(bool ta, bool tb, i64 m, i64 n, i64 k, T alpha, const T* a,
               i64 lda, const T* b, i64 ldb, T beta, T* c, i64 ldc);

template <>
void gemm_blas<float>(bool ta, bool tb, i64 m, i64 n, i64 k, float alpha,
                      const float* a, i64 lda, const float* b, i64 ldb,
                      float beta, float* c, i64 ldc) {
    blas::sgemm(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

template <>
void gemm_blas<double>(bool ta, bool tb, i64 m, i64 n, i64 k, double alpha,
                       const double* a, i64 lda, const double* b, i64 ldb,
                       double beta, double* c, i64 ldc) {
    blas::dgemm(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

}  // namespace

template <class T>
void gemm(bool ta, bool tb, i64 m, i64 n, i64 k, T alpha, const T* a, i64 lda,
          const T* b, i64 ldb, T beta, T* c, i64 ldc) {
    if (m == 0 || n == 0) return;
    if (exec_mode() == Exec::serial) {
        g_gemm_backend = "serial";
        gemm_serial(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
    } else if (blas::available()) {
        g_gemm_backend = "blas";
        gemm_blas<T>(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
    } else {
        g_gemm_backend = "own";
        gemm_own(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
    }
}

// ---------------------------------------------------------------------------
// im2col / col2im
// ---------------------------------------------------------------------------

template <class T>
void im2col(const T* x, i64 c, i64 h, i64 w, i64 kh, i64 kw, i64 stride,
            i64 pad, i64 oh, i64 ow, T* col) {
    i64 rows = c * kh * kw;
    auto body = [&](i64 r) {
        i64 kj = r % kw;
        i64 ki = (r / kw) % kh;
        i64 ch = r / (kh * kw);
        const T* plane = x + ch * h * w;
        T* dst = col + r * oh * ow;
        for (i64 oy = 0; oy < oh; ++oy) {
            i64 iy = oy * stride - pad + ki;
            if (iy < 0 || iy >= h) {
                std::memset(dst + oy * ow, 0, sizeof(T) * ow);
                continue;
            }
            i64 ix0 = -pad + kj;
            const T* srow = plane + iy * w;
            T* drow = dst + oy * ow;
            for (i64 ox = 0; ox < ow; ++ox) {
                i64 ix = ox * stride + ix0;
                drow[ox] = (ix >= 0 && ix < w) ? srow[ix] : T(0);
            }
        }
    };
    if (exec_mode() == Exec::parallel && rows * oh * ow >= 1 << 14) {
#pragma omp parallel for schedule(static)
        for (i64 r = 0; r < rows; ++r) body(r);
    } else {
        for (i64 r = 0; r < rows; ++r) body(r);
    }
}

template <class T>
void col2im(const T* col, i64 c, i64 h, i64 w, i64 kh, i64 kw, i64 stride,
            i64 pad, i64 oh, i64 ow, T* x) {
    // Scatter-add; parallel over channels so writes never collide.
    auto body = [&](i64 ch) {
        T* plane = x + ch * h * w;
        for (i64 ki = 0; ki < kh; ++ki) {
            for (i64 kj = 0; kj < kw; ++kj) {
                const T* src = col + ((ch * kh + ki) * kw + kj) * oh * ow;
                for (i64 oy = 0; oy < oh; ++oy) {
                    i64 iy = oy * stride - pad + ki;
                    if (iy < 0 || iy >= h) continue;
                    T* drow = plane + iy * w;
                    const T* srow = src + oy * ow;
                    i64 ix0 = -pad + kj;
                    for (i64 ox = 0; ox < ow; ++ox) {
                        i64 ix = ox * stride + ix0;
                        if (ix >= 0 && ix < w) drow[ix] += srow[ox];
                    }
                }
            }
        }
    };
    if (exec_mode() == Exec::parallel && c > 1 && c * oh * ow >= 1 << 14) {
#pragma omp parallel for schedule(static)
        for (i64 ch = 0; ch < c; ++ch) body(ch);
    } else {
        for (i64 ch = 0; ch < c; ++ch) body(ch);
    }
}

// ---------------------------------------------------------------------------
// Reductions
// ---------------------------------------------------------------------------

template <class T>
void channel_mean_var(const T* x, i64 n, i64 c, i64 hw, T* mean, T* var) {
    i64 count = n * hw;
    auto body = [&](i64 ch) {
        double s = 0.0;
        for (i64 b = 0; b < n; ++b) {
            const T* p = x + (b * c + ch) * hw;
            double cs = 0.0;
            for (i64 i = 0; i < hw; ++i) cs += (double)p[i];
            s += cs;
        }
        double mu = s / (double)count;
        double v = 0.0;
        for (i64 b = 0; b < n; ++b) {
            const T* p = x + (b * c + ch) * hw;
            double cv = 0.0;
            for (i64 i = 0; i < hw; ++i) {
                double d = (double)p[i] - mu;
                cv += d * d;
            }
            v += cv;
        }
        mean[ch] = (T)mu;
        var[ch] = (T)(v / (double)count);
    };
    if (exec_mode() == Exec::parallel && c >= 2) {
#pragma omp parallel for schedule(static)
        for (i64 ch = 0; ch < c; ++ch) body(ch);
    } else {
        for (i64 ch = 0; ch < c; ++ch) body(ch);
    }
}

template <class T>
T reduce_sum(const T* x, i64 n) {
    // Fixed chunk size keeps the combine order independent of thread count.
    constexpr i64 chunk = 1 << 13;
    i64 nchunks = (n + chunk - 1) / chunk;
    if (nchunks <= 1) {
        double s = 0.0;
        for (i64 i = 0; i < n; ++i) s += (double)x[i];
        return (T)s;
    }
    std::vector<double> partial(nchunks);
    auto body = [&](i64 ci) {
        i64 lo = ci * chunk, hi = std::min(lo + chunk, n);
        double s = 0.0;
        for (i64 i = lo; i < hi; ++i) s += (double)x[i];
        partial[ci] = s;
    };
    if (exec_mode() == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (i64 ci = 0; ci < nchunks; ++ci) body(ci);
    } else {
        for (i64 ci = 0; ci < nchunks; ++ci) body(ci);
    }
    double total = 0.0;
    for (double p : partial) total += p;
    return (T)total;
}

// ---------------------------------------------------------------------------
// Upsampling
// ---------------------------------------------------------------------------

template <class T>
void upsample2(const T* x, i64 n, i64 c, i64 h, i64 w, T* y) {
    i64 planes = n * c;
    auto body = [&](i64 p) {
        const T* src = x + p * h * w;
        T* dst = y + p * 4 * h * w;
        for (i64 i = 0; i < h; ++i) {
            T* r0 = dst + (2 * i) * 2 * w;
            T* r1 = r0 + 2 * w;
            const T* s = src + i * w;
            for (i64 j = 0; j < w; ++j) {
                r0[2 * j] = r0[2 * j + 1] = s[j];
            }
            std::memcpy(r1, r0, sizeof(T) * 2 * w);
        }
    };
    if (exec_mode() == Exec::parallel && planes >= 2) {
#pragma omp parallel for schedule(static)
        for (i64 p = 0; p < planes; ++p) body(p);
    } else {
        for (i64 p = 0; p < planes; ++p) body(p);
    }
}

template <class T>
void upsample2_backward(const T* dy, i64 n, i64 c, i64 h, i64 w, T* dx) {
    i64 planes = n * c;
    auto body = [&](i64 p) {
        const T* src = dy + p * 4 * h * w;
        T* dst = dx + p * h * w;
        for (i64 i = 0; i < h; ++i) {
            const T* r0 = src + (2 * i) * 2 * w;
            const T* r1 = r0 + 2 * w;
            T* d = dst + i * w;
            for (i64 j = 0; j < w; ++j)
                d[j] += r0[2 * j] + r0[2 * j + 1] + r1[2 * j] + r1[2 * j + 1];
        }
    };
    if (exec_mode() == Exec::parallel && planes >= 2) {
#pragma omp parallel for schedule(static)
        for (i64 p = 0; p < planes; ++p) body(p);
    } else {
        for (i64 p = 0; p < planes; ++p) body(p);
    }
}

// ---------------------------------------------------------------------------
// Bilinear affine warp
// ---------------------------------------------------------------------------

template <class T>
void warp_bilinear(const T* x, i64 n, i64 c, i64 h, i64 w, const T* inv, T* y) {
    auto body = [&](i64 b) {
        const T* m = inv + b * 6;
        for (i64 oy = 0; oy < h; ++oy) {
            for (i64 ox = 0; ox < w; ++ox) {
                T sx = m[0] * (T)ox + m[1] * (T)oy + m[2];
                T sy = m[3] * (T)ox + m[4] * (T)oy + m[5];
                i64 x0 = (i64)std::floor((double)sx);
                i64 y0 = (i64)std::floor((double)sy);
                T fx = sx - (T)x0;
                T fy = sy - (T)y0;
                T w00 = (T(1) - fx) * (T(1) - fy);
                T w01 = fx * (T(1) - fy);
                T w10 = (T(1) - fx) * fy;
                T w11 = fx * fy;
                bool in00 = x0 >= 0 && x0 < w && y0 >= 0 && y0 < h;
                bool in01 = x0 + 1 >= 0 && x0 + 1 < w && y0 >= 0 && y0 < h;
                bool in10 = x0 >= 0 && x0 < w && y0 + 1 >= 0 && y0 + 1 < h;
                bool in11 = x0 + 1 >= 0 && x0 + 1 < w && y0 + 1 >= 0 && y0 + 1 < h;
                for (i64 ch = 0; ch < c; ++ch) {
                    const T* plane = x + (b * c + ch) * h * w;
                    T v = 0;
                    if (in00) v += w00 * plane[y0 * w + x0];
                    if (in01) v += w01 * plane[y0 * w + x0 + 1];
                    if (in10) v += w10 * plane[(y0 + 1) * w + x0];
                    if (in11) v += w11 * plane[(y0 + 1) * w + x0 + 1];
                    y[((b * c + ch) * h + oy) * w + ox] = v;
                }
            }
        }
    };
    if (exec_mode() == Exec::parallel && n >= 2) {
#pragma omp parallel for schedule(static)
        for (i64 b = 0; b < n; ++b) body(b);
    } else {
        for (i64 b = 0; b < n; ++b) body(b);
    }
}

template <class T>
void warp_bilinear_backward(const T* dy, i64 n, i64 c, i64 h, i64 w,
                            const T* inv, T* dx) {
    // Scatter into dx; parallel only across images so no write races.
    auto body = [&](i64 b) {
        const T* m = inv + b * 6;
        for (i64 oy = 0; oy < h; ++oy) {
            for (i64 ox = 0; ox < w; ++ox) {
                T sx = m[0] * (T)ox + m[1] * (T)oy + m[2];
                T sy = m[3] * (T)ox + m[4] * (T)oy + m[5];
                i64 x0 = (i64)std::floor((double)sx);
                i64 y0 = (i64)std::floor((double)sy);
                T fx = sx - (T)x0;
                T fy = sy - (T)y0;
                T w00 = (T(1) - fx) * (T(1) - fy);
                T w01 = fx * (T(1) - fy);
                T w10 = (T(1) - fx) * fy;
                T w11 = fx * fy;
                bool in00 = x0 >= 0 && x0 < w && y0 >= 0 && y0 < h;
                bool in01 = x0 + 1 >= 0 && x0 + 1 < w && y0 >= 0 && y0 < h;
                bool in10 = x0 >= 0 && x0 < w && y0 + 1 >= 0 && y0 + 1 < h;
                bool in11 = x0 + 1 >= 0 && x0 + 1 < w && y0 + 1 >= 0 && y0 + 1 < h;
                for (i64 ch = 0; ch < c; ++ch) {
                    T g = dy[((b * c + ch) * h + oy) * w + ox];
                    if (g == T(0)) continue;
                    T* plane = dx + (b * c + ch) * h * w;
                    if (in00) plane[y0 * w + x0] += w00 * g;
                    if (in01) plane[y0 * w + x0 + 1] += w01 * g;
                    if (in10) plane[(y0 + 1) * w + x0] += w10 * g;
                    if (in11) plane[(y0 + 1) * w + x0 + 1] += w11 * g;
                }
            }
        }
    };
    if (exec_mode() == Exec::parallel && n >= 2) {
#pragma omp parallel for schedule(static)
        for (i64 b = 0; b < n; ++b) body(b);
    } else {
        for (i64 b = 0; b < n; ++b) body(b);
    }
}

// ---------------------------------------------------------------------------
// Explicit instantiations
// ---------------------------------------------------------------------------

#define C3_INSTANTIATE(T)                                                               \
    template void gemm<T>(bool, bool, i64, i64, i64, T, const T*, i64, const T*, i64,   \
                          T, T*, i64);                                                  \
    template void im2col<T>(const T*, i64, i64, i64, i64, i64, i64, i64, i64, i64, T*); \
    template void col2im<T>(const T*, i64, i64, i64, i64, i64, i64, i64, i64, i64, T*); \
    template void channel_mean_var<T>(const T*, i64, i64, i64, T*, T*);                 \
    template T reduce_sum<T>(const T*, i64);                                            \
    template void upsample2<T>(const T*, i64, i64, i64, i64, T*);                       \
    template void upsample2_backward<T>(const T*, i64, i64, i64, i64, T*);              \
    template void warp_bilinear<T>(const T*, i64, i64, i64, i64, const T*, T*);         \
    template void warp_bilinear_backward<T>(const T*, i64, i64, i64, i64, const T*, T*);

C3_INSTANTIATE(float)
C3_INSTANTIATE(double)

#undef C3_INSTANTIATE

}  // namespace c3::kern
