#pragma once

#include <omp.h>

#include "c3/common.hpp"

// Low-level data-parallel kernels. Every kernel has a serial reference
// implementation (exec Serial) used by the unit tests and the benchmark as
// ground truth, and an optimized parallel path (OpenMP loops; GEMM goes to
// OpenBLAS when loadable, else to a blocked OpenMP fallback).
namespace c3::kern {

enum class Exec { serial, parallel };

Exec exec_mode();
void set_exec_mode(Exec e);

struct ExecGuard {
    Exec saved;
    explicit ExecGuard(Exec e) : saved(exec_mode()) { set_exec_mode(e); }
    ~ExecGuard() { set_exec_mode(saved); }
};

// C[m,n] = alpha * op(A) * op(B) + beta * C, row-major.
template <class T>
void gemm(bool trans_a, bool trans_b, i64 m, i64 n, i64 k, T alpha, const T* a,
          i64 lda, const T* b, i64 ldb, T beta, T* c, i64 ldc);

// Which backend gemm<float> actually used last ("blas"/"own"/"serial").
const char* gemm_backend();

// im2col over one image: x [C,H,W] -> col [C*kh*kw, oh*ow].
template <class T>
void im2col(const T* x, i64 c, i64 h, i64 w, i64 kh, i64 kw, i64 stride,
            i64 pad, i64 oh, i64 ow, T* col);

// col2im scatter-add, adjoint of im2col.
template <class T>
void col2im(const T* col, i64 c, i64 h, i64 w, i64 kh, i64 kw, i64 stride,
            i64 pad, i64 oh, i64 ow, T* x);

// Per-channel mean/var over (N,H,W); deterministic chunked reduction.
template <class T>
void channel_mean_var(const T* x, i64 n, i64 c, i64 hw, T* mean, T* var);

// Nearest-neighbour 2x upsample, [N,C,H,W] -> [N,C,2H,2W].
template <class T>
void upsample2(const T* x, i64 n, i64 c, i64 h, i64 w, T* y);

// Adjoint of upsample2: accumulates 2x2 blocks of dy into dx.
template <class T>
void upsample2_backward(const T* dy, i64 n, i64 c, i64 h, i64 w, T* dx);

// Bilinear warp. inv[b] is a row-major 2x3 matrix mapping *output* pixel
// coordinates to input coordinates; out-of-frame samples read as zero.
template <class T>
void warp_bilinear(const T* x, i64 n, i64 c, i64 h, i64 w, const T* inv, T* y);

// Adjoint: scatters dy back through the same bilinear weights into dx.
template <class T>
void warp_bilinear_backward(const T* dy, i64 n, i64 c, i64 h, i64 w,
                            const T* inv, T* dx);

// Deterministic sum (chunked pairwise-ish reduction in fixed order).
template <class T>
T reduce_sum(const T* x, i64 n);

// y[i] = f(i) for i in [0,n), parallel when mode allows. Header-inline so
// lambdas vanish; used by the elementwise autograd ops.
template <class F>
inline void parallel_for(i64 n, F&& f) {
    if (exec_mode() == Exec::parallel && n >= 4096) {
#pragma omp parallel for schedule(static)
        for (i64 i = 0; i < n; ++i) f(i);
    } else {
        for (i64 i = 0; i < n; ++i) f(i);
    }
}

}  // namespace c3::kern
