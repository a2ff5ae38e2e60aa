#pragma once

#include "c3/common.hpp"

namespace c3::blas {

// Runtime-loaded OpenBLAS. Loading happens on first use so the core-type and
// thread-count environment can be fixed up before the library initializes
// (the distro build misdetects this machine's CPU when linked normally).
// Set C3_GEMM=own to skip OpenBLAS entirely.
bool available();

void sgemm(bool trans_a, bool trans_b, i64 m, i64 n, i64 k, float alpha,
           const float* a, i64 lda, const float* b, i64 ldb, float beta,
           float* c, i64 ldc);

void dgemm(bool trans_a, bool trans_b, i64 m, i64 n, i64 k, double alpha,
           const double* a, i64 lda, const double* b, i64 ldb, double beta,
           double* c, i64 ldc);

}  // namespace c3::blas
