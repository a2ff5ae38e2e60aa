#include "c3/blas.hpp"

#include <dlfcn.h>
#include <omp.h>

#include <cstdlib>
#include <mutex>
#include <string>

namespace c3::blas {
namespace {

enum CblasOrder { kRowMajor = 101 };
enum CblasTranspose { kNoTrans = 111, kTrans = 112 };

using sgemm_fn = void (*)(int, int, int, int, int, int, float, const float*, int,
                          const float*, int, float, float*, int);
using dgemm_fn = void (*)(int, int, int, int, int, int, double, const double*, int,
                          const double*, int, double, double*, int);

struct Lib {
    void* handle = nullptr;
    sgemm_fn sgemm = nullptr;
    dgemm_fn dgemm = nullptr;
};

const Lib& lib() {
    static Lib l = [] {
        Lib out;
        const char* mode = std::getenv("C3_GEMM");
        if (mode && std::string(mode) == "own") return out;
        if (!std::getenv("OPENBLAS_CORETYPE")) {
            // The packaged OpenBLAS misreads virtualized CPUs and falls back
            // to pre-SSE3 kernels; pick the widest ISA this machine has.
            if (__builtin_cpu_supports("avx512f"))
                setenv("OPENBLAS_CORETYPE", "SKYLAKEX", 0);
            else if (__builtin_cpu_supports("avx2"))
                setenv("OPENBLAS_CORETYPE", "HASWELL", 0);
        }
        if (!std::getenv("OPENBLAS_NUM_THREADS")) {
            setenv("OPENBLAS_NUM_THREADS", std::to_string(omp_get_max_threads()).c_str(), 0);
        }
        for (const char* name : {"libopenblas.so.0", "libopenblas.so"}) {
            out.handle = dlopen(name, RTLD_NOW | RTLD_LOCAL);
            if (out.handle) break;
        }
        if (!out.handle) return out;
        out.sgemm = reinterpret_cast<sgemm_fn>(dlsym(out.handle, "cblas_sgemm"));
        out.dgemm = reinterpret_cast<dgemm_fn>(dlsym(out.handle, "cblas_dgemm"));
        if (!out.sgemm || !out.dgemm) {
            dlclose(out.handle);
            out = Lib{};
        }
        return out;
    }();
    return l;
}

}  // namespace

bool available() { return lib().sgemm != nullptr; }

void sgemm(bool trans_a, bool trans_b, i64 m, i64 n, i64 k, float alpha,
           const float* a, i64 lda, const float* b, i64 ldb, float beta,
           float* c, i64 ldc) {
    lib().sgemm(kRowMajor, trans_a ? kTrans : kNoTrans, trans_b ? kTrans : kNoTrans,
                (int)m, (int)n, (int)k, alpha, a, (int)lda, b, (int)ldb, beta, c, (int)ldc);
}

void dgemm(bool trans_a, bool trans_b, i64 m, i64 n, i64 k, double alpha,
           const double* a, i64 lda, const double* b, i64 ldb, double beta,
           double* c, i64 ldc) {
    lib().dgemm(kRowMajor, trans_a ? kTrans : kNoTrans, trans_b ? kTrans : kNoTrans,
                (int)m, (int)n, (int)k, alpha, a, (int)lda, b, (int)ldb, beta, c, (int)ldc);
}

}  // namespace c3::blas
