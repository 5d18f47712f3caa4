// Compiled with -mavx2 -mfma; only reached when CPUID reports both.
#include "qmt/kernels.hpp"

#if defined(__x86_64__) && defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace qmt::kernels::avx2 {

namespace {

// Two complex doubles per register, laid out (re0, im0, re1, im1).
inline __m256d load(const cplx* p) { return _mm256_loadu_pd(reinterpret_cast<const double*>(p)); }
inline void store(cplx* p, __m256d v) { _mm256_storeu_pd(reinterpret_cast<double*>(p), v); }

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// a * b for packed complex pairs.
inline __m256d mul(__m256d a, __m256d b) {
    const __m256d a_re = _mm256_movedup_pd(a);
    const __m256d a_im = _mm256_permute_pd(a, 0xF);
    const __m256d b_sw = _mm256_permute_pd(b, 0x5);
    return _mm256_fmaddsub_pd(a_re, b, _mm256_mul_pd(a_im, b_sw));
}

} // namespace

cplx dotc(const cplx* a, const cplx* b, std::size_t n) {
    // re = sum(ar*br + ai*bi), im = sum(ar*bi - ai*br)
    __m256d acc_re0 = _mm256_setzero_pd(), acc_re1 = _mm256_setzero_pd();
    __m256d acc_im0 = _mm256_setzero_pd(), acc_im1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d va0 = load(a + i), vb0 = load(b + i);
        const __m256d va1 = load(a + i + 2), vb1 = load(b + i + 2);
        acc_re0 = _mm256_fmadd_pd(va0, vb0, acc_re0);
        acc_re1 = _mm256_fmadd_pd(va1, vb1, acc_re1);
        acc_im0 = _mm256_fmadd_pd(va0, _mm256_permute_pd(vb0, 0x5), acc_im0);
        acc_im1 = _mm256_fmadd_pd(va1, _mm256_permute_pd(vb1, 0x5), acc_im1);
    }
    for (; i + 2 <= n; i += 2) {
        const __m256d va = load(a + i), vb = load(b + i);
        acc_re0 = _mm256_fmadd_pd(va, vb, acc_re0);
        acc_im0 = _mm256_fmadd_pd(va, _mm256_permute_pd(vb, 0x5), acc_im0);
    }
    const __m256d acc_re = _mm256_add_pd(acc_re0, acc_re1);
    // acc_im lanes hold (ar*bi, ai*br, ...): im = even lanes - odd lanes.
    const __m256d acc_im = _mm256_mul_pd(_mm256_add_pd(acc_im0, acc_im1), _mm256_setr_pd(1.0, -1.0, 1.0, -1.0));
    double re = hsum(acc_re);
    double im = hsum(acc_im);
    for (; i < n; ++i) {
        re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
        im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
    }
    return {re, im};
}

double norm2(const cplx* a, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v0 = load(a + i), v1 = load(a + i + 2);
        acc0 = _mm256_fmadd_pd(v0, v0, acc0);
        acc1 = _mm256_fmadd_pd(v1, v1, acc1);
    }
    for (; i + 2 <= n; i += 2) {
        const __m256d v = load(a + i);
        acc0 = _mm256_fmadd_pd(v, v, acc0);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
    return s;
}

void axpy(cplx alpha, const cplx* x, cplx* y, std::size_t n) {
    const __m256d va = _mm256_setr_pd(alpha.real(), alpha.imag(), alpha.real(), alpha.imag());
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) store(y + i, _mm256_add_pd(load(y + i), mul(va, load(x + i))));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void cmul(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) store(out + i, mul(load(a + i), load(b + i)));
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

} // namespace qmt::kernels::avx2

#else

#include "qmt/errors.hpp"

namespace qmt::kernels::avx2 {
cplx dotc(const cplx*, const cplx*, std::size_t) { fail(ErrorKind::InvalidArgument, "AVX2 kernels not built"); }
double norm2(const cplx*, std::size_t) { fail(ErrorKind::InvalidArgument, "AVX2 kernels not built"); }
void axpy(cplx, const cplx*, cplx*, std::size_t) { fail(ErrorKind::InvalidArgument, "AVX2 kernels not built"); }
void cmul(const cplx*, const cplx*, cplx*, std::size_t) { fail(ErrorKind::InvalidArgument, "AVX2 kernels not built"); }
} // namespace qmt::kernels::avx2

#endif
