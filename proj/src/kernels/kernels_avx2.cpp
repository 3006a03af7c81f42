#include "iovsim/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

namespace iovsim::kern::avx2 {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

// Cephes-derived exp over 4 lanes, good to ~2 ulp on the normal range.
// Arguments above 709 saturate to +inf, below -708.39 flush to 0 (the
// true value there is subnormal; the activations never see that regime
// as anything but saturation).
inline __m256d exp4(__m256d x) {
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
    const __m256d c1 = _mm256_set1_pd(6.93145751953125e-1);
    const __m256d c2 = _mm256_set1_pd(1.42860682030941723212e-6);
    const __m256d p0 = _mm256_set1_pd(1.26177193074810590878e-4);
    const __m256d p1 = _mm256_set1_pd(3.02994407707441961300e-2);
    const __m256d p2 = _mm256_set1_pd(9.99999999999999999910e-1);
    const __m256d q0 = _mm256_set1_pd(3.00198505138664455042e-6);
    const __m256d q1 = _mm256_set1_pd(2.52448340349684104192e-3);
    const __m256d q2 = _mm256_set1_pd(2.27265548208155028766e-1);
    const __m256d q3 = _mm256_set1_pd(2.00000000000000000005e0);
    const __m256d max_arg = _mm256_set1_pd(709.0);
    const __m256d min_arg = _mm256_set1_pd(-708.396418532264106224);

    const __m256d overflow = _mm256_cmp_pd(x, max_arg, _CMP_GT_OQ);
    const __m256d underflow = _mm256_cmp_pd(x, min_arg, _CMP_LT_OQ);
    const __m256d xc = _mm256_min_pd(_mm256_max_pd(x, min_arg), max_arg);

    // n = nearbyint(x / ln 2); vcvtpd2dq rounds to nearest even
    const __m128i n32 = _mm256_cvtpd_epi32(_mm256_mul_pd(xc, log2e));
    const __m256d nd = _mm256_cvtepi32_pd(n32);

    // r = x - n*ln2, split constant for extra precision
    __m256d r = _mm256_fnmadd_pd(nd, c1, xc);
    r = _mm256_fnmadd_pd(nd, c2, r);

    // exp(r) = 1 + 2*px/(qx - px), px/qx are a Pade pair in r^2
    const __m256d rr = _mm256_mul_pd(r, r);
    __m256d px = _mm256_fmadd_pd(p0, rr, p1);
    px = _mm256_fmadd_pd(px, rr, p2);
    px = _mm256_mul_pd(px, r);
    __m256d qx = _mm256_fmadd_pd(q0, rr, q1);
    qx = _mm256_fmadd_pd(qx, rr, q2);
    qx = _mm256_fmadd_pd(qx, rr, q3);
    const __m256d e = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
    __m256d res = _mm256_fmadd_pd(_mm256_set1_pd(2.0), e, _mm256_set1_pd(1.0));

    // scale by 2^n via the exponent field; |n| <= 1023 after the clamp
    const __m256i n64 = _mm256_cvtepi32_epi64(n32);
    const __m256i ebits = _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
    res = _mm256_mul_pd(res, _mm256_castsi256_pd(ebits));

    res = _mm256_blendv_pd(res, _mm256_setzero_pd(), underflow);
    res = _mm256_blendv_pd(res, _mm256_set1_pd(HUGE_VAL), overflow);
    return res;
}

const __m256d kSignMask = _mm256_set1_pd(-0.0);

}  // namespace

void matvec_acc(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
    for (std::size_t i = 0; i < rows; ++i) {
        const double* row = a + i * cols;
        __m256d acc0 = _mm256_setzero_pd();
        __m256d acc1 = _mm256_setzero_pd();
        std::size_t j = 0;
        for (; j + 8 <= cols; j += 8) {
            acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(row + j), _mm256_loadu_pd(x + j), acc0);
            acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(row + j + 4), _mm256_loadu_pd(x + j + 4), acc1);
        }
        if (j + 4 <= cols) {
            acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(row + j), _mm256_loadu_pd(x + j), acc0);
            j += 4;
        }
        double acc = hsum(_mm256_add_pd(acc0, acc1));
        for (; j < cols; ++j) acc += row[j] * x[j];
        y[i] += acc;
    }
}

void matvec_t_acc(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
    for (std::size_t i = 0; i < rows; ++i) {
        const double* row = a + i * cols;
        const __m256d xi = _mm256_set1_pd(x[i]);
        std::size_t j = 0;
        for (; j + 4 <= cols; j += 4) {
            const __m256d yj = _mm256_loadu_pd(y + j);
            _mm256_storeu_pd(y + j, _mm256_fmadd_pd(xi, _mm256_loadu_pd(row + j), yj));
        }
        const double xs = x[i];
        for (; j < cols; ++j) y[j] += xs * row[j];
    }
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d yi = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), yi));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

double dot(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    if (i + 4 <= n) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        i += 4;
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void vexp(const double* in, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, exp4(_mm256_loadu_pd(in + i)));
    if (i < n) {
        alignas(32) double buf[4] = {0, 0, 0, 0};
        for (std::size_t k = i; k < n; ++k) buf[k - i] = in[k];
        alignas(32) double res[4];
        _mm256_store_pd(res, exp4(_mm256_load_pd(buf)));
        for (std::size_t k = i; k < n; ++k) out[k] = res[k - i];
    }
}

void vsigmoid(const double* in, double* out, std::size_t n) {
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_loadu_pd(in + i);
        // t = exp(-|x|), then 1/(1+t) for x >= 0 and t/(1+t) for x < 0
        const __m256d t = exp4(_mm256_or_pd(_mm256_andnot_pd(kSignMask, x), kSignMask));
        const __m256d inv = _mm256_div_pd(one, _mm256_add_pd(one, t));
        const __m256d neg = _mm256_mul_pd(t, inv);
        const __m256d negmask = _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_LT_OQ);
        _mm256_storeu_pd(out + i, _mm256_blendv_pd(inv, neg, negmask));
    }
    if (i < n) scalar::vsigmoid(in + i, out + i, n - i);
}

void vtanh(const double* in, double* out, std::size_t n) {
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d minus_two = _mm256_set1_pd(-2.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_loadu_pd(in + i);
        const __m256d ax = _mm256_andnot_pd(kSignMask, x);
        const __m256d t = exp4(_mm256_mul_pd(minus_two, ax));
        const __m256d r = _mm256_div_pd(_mm256_sub_pd(one, t), _mm256_add_pd(one, t));
        const __m256d sign = _mm256_and_pd(kSignMask, x);
        _mm256_storeu_pd(out + i, _mm256_or_pd(r, sign));
    }
    if (i < n) scalar::vtanh(in + i, out + i, n - i);
}

}  // namespace iovsim::kern::avx2

#endif  // x86-64
