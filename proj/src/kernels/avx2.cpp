// Compiled with -mavx2 -mfma; only reached through the runtime dispatcher after a
// CPU feature check.
#include <immintrin.h>

#include <cmath>

#include "kernels_impl.hpp"

namespace rdd::kernels::detail {

namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// exp(x) for x <= 0. Inputs below -708 are clamped (the result is below 1e-307).
inline __m256d exp_nonpositive(__m256d x) {
    x = _mm256_max_pd(x, _mm256_set1_pd(-708.0));
    const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634)),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93147180369123816490e-01), x);
    r = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.90821492927058770002e-10), r);

    // Taylor series to degree 12; |r| <= ln2/2 keeps the truncation below 2e-16.
    static constexpr double c[] = {
        1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0, 1.0 / 362880.0,
        1.0 / 40320.0,     1.0 / 5040.0,     1.0 / 720.0,     1.0 / 120.0,
        1.0 / 24.0,        1.0 / 6.0,        1.0 / 2.0,       1.0,
        1.0};
    __m256d p = _mm256_set1_pd(c[0]);
    for (int k = 1; k < 13; ++k) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(c[k]));

    // 2^n via the exponent field; n is integral in [-1022, 0].
    const __m256d magic = _mm256_set1_pd(6755399441055744.0);  // 2^52 + 2^51
    __m256i ni = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(n, magic)),
                                  _mm256_castpd_si256(magic));
    ni = _mm256_slli_epi64(_mm256_add_epi64(ni, _mm256_set1_epi64x(1023)), 52);
    return _mm256_mul_pd(p, _mm256_castsi256_pd(ni));
}

// log1p(t) for t in [0, 1].
inline __m256d log1p_unit(__m256d t) {
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d u = _mm256_add_pd(one, t);
    const __m256d big = _mm256_cmp_pd(u, _mm256_set1_pd(1.4142135623730951), _CMP_GT_OQ);
    const __m256d m = _mm256_blendv_pd(u, _mm256_mul_pd(u, _mm256_set1_pd(0.5)), big);
    const __m256d k = _mm256_and_pd(big, one);

    const __m256d s = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
    const __m256d s2 = _mm256_mul_pd(s, s);
    // 2 atanh(s) = 2 s (1 + s^2/3 + s^4/5 + ...), |s| <= 0.172.
    __m256d p = _mm256_set1_pd(1.0 / 23.0);
    for (int j = 21; j >= 1; j -= 2) p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / j));
    const __m256d log_u = _mm256_fmadd_pd(k, _mm256_set1_pd(0.6931471805599453),
                                          _mm256_mul_pd(_mm256_add_pd(s, s), p));

    // Recover full relative accuracy for small t: log1p(t) = log(u) * t / (u - 1).
    const __m256d um1 = _mm256_sub_pd(u, one);
    const __m256d exact = _mm256_cmp_pd(um1, _mm256_setzero_pd(), _CMP_EQ_OQ);
    const __m256d safe = _mm256_blendv_pd(um1, one, exact);
    const __m256d corrected = _mm256_div_pd(_mm256_mul_pd(log_u, t), safe);
    return _mm256_blendv_pd(corrected, t, exact);
}

}  // namespace

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

double logistic_nll_avx2(const double* z, const double* y, double* r, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d acc = zero;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d zi = _mm256_loadu_pd(z + i);
        const __m256d yi = _mm256_loadu_pd(y + i);
        const __m256d neg_abs = _mm256_or_pd(zi, sign);
        const __m256d t = exp_nonpositive(neg_abs);
        const __m256d softplus = _mm256_add_pd(_mm256_max_pd(zi, zero), log1p_unit(t));
        acc = _mm256_add_pd(acc, _mm256_fnmadd_pd(yi, zi, softplus));
        if (r) {
            const __m256d negative = _mm256_cmp_pd(zi, zero, _CMP_LT_OQ);
            const __m256d num = _mm256_blendv_pd(one, t, negative);
            const __m256d p = _mm256_div_pd(num, _mm256_add_pd(one, t));
            _mm256_storeu_pd(r + i, _mm256_sub_pd(p, yi));
        }
    }
    double loss = hsum(acc);
    if (i < n) loss += logistic_nll_scalar(z + i, y + i, r ? r + i : nullptr, n - i);
    return loss;
}

}  // namespace rdd::kernels::detail
