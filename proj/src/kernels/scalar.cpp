#include <algorithm>
#include <cmath>

#include "kernels_impl.hpp"

namespace rdd::kernels::detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double logistic_nll_scalar(const double* z, const double* y, double* r, std::size_t n) {
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double zi = z[i];
        const double t = std::exp(-std::abs(zi));
        loss += std::max(zi, 0.0) + std::log1p(t) - y[i] * zi;
        if (r) {
            const double p = zi >= 0.0 ? 1.0 / (1.0 + t) : t / (1.0 + t);
            r[i] = p - y[i];
        }
    }
    return loss;
}

}  // namespace rdd::kernels::detail
