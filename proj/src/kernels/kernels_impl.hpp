#pragma once

#include <cstddef>

namespace rdd::kernels::detail {

using DotFn = double (*)(const double*, const double*, std::size_t);
using AxpyFn = void (*)(double, const double*, double*, std::size_t);
using NllFn = double (*)(const double*, const double*, double*, std::size_t);

struct KernelTable {
    DotFn dot;
    AxpyFn axpy;
    NllFn logistic_nll;
};

double dot_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double a, const double* x, double* y, std::size_t n);
double logistic_nll_scalar(const double* z, const double* y, double* r, std::size_t n);

#if defined(__x86_64__) || defined(_M_X64)
double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double a, const double* x, double* y, std::size_t n);
double logistic_nll_avx2(const double* z, const double* y, double* r, std::size_t n);
#endif

#if defined(__aarch64__)
double dot_neon(const double* a, const double* b, std::size_t n);
void axpy_neon(double a, const double* x, double* y, std::size_t n);
#endif

}  // namespace rdd::kernels::detail
