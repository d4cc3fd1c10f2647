#include <atomic>
#include <cstdlib>
#include <cstring>

#include "kernels_impl.hpp"
#include "rdd/common.hpp"
#include "rdd/kernels.hpp"

namespace rdd::kernels {

namespace {

using detail::KernelTable;

constexpr KernelTable kScalar{detail::dot_scalar, detail::axpy_scalar, detail::logistic_nll_scalar};
#if defined(__x86_64__) || defined(_M_X64)
constexpr KernelTable kAvx2{detail::dot_avx2, detail::axpy_avx2, detail::logistic_nll_avx2};
#endif
#if defined(__aarch64__)
// No vector exp/log yet on NEON; the likelihood kernel stays scalar there.
constexpr KernelTable kNeon{detail::dot_neon, detail::axpy_neon, detail::logistic_nll_scalar};
#endif

const KernelTable* table_for(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return &kScalar;
#if defined(__x86_64__) || defined(_M_X64)
        case Isa::Avx2: return &kAvx2;
#endif
#if defined(__aarch64__)
        case Isa::Neon: return &kNeon;
#endif
        default: return nullptr;
    }
}

std::atomic<Isa>& active() {
    static std::atomic<Isa> isa{detected_isa()};
    return isa;
}

const KernelTable& table() { return *table_for(active().load(std::memory_order_relaxed)); }

void check_sizes(std::size_t a, std::size_t b, const char* what) {
    if (a != b) throw Error(std::string("kernels::") + what + ": length mismatch");
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
        case Isa::Neon: return "neon";
    }
    return "unknown";
}

bool isa_supported(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar: return true;
        case Isa::Avx2:
#if (defined(__x86_64__) || defined(_M_X64)) && defined(__GNUC__)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Isa::Neon:
#if defined(__aarch64__)
            return true;
#else
            return false;
#endif
    }
    return false;
}

Isa detected_isa() noexcept {
    if (const char* env = std::getenv("RDD_KERNELS"); env && std::strcmp(env, "scalar") == 0)
        return Isa::Scalar;
    if (isa_supported(Isa::Avx2)) return Isa::Avx2;
    if (isa_supported(Isa::Neon)) return Isa::Neon;
    return Isa::Scalar;
}

Isa active_isa() noexcept { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
    if (!isa_supported(isa) || table_for(isa) == nullptr)
        throw Error("kernels: " + std::string(isa_name(isa)) + " is not supported on this CPU");
    active().store(isa, std::memory_order_relaxed);
}

double dot(std::span<const double> a, std::span<const double> b) {
    check_sizes(a.size(), b.size(), "dot");
    return table().dot(a.data(), b.data(), a.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    check_sizes(x.size(), y.size(), "axpy");
    table().axpy(a, x.data(), y.data(), x.size());
}

double logistic_nll(std::span<const double> z, std::span<const double> y, std::span<double> residuals) {
    check_sizes(z.size(), y.size(), "logistic_nll");
    if (!residuals.empty()) check_sizes(z.size(), residuals.size(), "logistic_nll");
    return table().logistic_nll(z.data(), y.data(), residuals.empty() ? nullptr : residuals.data(), z.size());
}

namespace reference {

double dot(std::span<const double> a, std::span<const double> b) {
    check_sizes(a.size(), b.size(), "dot");
    return detail::dot_scalar(a.data(), b.data(), a.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    check_sizes(x.size(), y.size(), "axpy");
    detail::axpy_scalar(a, x.data(), y.data(), x.size());
}

double logistic_nll(std::span<const double> z, std::span<const double> y, std::span<double> residuals) {
    check_sizes(z.size(), y.size(), "logistic_nll");
    if (!residuals.empty()) check_sizes(z.size(), residuals.size(), "logistic_nll");
    return detail::logistic_nll_scalar(z.data(), y.data(), residuals.empty() ? nullptr : residuals.data(),
                                       z.size());
}

}  // namespace reference

}  // namespace rdd::kernels
