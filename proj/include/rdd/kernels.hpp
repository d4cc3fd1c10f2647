#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Data-parallel inner loops behind the classifiers. Each kernel has a scalar
// reference implementation and SIMD variants; the variant is picked once at
// runtime from the CPU's capabilities and can be pinned for testing.
namespace rdd::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa) noexcept;

// Best variant this CPU supports. RDD_KERNELS=scalar in the environment forces Scalar.
Isa detected_isa() noexcept;
Isa active_isa() noexcept;
bool isa_supported(Isa isa) noexcept;
// Throws rdd::Error when the CPU cannot run the requested variant.
void set_active_isa(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);

// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);

// For margins z and labels y in {0,1}: returns sum_i softplus(z_i) - y_i z_i (the
// logistic negative log-likelihood) and, when residuals is non-empty, writes
// residuals_i = sigmoid(z_i) - y_i.
double logistic_nll(std::span<const double> z, std::span<const double> y,
                    std::span<double> residuals);

// Scalar reference versions, always available; used by the equivalence tests.
namespace reference {
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double a, std::span<const double> x, std::span<double> y);
double logistic_nll(std::span<const double> z, std::span<const double> y,
                    std::span<double> residuals);
}  // namespace reference

}  // namespace rdd::kernels
