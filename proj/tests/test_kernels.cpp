#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "rdd/common.hpp"
#include "rdd/kernels.hpp"

using namespace rdd;
namespace k = rdd::kernels;

namespace {

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> d(0.0, scale);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

std::vector<double> random_labels(std::size_t n, std::mt19937_64& rng) {
    std::bernoulli_distribution b(0.3);
    std::vector<double> v(n);
    for (auto& x : v) x = b(rng) ? 1.0 : 0.0;
    return v;
}

bool close(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(1.0, std::abs(b)); }

// Every length from 0 to 67 hits each tail path of the vector loops.
template <class F>
void for_each_variant(F&& fn) {
    for (k::Isa isa : {k::Isa::Scalar, k::Isa::Avx2, k::Isa::Neon}) {
        if (!k::isa_supported(isa)) continue;
        k::set_active_isa(isa);
        fn(isa);
    }
    k::set_active_isa(k::detected_isa());
}

}  // namespace

TEST_CASE("scalar is always supported and the detected variant is usable") {
    CHECK(k::isa_supported(k::Isa::Scalar));
    CHECK(k::isa_supported(k::detected_isa()));
    CHECK(k::isa_name(k::Isa::Avx2) == "avx2");
    k::set_active_isa(k::Isa::Scalar);
    CHECK(k::active_isa() == k::Isa::Scalar);
    k::set_active_isa(k::detected_isa());
}

TEST_CASE("unsupported variants are refused") {
    for (k::Isa isa : {k::Isa::Avx2, k::Isa::Neon})
        if (!k::isa_supported(isa)) CHECK_THROWS_AS(k::set_active_isa(isa), Error);
}

TEST_CASE("dot matches the reference") {
    std::mt19937_64 rng(1);
    for_each_variant([&](k::Isa isa) {
        INFO(k::isa_name(isa));
        for (std::size_t n = 0; n < 68; ++n) {
            const auto a = random_vector(n, rng, 3.0), b = random_vector(n, rng, 3.0);
            CHECK(close(k::dot(a, b), k::reference::dot(a, b), 1e-12));
        }
        const auto a = random_vector(100000, rng, 1.0), b = random_vector(100000, rng, 1.0);
        CHECK(close(k::dot(a, b), k::reference::dot(a, b), 1e-10));
    });
}

TEST_CASE("dot hand example") {
    const std::vector<double> a{1, 2, 3, 4, 5}, b{5, 4, 3, 2, 1};
    for_each_variant([&](k::Isa) { CHECK(k::dot(a, b) == 35.0); });
}

TEST_CASE("axpy matches the reference") {
    std::mt19937_64 rng(2);
    for_each_variant([&](k::Isa isa) {
        INFO(k::isa_name(isa));
        for (std::size_t n = 0; n < 68; ++n) {
            const auto x = random_vector(n, rng, 2.0);
            auto y1 = random_vector(n, rng, 2.0);
            auto y2 = y1;
            k::axpy(-0.37, x, y1);
            k::reference::axpy(-0.37, x, y2);
            for (std::size_t i = 0; i < n; ++i) CHECK(close(y1[i], y2[i], 1e-14));
        }
    });
}

TEST_CASE("logistic_nll matches the reference and a direct formula") {
    std::mt19937_64 rng(3);
    for_each_variant([&](k::Isa isa) {
        INFO(k::isa_name(isa));
        for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 33u, 1000u}) {
            const auto z = random_vector(n, rng, 6.0);
            const auto y = random_labels(n, rng);
            std::vector<double> r1(n), r2(n);
            const double l1 = k::logistic_nll(z, y, r1);
            const double l2 = k::reference::logistic_nll(z, y, r2);
            double direct = 0.0;
            for (std::size_t i = 0; i < n; ++i) direct += std::log1p(std::exp(z[i])) - y[i] * z[i];
            CHECK(close(l1, l2, 1e-12));
            CHECK(close(l1, direct, 1e-10));
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(close(r1[i], r2[i], 1e-12));
                CHECK(close(r1[i], 1.0 / (1.0 + std::exp(-z[i])) - y[i], 1e-12));
            }
            CHECK(close(k::logistic_nll(z, y, {}), l1, 1e-15));
        }
    });
}

TEST_CASE("logistic_nll stays finite for large margins") {
    const std::vector<double> z{800.0, -800.0, 0.0, 40.0};
    const std::vector<double> y{1.0, 0.0, 1.0, 0.0};
    for_each_variant([&](k::Isa) {
        std::vector<double> r(4);
        const double l = k::logistic_nll(z, y, r);
        CHECK(std::isfinite(l));
        CHECK(close(l, std::log(2.0) + 40.0, 1e-12));
        CHECK(std::abs(r[0]) < 1e-300);
        CHECK(std::abs(r[1]) < 1e-300);
        CHECK(r[2] == -0.5);
    });
}

TEST_CASE("length mismatches throw") {
    const std::vector<double> a(5), b(4);
    std::vector<double> y(4), r(3);
    for_each_variant([&](k::Isa) {
        CHECK_THROWS_AS(k::dot(a, b), Error);
        CHECK_THROWS_AS(k::axpy(1.0, a, y), Error);
        CHECK_THROWS_AS(k::logistic_nll(b, a, {}), Error);
        CHECK_THROWS_AS(k::logistic_nll(b, y, r), Error);
    });
}
