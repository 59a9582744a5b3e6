// Truncated Hardy-space arithmetic: inner products, evaluation, kernels,
// Blaschke expansions, coefficient products.

#include <catch2/catch.hpp>

#include "hardylab/blaschke.hpp"
#include "hardylab/hardy.hpp"
#include "hardylab/rng.hpp"

using namespace hardylab;

namespace {
const TruncationConfig cfg = TruncationConfig::with_degree(64);
}

TEST_CASE("inner product pairs Taylor coefficients") {
    auto one = HardyFunction::constant(1.0, cfg.degree);
    auto z = HardyFunction::monomial(1, cfg.degree);

    CHECK(inner_product(one, one) == Complex(1.0, 0.0));
    CHECK(inner_product(z, one) == Complex(0.0, 0.0));

    SECTION("conjugate symmetry and positivity on random pairs") {
        CounterRng rng(11);
        for (int t = 0; t < 20; ++t) {
            auto f = random_unit_function(rng, cfg, 0.8);
            auto h = random_unit_function(rng, cfg, 0.8);
            CHECK(std::abs(inner_product(f, h) - std::conj(inner_product(h, f))) < 1e-14);
            CHECK(inner_product(f, f).real() == Approx(1.0).margin(1e-12));
            CHECK(std::abs(inner_product(f, f).imag()) < 1e-14);
        }
    }

    SECTION("kernel pairing matches the geometric-series oracle") {
        const Complex w(0.37, 0.21), v(-0.55, 0.3);
        // independent summation of (v conj(w))^k up to the truncation degree
        Complex oracle = 0.0, term = 1.0;
        for (int k = 0; k <= cfg.degree; ++k) {
            oracle += term;
            term *= v * std::conj(w);
        }
        auto lhs = inner_product(kernel_function(w, cfg), kernel_function(v, cfg));
        CHECK(std::abs(lhs - oracle) < 1e-14);
        // and the closed form up to the geometric tail
        const Complex closed = 1.0 / (1.0 - v * std::conj(w));
        const double tail = std::pow(std::abs(v * std::conj(w)), cfg.dim()) /
                            (1.0 - std::abs(v * std::conj(w)));
        CHECK(std::abs(lhs - closed) <= tail + 1e-14);
    }

    SECTION("mismatched ambient degrees are rejected") {
        CHECK_THROWS_AS(inner_product(HardyFunction::zero(3), HardyFunction::zero(4)),
                        DimensionError);
    }
}

TEST_CASE("evaluation inside the disc") {
    CHECK(evaluate(HardyFunction::constant(1.0, cfg.degree), Complex(0.3, 0.0)) ==
          Complex(1.0, 0.0));
    CHECK(std::abs(evaluate(HardyFunction::monomial(2, cfg.degree), Complex(0.5, 0.0)) - 0.25) <
          1e-15);

    SECTION("Szego kernel closed form") {
        auto k = kernel_function(Complex(0.5, 0.0), cfg);
        const double tail = std::pow(0.25, cfg.dim()) / (1.0 - 0.25);
        CHECK(std::abs(evaluate(k, Complex(0.5, 0.0)) - 4.0 / 3.0) <= tail + 1e-14);
    }

    SECTION("points on or outside the circle are rejected") {
        CHECK_THROWS_AS(evaluate(HardyFunction::zero(4), Complex(1.0, 0.0)), DomainError);
        CHECK_THROWS_AS(kernel_function(Complex(0.0, 1.2), cfg), DomainError);
    }
}

TEST_CASE("kernel function coefficients") {
    SECTION("k_0 is the constant 1") {
        auto k0 = kernel_function(Complex(0.0, 0.0), cfg);
        CHECK(k0.coeffs(0) == Complex(1.0, 0.0));
        CHECK(k0.coeffs.tail(cfg.degree).norm() == 0.0);
    }

    SECTION("geometric coefficients at w = 0.5, N = 3") {
        auto k = kernel_function(Complex(0.5, 0.0), TruncationConfig::with_degree(3));
        CHECK(k.coeffs(0) == Complex(1.0, 0.0));
        CHECK(k.coeffs(1) == Complex(0.5, 0.0));
        CHECK(k.coeffs(2) == Complex(0.25, 0.0));
        CHECK(k.coeffs(3) == Complex(0.125, 0.0));
    }

    SECTION("reproducing pairing: <z^2, k_0.5> = 0.25") {
        auto k = kernel_function(Complex(0.5, 0.0), cfg);
        CHECK(std::abs(inner_product(HardyFunction::monomial(2, cfg.degree), k) -
                       Complex(0.25, 0.0)) < 1e-15);
    }

    SECTION("reproducing property over random polynomials and a grid") {
        CounterRng rng(23);
        for (int t = 0; t < 25; ++t) {
            auto f = random_unit_function(rng, cfg, 0.9);
            const double r = 0.9 * std::sqrt(rng.uniform());
            const double th = 2.0 * std::numbers::pi * rng.uniform();
            const Complex w(r * std::cos(th), r * std::sin(th));
            CHECK(std::abs(evaluate(f, w) - inner_product(f, kernel_function(w, cfg))) <= 1e-12);
        }
    }
}

TEST_CASE("Blaschke series expansion") {
    SECTION("a single zero at the origin is the coordinate function") {
        auto ts = blaschke_series(BlaschkeProduct({Complex(0.0, 0.0)}), cfg);
        CHECK(ts.series.coeffs(0) == Complex(0.0, 0.0));
        CHECK(ts.series.coeffs(1) == Complex(1.0, 0.0));
        CHECK(ts.series.coeffs.tail(cfg.degree - 1).norm() == 0.0);
        CHECK(ts.tail_bound == 0.0);
    }

    SECTION("single zero 0.5 matches the hand expansion") {
        auto ts = blaschke_series(BlaschkeProduct({Complex(0.5, 0.0)}), cfg);
        CHECK(ts.series.coeffs(0) == Complex(0.5, 0.0));
        for (int k = 1; k <= 10; ++k)
            CHECK(std::abs(ts.series.coeffs(k) - Complex(-0.75 * std::pow(0.5, k - 1), 0.0)) <
                  1e-15);
    }

    SECTION("a zero at the origin forces a vanishing constant term") {
        CounterRng rng(37);
        for (int t = 0; t < 10; ++t) {
            BlaschkeProduct b({Complex(0.0, 0.0), rng.point_in_disc(0.8), rng.point_in_disc(0.8)});
            auto ts = blaschke_series(b, cfg);
            CHECK(ts.series.coeffs(0) == Complex(0.0, 0.0));
            CHECK(std::abs(evaluate(ts.series, Complex(0.0, 0.0))) == 0.0);
        }
    }

    SECTION("series agrees with factored evaluation inside the disc") {
        CounterRng rng(41);
        for (int t = 0; t < 10; ++t) {
            BlaschkeProduct b({rng.point_in_disc(0.6), rng.point_in_disc(0.6)});
            auto ts = blaschke_series(b, cfg);
            for (int s = 0; s < 8; ++s) {
                const Complex z = rng.point_in_disc(0.9);
                CHECK(std::abs(evaluate(ts.series, z) - b.evaluate(z)) <= ts.tail_bound + 1e-13);
            }
        }
    }

    SECTION("modulus stays below one plus the tail bound") {
        CounterRng rng(43);
        BlaschkeProduct b({Complex(0.0, 0.0), rng.point_in_disc(0.6), rng.point_in_disc(0.6)});
        auto ts = blaschke_series(b, cfg);
        for (int i = 0; i < 32; ++i) {
            const double th = 2.0 * std::numbers::pi * i / 32.0;
            const Complex z = 0.9 * Complex(std::cos(th), std::sin(th));
            CHECK(std::abs(evaluate(ts.series, z)) <= 1.0 + ts.tail_bound + 1e-13);
        }
    }

    SECTION("zeros outside the disc are rejected") {
        CHECK_THROWS_AS(BlaschkeProduct({Complex(1.0, 0.5)}), DomainError);
    }
}

TEST_CASE("coefficient products") {
    auto z = HardyFunction::monomial(1, cfg.degree);

    SECTION("multiplying by one is the identity") {
        CounterRng rng(5);
        auto f = random_unit_function(rng, cfg, 0.7);
        auto one = HardyFunction::constant(1.0, cfg.degree);
        CHECK((multiply(one, f) - f).norm() == 0.0);
    }

    CHECK((multiply(z, z) - HardyFunction::monomial(2, cfg.degree)).norm() == 0.0);

    SECTION("convolution oracle at small degree") {
        const TruncationConfig small = TruncationConfig::with_degree(8);
        auto b = blaschke_series(BlaschkeProduct({Complex(0.5, 0.0)}), small).series;
        auto k = kernel_function(Complex(0.5, 0.0), small);
        auto prod = multiply(b, k);
        for (int m = 0; m <= small.degree; ++m) {
            Complex oracle = 0.0;
            for (int j = 0; j <= m; ++j) oracle += b.coeffs(j) * k.coeffs(m - j);
            CHECK(std::abs(prod.coeffs(m) - oracle) < 1e-15);
        }
        // cross-check through point evaluation, which never sees coefficients
        const Complex pt(0.21, -0.1);
        CHECK(std::abs(evaluate(prod, pt) - evaluate(b, pt) * evaluate(k, pt)) < 1e-3);
    }

    SECTION("truncation loss is zero when degrees fit") {
        auto f = HardyFunction::monomial(10, cfg.degree);
        auto h = HardyFunction::monomial(20, cfg.degree);
        CHECK(multiply_truncation_loss(f, h) == 0.0);
        auto g = HardyFunction::monomial(60, cfg.degree);
        CHECK(multiply_truncation_loss(g, h) == Approx(1.0));
    }

    SECTION("shifting preserves the norm below the top degree") {
        CounterRng rng(7);
        for (int t = 0; t < 10; ++t) {
            auto f = random_unit_function(rng, cfg, 0.6);
            f.coeffs(cfg.degree) = 0.0; // keep deg <= N-1
            CHECK(multiply(z, f).norm() == Approx(f.norm()).margin(1e-14));
        }
    }

    SECTION("Parseval consistency") {
        CounterRng rng(9);
        auto f = random_unit_function(rng, cfg, 0.5);
        double acc = 0.0;
        for (int k = 0; k <= cfg.degree; ++k) acc += std::norm(f.coeffs(k));
        CHECK(f.squared_norm() == Approx(acc).margin(1e-14));
    }
}

TEST_CASE("vector-valued functions stack channelwise") {
    auto f = HardyFunction::monomial(1, 8);
    auto g = HardyFunction::constant(2.0, 8);
    VectorHardyFunction v({f, g});
    CHECK(v.size() == 2);
    CHECK(v.squared_norm() == Approx(5.0));
    CHECK(v.stacked().size() == 18);
    CHECK_THROWS_AS(VectorHardyFunction({HardyFunction::zero(3), HardyFunction::zero(5)}),
                    DimensionError);
}
