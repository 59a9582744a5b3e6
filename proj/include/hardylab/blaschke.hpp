#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "hardylab/hardy.hpp"
#include "hardylab/types.hpp"

namespace hardylab {

/// Finite Blaschke product given by its zero list (repetition allowed).
/// A zero at the origin contributes the factor z; a zero a != 0 contributes
/// (a - z)/(1 - conj(a) z).
struct BlaschkeProduct {
    std::vector<Complex> zeros;

    BlaschkeProduct() = default;
    explicit BlaschkeProduct(std::vector<Complex> zs) : zeros(std::move(zs)) {
        for (const auto& z : zeros)
            if (std::abs(z) >= 1.0)
                throw DomainError("Blaschke zeros must lie in the open unit disc");
    }

    int order() const { return static_cast<int>(zeros.size()); }

    bool has_origin_zero() const {
        return std::any_of(zeros.begin(), zeros.end(),
                           [](Complex z) { return z == Complex(0.0, 0.0); });
    }

    double max_zero_modulus() const {
        double rho = 0.0;
        for (const auto& z : zeros) rho = std::max(rho, std::abs(z));
        return rho;
    }

    /// Exact point evaluation from the factored form; the oracle the series
    /// expansion is tested against.
    Complex evaluate(Complex z) const {
        if (std::abs(z) >= 1.0) throw DomainError("evaluation point must satisfy |z| < 1");
        Complex acc = 1.0;
        for (const auto& a : zeros) {
            if (a == Complex(0.0, 0.0))
                acc *= z;
            else
                acc *= (a - z) / (1.0 - std::conj(a) * z);
        }
        return acc;
    }

    /// Zeros with multiplicities, in first-appearance order.
    std::vector<std::pair<Complex, int>> grouped_zeros() const {
        std::vector<std::pair<Complex, int>> groups;
        for (const auto& z : zeros) {
            auto it = std::find_if(groups.begin(), groups.end(),
                                   [&](const auto& g) { return g.first == z; });
            if (it == groups.end())
                groups.emplace_back(z, 1);
            else
                it->second += 1;
        }
        return groups;
    }
};

/// A truncated power series together with an upper bound on the l1 mass of
/// the discarded coefficients.
struct TruncatedSeries {
    HardyFunction series;
    double tail_bound = 0.0;
};

/// Taylor expansion of the Blaschke product truncated to degree N.
///
/// Each origin zero shifts the coefficients; each factor (a - z)/(1 - conj(a) z)
/// is expanded by geometric series and convolved. Since every factor is
/// analytic, the retained coefficients are exact. The tail bound comes from a
/// Cauchy estimate on the product of the factorwise coefficient majorants
/// |a| + (1-|a|^2) x / (1 - |a| x), taken at the midpoint x0 between 1 and the
/// smallest majorant pole 1/rho.
inline TruncatedSeries blaschke_series(const BlaschkeProduct& b, const TruncationConfig& cfg) {
    const int n = cfg.dim();
    CVector acc = CVector::Zero(n);
    acc(0) = 1.0;
    for (const auto& a : b.zeros) {
        if (a == Complex(0.0, 0.0)) {
            CVector shifted = CVector::Zero(n);
            shifted.tail(n - 1) = acc.head(n - 1);
            acc = shifted;
            continue;
        }
        CVector factor(n);
        factor(0) = a;
        const Complex ca = std::conj(a);
        Complex pow = 1.0; // conj(a)^{k-1}
        for (int k = 1; k < n; ++k) {
            factor(k) = (std::norm(a) - 1.0) * pow;
            pow *= ca;
        }
        CVector next = CVector::Zero(n);
        for (int k = 0; k < n; ++k)
            for (int j = 0; j <= k; ++j) next(k) += acc(j) * factor(k - j);
        acc = next;
    }

    double tail = 0.0;
    const double rho = b.max_zero_modulus();
    if (rho > 0.0) {
        const double x0 = 0.5 * (1.0 + 1.0 / rho);
        double majorant = 1.0;
        for (const auto& a : b.zeros) {
            const double m = std::abs(a);
            if (m == 0.0)
                majorant *= x0;
            else
                majorant *= m + (1.0 - m * m) * x0 / (1.0 - m * x0);
        }
        const double q = 1.0 / x0;
        tail = majorant * std::pow(q, cfg.dim()) / (1.0 - q);
    }
    return {HardyFunction(std::move(acc)), tail};
}

// ---------------------------------------------------------------------------
// Symbols of Toeplitz operators: finite Fourier data or rational Blaschke data.
// ---------------------------------------------------------------------------

/// sum_k coeffs[k] z^k
struct AnalyticPolynomial {
    std::vector<Complex> coeffs;
};

/// sum_k coeffs[k] conj(z)^k, i.e. Fourier coefficients at lags 0, -1, -2, ...
struct CoAnalyticPolynomial {
    std::vector<Complex> coeffs;
};

/// Fourier coefficients phi_hat(min_lag + i) = coeffs[i].
struct FourierWindow {
    int min_lag = 0;
    std::vector<Complex> coeffs;
};

struct BlaschkeSymbol {
    BlaschkeProduct product;
};

/// conj(B), with Fourier coefficients at nonpositive lags.
struct ConjugateBlaschkeSymbol {
    BlaschkeProduct product;
};

using SymbolSpec = std::variant<AnalyticPolynomial, CoAnalyticPolynomial, FourierWindow,
                                BlaschkeSymbol, ConjugateBlaschkeSymbol>;

/// Fourier coefficients of the symbol for lags -N..N, plus the truncation
/// residual carried by Blaschke expansions (zero for finite Fourier data).
struct SymbolFourierData {
    std::map<int, Complex> coefficients;
    double truncation_residual = 0.0;

    Complex at(int lag) const {
        auto it = coefficients.find(lag);
        return it == coefficients.end() ? Complex(0.0, 0.0) : it->second;
    }
};

inline SymbolFourierData fourier_data(const SymbolSpec& sym, const TruncationConfig& cfg) {
    SymbolFourierData out;
    if (const auto* p = std::get_if<AnalyticPolynomial>(&sym)) {
        for (int k = 0; k < static_cast<int>(p->coeffs.size()) && k <= cfg.degree; ++k)
            out.coefficients[k] = p->coeffs[k];
    } else if (const auto* p = std::get_if<CoAnalyticPolynomial>(&sym)) {
        for (int k = 0; k < static_cast<int>(p->coeffs.size()) && k <= cfg.degree; ++k)
            out.coefficients[-k] = p->coeffs[k];
    } else if (const auto* p = std::get_if<FourierWindow>(&sym)) {
        for (int i = 0; i < static_cast<int>(p->coeffs.size()); ++i) {
            const int lag = p->min_lag + i;
            if (lag >= -cfg.degree && lag <= cfg.degree) out.coefficients[lag] = p->coeffs[i];
        }
    } else if (const auto* p = std::get_if<BlaschkeSymbol>(&sym)) {
        auto ts = blaschke_series(p->product, cfg);
        for (int k = 0; k <= cfg.degree; ++k) out.coefficients[k] = ts.series.coeffs(k);
        out.truncation_residual = ts.tail_bound;
    } else if (const auto* p = std::get_if<ConjugateBlaschkeSymbol>(&sym)) {
        auto ts = blaschke_series(p->product, cfg);
        for (int k = 0; k <= cfg.degree; ++k) out.coefficients[-k] = std::conj(ts.series.coeffs(k));
        out.truncation_residual = ts.tail_bound;
    }
    return out;
}

/// The Blaschke data of an inner symbol, if the spec is one of the
/// computable inner variants.
inline std::optional<BlaschkeProduct> inner_blaschke(const SymbolSpec& sym) {
    if (const auto* p = std::get_if<BlaschkeSymbol>(&sym)) return p->product;
    return std::nullopt;
}

inline std::string describe(const SymbolSpec& sym) {
    struct Visitor {
        std::string operator()(const AnalyticPolynomial& p) const {
            return "analytic polynomial of degree " + std::to_string(p.coeffs.size() - 1);
        }
        std::string operator()(const CoAnalyticPolynomial& p) const {
            return "co-analytic polynomial of degree " + std::to_string(p.coeffs.size() - 1);
        }
        std::string operator()(const FourierWindow& p) const {
            return "Fourier window [" + std::to_string(p.min_lag) + ", " +
                   std::to_string(p.min_lag + static_cast<int>(p.coeffs.size()) - 1) + "]";
        }
        std::string operator()(const BlaschkeSymbol& p) const {
            return "Blaschke product with " + std::to_string(p.product.order()) + " zero(s)";
        }
        std::string operator()(const ConjugateBlaschkeSymbol& p) const {
            return "conjugate Blaschke product with " + std::to_string(p.product.order()) +
                   " zero(s)";
        }
    };
    return std::visit(Visitor{}, sym);
}

} // namespace hardylab
