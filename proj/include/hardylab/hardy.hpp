#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "hardylab/types.hpp"

namespace hardylab {

/// Element of the truncated Hardy space: the coefficient a_k of z^k is
/// coeffs[k], 0 <= k <= N. The squared norm is the plain l2 norm of the
/// coefficient vector.
struct HardyFunction {
    CVector coeffs;

    HardyFunction() = default;
    explicit HardyFunction(CVector c) : coeffs(std::move(c)) {}

    int ambient_degree() const { return static_cast<int>(coeffs.size()) - 1; }
    double norm() const { return coeffs.norm(); }
    double squared_norm() const { return coeffs.squaredNorm(); }

    static HardyFunction zero(int degree) {
        return HardyFunction(CVector::Zero(degree + 1));
    }
    static HardyFunction constant(Complex value, int degree) {
        CVector c = CVector::Zero(degree + 1);
        c(0) = value;
        return HardyFunction(std::move(c));
    }
    /// The monomial z^k.
    static HardyFunction monomial(int k, int degree) {
        CVector c = CVector::Zero(degree + 1);
        if (k <= degree) c(k) = 1.0;
        return HardyFunction(std::move(c));
    }

    HardyFunction& operator+=(const HardyFunction& other) {
        coeffs += other.coeffs;
        return *this;
    }
    HardyFunction& operator-=(const HardyFunction& other) {
        coeffs -= other.coeffs;
        return *this;
    }
    HardyFunction& operator*=(Complex s) {
        coeffs *= s;
        return *this;
    }

    friend HardyFunction operator+(HardyFunction a, const HardyFunction& b) { return a += b; }
    friend HardyFunction operator-(HardyFunction a, const HardyFunction& b) { return a -= b; }
    friend HardyFunction operator*(Complex s, HardyFunction f) { return f *= s; }
};

inline void require_same_ambient(const HardyFunction& f, const HardyFunction& h) {
    if (f.coeffs.size() != h.coeffs.size())
        throw DimensionError("Hardy functions live in different truncated spaces");
}

/// l2 pairing of Taylor coefficients, sum_k a_k conj(b_k). Linear in the
/// first argument, conjugate-linear in the second.
inline Complex inner_product(const HardyFunction& f, const HardyFunction& h) {
    require_same_ambient(f, h);
    return h.coeffs.dot(f.coeffs); // Eigen's dot conjugates the receiver
}

/// Point evaluation sum_k a_k z^k by Horner's scheme. Only defined inside
/// the open disc.
inline Complex evaluate(const HardyFunction& f, Complex z) {
    if (std::abs(z) >= 1.0) throw DomainError("evaluation point must satisfy |z| < 1");
    Complex acc = 0.0;
    for (int k = f.ambient_degree(); k >= 0; --k) acc = acc * z + f.coeffs(k);
    return acc;
}

/// Truncated Szego kernel at w: coefficients conj(w)^k. Pairing against it
/// reproduces point evaluation exactly for polynomials of degree <= N.
inline HardyFunction kernel_function(Complex w, const TruncationConfig& cfg) {
    if (std::abs(w) >= 1.0) throw DomainError("kernel point must satisfy |w| < 1");
    CVector c(cfg.dim());
    Complex pow = 1.0;
    for (int k = 0; k < cfg.dim(); ++k) {
        c(k) = pow;
        pow *= std::conj(w);
    }
    return HardyFunction(std::move(c));
}

/// d^order/d(conj w)^order of the kernel at w; spans model-space directions
/// for repeated Blaschke zeros. order = 0 is the kernel itself.
inline HardyFunction derivative_kernel(Complex w, int order, const TruncationConfig& cfg) {
    if (std::abs(w) >= 1.0) throw DomainError("kernel point must satisfy |w| < 1");
    CVector c = CVector::Zero(cfg.dim());
    for (int k = order; k < cfg.dim(); ++k) {
        double falling = 1.0;
        for (int j = 0; j < order; ++j) falling *= static_cast<double>(k - j);
        c(k) = falling * std::pow(std::conj(w), k - order);
    }
    return HardyFunction(std::move(c));
}

/// Coefficient convolution truncated to the shared ambient degree. Exact
/// whenever deg(f) + deg(h) <= N.
inline HardyFunction multiply(const HardyFunction& f, const HardyFunction& h) {
    require_same_ambient(f, h);
    const int n = f.ambient_degree();
    CVector c = CVector::Zero(n + 1);
    for (int k = 0; k <= n; ++k)
        for (int j = 0; j <= k; ++j) c(k) += f.coeffs(j) * h.coeffs(k - j);
    return HardyFunction(std::move(c));
}

/// l2 mass of the convolution coefficients beyond degree N that multiply()
/// discards.
inline double multiply_truncation_loss(const HardyFunction& f, const HardyFunction& h) {
    require_same_ambient(f, h);
    const int n = f.ambient_degree();
    double lost = 0.0;
    for (int k = n + 1; k <= 2 * n; ++k) {
        Complex c = 0.0;
        for (int j = k - n; j <= n; ++j) c += f.coeffs(j) * h.coeffs(k - j);
        lost += std::norm(c);
    }
    return std::sqrt(lost);
}

/// p parallel scalar channels sharing one ambient degree; the norm is the
/// stacked l2 norm.
struct VectorHardyFunction {
    std::vector<HardyFunction> channels;

    VectorHardyFunction() = default;
    explicit VectorHardyFunction(std::vector<HardyFunction> ch) : channels(std::move(ch)) {
        for (std::size_t i = 1; i < channels.size(); ++i)
            require_same_ambient(channels[0], channels[i]);
    }

    int size() const { return static_cast<int>(channels.size()); }
    int ambient_degree() const {
        return channels.empty() ? -1 : channels.front().ambient_degree();
    }
    double squared_norm() const {
        double s = 0.0;
        for (const auto& ch : channels) s += ch.squared_norm();
        return s;
    }
    double norm() const { return std::sqrt(squared_norm()); }

    /// Channels stacked into one column vector of length p*(N+1).
    CVector stacked() const {
        const int d = ambient_degree() + 1;
        CVector v(static_cast<int>(channels.size()) * d);
        for (int i = 0; i < size(); ++i) v.segment(i * d, d) = channels[i].coeffs;
        return v;
    }

    static VectorHardyFunction zero(int p, int degree) {
        return VectorHardyFunction(std::vector<HardyFunction>(p, HardyFunction::zero(degree)));
    }

    /// Evaluation at a point, one value per channel.
    Eigen::VectorXcd value_at_origin() const {
        Eigen::VectorXcd v(size());
        for (int i = 0; i < size(); ++i) v(i) = channels[i].coeffs(0);
        return v;
    }
};

} // namespace hardylab
