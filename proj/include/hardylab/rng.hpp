#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "hardylab/hardy.hpp"
#include "hardylab/subspace.hpp"
#include "hardylab/types.hpp"

namespace hardylab {

/// Counter-based deterministic generator: draw k is a stateless mix of
/// (seed, k), so identical seeds reproduce identical streams on any platform
/// with IEEE-754 doubles.
class CounterRng {
  public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t x = seed_ + 0x9E3779B97F4A7C15ULL * ++counter_;
        x ^= x >> 30;
        x *= 0xBF58476D1CE4E5B9ULL;
        x ^= x >> 27;
        x *= 0x94D049BB133111EBULL;
        x ^= x >> 31;
        return x;
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u = 0.0;
        do {
            u = uniform();
        } while (u == 0.0);
        const double r = std::sqrt(-2.0 * std::log(u));
        const double theta = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    Complex gaussian_complex() {
        const double re = gaussian();
        const double im = gaussian();
        return Complex(re, im) / std::sqrt(2.0);
    }

    /// Uniform point in the closed disc of the given radius.
    Complex point_in_disc(double radius) {
        const double r = radius * std::sqrt(uniform());
        const double theta = 2.0 * std::numbers::pi * uniform();
        return Complex(r * std::cos(theta), r * std::sin(theta));
    }

  private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Random unit-norm function with coefficients damped by decay^k. Smaller
/// decay keeps random operators far from the unit circle spectrum, which is
/// what makes the iterative decompositions contract quickly.
inline HardyFunction random_unit_function(CounterRng& rng, const TruncationConfig& cfg,
                                          double decay = 0.5) {
    CVector c(cfg.dim());
    double damp = 1.0;
    for (int k = 0; k < cfg.dim(); ++k) {
        c(k) = damp * rng.gaussian_complex();
        damp *= decay;
    }
    c /= c.norm();
    return HardyFunction(std::move(c));
}

/// Orthonormal family of m random decaying functions.
inline std::vector<HardyFunction> random_orthonormal_family(CounterRng& rng,
                                                            const TruncationConfig& cfg, int m,
                                                            double decay = 0.5) {
    std::vector<HardyFunction> raw;
    raw.reserve(m);
    for (int i = 0; i < m; ++i) raw.push_back(random_unit_function(rng, cfg, decay));
    Subspace s = orthonormalize(raw, cfg);
    return s.basis_functions();
}

/// Random unit vector inside a given subspace.
inline HardyFunction random_member(CounterRng& rng, const Subspace& m) {
    CVector coords(m.dim());
    for (int i = 0; i < m.dim(); ++i) coords(i) = rng.gaussian_complex();
    CVector v = m.basis * coords;
    v /= v.norm();
    return HardyFunction(std::move(v));
}

/// Random unit vector inside the subspace with a decaying coefficient
/// profile: the projection of a decaying random function. Flat members carry
/// mass at the top degrees and stretch the nonnormal transient of backshift
/// iterations across the whole round budget.
inline HardyFunction random_decaying_member(CounterRng& rng, const Subspace& m,
                                            const TruncationConfig& cfg, double decay = 0.3) {
    HardyFunction h = random_unit_function(rng, cfg, decay);
    CVector v = m.project(h.coeffs);
    const double n = v.norm();
    if (n < 1e-12) return random_member(rng, m); // seed happened to miss M
    v /= n;
    return HardyFunction(std::move(v));
}

/// Haar-ish random unitary of size d (QR of a Gaussian matrix).
inline CMatrix random_unitary(CounterRng& rng, int d) {
    CMatrix g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = rng.gaussian_complex();
    Eigen::HouseholderQR<CMatrix> qr(g);
    CMatrix q = qr.householderQ();
    return q.leftCols(d);
}

/// Invariant subspace of an operator: the orbit span of a few random seed
/// vectors, closed under application of the operator. Incremental
/// Gram-Schmidt with a second reorthogonalization pass; images that project
/// back into the span within eps_rank are absorbed, everything else extends
/// the basis and is queued for its own image.
inline Subspace orbit_invariant_subspace(CounterRng& rng, const OperatorMatrix& op,
                                         const TruncationConfig& cfg, int seed_count,
                                         double decay = 0.5) {
    const int n = cfg.dim();
    CMatrix basis(n, n);
    int d = 0;
    auto absorb = [&](CVector v) {
        for (int pass = 0; pass < 2; ++pass)
            for (int i = 0; i < d; ++i) v -= basis.col(i) * basis.col(i).dot(v);
        const double r = v.norm();
        if (r <= cfg.eps_rank || d == n) return false;
        basis.col(d++) = v / r;
        return true;
    };
    for (int i = 0; i < seed_count; ++i) absorb(random_unit_function(rng, cfg, decay).coeffs);
    for (int head = 0; head < d && d < n; ++head) absorb(op.entries * basis.col(head));
    return Subspace{basis.leftCols(d).eval()};
}

} // namespace hardylab
