#pragma once

#include <algorithm>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "hardylab/blaschke.hpp"
#include "hardylab/hardy.hpp"
#include "hardylab/operators.hpp"
#include "hardylab/types.hpp"

namespace hardylab {

/// Closed subspace of the truncated space, held as an orthonormal basis
/// matrix. A zero-dimensional subspace has zero columns.
struct Subspace {
    CMatrix basis; // (N+1) x d, orthonormal columns

    int ambient_degree() const { return static_cast<int>(basis.rows()) - 1; }
    int dim() const { return static_cast<int>(basis.cols()); }
    bool is_zero() const { return dim() == 0; }

    CVector project(const CVector& v) const {
        if (is_zero()) return CVector::Zero(v.size());
        return basis * (basis.adjoint() * v);
    }
    CVector project_out(const CVector& v) const { return v - project(v); }

    /// Distance of a vector from the subspace.
    double membership_residual(const CVector& v) const { return project_out(v).norm(); }

    std::vector<HardyFunction> basis_functions() const {
        std::vector<HardyFunction> out;
        out.reserve(dim());
        for (int i = 0; i < dim(); ++i) out.emplace_back(CVector(basis.col(i)));
        return out;
    }
};

inline Subspace zero_subspace(const TruncationConfig& cfg) {
    return {CMatrix::Zero(cfg.dim(), 0)};
}

inline Subspace full_space(const TruncationConfig& cfg) {
    return {CMatrix::Identity(cfg.dim(), cfg.dim())};
}

/// Orthonormal basis of the column span, dropping directions whose singular
/// value falls below eps_rank times the largest one.
inline Subspace orthonormalize(const CMatrix& columns, const TruncationConfig& cfg) {
    if (columns.cols() == 0) return {CMatrix::Zero(columns.rows(), 0)};
    Eigen::JacobiSVD<CMatrix> svd(columns, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    if (smax == 0.0) return {CMatrix::Zero(columns.rows(), 0)};
    int d = 0;
    while (d < sv.size() && sv(d) > cfg.eps_rank * smax) ++d;
    return {svd.matrixU().leftCols(d).eval()};
}

inline Subspace orthonormalize(const std::vector<HardyFunction>& vectors,
                               const TruncationConfig& cfg) {
    if (vectors.empty()) return zero_subspace(cfg);
    CMatrix cols(vectors.front().coeffs.size(), vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (vectors[i].coeffs.size() != cols.rows())
            throw DimensionError("orthonormalize: mixed ambient degrees");
        cols.col(static_cast<int>(i)) = vectors[i].coeffs;
    }
    return orthonormalize(cols, cfg);
}

inline Subspace ortho_complement(const Subspace& m) {
    const int n = m.ambient_degree() + 1;
    if (m.is_zero()) return {CMatrix::Identity(n, n)};
    Eigen::JacobiSVD<CMatrix> svd(m.basis, Eigen::ComputeFullU);
    return {svd.matrixU().rightCols(n - m.dim()).eval()};
}

/// Operator norm of (I - P_M) T P_M; zero exactly when M is T-invariant.
inline double invariance_residual(const OperatorMatrix& t, const Subspace& m) {
    if (t.entries.cols() != m.basis.rows())
        throw DimensionError("operator and subspace ambient degrees differ");
    if (m.is_zero()) return 0.0;
    CMatrix mapped = t.entries * m.basis;
    mapped -= m.basis * (m.basis.adjoint() * mapped);
    return mapped.operatorNorm();
}

inline bool is_invariant(const OperatorMatrix& t, const Subspace& m, const TruncationConfig& cfg) {
    return invariance_residual(t, m) <= cfg.eps_residual * std::max(1.0, operator_norm(t));
}

namespace detail {

/// Principal-angle split of M against S: cosines from the SVD of
/// Qm^H Qs; left directions Qm * U are an orthonormal basis of M ordered by
/// decreasing cosine.
struct PrincipalSplit {
    CMatrix directions;      // (N+1) x dim(M), orthonormal, ordered
    Eigen::VectorXd cosines; // length min(dim M, dim S), descending
};

inline PrincipalSplit principal_split(const Subspace& m, const Subspace& s) {
    PrincipalSplit out;
    if (m.is_zero()) {
        out.directions = m.basis;
        out.cosines = Eigen::VectorXd(0);
        return out;
    }
    if (s.is_zero()) {
        out.directions = m.basis;
        out.cosines = Eigen::VectorXd(0);
        return out;
    }
    CMatrix cross = m.basis.adjoint() * s.basis;
    Eigen::JacobiSVD<CMatrix> svd(cross, Eigen::ComputeFullU);
    out.directions = m.basis * svd.matrixU();
    out.cosines = svd.singularValues();
    return out;
}

} // namespace detail

/// Intersection via principal angles: directions of M whose angle with S has
/// cosine at least 1 - eps_rank.
inline Subspace intersect(const Subspace& m, const Subspace& s, const TruncationConfig& cfg) {
    auto split = detail::principal_split(m, s);
    int d = 0;
    while (d < split.cosines.size() && split.cosines(d) >= 1.0 - cfg.eps_rank) ++d;
    return {split.directions.leftCols(d).eval()};
}

/// M minus its intersection with S: the complement of intersect(M, S)
/// inside M, so that dim(M) = dim(intersect) + dim(ortho_diff).
inline Subspace ortho_diff(const Subspace& m, const Subspace& s, const TruncationConfig& cfg) {
    auto split = detail::principal_split(m, s);
    int d = 0;
    while (d < split.cosines.size() && split.cosines(d) >= 1.0 - cfg.eps_rank) ++d;
    return {split.directions.rightCols(m.dim() - d).eval()};
}

/// Model space K_B of a finite Blaschke product: the span of reproducing
/// kernels at the zeros, with derivative kernels supplying the extra
/// directions at repeated zeros. Dimension equals the number of zeros.
inline Subspace model_space(const BlaschkeProduct& b, const TruncationConfig& cfg) {
    std::vector<HardyFunction> raw;
    for (const auto& [zero, multiplicity] : b.grouped_zeros())
        for (int j = 0; j < multiplicity; ++j) raw.push_back(derivative_kernel(zero, j, cfg));
    return orthonormalize(raw, cfg);
}

/// Truncated realization of B H^2: the orthogonal complement of the model
/// space, i.e. the polynomials vanishing at every zero of B with its
/// multiplicity. This keeps dim = N+1-n exact, which the dimension lemma
/// needs.
inline Subspace blaschke_range(const BlaschkeProduct& b, const TruncationConfig& cfg) {
    return ortho_complement(model_space(b, cfg));
}

/// Result of the near-invariance test relative to a Blaschke product.
struct NearlyReport {
    bool is_nearly = false;
    bool vacuous = false; ///< M intersects B H^2 trivially
    double worst_residual = 0.0;
    int intersection_dim = 0;
};

/// Checks T_z^* (M cap B H^2) subset M on an orthonormal basis of the
/// intersection. Requires a zero of B at the origin.
inline NearlyReport nearly_invariant_check(const Subspace& m, const BlaschkeProduct& b,
                                           const TruncationConfig& cfg) {
    if (!b.has_origin_zero())
        throw PreconditionError("near-invariance is defined for Blaschke products vanishing at 0");
    NearlyReport rep;
    Subspace j = intersect(m, blaschke_range(b, cfg), cfg);
    rep.intersection_dim = j.dim();
    if (j.is_zero()) {
        rep.is_nearly = true;
        rep.vacuous = true;
        return rep;
    }
    const auto back = backshift_matrix(TruncationConfig::with_degree(m.ambient_degree()));
    for (int i = 0; i < j.dim(); ++i) {
        const double r = m.membership_residual(back.entries * j.basis.col(i));
        rep.worst_residual = std::max(rep.worst_residual, r);
    }
    rep.is_nearly = rep.worst_residual <= cfg.eps_residual;
    return rep;
}

/// Defect data of an almost invariant subspace: the effective span of
/// P_{M^perp} T M and its dimension.
struct DefectResult {
    int defect = 0;
    std::vector<HardyFunction> defect_basis;
    double residual = 0.0; ///< leakage of T M outside M + defect space
    Subspace defect_space;
};

/// Defect space of M under T. Singular values of P_{M^perp} T Q_M below
/// eps_residual * max(1, ||T||) are truncation-or-rounding noise, not genuine
/// defect directions; the relative eps_rank cut is applied above that floor.
inline DefectResult almost_invariant_defect(const OperatorMatrix& t, const Subspace& m,
                                            const TruncationConfig& cfg) {
    DefectResult out;
    const int n = m.ambient_degree() + 1;
    out.defect_space = {CMatrix::Zero(n, 0)};
    if (m.is_zero()) return out;

    CMatrix leak = t.entries * m.basis;
    leak -= m.basis * (m.basis.adjoint() * leak);
    Eigen::JacobiSVD<CMatrix> svd(leak, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    const double floor = cfg.eps_residual * std::max(1.0, operator_norm(t));
    const double cut = std::max(floor, sv.size() > 0 ? cfg.eps_rank * sv(0) : 0.0);
    int d = 0;
    while (d < sv.size() && sv(d) > cut) ++d;

    out.defect = d;
    out.defect_space = {svd.matrixU().leftCols(d).eval()};
    out.defect_basis = out.defect_space.basis_functions();

    CMatrix residual = leak - out.defect_space.basis * (out.defect_space.basis.adjoint() * leak);
    out.residual = residual.size() == 0 ? 0.0 : residual.operatorNorm();
    return out;
}

/// Numerical nullspace: right singular vectors with singular value at most
/// eps_rank * sigma_max.
inline Subspace kernel(const OperatorMatrix& t, const TruncationConfig& cfg) {
    Eigen::JacobiSVD<CMatrix> svd(t.entries, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    const int n = static_cast<int>(t.entries.cols());
    int first_null = 0;
    while (first_null < sv.size() && sv(first_null) > cfg.eps_rank * smax) ++first_null;
    return {svd.matrixV().rightCols(n - first_null).eval()};
}

} // namespace hardylab
