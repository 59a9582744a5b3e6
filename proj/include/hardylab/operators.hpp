#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "hardylab/blaschke.hpp"
#include "hardylab/hardy.hpp"
#include "hardylab/types.hpp"

namespace hardylab {

/// Dense operator on the truncated Hardy space, with a provenance label.
struct OperatorMatrix {
    CMatrix entries;
    std::string label;

    int ambient_degree() const { return static_cast<int>(entries.rows()) - 1; }

    HardyFunction apply(const HardyFunction& f) const {
        if (entries.cols() != f.coeffs.size())
            throw DimensionError("operator and function ambient degrees differ");
        return HardyFunction(entries * f.coeffs);
    }
};

inline OperatorMatrix adjoint_of(const OperatorMatrix& t) {
    return {t.entries.adjoint(), "adjoint(" + t.label + ")"};
}

inline double operator_norm(const OperatorMatrix& t) {
    return t.entries.operatorNorm();
}

inline OperatorMatrix identity_matrix(const TruncationConfig& cfg) {
    return {CMatrix::Identity(cfg.dim(), cfg.dim()), "identity"};
}

/// Multiplication by z: ones on the first subdiagonal. z^N is annihilated
/// by truncation.
inline OperatorMatrix shift_matrix(const TruncationConfig& cfg) {
    CMatrix m = CMatrix::Zero(cfg.dim(), cfg.dim());
    for (int j = 0; j + 1 < cfg.dim(); ++j) m(j + 1, j) = 1.0;
    return {std::move(m), "shift"};
}

/// Adjoint of the shift; the exact restriction of the backward shift to
/// polynomials of degree <= N.
inline OperatorMatrix backshift_matrix(const TruncationConfig& cfg) {
    CMatrix m = CMatrix::Zero(cfg.dim(), cfg.dim());
    for (int j = 0; j + 1 < cfg.dim(); ++j) m(j, j + 1) = 1.0;
    return {std::move(m), "backshift"};
}

/// Toeplitz matrix with entries phi_hat(j - k).
inline OperatorMatrix toeplitz_matrix(const SymbolSpec& sym, const TruncationConfig& cfg) {
    const auto data = fourier_data(sym, cfg);
    CMatrix m(cfg.dim(), cfg.dim());
    for (int j = 0; j < cfg.dim(); ++j)
        for (int k = 0; k < cfg.dim(); ++k) m(j, k) = data.at(j - k);
    return {std::move(m), "toeplitz(" + describe(sym) + ")"};
}

/// Rank-one operator output (x) functional: f -> <f, functional> output.
struct RankOneTerm {
    HardyFunction output;
    HardyFunction functional;
};

inline CMatrix rank_one_matrix(const RankOneTerm& t) {
    require_same_ambient(t.output, t.functional);
    return t.output.coeffs * t.functional.coeffs.adjoint();
}

enum class BaseOperator { BackwardShift, ForwardShift, ToeplitzAdjoint, Toeplitz };

/// Base operator plus a signed sum of rank-one terms. The number of terms is
/// the nominal rank; the effective rank of the correction can be lower.
struct PerturbationSpec {
    BaseOperator base = BaseOperator::BackwardShift;
    std::optional<SymbolSpec> symbol; // required for the Toeplitz bases
    std::vector<RankOneTerm> terms;
    int sign = +1;

    int nominal_rank() const { return static_cast<int>(terms.size()); }
};

inline std::string describe(const PerturbationSpec& spec) {
    std::ostringstream os;
    switch (spec.base) {
        case BaseOperator::BackwardShift: os << "backshift"; break;
        case BaseOperator::ForwardShift: os << "shift"; break;
        case BaseOperator::ToeplitzAdjoint:
            os << "toeplitz_adjoint(" << (spec.symbol ? describe(*spec.symbol) : "?") << ")";
            break;
        case BaseOperator::Toeplitz:
            os << "toeplitz(" << (spec.symbol ? describe(*spec.symbol) : "?") << ")";
            break;
    }
    if (!spec.terms.empty())
        os << (spec.sign >= 0 ? " + " : " - ") << spec.terms.size() << " rank-one term(s)";
    return os.str();
}

inline OperatorMatrix base_matrix(const PerturbationSpec& spec, const TruncationConfig& cfg) {
    switch (spec.base) {
        case BaseOperator::BackwardShift: return backshift_matrix(cfg);
        case BaseOperator::ForwardShift: return shift_matrix(cfg);
        case BaseOperator::ToeplitzAdjoint: {
            if (!spec.symbol) throw ConfigError("ToeplitzAdjoint base requires a symbol");
            auto t = toeplitz_matrix(*spec.symbol, cfg);
            return {t.entries.adjoint().eval(), "adjoint " + t.label};
        }
        case BaseOperator::Toeplitz:
            if (!spec.symbol) throw ConfigError("Toeplitz base requires a symbol");
            return toeplitz_matrix(*spec.symbol, cfg);
    }
    throw ConfigError("unknown base operator");
}

inline OperatorMatrix assemble(const PerturbationSpec& spec, const TruncationConfig& cfg) {
    OperatorMatrix op = base_matrix(spec, cfg);
    for (const auto& t : spec.terms) {
        if (t.output.coeffs.size() != cfg.dim())
            throw DimensionError("rank-one term ambient degree differs from config");
        op.entries += static_cast<double>(spec.sign) * rank_one_matrix(t);
    }
    op.label = describe(spec);
    return op;
}

enum class SarasonFlavor { AdjointFirst, FunctionFirst };

/// Sarason-type backward perturbation built from an orthonormal family fs:
/// AdjointFirst:  T_phi^* - sum (T_phi^* f_i) (x) f_i  =  T_phi^* (I - P_span(fs))
/// FunctionFirst: T_phi^* - sum f_i (x) (T_phi^* f_i)
inline PerturbationSpec sarason_backward(const SymbolSpec& phi,
                                         const std::vector<HardyFunction>& fs,
                                         SarasonFlavor flavor, const TruncationConfig& cfg) {
    // Orthonormality of fs is a stated hypothesis of every theorem that uses
    // these perturbations; reject bad input with the measured Gram defect.
    if (!fs.empty()) {
        CMatrix gram(fs.size(), fs.size());
        for (std::size_t i = 0; i < fs.size(); ++i)
            for (std::size_t j = 0; j < fs.size(); ++j)
                gram(static_cast<int>(i), static_cast<int>(j)) = inner_product(fs[j], fs[i]);
        const double defect =
            (gram - CMatrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
        if (defect > cfg.eps_residual) {
            std::ostringstream os;
            os << "sarason_backward requires an orthonormal family; Gram defect " << defect
               << ", Gram matrix:\n"
               << gram;
            throw PreconditionError(os.str(), defect);
        }
    }

    OperatorMatrix tphi_adj = {toeplitz_matrix(phi, cfg).entries.adjoint().eval(), ""};
    PerturbationSpec spec;
    spec.base = BaseOperator::ToeplitzAdjoint;
    spec.symbol = phi;
    spec.sign = -1;
    for (const auto& f : fs) {
        HardyFunction tf = tphi_adj.apply(f);
        if (flavor == SarasonFlavor::AdjointFirst)
            spec.terms.push_back({tf, f});
        else
            spec.terms.push_back({f, tf});
    }
    return spec;
}

/// Norm trace ||S^n h|| for n = 1..n_max, with the decay verdict against
/// eps_residual * ||h||. Pass the adjoint explicitly if that orientation is
/// wanted.
struct DecayProfile {
    std::vector<double> norms;
    bool pass = false;
};

inline DecayProfile c0_decay_profile(const OperatorMatrix& s, const HardyFunction& h, int n_max,
                                     const TruncationConfig& cfg) {
    if (n_max < 1) throw DomainError("decay profile needs n_max >= 1");
    DecayProfile out;
    CVector v = h.coeffs;
    for (int n = 0; n < n_max; ++n) {
        v = s.entries * v;
        out.norms.push_back(v.norm());
    }
    out.pass = out.norms.back() <= cfg.eps_residual * h.norm();
    return out;
}

} // namespace hardylab
