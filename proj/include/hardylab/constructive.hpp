#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hardylab/blaschke.hpp"
#include "hardylab/hardy.hpp"
#include "hardylab/operators.hpp"
#include "hardylab/report.hpp"
#include "hardylab/subspace.hpp"
#include "hardylab/types.hpp"

namespace hardylab {

namespace detail {

/// Inner-symbol data of a perturbation base that acts as a Toeplitz adjoint.
/// The plain backward shift is the Blaschke product with the single zero 0.
inline BlaschkeProduct adjoint_base_blaschke(const PerturbationSpec& spec) {
    if (spec.base == BaseOperator::BackwardShift) return BlaschkeProduct({Complex(0.0, 0.0)});
    if (spec.base != BaseOperator::ToeplitzAdjoint)
        throw PreconditionError("decomposition requires a Toeplitz-adjoint (or backshift) base");
    if (!spec.symbol) throw PreconditionError("Toeplitz-adjoint base carries no symbol");
    auto b = inner_blaschke(*spec.symbol);
    if (!b) throw PreconditionError("decomposition requires an inner (Blaschke) symbol");
    if (!b->has_origin_zero())
        throw PreconditionError("decomposition requires the inner symbol to vanish at 0");
    return *b;
}

inline HardyFunction span_combination(const CMatrix& basis, const VectorHardyFunction& coords) {
    const int n = static_cast<int>(basis.rows());
    HardyFunction acc = HardyFunction::zero(n - 1);
    for (int i = 0; i < coords.size(); ++i)
        acc += multiply(HardyFunction(CVector(basis.col(i))), coords.channels[i]);
    return acc;
}

} // namespace detail

/// Output of the iterative representation f = F0 F + f0 induced by an
/// invariant subspace of a perturbed Toeplitz adjoint.
struct DecompositionResult {
    CMatrix w_basis;                          ///< F0: orthonormal basis of span{P_M u_i}
    std::vector<Eigen::VectorXcd> coeff_terms; ///< A_j, the K_phi-constant coordinates
    std::vector<HardyFunction> kernel_parts;   ///< P_{K_phi} g_j, j = 1, 2, ...
    VectorHardyFunction F;                     ///< sum_j A_j phi^j, truncated
    HardyFunction f0;                          ///< sum_j (P_{K_phi} g_j) phi^{j-1}, truncated
    std::vector<double> residual_norms;        ///< ||l_1||, ||l_2||, ...
    double norm_gap = 0.0;             ///< | ||f||^2 - ||F||^2 - ||f0||^2 |
    double reconstruction_error = 0.0; ///< || f - (F0 F + f0) ||
    double norm_identity_gap = 0.0;    ///< worst per-iteration energy-balance gap
    bool degenerate = false;           ///< W = {0}: M itself is base-invariant, f0 = f

    int p() const { return static_cast<int>(w_basis.cols()); }
};

/// Iterative decomposition of f in an invariant subspace M of
/// base + sign * sum u_i (x) v_i with an inner base symbol vanishing at 0.
///
/// Each round splits the running vector l against W = span{P_M u_i} and
/// M cap W-perp, peels one base factor off the complement part, and records
/// the model-space component. The energy balance
///   ||f||^2 = sum ||A_j||^2 + ||l_{n+1}||^2 + sum ||P_{K_phi} g_j||^2
/// is tracked at every round.
inline DecompositionResult invariant_decomposition(const Subspace& m,
                                                   const PerturbationSpec& spec,
                                                   const HardyFunction& f,
                                                   const TruncationConfig& cfg) {
    const BlaschkeProduct phi = detail::adjoint_base_blaschke(spec);
    const OperatorMatrix op = assemble(spec, cfg);

    const double inv_res = invariance_residual(op, m);
    const double inv_tol = cfg.eps_residual * std::max(1.0, operator_norm(op));
    if (inv_res > inv_tol) {
        std::ostringstream os;
        os << "subspace is not invariant under " << op.label << " (residual " << inv_res << ")";
        throw PreconditionError(os.str(), inv_res);
    }
    const double member_res = m.membership_residual(f.coeffs);
    if (member_res > cfg.eps_residual * std::max(1.0, f.norm()))
        throw PreconditionError("decomposition input does not lie in the subspace", member_res);

    const double fnorm = f.norm();
    const double fnorm2 = f.squared_norm();

    DecompositionResult out;

    // W = span{P_M u_i} over the functional directions of the rank-one terms.
    std::vector<HardyFunction> projected;
    for (const auto& t : spec.terms) projected.emplace_back(CVector(m.project(t.functional.coeffs)));
    Subspace w = orthonormalize(projected, cfg);
    out.w_basis = w.basis;

    if (w.is_zero()) {
        // M is invariant under the unperturbed base; the representation
        // collapses to M = [1] K with F empty and f0 = f.
        out.degenerate = true;
        out.F = VectorHardyFunction{};
        out.f0 = f;
        out.norm_gap = 0.0;
        out.reconstruction_error = 0.0;
        return out;
    }

    const Subspace m_comp = ortho_diff(m, w, cfg); // M minus W, inside M
    const Subspace k_phi = model_space(phi, cfg);
    const CMatrix t_adj = toeplitz_matrix(BlaschkeSymbol{phi}, cfg).entries.adjoint();

    CVector l = f.coeffs;
    double coeff_energy = 0.0;
    double kernel_energy = 0.0;
    double residual = fnorm;
    const int max_rounds = cfg.degree + 1;
    int round = 0;
    while (true) {
        Eigen::VectorXcd a = w.basis.adjoint() * l;
        out.coeff_terms.push_back(a);
        coeff_energy += a.squaredNorm();

        CVector g = m_comp.project(l);
        HardyFunction k_part{CVector(k_phi.project(g))};
        out.kernel_parts.push_back(k_part);
        kernel_energy += k_part.squared_norm();

        l = t_adj * g;
        residual = l.norm();
        out.residual_norms.push_back(residual);

        const double balance =
            std::abs(fnorm2 - (coeff_energy + residual * residual + kernel_energy));
        out.norm_identity_gap = std::max(out.norm_identity_gap, balance);

        ++round;
        if (residual <= cfg.eps_residual * fnorm) break;
        if (round >= max_rounds)
            throw ConvergenceError("decomposition residuals did not reach the threshold within " +
                                       std::to_string(max_rounds) + " rounds",
                                   out.residual_norms);
    }

    // Assemble F = sum A_j phi^j and f0 = sum (P_K g_j) phi^{j-1} from the
    // truncated series of phi.
    const HardyFunction phi_series = blaschke_series(phi, cfg).series;
    const int rounds = static_cast<int>(out.coeff_terms.size());
    std::vector<HardyFunction> channels(w.dim(), HardyFunction::zero(cfg.degree));
    out.f0 = HardyFunction::zero(cfg.degree);
    HardyFunction phi_power = HardyFunction::constant(1.0, cfg.degree);
    for (int j = 0; j < rounds; ++j) {
        for (int i = 0; i < w.dim(); ++i)
            channels[i] += out.coeff_terms[j](i) * phi_power;
        out.f0 += multiply(out.kernel_parts[j], phi_power);
        if (j + 1 < rounds) phi_power = multiply(phi_power, phi_series);
    }
    out.F = VectorHardyFunction(std::move(channels));

    HardyFunction combined = detail::span_combination(w.basis, out.F) + out.f0;
    out.reconstruction_error = (f - combined).norm();
    out.norm_gap = std::abs(fnorm2 - out.F.squared_norm() - out.f0.squared_norm());
    return out;
}

/// The subspace K of pairs (F, f0) attached to an invariant subspace M:
/// membership means F0 F + f0 lands in M and the Pythagorean identity holds.
struct ModelSubspaceK {
    CMatrix w_basis; ///< F0
    Subspace ambient;
    std::vector<std::pair<VectorHardyFunction, HardyFunction>> samples;

    struct Membership {
        double in_m_residual = 0.0;
        double pythagoras_gap = 0.0;
        HardyFunction combined;
    };

    Membership membership(const VectorHardyFunction& f_vec, const HardyFunction& f0) const {
        Membership mem;
        mem.combined = detail::span_combination(w_basis, f_vec) + f0;
        mem.in_m_residual = ambient.membership_residual(mem.combined.coeffs);
        mem.pythagoras_gap = std::abs(mem.combined.squared_norm() - f_vec.squared_norm() -
                                      f0.squared_norm());
        return mem;
    }
};

/// Decomposes every function in `sample_fs` and collects the (F, f0) pairs.
/// Degenerate (W = {0}) runs store pairs with an empty F.
inline ModelSubspaceK build_model_subspace(const Subspace& m, const PerturbationSpec& spec,
                                           const std::vector<HardyFunction>& sample_fs,
                                           const TruncationConfig& cfg) {
    ModelSubspaceK k;
    k.ambient = m;
    bool first = true;
    for (const auto& f : sample_fs) {
        DecompositionResult d = invariant_decomposition(m, spec, f, cfg);
        if (first) {
            k.w_basis = d.w_basis;
            first = false;
        }
        VectorHardyFunction f_vec = d.degenerate
                                        ? VectorHardyFunction{}
                                        : d.F;
        k.samples.emplace_back(std::move(f_vec), d.f0);
    }
    return k;
}

/// Verifies the invariance of K under the channelwise Toeplitz adjoint:
/// every stored sample, hit by (T_phi^* (x) I), must again satisfy both
/// membership clauses.
inline VerificationReport verify_K_shift_invariance(const ModelSubspaceK& k,
                                                    const PerturbationSpec& spec,
                                                    const TruncationConfig& cfg) {
    const BlaschkeProduct phi = detail::adjoint_base_blaschke(spec);
    const CMatrix t_adj = toeplitz_matrix(BlaschkeSymbol{phi}, cfg).entries.adjoint();

    VerificationReport rep;
    double worst_member = 0.0;
    double worst_pyth = 0.0;
    int idx = 0;
    for (const auto& [f_vec, f0] : k.samples) {
        std::vector<HardyFunction> shifted;
        shifted.reserve(f_vec.channels.size());
        for (const auto& ch : f_vec.channels) shifted.emplace_back(CVector(t_adj * ch.coeffs));
        VectorHardyFunction shifted_vec(std::move(shifted));
        HardyFunction shifted_f0{CVector(t_adj * f0.coeffs)};

        auto mem = k.membership(shifted_vec, shifted_f0);
        const double scale = std::max(1.0, mem.combined.norm());
        worst_member = std::max(worst_member, mem.in_m_residual / scale);
        worst_pyth = std::max(worst_pyth, mem.pythagoras_gap / std::max(1.0, scale * scale));
        ++idx;
    }
    rep.add("k_shift_membership", worst_member, cfg.eps_residual);
    rep.add("k_shift_pythagoras", worst_pyth, cfg.eps_residual);
    rep.add_flag("k_samples_present", idx > 0);
    return rep;
}

/// Converse of the representation theorem: if every sampled member of M is
/// reached as F0 F + f0 with the Pythagorean identity, then M is invariant
/// under T_phi^* - sum (T_phi^* f_i) (x) f_i over the F0 basis. The default
/// symbol is the coordinate function, the backshift case.
inline VerificationReport sarason_converse_check(
    const Subspace& m, const std::vector<HardyFunction>& fs, const ModelSubspaceK& k,
    const TruncationConfig& cfg,
    const SymbolSpec& symbol = AnalyticPolynomial{{Complex(0.0, 0.0), Complex(1.0, 0.0)}}) {
    // The pairing map sending (F, f0) to F0 F + f0 must be isometric on the
    // samples before the converse applies.
    double worst_iso = 0.0;
    for (const auto& [f_vec, f0] : k.samples) {
        auto mem = k.membership(f_vec, f0);
        const double scale = std::max(1.0, mem.combined.squared_norm());
        worst_iso = std::max(worst_iso, mem.pythagoras_gap / scale);
    }
    if (worst_iso > cfg.eps_residual)
        throw PreconditionError("pairing map is not isometric on the supplied samples", worst_iso);

    VerificationReport rep;
    rep.add("pairing_isometry", worst_iso, cfg.eps_residual);

    PerturbationSpec sarason = sarason_backward(symbol, fs, SarasonFlavor::AdjointFirst, cfg);
    const OperatorMatrix op = assemble(sarason, cfg);
    const double res = invariance_residual(op, m);
    rep.add("sarason_invariance", res, cfg.eps_residual * std::max(1.0, operator_norm(op)));

    // Proof identity: <F0 F + f0, f_i> equals the i-th component of F at 0.
    double worst_id = 0.0;
    for (const auto& [f_vec, f0] : k.samples) {
        if (f_vec.size() == 0) continue;
        auto mem = k.membership(f_vec, f0);
        for (std::size_t i = 0; i < fs.size() && static_cast<int>(i) < f_vec.size(); ++i) {
            const Complex lhs = inner_product(mem.combined, fs[i]);
            const Complex rhs = f_vec.channels[i].coeffs(0);
            worst_id = std::max(worst_id, std::abs(lhs - rhs));
        }
    }
    rep.add("constant_pairing_identity", worst_id, cfg.eps_residual);
    return rep;
}

/// Dual-side representation data for a forward-shift perturbation.
struct ForwardDualReport {
    Subspace l_space; ///< span{P_{M-perp} (output directions)}
    VerificationReport report;
};

/// Representation of invariant subspaces of perturbed forward shifts through
/// the orthogonal complement: checks the adjoint-side invariance, the tuple
/// membership criterion, and the forward Sarason-form invariance.
inline ForwardDualReport forward_dual_representation(const Subspace& m,
                                                     const PerturbationSpec& spec,
                                                     const TruncationConfig& cfg,
                                                     const std::vector<HardyFunction>& members,
                                                     const std::vector<HardyFunction>& outsiders) {
    if (spec.base != BaseOperator::ForwardShift)
        throw PreconditionError("forward dual representation expects a forward-shift base");
    const OperatorMatrix op = assemble(spec, cfg);
    const double inv_res = invariance_residual(op, m);
    const double op_scale = std::max(1.0, operator_norm(op));
    if (inv_res > cfg.eps_residual * op_scale)
        throw PreconditionError("subspace is not invariant under the forward perturbation",
                                inv_res);

    ForwardDualReport out;
    out.report.add("forward_invariance", inv_res, cfg.eps_residual * op_scale);

    const Subspace m_perp = ortho_complement(m);

    // L collects the M-perp shadows of the output directions.
    std::vector<HardyFunction> shadows;
    for (const auto& t : spec.terms) shadows.emplace_back(CVector(m_perp.project(t.output.coeffs)));
    out.l_space = orthonormalize(shadows, cfg);

    // (a) duality: M-perp is invariant under the adjoint perturbation.
    PerturbationSpec adj_spec;
    adj_spec.base = BaseOperator::BackwardShift;
    adj_spec.sign = spec.sign;
    for (const auto& t : spec.terms) adj_spec.terms.push_back({t.functional, t.output});
    const OperatorMatrix adj_op = assemble(adj_spec, cfg);
    const double adj_res = invariance_residual(adj_op, m_perp);
    out.report.add("adjoint_invariance", adj_res,
                   cfg.eps_residual * std::max(1.0, operator_norm(adj_op)));

    // (b) tuple membership: g in M iff (T_conj(phi_1) g, ..., g) pairs to zero
    // with every K-sample of the M-perp decomposition. The raw basis of
    // M-perp can carry mass at the top degrees, which drags the iterative
    // decomposition through its full nonnormal transient; re-span through a
    // decaying coefficient profile first. The outsiders are decomposed too,
    // so each one meets a sample it pairs with at full strength.
    std::vector<HardyFunction> perp_samples;
    if (!m_perp.is_zero()) {
        CVector profile(cfg.dim());
        double damp = 1.0;
        for (int i = 0; i < cfg.dim(); ++i) {
            profile(i) = damp;
            damp *= 0.5;
        }
        CMatrix damped = profile.asDiagonal() * m_perp.basis;
        damped = m_perp.basis * (m_perp.basis.adjoint() * damped);
        Subspace respanned = orthonormalize(damped, cfg);
        const int take = std::min(respanned.dim(), 8);
        for (int c = 0; c < take; ++c)
            perp_samples.emplace_back(CVector(respanned.basis.col(c)));
    }
    for (const auto& g : outsiders) perp_samples.push_back(g);
    ModelSubspaceK k = build_model_subspace(m_perp, adj_spec, perp_samples, cfg);

    const int p = out.l_space.dim();
    std::vector<CMatrix> pairing_ops;
    for (int i = 0; i < p; ++i) {
        std::vector<Complex> coeffs(out.l_space.basis.col(i).data(),
                                    out.l_space.basis.col(i).data() + cfg.dim());
        pairing_ops.push_back(
            toeplitz_matrix(AnalyticPolynomial{coeffs}, cfg).entries.adjoint());
    }

    auto tuple_pairing = [&](const HardyFunction& g,
                             const std::pair<VectorHardyFunction, HardyFunction>& sample) {
        Complex acc = inner_product(g, sample.second);
        for (int i = 0; i < sample.first.size() && i < p; ++i) {
            HardyFunction tg{CVector(pairing_ops[i] * g.coeffs)};
            acc += inner_product(tg, sample.first.channels[i]);
        }
        return acc;
    };

    double worst_member_pairing = 0.0;
    for (const auto& g : members)
        for (const auto& sample : k.samples)
            worst_member_pairing =
                std::max(worst_member_pairing, std::abs(tuple_pairing(g, sample)));
    out.report.add("member_tuple_orthogonality", worst_member_pairing, cfg.eps_residual);

    // Negative control: vectors with mass in M-perp must show up in at least
    // one pairing. The floor is generous; the pairing equals <g, sample> up
    // to truncation.
    double weakest_outsider = std::numeric_limits<double>::infinity();
    for (const auto& g : outsiders) {
        double strongest = 0.0;
        for (const auto& sample : k.samples)
            strongest = std::max(strongest, std::abs(tuple_pairing(g, sample)));
        weakest_outsider = std::min(weakest_outsider, strongest);
    }
    const double outsider_floor =
        0.1 / std::sqrt(static_cast<double>(std::max(1, m_perp.dim())));
    out.report.add_flag("outsider_tuple_detected",
                        outsiders.empty() || weakest_outsider > outsider_floor);

    // (c) forward Sarason form built from the L basis leaves M invariant.
    if (p > 0) {
        const OperatorMatrix back = backshift_matrix(cfg);
        PerturbationSpec sarason;
        sarason.base = BaseOperator::ForwardShift;
        sarason.sign = -1;
        for (int i = 0; i < p; ++i) {
            HardyFunction phi_i{CVector(out.l_space.basis.col(i))};
            sarason.terms.push_back({phi_i, back.apply(phi_i)});
        }
        const OperatorMatrix sar_op = assemble(sarason, cfg);
        const double sar_res = invariance_residual(sar_op, m);
        out.report.add("forward_sarason_invariance", sar_res,
                       cfg.eps_residual * std::max(1.0, operator_norm(sar_op)));
    }
    return out;
}

enum class BridgeDirection { PerturbationToAlmost, AlmostToPerturbation };

/// Two-way bridge between invariant subspaces of rank-m perturbations and
/// almost invariant subspaces.
///
/// PerturbationToAlmost: M invariant under T - sum(terms) implies the defect
/// of M under T is at most m with defect space inside span of the outputs.
/// AlmostToPerturbation: the defect basis f_i of M under T makes M invariant
/// under T - sum f_i (x) (T^* f_i).
inline VerificationReport almost_bridge(const OperatorMatrix& t, const Subspace& m,
                                        BridgeDirection direction,
                                        const std::vector<RankOneTerm>& terms,
                                        const TruncationConfig& cfg) {
    VerificationReport rep;
    if (direction == BridgeDirection::PerturbationToAlmost) {
        CMatrix x = t.entries;
        for (const auto& term : terms) x -= rank_one_matrix(term);
        OperatorMatrix perturbed{std::move(x), t.label + " - terms"};
        const double pre_res = invariance_residual(perturbed, m);
        const double pre_tol = cfg.eps_residual * std::max(1.0, operator_norm(perturbed));
        if (pre_res > pre_tol)
            throw PreconditionError("subspace is not invariant under the perturbed operator",
                                    pre_res);
        rep.add("perturbed_invariance", pre_res, pre_tol);

        DefectResult d = almost_invariant_defect(t, m, cfg);
        rep.add_flag("defect_at_most_rank", d.defect <= static_cast<int>(terms.size()));
        rep.add("almost_invariance_leak", d.residual,
                cfg.eps_residual * std::max(1.0, operator_norm(t)));

        std::vector<HardyFunction> outputs;
        for (const auto& term : terms) outputs.push_back(term.output);
        Subspace v_span = orthonormalize(outputs, cfg);
        double worst_angle = 0.0;
        for (const auto& q : d.defect_basis)
            worst_angle = std::max(worst_angle, v_span.membership_residual(q.coeffs));
        rep.add("defect_inside_output_span", worst_angle, cfg.eps_residual);
    } else {
        DefectResult d = almost_invariant_defect(t, m, cfg);
        rep.add("almost_invariance_leak", d.residual,
                cfg.eps_residual * std::max(1.0, operator_norm(t)));

        CMatrix x = t.entries;
        for (const auto& q : d.defect_basis) {
            HardyFunction t_star_q{CVector(t.entries.adjoint() * q.coeffs)};
            x -= rank_one_matrix({q, t_star_q});
        }
        OperatorMatrix rebuilt{std::move(x), t.label + " - defect terms"};
        const double res = invariance_residual(rebuilt, m);
        rep.add("rebuilt_invariance", res,
                cfg.eps_residual * std::max(1.0, operator_norm(rebuilt)));
        rep.add_flag("defect_dimension", d.defect >= 0);
    }
    return rep;
}

/// Orthogonal expansion f = sum phi^j c_j with c_j in the model space of the
/// inner symbol.
struct WoldExpansion {
    std::vector<HardyFunction> components;
    double remainder_norm = 0.0;      ///< norm of the unexpanded residue
    double reconstruction_residual = 0.0;
    double parseval_gap = 0.0; ///< | ||f||^2 - sum ||c_j||^2 - remainder^2 |
};

inline WoldExpansion wold_expand(const HardyFunction& f, const SymbolSpec& sym,
                                 const TruncationConfig& cfg) {
    auto phi = inner_blaschke(sym);
    if (!phi) throw PreconditionError("Wold expansion requires an inner (Blaschke) symbol");
    const Subspace k_phi = model_space(*phi, cfg);
    const CMatrix t_adj = toeplitz_matrix(BlaschkeSymbol{*phi}, cfg).entries.adjoint();

    WoldExpansion out;
    const double fnorm = f.norm();
    CVector r = f.coeffs;
    double component_energy = 0.0;
    for (int j = 0; j <= cfg.degree; ++j) {
        HardyFunction c{CVector(k_phi.project(r))};
        component_energy += c.squared_norm();
        out.components.push_back(std::move(c));
        r = t_adj * r;
        if (r.norm() <= cfg.eps_residual * fnorm) break;
    }
    out.remainder_norm = r.norm();

    const HardyFunction phi_series = blaschke_series(*phi, cfg).series;
    HardyFunction recon = HardyFunction::zero(cfg.degree);
    HardyFunction phi_power = HardyFunction::constant(1.0, cfg.degree);
    for (std::size_t j = 0; j < out.components.size(); ++j) {
        recon += multiply(out.components[j], phi_power);
        if (j + 1 < out.components.size()) phi_power = multiply(phi_power, phi_series);
    }
    out.reconstruction_residual = (f - recon).norm();
    out.parseval_gap = std::abs(f.squared_norm() - component_energy -
                                out.remainder_norm * out.remainder_norm);
    return out;
}

} // namespace hardylab
