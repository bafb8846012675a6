#pragma once

// Correction attempts for a qubit environment that starts in the mixture
// rho_E = w |psi0><psi0| + (1 - w) |psi0_perp><psi0_perp| under
// H = k sz (x) sz + 1 (x) Gamma.sigma, i.e. h1 = k sz + Gamma.sigma and
// h2 = -k sz + Gamma.sigma. The effective channel multiplies the coherence by
// w C + (1 - w) C_perp. Two correctors are modelled: one that assumes psi0
// (outcomes lambda, states rho_{alpha,c}) and one that assumes psi0_perp
// (outcomes mu, states sigma_{alpha,c}).

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "eaqec/correction.hpp"
#include "eaqec/dephasing_channel.hpp"
#include "eaqec/errors.hpp"
#include "eaqec/numerics.hpp"
#include "eaqec/quantum_state.hpp"

namespace eaqec {

class MixedEnvModel {
public:
    /// The coupling form: h_{1,2} = +-k sz + Gamma.sigma, psi0 from Bloch angles.
    static MixedEnvModel from_coupling(double w, double k, const std::array<double, 3>& gamma, double theta,
                                       double phi) {
        const Ket psi0 = Ket::from_bloch_angles(theta, phi);
        return MixedEnvModel(w, eaqec::from_pauli({0.0, gamma[0], gamma[1], gamma[2] + k}),
                             eaqec::from_pauli({0.0, gamma[0], gamma[1], gamma[2] - k}), psi0, orthogonal_qubit(psi0),
                             k, gamma);
    }

    /// Arbitrary relative Hamiltonians; k and Gamma are then reported as zero.
    static MixedEnvModel from_hamiltonians(double w, ComplexMatrix h1, ComplexMatrix h2, const Ket& psi0) {
        return MixedEnvModel(w, std::move(h1), std::move(h2), psi0, orthogonal_qubit(psi0), 0.0, {0.0, 0.0, 0.0});
    }

    double w() const { return w_; }
    double k() const { return k_; }
    const std::array<double, 3>& gamma() const { return gamma_; }
    const Ket& psi0() const { return psi0_; }
    const Ket& psi0_perp() const { return psi0_perp_; }
    const ComplexMatrix& h1() const { return h1_; }
    const ComplexMatrix& h2() const { return h2_; }

    DensityMatrix environment_state() const {
        const std::array<double, 2> weights{w_, 1.0 - w_};
        const std::array<DensityMatrix, 2> states{DensityMatrix::pure(psi0_), DensityMatrix::pure(psi0_perp_)};
        return mixture(weights, states);
    }

    /// The same Hamiltonians with a pure environment in psi0.
    DephasingModel apparatus() const { return {h1_, h2_, psi0_}; }
    /// ... and in psi0_perp.
    DephasingModel apparatus_perp() const { return {h1_, h2_, psi0_perp_}; }

private:
    MixedEnvModel(double w, ComplexMatrix h1, ComplexMatrix h2, Ket psi0, Ket psi0_perp, double k,
                  std::array<double, 3> gamma)
        : w_(w), k_(k), gamma_(gamma), psi0_(std::move(psi0)), psi0_perp_(std::move(psi0_perp)), h1_(std::move(h1)),
          h2_(std::move(h2)) {
        if (!std::isfinite(w_) || w_ < 0.0 || w_ > 1.0) throw InputError("MixedEnvModel: w must lie in [0, 1]");
        if (psi0_.dim() != 2) throw DimensionError("MixedEnvModel: environment must be a qubit");
        if (std::abs(braket(psi0_perp_, psi0_)) > 1e-12) throw InvariantViolation("MixedEnvModel: psi0_perp not orthogonal");
        if (h1_.rows() != 2 || h2_.rows() != 2 || !h1_.is_hermitian(1e-10) || !h2_.is_hermitian(1e-10))
            throw ContractViolation("MixedEnvModel: relative Hamiltonians must be 2x2 Hermitian");
    }

    double w_;
    double k_;
    std::array<double, 3> gamma_;
    Ket psi0_;
    Ket psi0_perp_;
    ComplexMatrix h1_;
    ComplexMatrix h2_;
};

struct OverlapPair {
    cplx C;
    cplx C_perp;
    double t = 0.0;

    /// w C + (1 - w) C_perp
    cplx effective(double w) const { return w * C + (1.0 - w) * C_perp; }
};

inline OverlapPair relative_overlaps(const MixedEnvModel& model, double t) {
    return {overlap_at(model.apparatus(), t).value, overlap_at(model.apparatus_perp(), t).value, t};
}

/// Phi_t(rho) for the mixed environment, through the effective coefficient.
inline DensityMatrix mixed_channel(const MixedEnvModel& model, const DensityMatrix& rho, double t) {
    return apply_channel(rho, relative_overlaps(model, t).effective(model.w()));
}

struct CorrectedFamily {
    DensityMatrix rho_1c;
    DensityMatrix rho_2c;
    DensityMatrix sigma_1c;
    DensityMatrix sigma_2c;
    DensityMatrix rho_c;        // p(lambda_1) rho_1c + p(lambda_2) rho_2c
    DensityMatrix rho_tilde_c;  // w rho_c + (1 - w) sigma_c
    DensityMatrix sigma_c;      // p(mu_1) sigma_1c + p(mu_2) sigma_2c
    std::array<double, 2> p_lambda{};
    std::array<double, 2> p_mu{};
    std::array<double, 2> p_ru{};       // RU weights of the psi0 apparatus
    std::array<double, 2> p_ru_perp{};  // ... and of the psi0_perp apparatus
};

struct FamilyOptions {
    /// Permit w in {0, 1}; otherwise those weights raise PureEnvironmentError.
    bool allow_pure_weight = false;
};

namespace detail {

struct ApparatusResult {
    std::array<DensityMatrix, 2> corrected;
    std::array<double, 2> probability;
    DensityMatrix average;
    std::array<double, 2> ru_weights;
};

// Measures the true joint state with the observable built for `assumed`, then
// corrects with that apparatus' unitaries. A branch that is never observed is
// represented by the apparatus average.
inline ApparatusResult run_apparatus(const DephasingModel& assumed, const DensityMatrix& rho_se, double t) {
    const CorrectionPlan plan = plan_correction(assumed, t);
    if (plan.observable.size() != 2) throw DimensionError("mixed environment apparatus must be two-dimensional");
    const auto outcomes = measure_env(rho_se, plan.observable);

    std::array<double, 2> prob{0.0, 0.0};
    std::vector<DensityMatrix> fixed;
    std::vector<double> weights;
    for (const auto& o : outcomes) {
        prob[o.alpha - 1] = o.probability;
        fixed.push_back(plan.corrected(o));
        weights.push_back(o.probability);
    }
    DensityMatrix average = mixture(weights, fixed);
    std::array<DensityMatrix, 2> corrected{average, average};
    for (std::size_t k = 0; k < outcomes.size(); ++k) corrected[outcomes[k].alpha - 1] = fixed[k];
    return {corrected, prob, average, {plan.ru.p1, plan.ru.p2}};
}

}  // namespace detail

/// Corrected states of both correctors applied to the true mixed-environment dynamics.
inline CorrectedFamily corrected_family(const MixedEnvModel& model, const DensityMatrix& rho, double t,
                                        FamilyOptions opts = {}) {
    const double w = model.w();
    if (!opts.allow_pure_weight && (w == 0.0 || w == 1.0))
        throw PureEnvironmentError("corrected_family: w = " + std::to_string(w) +
                                   " is a pure environment; use round_trip instead");
    const DensityMatrix rho_se = joint_evolve(rho, model.environment_state(), model.h1(), model.h2(), t);
    const auto lam = detail::run_apparatus(model.apparatus(), rho_se, t);
    const auto mu = detail::run_apparatus(model.apparatus_perp(), rho_se, t);

    const std::array<double, 2> mix{w, 1.0 - w};
    const std::array<DensityMatrix, 2> averages{lam.average, mu.average};
    DensityMatrix tilde = mixture(mix, averages);
    return {lam.corrected[0], lam.corrected[1], mu.corrected[0], mu.corrected[1], lam.average, std::move(tilde),
            mu.average, lam.probability, mu.probability, lam.ru_weights, mu.ru_weights};
}

struct DistanceReport {
    double d_uncorrected = 0.0;
    double d_rho1c = 0.0;
    double d_rho2c = 0.0;
    double d_rhoc = 0.0;
    double d_rhotildec = 0.0;
    double t = 0.0;

    /// Uncorrected state strictly closer to rho than both protocol averages.
    bool uncorrected_beats_protocols() const { return d_uncorrected < d_rhoc && d_uncorrected < d_rhotildec; }

    /// Uncorrected state strictly closer to rho than every corrected state, per-outcome ones included.
    bool uncorrected_beats_all() const {
        return uncorrected_beats_protocols() && d_uncorrected < d_rho1c && d_uncorrected < d_rho2c;
    }
};

inline DistanceReport distance_report(const DensityMatrix& rho, const CorrectedFamily& family,
                                      const MixedEnvModel& model, double t) {
    return {trace_norm_distance(rho, mixed_channel(model, rho, t)),
            trace_norm_distance(rho, family.rho_1c),
            trace_norm_distance(rho, family.rho_2c),
            trace_norm_distance(rho, family.rho_c),
            trace_norm_distance(rho, family.rho_tilde_c),
            t};
}

/// Closed forms valid to O(eps^2) when C = 1 - i eps and C_perp = 1 + i eps:
///   |rho - Phi(rho)|   = 2 |rho12| |w - 1/2| eps
///   |rho - rho_1c|     = 2 |rho12| |1 + i eps|
///   |rho - rho_2c|     = 0
///   |rho - rho_c|      = 2 |rho12| (1 - w) |1 + i eps|
///   |rho - rho~_c|     = 2 |rho12| |w (1 - w) + 1/2|
inline DistanceReport analytic_distances(cplx rho12, double w, double epsilon, double t = 0.0) {
    const double r = std::abs(rho12);
    const double one_i_eps = std::abs(cplx(1.0, epsilon));
    return {2.0 * r * std::abs(w - 0.5) * epsilon, 2.0 * r * one_i_eps, 0.0, 2.0 * r * (1.0 - w) * one_i_eps,
            2.0 * r * std::abs(w * (1.0 - w) + 0.5), t};
}

/// Off-diagonal of rho_1c to first order in eps: -(1 + 2 i eps) rho12.
inline cplx analytic_rho1c_coherence(cplx rho12, double epsilon) { return -cplx(1.0, 2.0 * epsilon) * rho12; }

/// Outcome probability of the psi0-apparatus for the mixed environment:
/// w p_alpha + (1 - w)(1 - p_alpha).
inline double mixed_outcome_probability(double w, double p_alpha) { return w * p_alpha + (1.0 - w) * (1.0 - p_alpha); }

struct EpsilonRegime {
    double t = 0.0;
    double epsilon = 0.0;   // -Im C, so that C = Re C - i eps
    double residual = 0.0;  // |Re C - 1|
};

/// Grid times with |Re C - 1| <= tol and |Im C| > sqrt(tol); the second
/// condition drops the trivial C = 1 points.
inline std::vector<EpsilonRegime> find_epsilon_regime(const MixedEnvModel& model, std::span<const double> t_grid,
                                                      double tol) {
    if (t_grid.empty()) throw InputError("find_epsilon_regime: empty time grid");
    if (!(tol > 0.0)) throw InputError("find_epsilon_regime: tolerance must be positive");
    std::vector<EpsilonRegime> out;
    const DephasingModel app = model.apparatus();
    for (double t : t_grid) {
        const cplx c = overlap_at(app, t).value;
        const double residual = std::abs(c.real() - 1.0);
        if (residual <= tol && std::abs(c.imag()) > std::sqrt(tol)) out.push_back({t, -c.imag(), residual});
    }
    return out;
}

}  // namespace eaqec
