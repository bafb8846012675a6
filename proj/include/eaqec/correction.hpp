#pragma once

// Environment-assisted correction of qubit phase damping. The environment is
// measured in a basis {|mu_alpha>} chosen so that outcome alpha singles out the
// term p_alpha U_alpha rho U_alpha^dagger of the random-unitary decomposition;
// applying U_alpha^dagger then restores the input state.
//
// The basis comes from the 2 x n matrix A whose columns are the diagonals of the
// Kraus operators L_b = <chi_b| exp(-iHt) |psi0>. With A = U Sigma W^dagger and
// the left singular vectors fixed to u_{1,2} = (-+C/|C|, 1)/sqrt2, the columns of
// W solve A w_alpha = sqrt(p_alpha) (-+C/|C|, 1) for alpha = 1, 2 and
// A w_alpha = 0 beyond, so V = W^T maps {L_b} onto the RU Kraus operators.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eaqec/dephasing_channel.hpp"
#include "eaqec/errors.hpp"
#include "eaqec/numerics.hpp"
#include "eaqec/quantum_state.hpp"

namespace eaqec {

inline constexpr double kBranchDropProbability = 1e-12;
inline constexpr double kSpuriousBranchProbability = 1e-10;

/// Column b is the diagonal (L_b[0][0], L_b[1][1]).
inline ComplexMatrix build_A(const KrausSet& kraus) {
    const auto& ops = kraus.operators();
    ComplexMatrix a(2, ops.size());
    for (std::size_t b = 0; b < ops.size(); ++b) {
        if (std::abs(ops[b](0, 1)) > 1e-10 || std::abs(ops[b](1, 0)) > 1e-10)
            throw ContractViolation("build_A: Kraus operator " + std::to_string(b) + " is not diagonal");
        a(0, b) = ops[b](0, 0);
        a(1, b) = ops[b](1, 1);
    }
    return a;
}

/// V = W^T relates the Kraus set {L_b} to the RU set {K_alpha}, padded with zeros.
struct BasisChange {
    ComplexMatrix V;
    ComplexMatrix W;
    std::array<double, 2> sigma{};  // singular values paired with w_1, w_2

    /// sum_b v_{alpha b} L_b, alpha 1-based.
    ComplexMatrix combine(std::size_t alpha, const KrausSet& kraus) const {
        const auto& ops = kraus.operators();
        if (alpha == 0 || alpha > V.rows() || ops.size() != V.cols())
            throw DimensionError("BasisChange::combine: index or size mismatch");
        ComplexMatrix acc(2, 2);
        for (std::size_t b = 0; b < ops.size(); ++b) acc += ops[b] * V(alpha - 1, b);
        return acc;
    }
};

/// O = sum_alpha lambda_alpha |mu_alpha><mu_alpha| on the environment.
class CorrectionObservable {
public:
    CorrectionObservable(std::vector<Ket> mu, std::vector<double> labels, double tol = 1e-10)
        : mu_(std::move(mu)), labels_(std::move(labels)) {
        const std::size_t n = mu_.size();
        if (n < 2 || labels_.size() != n) throw DimensionError("CorrectionObservable: need n >= 2 kets and n labels");
        for (std::size_t a = 0; a < n; ++a) {
            if (mu_[a].dim() != n) throw DimensionError("CorrectionObservable: ket dimension mismatch");
            for (std::size_t b = a + 1; b < n; ++b) {
                if (std::abs(braket(mu_[a], mu_[b])) > tol)
                    throw ContractViolation("CorrectionObservable: basis is not orthonormal");
                if (labels_[a] == labels_[b]) throw ContractViolation("CorrectionObservable: labels must be distinct");
            }
        }
    }

    std::size_t size() const { return mu_.size(); }
    const std::vector<Ket>& basis() const { return mu_; }
    const std::vector<double>& labels() const { return labels_; }

    /// Q_alpha, alpha 1-based.
    ComplexMatrix projector(std::size_t alpha) const { return mu_.at(alpha - 1).projector(); }

    ComplexMatrix matrix() const {
        ComplexMatrix o(size(), size());
        for (std::size_t a = 0; a < size(); ++a) o += mu_[a].projector() * cplx(labels_[a]);
        return o;
    }

    /// sum_alpha Q_alpha == 1 within tol
    bool is_complete(double tol = 1e-10) const {
        ComplexMatrix sum(size(), size());
        for (const auto& m : mu_) sum += m.projector();
        return max_abs_diff(sum, ComplexMatrix::identity(size())) <= tol;
    }

private:
    std::vector<Ket> mu_;
    std::vector<double> labels_;
};

enum class DegeneratePolicy {
    reject,   ///< |C| ~ 1 raises DegenerateChannelError
    complete  ///< |C| ~ 1 takes w_1 from the orthonormal completion (A w_1 = 0 = b_1)
};

struct CorrectionBasis {
    BasisChange change;
    CorrectionObservable observable;
};

/// b_1 = sqrt((1-|C|)/2) (-C/|C|, 1), b_2 = sqrt((1+|C|)/2) (C/|C|, 1).
inline std::array<std::vector<cplx>, 2> inhomogeneities(const Overlap& c) {
    const cplx ph = c.phase();
    const double p1 = c.degenerate() ? 0.0 : 0.5 * (1.0 - c.magnitude());
    const double s1 = std::sqrt(p1), s2 = std::sqrt(1.0 - p1);
    return {std::vector<cplx>{-ph * s1, s1}, std::vector<cplx>{ph * s2, s2}};
}

/// Measurement basis and basis change for the environment basis `chi`
/// (computational when empty). Labels are 1..n.
inline CorrectionBasis correction_basis(const ComplexMatrix& a, const Overlap& c, std::span<const Ket> chi = {},
                                        DegeneratePolicy policy = DegeneratePolicy::reject) {
    if (a.rows() != 2 || a.cols() < 2) throw DimensionError("correction_basis: A must be 2 x n with n >= 2");
    const std::size_t n = a.cols();

    const ComplexMatrix gram = a * a.adjoint();
    const ComplexMatrix expected{{1.0, c.value}, {std::conj(c.value), 1.0}};
    if (max_abs_diff(gram, expected) > 1e-9)
        throw ContractViolation("correction_basis: A A^dagger does not equal [[1, C], [conj C, 1]]");
    if (c.degenerate() && policy == DegeneratePolicy::reject)
        throw DegenerateChannelError("correction_basis: |C| is 1 to within 1e-12; the channel is unitary and needs "
                                     "no measurement, treat it as identity up to U_2");

    std::vector<Ket> basis_storage;
    if (chi.empty()) {
        basis_storage = computational_basis(n);
        chi = basis_storage;
    }
    require_orthonormal_basis(chi, n);

    const cplx ph = c.phase();
    const double r = 1.0 / std::sqrt(2.0);
    const ComplexMatrix left{{-ph * r, ph * r}, {r, r}};
    Svd2xN svd = svd_2xn_from_left(a, left);
    if (c.degenerate()) svd.sigma[0] = 0.0;

    std::vector<Ket> mu;
    mu.reserve(n);
    for (std::size_t alpha = 0; alpha < n; ++alpha) {
        // |mu_alpha> = sum_b (W^dagger)_{alpha b} |chi_b>
        std::vector<cplx> v(n);
        for (std::size_t b = 0; b < n; ++b) {
            const cplx coeff = std::conj(svd.W(b, alpha));
            for (std::size_t k = 0; k < n; ++k) v[k] += coeff * chi[b][k];
        }
        mu.push_back(Ket::normalized(std::move(v)));
    }
    std::vector<double> labels(n);
    for (std::size_t alpha = 0; alpha < n; ++alpha) labels[alpha] = static_cast<double>(alpha + 1);

    return {BasisChange{svd.W.transpose(), svd.W, svd.sigma}, CorrectionObservable(std::move(mu), std::move(labels))};
}

/// exp(-iHt) (rho (x) rho_E) exp(iHt) with H = |0><0| (x) h1 + |1><1| (x) h2.
inline DensityMatrix joint_evolve(const DensityMatrix& rho, const DensityMatrix& rho_env, const ComplexMatrix& h1,
                                  const ComplexMatrix& h2, double t) {
    if (rho.dim() != 2) throw DimensionError("joint_evolve: system must be a qubit");
    const std::size_t n = rho_env.dim();
    if (h1.rows() != n || h2.rows() != n || !h1.is_square() || !h2.is_square())
        throw DimensionError("joint_evolve: Hamiltonian and environment dimensions differ");
    const ComplexMatrix u1 = unitary_propagator(h1, t);
    const ComplexMatrix u2 = unitary_propagator(h2, t);
    ComplexMatrix u(2 * n, 2 * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            u(i, j) = u1(i, j);
            u(n + i, n + j) = u2(i, j);
        }
    return DensityMatrix::from_computed(u * kron(rho.matrix(), rho_env.matrix()) * u.adjoint());
}

struct MeasurementOutcome {
    std::size_t alpha = 0;  // 1-based branch index
    double probability = 0.0;
    DensityMatrix post_state;
    std::optional<DensityMatrix> corrected_state;
};

/// Exact enumeration of all branches, or a single seeded draw.
struct MeasurementMode {
    enum class Kind { enumerate, sample } kind = Kind::enumerate;
    std::uint64_t seed = 0;

    static MeasurementMode enumerate_all() { return {}; }
    static MeasurementMode sample(std::uint64_t seed) { return {Kind::sample, seed}; }
};

/// Uniform double in [0, 1) from the top 53 bits of a mt19937_64 draw; the
/// engine's output sequence is fixed by the standard, so results are portable.
inline double uniform01(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

/// Sub-state tr_E[rho_SE (1 (x) |mu><mu|)] = sum_ab conj(mu_a) rho_{ia,jb} mu_b.
inline ComplexMatrix project_environment(const ComplexMatrix& rho_se, const Ket& mu) {
    const std::size_t n = mu.dim();
    ComplexMatrix r(2, 2);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            cplx s = 0.0;
            for (std::size_t a = 0; a < n; ++a) {
                const cplx ma = std::conj(mu[a]);
                if (ma == cplx{}) continue;
                for (std::size_t b = 0; b < n; ++b) s += ma * rho_se(i * n + a, j * n + b) * mu[b];
            }
            r(i, j) = s;
        }
    return r;
}

/// Measures O on the environment factor. Enumerate mode returns every branch
/// with probability above 1e-12; sample mode returns one branch drawn with
/// those probabilities.
inline std::vector<MeasurementOutcome> measure_env(const DensityMatrix& rho_se, const CorrectionObservable& obs,
                                                   MeasurementMode mode = MeasurementMode::enumerate_all()) {
    const std::size_t n = obs.size();
    if (rho_se.dim() != 2 * n) throw DimensionError("measure_env: joint state is not 2 x " + std::to_string(n));
    if (!obs.is_complete()) throw ContractViolation("measure_env: observable projectors are not complete");

    std::vector<MeasurementOutcome> out;
    double total = 0.0;
    for (std::size_t alpha = 1; alpha <= n; ++alpha) {
        const ComplexMatrix sub = project_environment(rho_se.matrix(), obs.basis()[alpha - 1]);
        const double p = sub.trace().real();
        total += std::max(p, 0.0);
        if (p <= kBranchDropProbability) continue;
        out.push_back({alpha, p, DensityMatrix::from_computed(sub), std::nullopt});
    }
    if (std::abs(total - 1.0) > 1e-10) throw InvariantViolation("measure_env: branch probabilities do not sum to 1");
    if (mode.kind == MeasurementMode::Kind::enumerate) return out;

    std::mt19937_64 gen(mode.seed);
    double u = uniform01(gen) * total;
    for (auto& o : out) {
        if (u < o.probability) return {std::move(o)};
        u -= o.probability;
    }
    return {std::move(out.back())};
}

/// U_alpha^dagger rho_alpha U_alpha.
inline DensityMatrix correct_state(const MeasurementOutcome& outcome, const RUDecomposition& ru) {
    if (outcome.alpha == 1 || outcome.alpha == 2) {
        const ComplexMatrix& u = ru.unitary(outcome.alpha);
        return DensityMatrix::from_computed(u.adjoint() * outcome.post_state.matrix() * u);
    }
    if (outcome.probability > kSpuriousBranchProbability)
        throw InvariantViolation("correct_state: branch " + std::to_string(outcome.alpha) + " observed with probability " +
                                 std::to_string(outcome.probability) + "; only branches 1 and 2 can occur");
    return outcome.post_state;
}

/// Everything a corrector derives from (h1, h2, psi_ref, t) assuming the
/// environment starts in psi_ref.
struct CorrectionPlan {
    Overlap overlap;
    RUDecomposition ru;
    KrausSet kraus;
    ComplexMatrix A;
    BasisChange change;
    CorrectionObservable observable;

    bool degenerate() const { return overlap.degenerate(); }

    /// For a degenerate channel, branches outside the RU support (p_alpha = 0)
    /// are left uncorrected.
    DensityMatrix corrected(const MeasurementOutcome& outcome) const {
        if (degenerate() && outcome.alpha != 2) return outcome.post_state;
        return correct_state(outcome, ru);
    }
};

inline CorrectionPlan plan_correction(const DephasingModel& model, double t) {
    const Overlap c = overlap_at(model, t);
    const std::vector<Ket> chi = computational_basis(model.env_dim());
    KrausSet kraus = kraus_from_env_basis(model, t, chi);
    ComplexMatrix a = build_A(kraus);
    auto [change, observable] = correction_basis(a, c, chi, DegeneratePolicy::complete);
    return {c, ru_decomposition(c), std::move(kraus), std::move(a), std::move(change), std::move(observable)};
}

struct BranchReport {
    std::size_t alpha = 0;
    double probability = 0.0;
    double distance = 0.0;  // trace_norm_distance(corrected, rho)
};

struct RoundTripReport {
    double t = 0.0;
    cplx C;
    double p1 = 0.0;
    double p2 = 0.0;
    DensityMatrix channel_output;
    double dist_before = 0.0;
    std::vector<BranchReport> branches;
    double dist_after = 0.0;  // max over observed branches

    /// 0 when the branch was not observed.
    double dist_after_branch(std::size_t alpha) const {
        for (const auto& b : branches)
            if (b.alpha == alpha) return b.distance;
        return 0.0;
    }
};

/// Full pure-environment pipeline at one time: channel, measurement, recovery.
inline RoundTripReport round_trip(const DephasingModel& model, const DensityMatrix& rho, double t) {
    const CorrectionPlan plan = plan_correction(model, t);
    DensityMatrix phi = apply_channel(rho, plan.overlap);
    const DensityMatrix rho_se = joint_evolve(rho, DensityMatrix::pure(model.psi0()), model.h1(), model.h2(), t);

    RoundTripReport rep{t, plan.overlap.value, plan.ru.p1, plan.ru.p2, phi, trace_norm_distance(rho, phi), {}, 0.0};
    for (auto& outcome : measure_env(rho_se, plan.observable)) {
        const DensityMatrix fixed = plan.corrected(outcome);
        const double d = trace_norm_distance(fixed, rho);
        rep.branches.push_back({outcome.alpha, outcome.probability, d});
        rep.dist_after = std::max(rep.dist_after, d);
    }
    return rep;
}

}  // namespace eaqec
