#pragma once

// Qubit phase damping generated by H = |0><0| (x) h1 + |1><1| (x) h2 acting on
// a qubit and an n-dimensional environment, its Kraus and Choi descriptions,
// and the random-unitary decomposition read off from the Choi eigenvectors.

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eaqec/errors.hpp"
#include "eaqec/numerics.hpp"
#include "eaqec/quantum_state.hpp"

namespace eaqec {

inline constexpr double kOverlapTol = 1e-10;
/// |C| this close to 1 means the channel is a single unitary.
inline constexpr double kDegenerateOverlapTol = 1e-12;
/// Below this |C| the phase C/|C| is replaced by 1.
inline constexpr double kZeroOverlapTol = 1e-14;

/// Relative Hamiltonians h1, h2 on the environment (hbar = 1) and the
/// environment's initial pure state.
class DephasingModel {
public:
    DephasingModel(ComplexMatrix h1, ComplexMatrix h2, Ket psi0)
        : h1_(std::move(h1)), h2_(std::move(h2)), psi0_(std::move(psi0)) {
        const std::size_t n = psi0_.dim();
        if (h1_.rows() != n || h1_.cols() != n || h2_.rows() != n || h2_.cols() != n)
            throw DimensionError("DephasingModel: Hamiltonians must be " + std::to_string(n) + "x" + std::to_string(n));
        if (n < 2) throw DimensionError("DephasingModel: environment dimension must be at least 2");
        if (!h1_.is_hermitian(1e-10) || !h2_.is_hermitian(1e-10))
            throw ContractViolation("DephasingModel: relative Hamiltonians must be Hermitian");
    }

    /// Qubit environment with h_k given by Pauli coefficients (g0, gx, gy, gz).
    static DephasingModel from_pauli(const std::array<double, 4>& h1, const std::array<double, 4>& h2, Ket psi0) {
        return {eaqec::from_pauli(h1), eaqec::from_pauli(h2), std::move(psi0)};
    }

    std::size_t env_dim() const { return psi0_.dim(); }
    const ComplexMatrix& h1() const { return h1_; }
    const ComplexMatrix& h2() const { return h2_; }
    const Ket& psi0() const { return psi0_; }

private:
    ComplexMatrix h1_;
    ComplexMatrix h2_;
    Ket psi0_;
};

/// C = <psi2|psi1> at time t.
struct Overlap {
    cplx value;
    double t = 0.0;

    Overlap(cplx v, double time = 0.0) : value(v), t(time) {
        if (!is_finite(v)) throw InputError("Overlap: non-finite value");
        if (std::abs(v) > 1.0 + kOverlapTol) throw InputError("Overlap: |C| exceeds 1");
    }

    double magnitude() const { return std::min(std::abs(value), 1.0); }
    bool degenerate() const { return magnitude() >= 1.0 - kDegenerateOverlapTol; }

    /// C/|C|, or 1 when C vanishes.
    cplx phase() const {
        const double m = std::abs(value);
        return m < kZeroOverlapTol ? cplx(1.0) : value / m;
    }
};

/// (|psi1(t)>, |psi2(t)>) with psi_k(t) = exp(-i h_k t) psi0.
inline std::pair<Ket, Ket> relative_states(const DephasingModel& model, double t) {
    return {apply(unitary_propagator(model.h1(), t), model.psi0()),
            apply(unitary_propagator(model.h2(), t), model.psi0())};
}

inline Overlap overlap(const Ket& psi1, const Ket& psi2, double t = 0.0) {
    if (psi1.dim() != psi2.dim()) throw DimensionError("overlap: dimension mismatch");
    cplx c = braket(psi2, psi1);
    // clip rounding excursions past the unit circle
    if (std::abs(c) > 1.0 && std::abs(c) <= 1.0 + kOverlapTol) c /= std::abs(c);
    return {c, t};
}

inline Overlap overlap_at(const DephasingModel& model, double t) {
    const auto [psi1, psi2] = relative_states(model, t);
    return overlap(psi1, psi2, t);
}

/// Multiplies the coherence rho_12 by C and rho_21 by conj(C); populations untouched.
inline DensityMatrix apply_channel(const DensityMatrix& rho, cplx c) {
    if (rho.dim() != 2) throw DimensionError("apply_channel: expected a qubit state");
    if (!is_finite(c) || std::abs(c) > 1.0 + kOverlapTol) throw InputError("apply_channel: |C| exceeds 1");
    ComplexMatrix out = rho.matrix();
    out(0, 1) *= c;
    out(1, 0) *= std::conj(c);
    return DensityMatrix(std::move(out));
}

inline DensityMatrix apply_channel(const DensityMatrix& rho, const Overlap& c) { return apply_channel(rho, c.value); }

/// Diagonal 2x2 Kraus operators L_b.
class KrausSet {
public:
    explicit KrausSet(std::vector<ComplexMatrix> ops, double tol = 1e-10) : ops_(std::move(ops)) {
        if (ops_.empty()) throw InputError("KrausSet: no operators");
        ComplexMatrix sum(2, 2);
        for (const auto& l : ops_) {
            if (l.rows() != 2 || l.cols() != 2) throw DimensionError("KrausSet: operators must be 2x2");
            if (std::abs(l(0, 1)) > tol || std::abs(l(1, 0)) > tol)
                throw ContractViolation("KrausSet: operators must be diagonal");
            sum += l.adjoint() * l;
        }
        if (max_abs_diff(sum, ComplexMatrix::identity(2)) > tol)
            throw InvariantViolation("KrausSet: completeness sum L^dagger L = 1 violated");
    }

    const std::vector<ComplexMatrix>& operators() const { return ops_; }
    std::size_t size() const { return ops_.size(); }

    DensityMatrix apply(const DensityMatrix& rho) const {
        ComplexMatrix acc(2, 2);
        for (const auto& l : ops_) acc += l * rho.matrix() * l.adjoint();
        return DensityMatrix::from_computed(acc);
    }

private:
    std::vector<ComplexMatrix> ops_;
};

/// Checks that `basis` is an orthonormal basis of C^n.
inline void require_orthonormal_basis(std::span<const Ket> basis, std::size_t n, double tol = 1e-10) {
    if (basis.size() != n) throw InputError("basis must contain exactly " + std::to_string(n) + " vectors");
    for (std::size_t a = 0; a < n; ++a) {
        if (basis[a].dim() != n) throw DimensionError("basis vector has wrong dimension");
        for (std::size_t b = a + 1; b < n; ++b)
            if (std::abs(braket(basis[a], basis[b])) > tol) throw InputError("basis is not orthonormal");
    }
}

inline std::vector<Ket> computational_basis(std::size_t n) {
    std::vector<Ket> b;
    b.reserve(n);
    for (std::size_t i = 0; i < n; ++i) b.push_back(Ket::basis(n, i));
    return b;
}

/// L_b = diag(<chi_b|psi1>, <chi_b|psi2>) for the environment basis {chi_b}.
inline KrausSet kraus_from_env_basis(const DephasingModel& model, double t, std::span<const Ket> basis) {
    require_orthonormal_basis(basis, model.env_dim());
    const auto [psi1, psi2] = relative_states(model, t);
    std::vector<ComplexMatrix> ops;
    ops.reserve(basis.size());
    for (const auto& chi : basis) ops.push_back(ComplexMatrix::diagonal({braket(chi, psi1), braket(chi, psi2)}));
    return KrausSet(std::move(ops));
}

/// Block matrix of the channel's images of the matrix units E_ij.
inline ComplexMatrix choi(const Overlap& c) {
    ComplexMatrix m(4, 4);
    m(0, 0) = 1.0;
    m(3, 3) = 1.0;
    m(0, 3) = c.value;
    m(3, 0) = std::conj(c.value);
    return m;
}

/// Rho -> p1 U1 rho U1^dagger + p2 U2 rho U2^dagger. Index 1 is always the
/// (1 - |C|)/2 branch.
struct RUDecomposition {
    double p1 = 0.0;
    double p2 = 1.0;
    ComplexMatrix U1 = ComplexMatrix::identity(2);
    ComplexMatrix U2 = ComplexMatrix::identity(2);

    double probability(std::size_t alpha) const { return alpha == 1 ? p1 : p2; }
    const ComplexMatrix& unitary(std::size_t alpha) const { return alpha == 1 ? U1 : U2; }

    /// K_alpha = sqrt(p_alpha) U_alpha
    ComplexMatrix kraus(std::size_t alpha) const { return unitary(alpha) * cplx(std::sqrt(probability(alpha))); }

    DensityMatrix apply(const DensityMatrix& rho) const {
        const ComplexMatrix acc = U1 * rho.matrix() * U1.adjoint() * cplx(p1) + U2 * rho.matrix() * U2.adjoint() * cplx(p2);
        return DensityMatrix::from_computed(acc);
    }
};

/// Random-unitary decomposition from the Choi eigenvectors
/// (-C/|C|, 0, 0, 1)/sqrt2 and (C/|C|, 0, 0, 1)/sqrt2 with eigenvalues 1 -+ |C|.
inline RUDecomposition ru_decomposition(const Overlap& c) {
    const cplx ph = c.phase();
    RUDecomposition ru;
    if (c.degenerate()) {
        ru.p1 = 0.0;
        ru.p2 = 1.0;
    } else {
        ru.p1 = 0.5 * (1.0 - c.magnitude());
        ru.p2 = 1.0 - ru.p1;
    }
    ru.U1 = ComplexMatrix::diagonal({-ph, 1.0});
    ru.U2 = ComplexMatrix::diagonal({ph, 1.0});
    return ru;
}

}  // namespace eaqec
