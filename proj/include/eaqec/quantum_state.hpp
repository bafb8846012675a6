#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eaqec/errors.hpp"
#include "eaqec/numerics.hpp"

namespace eaqec {

inline constexpr double kNormTol = 1e-10;
inline constexpr double kStateHermitianTol = 1e-10;
inline constexpr double kStateTraceTol = 1e-10;
inline constexpr double kStatePsdTol = 1e-9;

/// Normalized pure state.
class Ket {
public:
    explicit Ket(std::vector<cplx> amplitudes, double tol = kNormTol) : amp_(std::move(amplitudes)) {
        if (amp_.empty()) throw DimensionError("Ket: empty amplitude vector");
        for (const auto& z : amp_)
            if (!is_finite(z)) throw InputError("Ket: non-finite amplitude");
        if (std::abs(vector_norm(amp_) - 1.0) > tol) throw InputError("Ket: amplitudes are not normalized");
    }

    /// Scales the vector to unit norm. Throws on the zero vector.
    static Ket normalized(std::vector<cplx> v) {
        const double n = vector_norm(v);
        if (!(n > 0.0) || !std::isfinite(n)) throw InputError("Ket::normalized: zero or non-finite vector");
        for (auto& z : v) z /= n;
        return Ket(std::move(v));
    }

    static Ket basis(std::size_t dim, std::size_t index) {
        if (index >= dim) throw DimensionError("Ket::basis: index out of range");
        std::vector<cplx> v(dim);
        v[index] = 1.0;
        return Ket(std::move(v));
    }

    /// cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>
    static Ket from_bloch_angles(double theta, double phi) {
        if (!std::isfinite(theta) || !std::isfinite(phi)) throw InputError("Ket::from_bloch_angles: non-finite angle");
        return Ket({std::cos(theta / 2), std::polar(std::sin(theta / 2), phi)});
    }

    std::size_t dim() const { return amp_.size(); }
    std::span<const cplx> amplitudes() const { return amp_; }
    const cplx& operator[](std::size_t i) const { return amp_[i]; }

    ComplexMatrix projector() const { return ComplexMatrix::outer(amp_, amp_); }

private:
    std::vector<cplx> amp_;
};

/// <a|b>
inline cplx braket(const Ket& a, const Ket& b) { return inner(a.amplitudes(), b.amplitudes()); }

/// The state orthogonal to a qubit ket, -conj(b)|0> + conj(a)|1>.
inline Ket orthogonal_qubit(const Ket& k) {
    if (k.dim() != 2) throw DimensionError("orthogonal_qubit: expected a qubit");
    return Ket({-std::conj(k[1]), std::conj(k[0])});
}

inline Ket apply(const ComplexMatrix& u, const Ket& k) { return Ket::normalized(u * k.amplitudes()); }

/// Hermitian, unit-trace, positive semidefinite matrix.
class DensityMatrix {
public:
    explicit DensityMatrix(ComplexMatrix m) : m_(std::move(m)) { validate(); }

    static DensityMatrix pure(const Ket& k) { return DensityMatrix(k.projector()); }

    static DensityMatrix maximally_mixed(std::size_t dim) {
        return DensityMatrix(ComplexMatrix::identity(dim) * cplx(1.0 / static_cast<double>(dim)));
    }

    /// Hermitizes and renormalizes a computed matrix before validation.
    static DensityMatrix from_computed(const ComplexMatrix& m) {
        ComplexMatrix h = m.hermitian_part();
        const double tr = h.trace().real();
        if (!(tr > 0.0)) throw InvariantViolation("DensityMatrix::from_computed: non-positive trace");
        h *= cplx(1.0 / tr);
        return DensityMatrix(std::move(h));
    }

    std::size_t dim() const { return m_.rows(); }
    const ComplexMatrix& matrix() const { return m_; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

    /// tr(rho^2) == 1 within tol
    bool is_pure(double tol = 1e-10) const { return std::abs((m_ * m_).trace().real() - 1.0) <= tol; }

private:
    void validate() const {
        if (!m_.is_square() || m_.rows() == 0) throw DimensionError("DensityMatrix: matrix must be square and non-empty");
        if (!m_.all_finite()) throw InputError("DensityMatrix: non-finite entry");
        if (!m_.is_hermitian(kStateHermitianTol)) throw InputError("DensityMatrix: not Hermitian");
        if (std::abs(m_.trace() - cplx(1.0)) > kStateTraceTol) throw InputError("DensityMatrix: trace is not 1");
        if (!m_.is_psd(kStatePsdTol)) throw InputError("DensityMatrix: not positive semidefinite");
    }

    ComplexMatrix m_;
};

/// rho = sum_k w_k rho_k, for weights that sum to one.
inline DensityMatrix mixture(std::span<const double> weights, std::span<const DensityMatrix> states) {
    if (weights.size() != states.size() || states.empty()) throw DimensionError("mixture: size mismatch");
    ComplexMatrix acc(states.front().dim(), states.front().dim());
    for (std::size_t k = 0; k < states.size(); ++k) acc += states[k].matrix() * cplx(weights[k]);
    return DensityMatrix::from_computed(acc);
}

struct BlochVector {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

inline constexpr double kBlochTol = 1e-10;

/// rho = (1 + r.sigma) / 2
inline DensityMatrix bloch_to_density(const BlochVector& r) {
    if (!std::isfinite(r.x) || !std::isfinite(r.y) || !std::isfinite(r.z))
        throw InputError("bloch_to_density: non-finite component");
    if (r.norm() > 1.0 + kBlochTol) throw InputError("bloch_to_density: |r| exceeds 1");
    return DensityMatrix(ComplexMatrix{{0.5 * (1.0 + r.z), cplx(0.5 * r.x, -0.5 * r.y)},
                                       {cplx(0.5 * r.x, 0.5 * r.y), 0.5 * (1.0 - r.z)}});
}

inline BlochVector density_to_bloch(const DensityMatrix& rho) {
    if (rho.dim() != 2) throw DimensionError("density_to_bloch: expected a qubit state");
    return {2.0 * rho(0, 1).real(), -2.0 * rho(0, 1).imag(), (rho(0, 0) - rho(1, 1)).real()};
}

inline BlochVector ket_to_bloch(const Ket& k) { return density_to_bloch(DensityMatrix::pure(k)); }

/// Traces out the second tensor factor of a (sys_dim * env_dim) operator.
inline ComplexMatrix partial_trace_second(const ComplexMatrix& m, std::size_t sys_dim, std::size_t env_dim) {
    if (!m.is_square() || m.rows() != sys_dim * env_dim)
        throw DimensionError("partial trace: dimension " + std::to_string(m.rows()) + " does not factor as " +
                             std::to_string(sys_dim) + "x" + std::to_string(env_dim));
    ComplexMatrix r(sys_dim, sys_dim);
    for (std::size_t i = 0; i < sys_dim; ++i)
        for (std::size_t j = 0; j < sys_dim; ++j) {
            cplx s = 0.0;
            for (std::size_t a = 0; a < env_dim; ++a) s += m(i * env_dim + a, j * env_dim + a);
            r(i, j) = s;
        }
    return r;
}

/// Reduced qubit state of a joint state with the qubit as the first factor.
inline DensityMatrix partial_trace_env(const DensityMatrix& rho_se, std::size_t env_dim) {
    if (env_dim == 0 || rho_se.dim() != 2 * env_dim)
        throw DimensionError("partial_trace_env: joint dimension " + std::to_string(rho_se.dim()) +
                             " is not 2 x " + std::to_string(env_dim));
    return DensityMatrix::from_computed(partial_trace_second(rho_se.matrix(), 2, env_dim));
}

/// Half the sum of absolute eigenvalues of a - b.
inline double trace_norm_distance(const DensityMatrix& a, const DensityMatrix& b) {
    if (a.dim() != b.dim()) throw DimensionError("trace_norm_distance: dimension mismatch");
    const auto eig = hermitian_eig((a.matrix() - b.matrix()).hermitian_part());
    double s = 0.0;
    for (double l : eig.eigenvalues) s += std::abs(l);
    return 0.5 * s;
}

}  // namespace eaqec
