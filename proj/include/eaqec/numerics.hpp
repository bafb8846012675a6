#pragma once

// Small dense complex linear algebra: the matrix carrier, Kronecker products,
// a cyclic Jacobi Hermitian eigensolver, the closed-form SU(2) exponential and
// the 2 x n singular value decomposition used by the correction construction.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eaqec/errors.hpp"

namespace eaqec {

using cplx = std::complex<double>;

inline constexpr double kStructuralTol = 1e-9;
inline constexpr double kReconstructionTol = 1e-10;

inline bool is_finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

/// Dense row-major complex matrix.
class ComplexMatrix {
public:
    ComplexMatrix() = default;

    ComplexMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
        : rows_(rows), cols_(cols), data_(std::move(entries)) {
        if (data_.size() != rows_ * cols_) {
            throw DimensionError("ComplexMatrix: entry count " + std::to_string(data_.size()) +
                                 " does not match shape " + std::to_string(rows_) + "x" +
                                 std::to_string(cols_));
        }
        for (const auto& z : data_) {
            if (!is_finite(z)) throw InputError("ComplexMatrix: non-finite entry");
        }
    }

    /// Row-wise literal, e.g. `{{1, 0}, {0, -1}}`.
    ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
        rows_ = rows.size();
        cols_ = rows_ == 0 ? 0 : rows.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) throw DimensionError("ComplexMatrix: ragged initializer");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static ComplexMatrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static ComplexMatrix diagonal(std::span<const cplx> d) {
        ComplexMatrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    static ComplexMatrix diagonal(std::initializer_list<cplx> d) {
        return diagonal(std::span<const cplx>(d.begin(), d.size()));
    }

    /// Column vector from amplitudes.
    static ComplexMatrix column(std::span<const cplx> v) {
        return {v.size(), 1, std::vector<cplx>(v.begin(), v.end())};
    }

    /// |a><b|
    static ComplexMatrix outer(std::span<const cplx> a, std::span<const cplx> b) {
        ComplexMatrix m(a.size(), b.size());
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * std::conj(b[j]);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool is_square() const { return rows_ == cols_; }
    std::span<const cplx> entries() const { return data_; }

    cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::vector<cplx> col(std::size_t j) const {
        std::vector<cplx> c(rows_);
        for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
        return c;
    }

    void set_col(std::size_t j, std::span<const cplx> c) {
        for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = c[i];
    }

    ComplexMatrix adjoint() const {
        ComplexMatrix r(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
        return r;
    }

    ComplexMatrix transpose() const {
        ComplexMatrix r(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
        return r;
    }

    cplx trace() const {
        cplx s = 0.0;
        for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) s += (*this)(i, i);
        return s;
    }

    /// (M + M^dagger) / 2; removes rounding asymmetry from computed states.
    ComplexMatrix hermitian_part() const {
        ComplexMatrix r(rows_, cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                r(i, j) = 0.5 * ((*this)(i, j) + std::conj((*this)(j, i)));
        return r;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& z : data_) m = std::max(m, std::abs(z));
        return m;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (const auto& z : data_) s += std::norm(z);
        return std::sqrt(s);
    }

    bool all_finite() const { return std::all_of(data_.begin(), data_.end(), is_finite); }

    bool is_hermitian(double tol = kStructuralTol) const {
        if (!is_square()) return false;
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = i; j < cols_; ++j)
                if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > tol) return false;
        return true;
    }

    bool is_unitary(double tol = kStructuralTol) const;
    bool is_psd(double tol = kStructuralTol) const;

    ComplexMatrix& operator+=(const ComplexMatrix& o) {
        require_same_shape(o, "+=");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }

    ComplexMatrix& operator-=(const ComplexMatrix& o) {
        require_same_shape(o, "-=");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
        return *this;
    }

    ComplexMatrix& operator*=(cplx s) {
        for (auto& z : data_) z *= s;
        return *this;
    }

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
    friend ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }
    friend ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }

    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
        if (a.cols_ != b.rows_) {
            throw DimensionError("matrix product: " + std::to_string(a.rows_) + "x" +
                                 std::to_string(a.cols_) + " times " + std::to_string(b.rows_) + "x" +
                                 std::to_string(b.cols_));
        }
        ComplexMatrix r(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const cplx aik = a(i, k);
                if (aik == cplx{}) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) r(i, j) += aik * b(k, j);
            }
        return r;
    }

    friend std::vector<cplx> operator*(const ComplexMatrix& a, std::span<const cplx> v) {
        if (a.cols_ != v.size()) throw DimensionError("matrix-vector product: shape mismatch");
        std::vector<cplx> r(a.rows_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t j = 0; j < a.cols_; ++j) r[i] += a(i, j) * v[j];
        return r;
    }

    friend std::vector<cplx> operator*(const ComplexMatrix& a, const std::vector<cplx>& v) {
        return a * std::span<const cplx>(v);
    }

private:
    void require_same_shape(const ComplexMatrix& o, const char* op) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionError(std::string("shape mismatch in ") + op);
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> data_;
};

/// Largest entrywise modulus of a - b.
inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) { return (a - b).max_abs(); }

// ---------------------------------------------------------------------------
// vectors

inline cplx inner(std::span<const cplx> a, std::span<const cplx> b) {
    if (a.size() != b.size()) throw DimensionError("inner product: length mismatch");
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

inline double vector_norm(std::span<const cplx> v) {
    double s = 0.0;
    for (const auto& z : v) s += std::norm(z);
    return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Pauli matrices

inline ComplexMatrix pauli_x() { return {{0.0, 1.0}, {1.0, 0.0}}; }
inline ComplexMatrix pauli_y() { return {{0.0, cplx(0, -1)}, {cplx(0, 1), 0.0}}; }
inline ComplexMatrix pauli_z() { return {{1.0, 0.0}, {0.0, -1.0}}; }

/// g0 * 1 + g1 * sx + g2 * sy + g3 * sz
inline ComplexMatrix from_pauli(const std::array<double, 4>& g) {
    return ComplexMatrix{{cplx(g[0] + g[3], 0.0), cplx(g[1], -g[2])}, {cplx(g[1], g[2]), cplx(g[0] - g[3], 0.0)}};
}

/// Inverse of from_pauli for a Hermitian 2x2 matrix.
inline std::array<double, 4> pauli_coefficients(const ComplexMatrix& h) {
    return {0.5 * (h(0, 0).real() + h(1, 1).real()), h(0, 1).real(), -h(0, 1).imag(),
            0.5 * (h(0, 0).real() - h(1, 1).real())};
}

// ---------------------------------------------------------------------------
// Kronecker product

/// Block (i, j) of the result equals a(i, j) * b.
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const cplx aij = a(i, j);
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l) r(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    return r;
}

// ---------------------------------------------------------------------------
// Hermitian eigendecomposition

struct EigResult {
    std::vector<double> eigenvalues;  // ascending
    ComplexMatrix eigenvectors;       // column i pairs with eigenvalues[i]

    /// V diag(lambda) V^dagger
    ComplexMatrix reconstruct() const {
        const std::size_t n = eigenvalues.size();
        ComplexMatrix scaled = eigenvectors;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) scaled(i, j) *= eigenvalues[j];
        return scaled * eigenvectors.adjoint();
    }
};

namespace detail {

// Makes the first component with modulus > 1e-12 real and positive.
inline void fix_phase(std::vector<cplx>& v) {
    for (const auto& z : v) {
        if (std::abs(z) > 1e-12) {
            const cplx phase = std::conj(z) / std::abs(z);
            for (auto& x : v) x *= phase;
            return;
        }
    }
}

}  // namespace detail

inline constexpr std::size_t kMaxEigDim = 64;

/// Cyclic Jacobi diagonalization. Each rotation is a phase fix that makes the
/// (p, q) element real followed by a real Givens rotation.
inline EigResult hermitian_eig(const ComplexMatrix& m, double tol = kStructuralTol) {
    if (!m.is_square()) throw DimensionError("hermitian_eig: matrix is not square");
    if (m.rows() > kMaxEigDim) throw DimensionError("hermitian_eig: dimension exceeds " + std::to_string(kMaxEigDim));
    if (!m.is_hermitian(tol)) throw ContractViolation("hermitian_eig: matrix is not Hermitian");

    const std::size_t n = m.rows();
    ComplexMatrix a = m.hermitian_part();
    ComplexMatrix v = ComplexMatrix::identity(n);

    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += std::norm(a(i, j));
        return std::sqrt(s);
    };
    const double scale = std::max(a.frobenius_norm(), 1e-300);

    for (int sweep = 0; sweep < 100 && off_norm() > 1e-17 * scale; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const cplx apq = a(p, q);
                const double mag = std::abs(apq);
                if (mag <= 1e-300) continue;
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double theta = (aqq - app) / (2.0 * mag);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const cplx e = std::conj(apq) / mag;  // e^{-i phi}

                // G = diag(1, e) * [[c, s], [-s, c]]
                const cplx gpp = c, gpq = s, gqp = -s * e, gqq = c * e;

                for (std::size_t k = 0; k < n; ++k) {  // a <- a G
                    const cplx akp = a(k, p), akq = a(k, q);
                    a(k, p) = akp * gpp + akq * gqp;
                    a(k, q) = akp * gpq + akq * gqq;
                }
                for (std::size_t k = 0; k < n; ++k) {  // a <- G^dagger a
                    const cplx apk = a(p, k), aqk = a(q, k);
                    a(p, k) = std::conj(gpp) * apk + std::conj(gqp) * aqk;
                    a(q, k) = std::conj(gpq) * apk + std::conj(gqq) * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {  // v <- v G
                    const cplx vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = vkp * gpp + vkq * gqp;
                    v(k, q) = vkp * gpq + vkq * gqq;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });

    EigResult r{std::vector<double>(n), ComplexMatrix(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        r.eigenvalues[k] = a(order[k], order[k]).real();
        auto col = v.col(order[k]);
        detail::fix_phase(col);
        r.eigenvectors.set_col(k, col);
    }
    return r;
}

inline bool ComplexMatrix::is_unitary(double tol) const {
    if (!is_square()) return false;
    return max_abs_diff(adjoint() * (*this), identity(rows_)) <= tol;
}

inline bool ComplexMatrix::is_psd(double tol) const {
    if (!is_hermitian(tol)) return false;
    const auto eig = hermitian_eig(*this, tol);
    return eig.eigenvalues.empty() || eig.eigenvalues.front() >= -tol;
}

// ---------------------------------------------------------------------------
// matrix exponentials

/// exp(-i h t) for a 2x2 Hermitian h = g0 + g.sigma, in closed form:
/// e^{-i g0 t} (cos(a t) 1 - i sin(a t) n.sigma) with a = |g|, n = g / a.
inline ComplexMatrix mat_exp_su2(const ComplexMatrix& h, double t, double tol = kStructuralTol) {
    if (h.rows() != 2 || h.cols() != 2) throw DimensionError("mat_exp_su2: expected a 2x2 matrix");
    if (!h.is_hermitian(tol)) throw ContractViolation("mat_exp_su2: matrix is not Hermitian");
    if (!std::isfinite(t)) throw InputError("mat_exp_su2: time is not finite");

    const auto g = pauli_coefficients(h);
    const double alpha = std::sqrt(g[1] * g[1] + g[2] * g[2] + g[3] * g[3]);
    const cplx global = std::polar(1.0, -g[0] * t);
    if (alpha == 0.0) return ComplexMatrix::identity(2) * global;

    const double c = std::cos(alpha * t);
    const double s = std::sin(alpha * t);
    const double nx = g[1] / alpha, ny = g[2] / alpha, nz = g[3] / alpha;
    const cplx i(0.0, 1.0);
    // n.sigma = [[nz, nx - i ny], [nx + i ny, -nz]]
    ComplexMatrix u{{c - i * s * nz, -i * s * cplx(nx, -ny)}, {-i * s * cplx(nx, ny), c + i * s * nz}};
    return u * global;
}

/// exp(-i h t) for any Hermitian h: closed form for 2x2, spectral route otherwise.
inline ComplexMatrix unitary_propagator(const ComplexMatrix& h, double t, double tol = kStructuralTol) {
    if (h.rows() == 2 && h.cols() == 2) return mat_exp_su2(h, t, tol);
    if (!std::isfinite(t)) throw InputError("unitary_propagator: time is not finite");
    const auto eig = hermitian_eig(h, tol);
    const std::size_t n = h.rows();
    ComplexMatrix scaled = eig.eigenvectors;
    for (std::size_t j = 0; j < n; ++j) {
        const cplx phase = std::polar(1.0, -eig.eigenvalues[j] * t);
        for (std::size_t i = 0; i < n; ++i) scaled(i, j) *= phase;
    }
    return scaled * eig.eigenvectors.adjoint();
}

// ---------------------------------------------------------------------------
// 2 x n SVD

/// A = U Sigma W^dagger for a 2 x n matrix A. sigma[i] pairs with column i of U
/// and column i of W; columns 3..n of W span ker(A).
struct Svd2xN {
    ComplexMatrix U;
    std::array<double, 2> sigma{};
    ComplexMatrix W;

    ComplexMatrix reconstruct() const {
        const std::size_t n = W.rows();
        ComplexMatrix s(2, n);
        s(0, 0) = sigma[0];
        s(1, 1) = sigma[1];
        return U * s * W.adjoint();
    }
};

inline constexpr double kSingularCutoff = 1e-12;
inline constexpr double kKernelResidualCutoff = 1e-8;

namespace detail {

// Fills the unset columns of w (those with filled[j] == false) with an
// orthonormal completion: computational basis vectors, projected off the
// columns already present, taken in index order.
inline void complete_orthonormal(ComplexMatrix& w, std::vector<bool>& filled) {
    const std::size_t n = w.rows();
    std::vector<std::vector<cplx>> basis;
    for (std::size_t j = 0; j < w.cols(); ++j)
        if (filled[j]) basis.push_back(w.col(j));

    std::size_t slot = 0;
    for (std::size_t e = 0; e < n && basis.size() < w.cols(); ++e) {
        std::vector<cplx> cand(n);
        cand[e] = 1.0;
        // two passes of modified Gram-Schmidt
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis) {
                const cplx proj = inner(b, cand);
                for (std::size_t i = 0; i < n; ++i) cand[i] -= proj * b[i];
            }
        const double norm = vector_norm(cand);
        if (norm < kKernelResidualCutoff) continue;
        for (auto& z : cand) z /= norm;
        while (slot < filled.size() && filled[slot]) ++slot;
        w.set_col(slot, cand);
        filled[slot] = true;
        basis.push_back(std::move(cand));
    }
    if (basis.size() != w.cols()) throw InvariantViolation("orthonormal completion failed");
}

}  // namespace detail

/// SVD of a 2 x n matrix given its left singular vectors (the columns of
/// `left`, which must diagonalize A A^dagger). w_i = A^dagger u_i / sigma_i for
/// sigma_i above the cutoff; remaining columns of W complete an orthonormal basis.
inline Svd2xN svd_2xn_from_left(const ComplexMatrix& a, const ComplexMatrix& left) {
    if (a.rows() != 2) throw DimensionError("svd_2xn: expected 2 rows");
    if (a.cols() < 2) throw DimensionError("svd_2xn: need at least 2 columns");
    if (left.rows() != 2 || left.cols() != 2) throw DimensionError("svd_2xn: left factor must be 2x2");

    const std::size_t n = a.cols();
    const ComplexMatrix adag = a.adjoint();
    Svd2xN r{left, {}, ComplexMatrix(n, n)};
    std::vector<bool> filled(n, false);

    // Larger singular value first so the smaller one can be orthogonalized against it.
    std::array<std::vector<cplx>, 2> w;
    for (std::size_t i : {std::size_t{1}, std::size_t{0}}) {
        w[i] = adag * left.col(i);
        const double s = vector_norm(w[i]);
        r.sigma[i] = s;
        if (s <= kSingularCutoff) {
            r.sigma[i] = 0.0;
            continue;
        }
        if (i == 0 && filled[1]) {
            const cplx proj = inner(w[1], w[0]);
            for (std::size_t k = 0; k < n; ++k) w[0][k] -= proj * w[1][k];
        }
        const double norm = vector_norm(w[i]);
        for (auto& z : w[i]) z /= norm;
        r.W.set_col(i, w[i]);
        filled[i] = true;
    }
    detail::complete_orthonormal(r.W, filled);
    return r;
}

/// General 2 x n SVD: U and sigma from the eigendecomposition of A A^dagger
/// (ascending, so sigma[0] <= sigma[1]), W from svd_2xn_from_left.
inline Svd2xN svd_2xn(const ComplexMatrix& a) {
    if (a.rows() != 2) throw DimensionError("svd_2xn: expected 2 rows");
    if (a.cols() < 2) throw DimensionError("svd_2xn: need at least 2 columns");
    const auto eig = hermitian_eig(a * a.adjoint());
    return svd_2xn_from_left(a, eig.eigenvectors);
}

}  // namespace eaqec
