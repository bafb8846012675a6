#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "eaqec/dephasing_channel.hpp"
#include "test_support.hpp"

using namespace eaqec;
using eaqec::testkit::Rng;
namespace tk = eaqec::testkit;

namespace {

constexpr double kPi = std::numbers::pi;

const Ket& plus() {
    static const Ket k = Ket::normalized({1.0, 1.0});
    return k;
}

DephasingModel sz_model() { return DephasingModel(pauli_z(), pauli_z() * cplx(-1.0), plus()); }

// reduced state of exp(-iHt)(rho x psi0)exp(iHt), H = |0><0| x h1 + |1><1| x h2, built from oracles
ComplexMatrix joint_route_oracle(const DensityMatrix& rho, const DephasingModel& m, double t) {
    const std::size_t n = m.env_dim();
    const ComplexMatrix u1 = tk::series_exp(m.h1(), t), u2 = tk::series_exp(m.h2(), t);
    const ComplexMatrix p0{{1.0, 0.0}, {0.0, 0.0}}, p1{{0.0, 0.0}, {0.0, 1.0}};
    const ComplexMatrix u = tk::kron_oracle(p0, u1) + tk::kron_oracle(p1, u2);
    const ComplexMatrix joint = u * tk::kron_oracle(rho.matrix(), m.psi0().projector()) * u.adjoint();
    return tk::partial_trace_oracle(joint, n);
}

}  // namespace

TEST(DephasingModel, Validation) {
    EXPECT_THROW(DephasingModel(pauli_z(), ComplexMatrix::identity(3), plus()), DimensionError);
    EXPECT_THROW(DephasingModel(ComplexMatrix{{0.0, 1.0}, {0.0, 0.0}}, pauli_z(), plus()), ContractViolation);
}

TEST(RelativeStates, TrivialCases) {
    Rng rng(1);
    const DephasingModel m = tk::random_model(rng, 3);
    const auto [a, b] = relative_states(m, 0.0);
    EXPECT_LE(tk::vec_diff(a.amplitudes(), m.psi0().amplitudes()), 1e-15);
    EXPECT_LE(tk::vec_diff(b.amplitudes(), m.psi0().amplitudes()), 1e-15);
    const DephasingModel same(m.h1(), m.h1(), m.psi0());
    for (double t : {0.3, 1.7, 5.0}) {
        const auto [c, d] = relative_states(same, t);
        EXPECT_LE(tk::vec_diff(c.amplitudes(), d.amplitudes()), 1e-15);
    }
}

TEST(RelativeStates, MatchesSeriesOracle) {
    const auto [psi1, psi2] = relative_states(sz_model(), kPi / 4);
    const auto ref1 = tk::series_exp(pauli_z(), kPi / 4) * plus().amplitudes();
    const auto ref2 = tk::series_exp(pauli_z() * cplx(-1.0), kPi / 4) * plus().amplitudes();
    EXPECT_LE(tk::vec_diff(psi1.amplitudes(), ref1), 1e-12);
    EXPECT_LE(tk::vec_diff(psi2.amplitudes(), ref2), 1e-12);
    // frozen values from an independent expm
    EXPECT_NEAR(std::abs(psi1[0] - cplx(0.5, -0.5)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(psi2[0] - cplx(0.5, 0.5)), 0.0, 1e-15);
}

TEST(Overlap, Examples) {
    EXPECT_NEAR(std::abs(overlap(plus(), plus()).value - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(overlap(Ket::basis(2, 0), Ket::basis(2, 1)).value), 0.0, 0.0);
    const Overlap c = overlap_at(sz_model(), kPi / 8);
    EXPECT_NEAR(c.value.real(), std::sqrt(0.5), 1e-15);
    EXPECT_NEAR(c.value.imag(), 0.0, 1e-15);
    for (double t : {0.1, 0.5, 1.3}) EXPECT_NEAR(overlap_at(sz_model(), t).value.real(), std::cos(2 * t), 1e-14);
    EXPECT_THROW(overlap(Ket::basis(2, 0), Ket::basis(3, 0)), DimensionError);
    EXPECT_THROW(Overlap(cplx(1.1, 0.0)), InputError);
}

TEST(ApplyChannel, Examples) {
    Rng rng(2);
    const DensityMatrix rho = tk::random_density(rng, 2);
    EXPECT_LE(max_abs_diff(apply_channel(rho, 1.0).matrix(), rho.matrix()), 0.0);
    const auto deph = apply_channel(rho, 0.0);
    EXPECT_EQ(deph(0, 1), cplx(0.0));
    EXPECT_EQ(deph(0, 0), rho(0, 0));
    const auto plus_rho = bloch_to_density({1, 0, 0});
    const auto out = apply_channel(plus_rho, cplx(0.0, 1.0));
    EXPECT_NEAR(std::abs(out(0, 1) - cplx(0.0, 0.5)), 0.0, 1e-16);
    EXPECT_THROW(apply_channel(rho, cplx(1.0, 0.1)), InputError);
    EXPECT_THROW(apply_channel(DensityMatrix::maximally_mixed(3), 1.0), DimensionError);
}

TEST(ApplyChannel, UnitalAndBasisPreserving) {
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        const cplx c = std::polar(rng.uniform(), rng.uniform(0, 2 * kPi));
        const auto mm = apply_channel(DensityMatrix::maximally_mixed(2), c);
        EXPECT_EQ(max_abs_diff(mm.matrix(), DensityMatrix::maximally_mixed(2).matrix()), 0.0);
        for (std::size_t k : {0u, 1u}) {
            const auto p = DensityMatrix::pure(Ket::basis(2, k));
            EXPECT_EQ(max_abs_diff(apply_channel(p, c).matrix(), p.matrix()), 0.0);
        }
        const auto out = apply_channel(tk::random_density(rng, 2), c);
        EXPECT_NEAR(out.matrix().trace().real(), 1.0, 1e-14);
        EXPECT_TRUE(out.matrix().is_psd(1e-12));
    }
}

TEST(Kraus, TrivialAtTimeZero) {
    Rng rng(4);
    const DephasingModel m = tk::random_model(rng, 3);
    std::vector<Ket> basis{m.psi0()};
    // complete psi0 to an orthonormal basis
    for (std::size_t k = 0; k < 3 && basis.size() < 3; ++k) {
        std::vector<cplx> v(3);
        v[k] = 1.0;
        for (const auto& b : basis) {
            const cplx proj = braket(b, Ket::basis(3, k));
            for (std::size_t j = 0; j < 3; ++j) v[j] -= proj * b[j];
        }
        if (vector_norm(v) > 1e-6) basis.push_back(Ket::normalized(v));
    }
    const KrausSet ks = kraus_from_env_basis(m, 0.0, basis);
    EXPECT_LE(max_abs_diff(ks.operators()[0], ComplexMatrix::identity(2)), 1e-14);
    EXPECT_LE(ks.operators()[1].max_abs(), 1e-14);
    EXPECT_LE(ks.operators()[2].max_abs(), 1e-14);
}

TEST(Kraus, CompletenessAndNonOrthonormalBasis) {
    Rng rng(5);
    const DephasingModel m = tk::random_model(rng, 2);
    const auto basis = computational_basis(2);
    const KrausSet ks = kraus_from_env_basis(m, 0.83, basis);
    ComplexMatrix sum(2, 2);
    for (const auto& l : ks.operators()) sum += l.adjoint() * l;
    EXPECT_LE(max_abs_diff(sum, ComplexMatrix::identity(2)), 1e-12);
    const std::vector<Ket> bad{Ket::basis(2, 0), Ket::normalized({1.0, 1.0})};
    EXPECT_THROW(kraus_from_env_basis(m, 0.5, bad), InputError);
    EXPECT_THROW(KrausSet({ComplexMatrix{{1.0, 0.1}, {0.0, 1.0}}}), ContractViolation);
    EXPECT_THROW(KrausSet({ComplexMatrix::identity(2) * cplx(0.5)}), InvariantViolation);
}

TEST(Kraus, ChannelMatchesJointEvolutionOracle) {
    Rng rng(6);
    for (std::size_t n : {2u, 3u, 4u}) {
        for (int i = 0; i < 10; ++i) {
            const DephasingModel m = tk::random_model(rng, n);
            const double t = rng.uniform(0, 4);
            const DensityMatrix rho = tk::random_density(rng, 2);
            const ComplexMatrix ref = joint_route_oracle(rho, m, t);
            EXPECT_LE(max_abs_diff(kraus_from_env_basis(m, t, computational_basis(n)).apply(rho).matrix(), ref), 1e-10);
            EXPECT_LE(max_abs_diff(apply_channel(rho, overlap_at(m, t)).matrix(), ref), 1e-10);
        }
    }
}

TEST(Choi, Examples) {
    const auto e1 = hermitian_eig(choi(Overlap(1.0)));
    EXPECT_NEAR(e1.eigenvalues[3], 2.0, 1e-14);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(e1.eigenvalues[i], 0.0, 1e-14);
    EXPECT_EQ(max_abs_diff(choi(Overlap(0.0)), ComplexMatrix::diagonal({1.0, 0.0, 0.0, 1.0})), 0.0);
    const auto e = hermitian_eig(choi(Overlap(0.5)));
    EXPECT_NEAR(e.eigenvalues[2], 0.5, 1e-14);
    EXPECT_NEAR(e.eigenvalues[3], 1.5, 1e-14);
}

TEST(Choi, SpectrumIsOnePlusMinusAbsC) {
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        const Overlap c(std::polar(rng.uniform(0.0, 0.999), rng.uniform(0, 2 * kPi)));
        const auto ev = hermitian_eig(choi(c)).eigenvalues;
        const auto ref = tk::eig2_oracle(ComplexMatrix{{1.0, c.value}, {std::conj(c.value), 1.0}});
        EXPECT_NEAR(ev[2], ref[0], 1e-10);
        EXPECT_NEAR(ev[3], ref[1], 1e-10);
        EXPECT_NEAR(ev[2], 1 - std::abs(c.value), 1e-10);
        int above = 0;
        for (double l : ev) above += l > 1e-10;
        EXPECT_EQ(above, 2);
    }
}

TEST(RUDecomposition, Examples) {
    const auto half = ru_decomposition(Overlap(0.5));
    EXPECT_NEAR(half.p1, 0.25, 1e-15);
    EXPECT_NEAR(half.p2, 0.75, 1e-15);
    EXPECT_EQ(max_abs_diff(half.U1, ComplexMatrix::diagonal({-1.0, 1.0})), 0.0);
    EXPECT_EQ(max_abs_diff(half.U2, ComplexMatrix::identity(2)), 0.0);
    const auto one = ru_decomposition(Overlap(1.0));
    EXPECT_EQ(one.p1, 0.0);
    EXPECT_EQ(one.p2, 1.0);
    const auto zero = ru_decomposition(Overlap(0.0));
    EXPECT_EQ(zero.p1, 0.5);
    EXPECT_EQ(max_abs_diff(zero.U1, ComplexMatrix::diagonal({-1.0, 1.0})), 0.0);
    EXPECT_EQ(max_abs_diff(zero.U2, ComplexMatrix::identity(2)), 0.0);
}

TEST(RUDecomposition, ReproducesChannelAction) {
    Rng rng(8);
    for (int i = 0; i < 100; ++i) {
        const Overlap c(std::polar(rng.uniform(), rng.uniform(0, 2 * kPi)));
        const auto ru = ru_decomposition(c);
        EXPECT_NEAR(ru.p1, (1 - std::abs(c.value)) / 2, 1e-10);
        EXPECT_NEAR(ru.p2, (1 + std::abs(c.value)) / 2, 1e-10);
        EXPECT_TRUE(ru.U1.is_unitary(1e-12));
        const DensityMatrix rho = tk::random_density(rng, 2);
        EXPECT_LE(max_abs_diff(ru.apply(rho).matrix(), apply_channel(rho, c).matrix()), 1e-10);
    }
}

TEST(RUDecomposition, AgreesWithKrausSetChannel) {
    Rng rng(9);
    for (int i = 0; i < 100; ++i) {
        const DephasingModel m = tk::random_model(rng, 2 + rng.index(3));
        const double t = rng.uniform(0, 3);
        const DensityMatrix rho = tk::random_density(rng, 2);
        const auto ks = kraus_from_env_basis(m, t, computational_basis(m.env_dim()));
        EXPECT_LE(max_abs_diff(ru_decomposition(overlap_at(m, t)).apply(rho).matrix(), ks.apply(rho).matrix()), 1e-10);
    }
}
