#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "eaqec/correction.hpp"
#include "test_support.hpp"

using namespace eaqec;
using eaqec::testkit::Rng;
namespace tk = eaqec::testkit;

namespace {

constexpr double kPi = std::numbers::pi;

// A for two unit rows with <row2|row1>^* pattern giving A A^dagger = [[1, c], [c, 1]], real c
ComplexMatrix real_overlap_A(double c) { return ComplexMatrix{{1.0, 0.0}, {c, std::sqrt(1 - c * c)}}; }

// sqrt(p_alpha) U_alpha written out from the RU formulas
ComplexMatrix expected_kraus(std::size_t alpha, cplx c) {
    const double m = std::abs(c);
    const cplx ph = m < 1e-14 ? cplx(1.0) : c / m;
    if (alpha == 1) return ComplexMatrix::diagonal({-ph, 1.0}) * cplx(std::sqrt((1 - m) / 2));
    return ComplexMatrix::diagonal({ph, 1.0}) * cplx(std::sqrt((1 + m) / 2));
}

DensityMatrix reduced_after_channel(const DephasingModel& m, const DensityMatrix& rho, double t) {
    return partial_trace_env(joint_evolve(rho, DensityMatrix::pure(m.psi0()), m.h1(), m.h2(), t), m.env_dim());
}

}  // namespace

TEST(BuildA, TrivialAtTimeZeroAndGram) {
    Rng rng(1);
    const DephasingModel m = tk::random_model(rng, 3);
    const auto basis = computational_basis(3);
    const ComplexMatrix a = build_A(kraus_from_env_basis(m, 0.0, basis));
    for (std::size_t b = 0; b < 3; ++b) EXPECT_LE(std::abs(a(0, b) - a(1, b)), 1e-15);
    for (double t : {0.4, 1.9, 3.3}) {
        const ComplexMatrix at = build_A(kraus_from_env_basis(m, t, basis));
        const ComplexMatrix g = at * at.adjoint();
        EXPECT_NEAR(g(0, 0).real(), 1.0, 1e-12);
        EXPECT_NEAR(g(1, 1).real(), 1.0, 1e-12);
        EXPECT_LE(std::abs(g(0, 1) - overlap_at(m, t).value), 1e-12);
    }
}

TEST(CorrectionBasis, RealHalfOverlapClosedForm) {
    const ComplexMatrix a = real_overlap_A(0.5);
    const Overlap c(0.5);
    const auto cb = correction_basis(a, c);
    const std::vector<cplx> u1{-std::sqrt(0.5), std::sqrt(0.5)};
    const auto w1_ref = a.adjoint() * u1;
    for (std::size_t b = 0; b < 2; ++b) EXPECT_LE(std::abs(cb.change.W(b, 0) - w1_ref[b] / std::sqrt(0.5)), 1e-14);
    const KrausSet ks({ComplexMatrix::diagonal({a(0, 0), a(1, 0)}), ComplexMatrix::diagonal({a(0, 1), a(1, 1)})});
    EXPECT_LE(max_abs_diff(cb.change.combine(1, ks), ComplexMatrix::diagonal({-0.5, 0.5})), 1e-14);
    EXPECT_LE(max_abs_diff(cb.change.combine(2, ks), expected_kraus(2, 0.5)), 1e-14);
}

TEST(CorrectionBasis, Errors) {
    EXPECT_THROW(correction_basis(real_overlap_A(0.5), Overlap(0.3)), ContractViolation);
    EXPECT_THROW(correction_basis(real_overlap_A(1.0), Overlap(1.0)), DegenerateChannelError);
    EXPECT_NO_THROW(correction_basis(real_overlap_A(1.0), Overlap(1.0), {}, DegeneratePolicy::complete));
    EXPECT_THROW(correction_basis(ComplexMatrix(3, 3), Overlap(0.5)), DimensionError);
}

TEST(CorrectionBasis, IdentitiesOnRandomModels) {
    Rng rng(2);
    for (std::size_t n : {2u, 3u, 4u, 8u}) {
        for (int i = 0; i < 10; ++i) {
            const DephasingModel m = tk::random_model(rng, n);
            const double t = rng.uniform(0.1, 4.0);
            const Overlap c = overlap_at(m, t);
            const KrausSet ks = kraus_from_env_basis(m, t, computational_basis(n));
            const ComplexMatrix a = build_A(ks);
            const auto cb = correction_basis(a, c);
            EXPECT_TRUE(cb.change.W.is_unitary(1e-10));
            EXPECT_LE(max_abs_diff(cb.change.V, cb.change.W.transpose()), 0.0);
            const auto b = inhomogeneities(c);
            for (std::size_t alpha = 1; alpha <= n; ++alpha) {
                const auto aw = a * cb.change.W.col(alpha - 1);
                const ComplexMatrix combined = cb.change.combine(alpha, ks);
                if (alpha <= 2) {
                    EXPECT_LE(tk::vec_diff(aw, b[alpha - 1]), 1e-10) << "n=" << n << " alpha=" << alpha;
                    EXPECT_LE(max_abs_diff(combined, expected_kraus(alpha, c.value)), 1e-10);
                } else {
                    EXPECT_LE(vector_norm(aw), 1e-10);
                    EXPECT_LE(combined.max_abs(), 1e-10);
                }
            }
            EXPECT_TRUE(cb.observable.is_complete());
            EXPECT_EQ(cb.observable.labels().front(), 1.0);
            EXPECT_EQ(cb.observable.labels().back(), static_cast<double>(n));
        }
    }
}

TEST(CorrectionObservable, Validation) {
    EXPECT_THROW(CorrectionObservable({Ket::basis(2, 0), Ket::normalized({1.0, 1.0})}, {1, 2}), ContractViolation);
    EXPECT_THROW(CorrectionObservable({Ket::basis(2, 0), Ket::basis(2, 1)}, {1, 1}), ContractViolation);
    EXPECT_THROW(CorrectionObservable({Ket::basis(2, 0), Ket::basis(2, 1)}, {1}), DimensionError);
    const CorrectionObservable o({Ket::basis(2, 0), Ket::basis(2, 1)}, {1, 2});
    EXPECT_LE(max_abs_diff(o.matrix(), ComplexMatrix::diagonal({1.0, 2.0})), 0.0);
}

TEST(JointEvolve, TrivialCases) {
    Rng rng(3);
    const DephasingModel m = tk::random_model(rng, 3);
    const DensityMatrix rho = tk::random_density(rng, 2);
    const DensityMatrix env = DensityMatrix::pure(m.psi0());
    EXPECT_LE(max_abs_diff(joint_evolve(rho, env, m.h1(), m.h2(), 0.0).matrix(), kron(rho.matrix(), env.matrix())), 1e-15);
    for (double t : {0.5, 2.0})
        EXPECT_LE(max_abs_diff(partial_trace_env(joint_evolve(rho, env, m.h1(), m.h1(), t), 3).matrix(), rho.matrix()),
                  1e-12);
    EXPECT_THROW(joint_evolve(rho, DensityMatrix::maximally_mixed(2), m.h1(), m.h2(), 1.0), DimensionError);
}

TEST(JointEvolve, RouteEquivalencePureAndMixedEnvironment) {
    Rng rng(4);
    for (int i = 0; i < 100; ++i) {
        const std::size_t n = 2 + rng.index(3);
        const DephasingModel m = tk::random_model(rng, n);
        const double t = rng.uniform(0, 5);
        const DensityMatrix rho = tk::random_density(rng, 2);
        if (i % 2 == 0) {
            EXPECT_LE(max_abs_diff(reduced_after_channel(m, rho, t).matrix(), apply_channel(rho, overlap_at(m, t)).matrix()),
                      1e-10);
        } else {
            // mixed environment: sum_k q_k |e_k><e_k| gives coefficient sum_k q_k C_k
            const DensityMatrix env = tk::random_density(rng, n);
            const auto eig = hermitian_eig(env.matrix());
            cplx c = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const Ket ek = Ket::normalized(eig.eigenvectors.col(k));
                c += eig.eigenvalues[k] * overlap_at(DephasingModel(m.h1(), m.h2(), ek), t).value;
            }
            const auto red = partial_trace_env(joint_evolve(rho, env, m.h1(), m.h2(), t), n);
            EXPECT_LE(max_abs_diff(red.matrix(), apply_channel(rho, c).matrix()), 1e-10);
        }
    }
}

TEST(MeasureEnv, BranchProbabilityExamples) {
    const DensityMatrix rho = bloch_to_density({1, 0, 0});
    // C = 1 at t = 0
    const DephasingModel sz(pauli_z(), pauli_z() * cplx(-1.0), Ket::normalized({1.0, 1.0}));
    {
        const auto plan = plan_correction(sz, 0.0);
        const auto out = measure_env(joint_evolve(rho, DensityMatrix::pure(sz.psi0()), sz.h1(), sz.h2(), 0.0), plan.observable);
        ASSERT_EQ(out.size(), 1u);
        EXPECT_EQ(out[0].alpha, 2u);
        EXPECT_NEAR(out[0].probability, 1.0, 1e-12);
    }
    // C = cos 2t: zero at pi/4, one half at pi/6
    for (auto [t, p1] : {std::pair{kPi / 4, 0.5}, std::pair{kPi / 6, 0.25}}) {
        const auto plan = plan_correction(sz, t);
        const auto out = measure_env(joint_evolve(rho, DensityMatrix::pure(sz.psi0()), sz.h1(), sz.h2(), t), plan.observable);
        ASSERT_EQ(out.size(), 2u);
        EXPECT_NEAR(out[0].probability, p1, 1e-12);
        EXPECT_NEAR(out[1].probability, 1 - p1, 1e-12);
    }
}

TEST(MeasureEnv, ProbabilitiesMatchRUWeights) {
    Rng rng(5);
    for (std::size_t n : {2u, 3u, 4u, 8u}) {
        for (int i = 0; i < 10; ++i) {
            const DephasingModel m = tk::random_model(rng, n);
            const double t = rng.uniform(0.1, 4.0);
            const auto plan = plan_correction(m, t);
            const DensityMatrix rho = tk::random_density(rng, 2);
            const auto out = measure_env(joint_evolve(rho, DensityMatrix::pure(m.psi0()), m.h1(), m.h2(), t), plan.observable);
            const double mag = std::abs(plan.overlap.value);
            for (const auto& o : out) {
                EXPECT_LE(o.alpha, 2u);
                EXPECT_NEAR(o.probability, o.alpha == 1 ? (1 - mag) / 2 : (1 + mag) / 2, 1e-10);
            }
        }
    }
}

TEST(MeasureEnv, SampleModeIsSeededAndIncompleteRejected) {
    Rng rng(6);
    const DephasingModel m = tk::random_model(rng, 2);
    const auto plan = plan_correction(m, 1.1);
    const auto se = joint_evolve(bloch_to_density({0, 1, 0}), DensityMatrix::pure(m.psi0()), m.h1(), m.h2(), 1.1);
    std::array<int, 2> counts{};
    for (std::uint64_t s = 0; s < 400; ++s) {
        const auto a = measure_env(se, plan.observable, MeasurementMode::sample(s));
        const auto b = measure_env(se, plan.observable, MeasurementMode::sample(s));
        ASSERT_EQ(a.size(), 1u);
        EXPECT_EQ(a[0].alpha, b[0].alpha);
        ++counts[a[0].alpha - 1];
    }
    EXPECT_NEAR(counts[0] / 400.0, plan.ru.p1, 0.1);
    EXPECT_THROW(measure_env(DensityMatrix::maximally_mixed(6), plan.observable), DimensionError);
}

TEST(CorrectState, SpuriousBranchThrows) {
    const auto ru = ru_decomposition(Overlap(0.5));
    const MeasurementOutcome o{3, 0.2, DensityMatrix::maximally_mixed(2), std::nullopt};
    EXPECT_THROW(correct_state(o, ru), InvariantViolation);
    const MeasurementOutcome tiny{3, 1e-11, DensityMatrix::maximally_mixed(2), std::nullopt};
    EXPECT_NO_THROW(correct_state(tiny, ru));
}

TEST(CorrectState, BranchTwoAtUnitOverlapIsIdentity) {
    Rng rng(7);
    const DensityMatrix rho = tk::random_density(rng, 2);
    const MeasurementOutcome o{2, 1.0, rho, std::nullopt};
    EXPECT_LE(max_abs_diff(correct_state(o, ru_decomposition(Overlap(1.0))).matrix(), rho.matrix()), 1e-15);
}

TEST(RoundTrip, Examples) {
    const DephasingModel sz(pauli_z(), pauli_z() * cplx(-1.0), Ket::normalized({1.0, 1.0}));
    const DensityMatrix plus = bloch_to_density({1, 0, 0});
    const auto r0 = round_trip(sz, plus, 0.0);
    EXPECT_NEAR(r0.dist_before, 0.0, 1e-15);
    EXPECT_NEAR(r0.dist_after, 0.0, 1e-15);
    const auto rz = round_trip(sz, plus, kPi / 4);
    EXPECT_NEAR(std::abs(rz.C), 0.0, 1e-15);
    EXPECT_NEAR(rz.dist_before, 0.5, 1e-12);
    EXPECT_LT(rz.dist_after, 1e-10);
}

TEST(RoundTrip, PlusStateBranchOneAlwaysRecovered) {
    Rng rng(8);
    const DensityMatrix plus = bloch_to_density({1, 0, 0});
    for (int i = 0; i < 20; ++i) {
        const auto rep = round_trip(tk::random_model(rng, 2 + rng.index(4)), plus, rng.uniform(0.1, 5));
        EXPECT_LT(rep.dist_after_branch(1), 1e-10);
    }
}

TEST(RoundTrip, PerfectRecoveryAcrossDimensionsAndSweep) {
    Rng rng(9);
    for (std::size_t n : {2u, 3u, 4u, 8u}) {
        const DephasingModel m = tk::random_model(rng, n);
        const DensityMatrix rho = tk::random_density(rng, 2);
        for (int k = 0; k < 50; ++k) {
            const double t = 0.1 * k;
            const auto rep = round_trip(m, rho, t);
            EXPECT_LT(rep.dist_after, 1e-10) << "n=" << n << " t=" << t;
            EXPECT_NEAR(rep.p1, (1 - std::abs(rep.C)) / 2, 1e-10);
        }
    }
}
