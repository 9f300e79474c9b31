// test_generators.cpp — Bohr-frequency decomposition and the two generators

#include <gtest/gtest.h>

#include "support.hpp"

namespace pl = penaltylab;
using pl::BathSpec;
using pl::Operator;
using pl::PauliString;

namespace {

struct RandomSystem {
    Operator H;
    pl::InteractionSet set;
    BathSpec bath;
};

RandomSystem random_system(std::mt19937_64& rng, std::size_t n)
{
    RandomSystem s;
    s.H = pl::testing::random_pauli_hamiltonian(rng, n, 3 * n);
    std::vector<PauliString> ps;
    for (std::size_t a = 0; a < 3; ++a) ps.push_back(pl::testing::random_pauli(rng, n, 2));
    s.set = pl::interactions_from_paulis(ps);
    s.bath = BathSpec::ohmic(1.0, 0.6, 1, 10.0, 3);
    s.bath.coupling = pl::testing::random_psd(rng, 3, 2);
    return s;
}

Operator superop_of(const pl::Liouvillian& gen) { return gen.superoperator(); }

} // namespace

TEST(BohrFrequencies, TwoLevelSigmaX)
{
    const auto spec = pl::spectral_decompose(pl::testing::sigma_z());
    const auto comps = pl::decompose_interaction(pl::testing::sigma_x(), spec, 1e-9);
    Operator plus2 = Operator::Zero(2, 2), minus2 = Operator::Zero(2, 2);
    for (std::size_t i = 0; i < comps.omegas.size(); ++i) {
        if (std::abs(comps.omegas[i] - 2.0) < 1e-12) plus2 = comps.parts[i];
        else if (std::abs(comps.omegas[i] + 2.0) < 1e-12) minus2 = comps.parts[i];
        else EXPECT_EQ(comps.parts[i].norm(), 0.0);
    }
    Operator unit = Operator::Zero(2, 2);
    unit(1, 0) = 1.0; // |1⟩⟨0|: ground ← excited
    EXPECT_LT((plus2 - unit).norm(), 1e-15);
    EXPECT_LT((minus2 - unit.adjoint()).norm(), 1e-15);
}

TEST(BohrFrequencies, CommutingOperatorSitsAtZero)
{
    std::mt19937_64 rng(1);
    const Operator H = pl::pauli_sum_matrix(std::vector<PauliString>{pl::parse_pauli("0.7*ZI"), pl::parse_pauli("0.2*IZ")}, 2);
    const Operator A = pl::pauli_matrix(PauliString("ZZ"));
    const auto comps = pl::decompose_interaction(A, pl::spectral_decompose(H), 1e-9);
    for (std::size_t i = 0; i < comps.omegas.size(); ++i) {
        if (comps.omegas[i] == 0.0) {
            EXPECT_LT((comps.parts[i] - A).norm(), 1e-14);
        } else {
            EXPECT_LT(comps.parts[i].norm(), 1e-14);
        }
    }
}

TEST(BohrFrequencies, CompletenessAndConjugationOnRandomHamiltonians)
{
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 5; ++trial) {
        const Operator H = pl::testing::random_pauli_hamiltonian(rng, 3, 8);
        const auto spec = pl::spectral_decompose(H);
        for (std::size_t q = 0; q < 3; ++q)
            for (char c : {'X', 'Y', 'Z'}) {
                const Operator A = pl::pauli_matrix(PauliString::single(3, q, c));
                const auto comps = pl::decompose_interaction(A, spec, pl::default_frequency_tol(spec));
                Operator sum = Operator::Zero(8, 8);
                for (const auto& p : comps.parts) sum += p;
                EXPECT_LT(pl::operator_norm(sum - A), 1e-10);
                for (std::size_t i = 0; i < comps.omegas.size(); ++i) {
                    std::size_t j = comps.omegas.size();
                    for (std::size_t k = 0; k < comps.omegas.size(); ++k)
                        if (std::abs(comps.omegas[k] + comps.omegas[i]) < 1e-9) j = k;
                    ASSERT_LT(j, comps.omegas.size());
                    EXPECT_LT(pl::operator_norm(comps.parts[i].adjoint() - comps.parts[j]), 1e-10);
                }
            }
    }
}

TEST(BohrFrequencies, AmbiguousBinningIsSurfaced)
{
    Operator H = Operator::Zero(4, 4);
    H(1, 1) = 1.0;
    H(2, 2) = 2.0 + 4e-4; // Bohr frequencies 1.0 and 1.0004 collide
    H(3, 3) = 3.0;
    EXPECT_THROW(pl::bohr_bins(pl::spectral_decompose(H, 1e-8), 1e-3), pl::NumericalFailure);
    EXPECT_NO_THROW(pl::bohr_bins(pl::spectral_decompose(H, 1e-8), 1e-6));
}

TEST(BohrFrequencies, EncodedFrequenciesAreAffineInPenalty)
{
    const auto code = pl::catalog::four_qubit();
    const std::vector<PauliString> terms{pl::parse_pauli("-0.5*ZI"), pl::parse_pauli("0.3*IX")};
    for (double eta : {0.7, 2.3, 6.1}) {
        const auto sys = pl::encode_logical(terms, code, eta);
        const auto spec = pl::spectral_decompose(sys.hamiltonian());
        auto avg = [&](std::size_t l, const Operator& op) {
            return pl::trace_product(spec[l].projector, op).real() / spec[l].multiplicity;
        };
        for (const auto& bin : pl::bohr_bins(spec, pl::default_frequency_tol(spec)))
            for (const auto& [l, lp] : bin.pairs) {
                const double dbar = avg(lp, sys.H_bar) - avg(l, sys.H_bar);
                const double dxi = avg(lp, sys.H_p) - avg(l, sys.H_p);
                EXPECT_NEAR(dxi, std::round(dxi), 1e-10);
                EXPECT_NEAR(bin.omega, dbar + eta * dxi, 1e-9);
            }
    }
}

TEST(Lindblad, EmptyInteractionsConservePurity)
{
    const Operator H = pl::pauli_sum_matrix(std::vector<PauliString>{pl::parse_pauli("XZ"), pl::parse_pauli("0.4*YY")}, 2);
    const auto gen = pl::build_lindblad(H, {}, BathSpec::ohmic(1.0, 1.0, 1, 10.0, 0), false);
    std::mt19937_64 rng(9);
    const Operator rho0 = pl::testing::random_pure(rng, 4);
    const auto traj = pl::propagate(gen, rho0, 2.0, 0.01);
    for (double p : traj.purity) EXPECT_NEAR(p, 1.0, 1e-8);
}

TEST(Lindblad, TwoLevelRelaxesToGibbs)
{
    const pl::testing::TwoLevel sys;
    const auto gen = pl::build_lindblad(sys.H, sys.set, sys.bath, false);
    // stationary state from the null space of the superoperator
    const Eigen::FullPivLU<Operator> lu(gen.superoperator());
    ASSERT_EQ(lu.dimensionOfKernel(), 1);
    const Eigen::VectorXcd v = lu.kernel().col(0);
    const Operator rho = Eigen::Map<const Operator>(v.data(), 2, 2) / (v(0) + v(3));
    const double delta = 2.0;
    const double z = 1.0 + std::exp(-sys.bath.beta * delta);
    EXPECT_NEAR(rho(1, 1).real(), 1.0 / z, 1e-12);
    EXPECT_NEAR(rho(0, 0).real(), std::exp(-sys.bath.beta * delta) / z, 1e-12);
    EXPECT_NEAR(std::abs(rho(0, 1)), 0.0, 1e-12);
}

TEST(Lindblad, LambShiftCommutesWithHamiltonian)
{
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 3; ++trial) {
        const auto s = random_system(rng, 3);
        const auto gen = pl::build_lindblad(s.H, s.set, s.bath, true);
        EXPECT_GT(gen.lamb_shift().norm(), 0.0);
        EXPECT_LE(pl::operator_norm(pl::commutator(gen.lamb_shift(), s.H)), 1e-9);
        EXPECT_TRUE(pl::is_hermitian(gen.lamb_shift(), 1e-12));
    }
}

TEST(Generators, TraceAnnihilationAndHermiticity)
{
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 3; ++trial) {
        const auto s = random_system(rng, 3);
        const auto lind = pl::build_lindblad(s.H, s.set, s.bath, true);
        const auto dsame = pl::build_dsame(s.H, s.set, s.bath);
        for (int i = 0; i < 10; ++i) {
            const Operator rho = pl::testing::random_density(rng, 8);
            for (const auto* gen : {&lind, &dsame}) {
                const Operator out = gen->apply(rho);
                EXPECT_LE(std::abs(out.trace()), 1e-10);
                EXPECT_LE(pl::hermiticity_error(out), 1e-10);
            }
            // a non-Hermitian input also has zero trace image
            const Operator x = pl::testing::random_density(rng, 8) * pl::testing::random_density(rng, 8);
            EXPECT_LE(std::abs(lind.apply(x).trace()), 1e-10);
            EXPECT_LE(std::abs(dsame.apply(x).trace()), 1e-10);
        }
    }
}

TEST(Generators, MaterializedMatchesDirectApplication)
{
    std::mt19937_64 rng(14);
    const auto s = random_system(rng, 2);
    for (const auto& gen : {pl::build_lindblad(s.H, s.set, s.bath, true), pl::build_dsame(s.H, s.set, s.bath)}) {
        ASSERT_TRUE(gen.materialized());
        const Operator L = superop_of(gen);
        const Operator rho = pl::testing::random_density(rng, 4);
        const Eigen::VectorXcd v = L * Eigen::Map<const Eigen::VectorXcd>(rho.data(), 16);
        const Operator via_matrix = Eigen::Map<const Operator>(v.data(), 4, 4);
        const Operator direct = -pl::Complex(0, 1) * pl::commutator(gen.hamiltonian_part(), rho) + gen.dissipator(rho);
        EXPECT_LT((via_matrix - direct).norm(), 1e-12);
    }
}

TEST(Generators, LargeSystemsUseApplyForm)
{
    // 6 qubits: dim 64 > 32, so the generator stays in apply form
    std::vector<PauliString> ps{PauliString("XIIIII"), PauliString("IIIZII")};
    const Operator H = pl::pauli_sum_matrix(std::vector<PauliString>{PauliString("ZIIIII", 0.5), PauliString("IIIXXI", 0.3)}, 6);
    const auto gen = pl::build_lindblad(H, pl::interactions_from_paulis(ps), BathSpec::ohmic(1.0, 1.0, 1, 10.0, 2), false);
    EXPECT_FALSE(gen.materialized());
    std::mt19937_64 rng(3);
    const Operator rho = pl::testing::random_density(rng, 64);
    EXPECT_LE(std::abs(gen.apply(rho).trace()), 1e-10);
}

TEST(Dsame, SecularLimitReproducesLindblad)
{
    std::mt19937_64 rng(15);
    for (int trial = 0; trial < 3; ++trial) {
        const auto s = random_system(rng, 2);
        pl::GeneratorOptions secular;
        secular.secular = true;
        // Γ + Γ† → γ with the Lamb shift carried by the Hermitian part
        const Operator with_s = superop_of(pl::build_dsame(s.H, s.set, s.bath, secular));
        const Operator lind_ls = superop_of(pl::build_lindblad(s.H, s.set, s.bath, true));
        EXPECT_LE((with_s - lind_ls).norm(), 1e-10 * lind_ls.norm());
        secular.zero_principal_value = true;
        const Operator without_s = superop_of(pl::build_dsame(s.H, s.set, s.bath, secular));
        const Operator lind = superop_of(pl::build_lindblad(s.H, s.set, s.bath, false));
        EXPECT_LE((without_s - lind).norm(), 1e-10 * lind.norm());
    }
}

TEST(Dsame, NonSecularDiffersButAgreesOnGroundTrace)
{
    // zero Lamb-shift test mode with diagonal γ at n = 2
    const Operator H = pl::pauli_sum_matrix(std::vector<PauliString>{pl::parse_pauli("0.8*ZI"), pl::parse_pauli("0.5*IZ"),
                                                                     pl::parse_pauli("0.3*XX")}, 2);
    const auto set = pl::interactions_from_paulis({PauliString("XI"), PauliString("IY"), PauliString("ZZ")});
    const auto bath = BathSpec::ohmic(1.0, 1.0, 1, 10.0, 3);
    pl::GeneratorOptions opts;
    opts.zero_principal_value = true;
    const auto dsame = pl::build_dsame(H, set, bath, opts);
    const auto lind = pl::build_lindblad(H, set, bath, false);
    EXPECT_GT((dsame.superoperator() - lind.superoperator()).norm(), 1e-6);
    const Operator& p0 = lind.ground_projector();
    const Operator rho0 = p0 / p0.trace().real();
    const double rd = pl::trace_product(p0, dsame.dissipator(rho0)).real();
    const double rl = pl::trace_product(p0, lind.dissipator(rho0)).real();
    EXPECT_LE(pl::testing::rel_diff(rd, rl), 1e-10);
}

TEST(Lindblad, PropagationFromRandomPureStatesStaysPositive)
{
    std::mt19937_64 rng(16);
    pl::PropagateOptions po;
    po.track_positivity = true;
    for (int trial = 0; trial < 6; ++trial) {
        const auto s = random_system(rng, 1 + trial % 3);
        const auto gen = pl::build_lindblad(s.H, s.set, s.bath, trial % 2 == 0);
        const auto dim = s.H.rows();
        const auto traj = pl::propagate(gen, pl::testing::random_pure(rng, dim), 0.05, 0.005, po);
        for (double m : traj.min_eigenvalue) EXPECT_GE(m, -1e-9);
    }
}

TEST(Generators, ConfigurationErrors)
{
    const pl::testing::TwoLevel sys;
    auto bath = sys.bath;
    bath.coupling = pl::identity(2);
    EXPECT_THROW(pl::build_lindblad(sys.H, sys.set, bath, false), pl::ConfigError);
    const auto wrong_dim = pl::interactions_from_paulis({PauliString("XX")});
    EXPECT_THROW(pl::build_dsame(sys.H, wrong_dim, sys.bath), pl::ConfigError);
}
