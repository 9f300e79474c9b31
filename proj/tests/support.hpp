// support.hpp — shared fixtures and independent oracles for the test suite

#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "penaltylab/analysis.hpp"

namespace penaltylab::testing {

inline double rel_diff(double a, double b)
{
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

inline Operator sigma_x() { return pauli_matrix(PauliString("X")); }
inline Operator sigma_y() { return pauli_matrix(PauliString("Y")); }
inline Operator sigma_z() { return pauli_matrix(PauliString("Z")); }

// Two-level reference: H = Δ/2 σ_z with Δ = 2, A = σ_x, default Ohmic bath.
struct TwoLevel {
    Operator H = sigma_z();
    InteractionSet set = interactions_from_paulis({PauliString("X")});
    BathSpec bath = BathSpec::ohmic(1.0, 1.0, 1, 10.0, 1);
    Operator rho0 = [] {
        Operator r = Operator::Zero(2, 2);
        r(1, 1) = 1.0; // |1⟩ is the ground state of σ_z
        return r;
    }();
    double hand_rate() const { return -std::exp(-2.0) * 2.0 * std::exp(-0.2); }
};

// Encoded example: one logical qubit of the 4-qubit code, H̄ = −0.5 Z̄,
// all 12 weight-1 couplings.
inline EncodedExperiment four_qubit_example(InitialState init = InitialState::ground_mixed, std::uint64_t seed = 7)
{
    EncodedExperiment exp;
    exp.code = catalog::four_qubit();
    exp.logical_terms = {parse_pauli("-0.5*ZI")};
    exp.couplings = all_weight_one(4);
    exp.bath = BathSpec::ohmic(1.0, 1.0, 1, 10.0, 12);
    exp.initial = init;
    exp.seed = seed;
    return exp;
}

inline Operator random_hermitian(std::mt19937_64& rng, Eigen::Index dim)
{
    std::normal_distribution<double> n;
    Operator m(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) m(i, j) = Complex(n(rng), n(rng));
    return 0.5 * (m + m.adjoint());
}

inline Operator random_density(std::mt19937_64& rng, Eigen::Index dim)
{
    std::normal_distribution<double> n;
    Operator b(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) b(i, j) = Complex(n(rng), n(rng));
    Operator r = b * b.adjoint();
    return r / r.trace().real();
}

inline Operator random_pure(std::mt19937_64& rng, Eigen::Index dim)
{
    std::normal_distribution<double> n;
    StateVector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = Complex(n(rng), n(rng));
    v /= v.norm();
    return v * v.adjoint();
}

inline Operator random_psd(std::mt19937_64& rng, Eigen::Index dim, Eigen::Index rank)
{
    std::normal_distribution<double> n;
    Operator b(dim, rank);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < rank; ++j) b(i, j) = Complex(n(rng), n(rng));
    Operator c = b * b.adjoint();
    return c / c.trace().real() * static_cast<double>(dim);
}

inline PauliString random_pauli(std::mt19937_64& rng, std::size_t n, std::size_t max_weight, double coeff = 1.0)
{
    static const char letters[] = {'X', 'Y', 'Z'};
    std::uniform_int_distribution<std::size_t> pick_q(0, n - 1);
    std::uniform_int_distribution<int> pick_l(0, 2);
    std::uniform_int_distribution<std::size_t> pick_w(1, max_weight);
    std::string s(n, 'I');
    const std::size_t w = std::min(pick_w(rng), n);
    while (static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return c != 'I'; })) < w)
        s[pick_q(rng)] = letters[pick_l(rng)];
    return PauliString(s, coeff);
}

inline Operator random_pauli_hamiltonian(std::mt19937_64& rng, std::size_t n, std::size_t terms)
{
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    std::vector<PauliString> ps;
    for (std::size_t t = 0; t < terms; ++t) ps.push_back(random_pauli(rng, n, 2, coeff(rng)));
    return pauli_sum_matrix(ps, n);
}

// Derivative of Tr[Π₀ ρ(t)] at 0 through the exact propagator e^{tL},
// with a central-free one-sided Richardson stencil. Independent of RK4.
inline double expm_rate(const Liouvillian& gen, const Operator& rho0, double h = 1e-4)
{
    const Operator L = gen.superoperator();
    const Eigen::Index d = rho0.rows();
    const Eigen::VectorXcd v0 = Eigen::Map<const Eigen::VectorXcd>(rho0.data(), d * d);
    const Operator& p = gen.ground_projector();
    auto pop = [&](double t) {
        const Eigen::VectorXcd v = (Operator(L * t).exp()) * v0;
        const Operator rho = Eigen::Map<const Operator>(v.data(), d, d);
        return trace_product(p, rho).real();
    };
    const double f0 = trace_product(p, rho0).real();
    const double d1 = (pop(h) - f0) / h;
    const double d2 = (pop(0.5 * h) - f0) / (0.5 * h);
    return 2.0 * d2 - d1;
}

// The closed-form double sum rebuilt from scratch: eigen-decompose H directly,
// R = −Σ_{αβ} Σ_{l≠0 (l∉C)} c_{αβ} γ(ε₀−ε_l) Tr[ρ₀ A_α Π_l A_β].
inline double direct_rate_sum(const Operator& H, const Operator& rho0, const std::vector<Operator>& ops,
                              const BathSpec& bath, const Operator* codespace = nullptr, double tol = 1e-8)
{
    Eigen::SelfAdjointEigenSolver<Operator> es(H);
    const auto& e = es.eigenvalues();
    const auto& V = es.eigenvectors();
    const double e0 = e(0);
    Complex total{0.0, 0.0};
    for (Eigen::Index i = 0; i < e.size(); ++i) {
        if (e(i) - e0 <= tol) continue; // ground level
        const StateVector v = V.col(i);
        if (codespace != nullptr && (v.adjoint() * (*codespace) * v)(0, 0).real() > 0.5) continue;
        const Operator pi = v * v.adjoint();
        const double g = gamma_scalar(bath, e0 - e(i));
        for (std::size_t a = 0; a < ops.size(); ++a)
            for (std::size_t b = 0; b < ops.size(); ++b)
                total += bath.coupling(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) * g *
                         (rho0 * ops[a].adjoint() * pi * ops[b]).trace();
    }
    return -total.real();
}

} // namespace penaltylab::testing
