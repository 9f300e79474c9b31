// bath.hpp — thermal Ohmic-like bath: the rate matrix γ_{αβ}(ω) and its
// principal-value partner S(ω)

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "penaltylab/operators.hpp"

namespace penaltylab {

// γ_{αβ}(ω) = c_{αβ} · γ(ω); γ(ω) = μ ω^k e^{-ω/ω_c} for ω > 0 and
// γ(-ω) = e^{-βω} γ(ω).
struct BathSpec {
    double beta{1.0};
    double mu{1.0};
    int k{1};
    double omega_c{10.0};
    Operator coupling; // Hermitian PSD over interaction indices

    static BathSpec ohmic(double beta, double mu, int k, double omega_c, Eigen::Index n_channels)
    {
        return {beta, mu, k, omega_c, Operator::Identity(n_channels, n_channels)};
    }

    Eigen::Index channels() const { return coupling.rows(); }
};

inline double psd_tolerance(const Operator& c) { return 1e-12 * std::max(1.0, std::abs(c.trace().real())); }

inline void validate(const BathSpec& bath)
{
    if (!(bath.beta > 0.0) || !std::isfinite(bath.beta)) throw ConfigError("bath: beta must be > 0");
    if (!(bath.mu >= 0.0) || !std::isfinite(bath.mu)) throw ConfigError("bath: mu must be >= 0");
    if (bath.k < 1) throw ConfigError("bath: spectral exponent k must be >= 1");
    if (!(bath.omega_c > 0.0) || !std::isfinite(bath.omega_c)) throw ConfigError("bath: omega_c must be > 0");
    if (bath.coupling.rows() != bath.coupling.cols()) throw ConfigError("bath: coupling matrix must be square");
    if (!is_hermitian(bath.coupling, 1e-12)) throw ConfigError("bath: coupling matrix must be Hermitian");
    if (bath.coupling.size() > 0 && min_eigenvalue(bath.coupling) < -psd_tolerance(bath.coupling))
        throw ConfigError("bath: coupling matrix is not positive semi-definite");
}

// Positive-frequency branch μ ω^k e^{-ω/ω_c}.
inline double ohmic_branch(const BathSpec& bath, double omega)
{
    return bath.mu * std::pow(omega, bath.k) * std::exp(-omega / bath.omega_c);
}

inline double gamma_scalar(const BathSpec& bath, double omega)
{
    if (omega > 0.0) return ohmic_branch(bath, omega);
    if (omega < 0.0) return std::exp(bath.beta * omega) * ohmic_branch(bath, -omega);
    return 0.0; // ω→0 limit for k ≥ 1
}

inline Operator gamma_matrix(const BathSpec& bath, double omega) { return bath.coupling * gamma_scalar(bath, omega); }

// sup_{ω>0} γ(ω), attained at ω = kω_c.
inline double ohmic_peak_frequency(const BathSpec& bath) { return bath.k * bath.omega_c; }
inline double ohmic_peak_value(const BathSpec& bath)
{
    return bath.mu * std::pow(bath.k * bath.omega_c, bath.k) * std::exp(-static_cast<double>(bath.k));
}

// Eigen-decomposition of the coupling matrix. Since γ factorizes, U is
// frequency independent and the rates are weights · γ(ω).
struct CouplingEigensystem {
    Operator U;              // columns are eigenvectors: U† c U = diag(weights)
    Eigen::VectorXd weights; // clipped to >= 0
};

inline CouplingEigensystem coupling_eigensystem(const BathSpec& bath)
{
    if (bath.coupling.rows() != bath.coupling.cols()) throw ConfigError("bath: coupling matrix must be square");
    if (bath.coupling.size() == 0) return {Operator(0, 0), Eigen::VectorXd(0)};
    Eigen::SelfAdjointEigenSolver<Operator> es(0.5 * (bath.coupling + bath.coupling.adjoint()));
    Eigen::VectorXd w = es.eigenvalues();
    const double tol = psd_tolerance(bath.coupling);
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (w(i) < -tol)
            throw ConfigError("bath: coupling matrix has eigenvalue " + std::to_string(w(i)) +
                              ", not positive semi-definite");
        w(i) = std::max(w(i), 0.0);
    }
    return {es.eigenvectors(), w};
}

struct GammaEigensystem {
    Operator U;
    Eigen::VectorXd rates;
};

inline GammaEigensystem gamma_eigensystem(const BathSpec& bath, double omega)
{
    auto ce = coupling_eigensystem(bath);
    return {std::move(ce.U), ce.weights * gamma_scalar(bath, omega)};
}

// --------------------------------------------------------------------------
// Principal value S(ω) = (1/2π) PV ∫ γ(ω')/(ω − ω') dω'
// --------------------------------------------------------------------------

struct PrincipalValueOptions {
    double tolerance{1e-10};  // relative change between successive panel doublings
    int initial_panels{16};   // per sub-interval
    int max_doublings{14};
};

inline double principal_value_cutoff(const BathSpec& bath, double omega)
{
    return 50.0 * std::max({bath.omega_c, std::abs(omega), 1.0 / bath.beta});
}

// Symmetric excision around ω, folded onto u ∈ (0, Λ]:
//   PV ∫_{ω-Λ}^{ω+Λ} γ(ω')/(ω-ω') dω' = -∫_0^Λ [γ(ω+u) − γ(ω−u)]/u du.
// The folded integrand is bounded at u → 0, so the excision width can be
// taken to zero. Composite Gauss–Legendre with `panels` per sub-interval;
// sub-intervals break at the kink u = |ω| (where ω − u crosses zero).
inline double s_principal_value_fixed(const BathSpec& bath, double omega, int panels)
{
    if (bath.mu == 0.0) return 0.0;
    const double cutoff = principal_value_cutoff(bath, omega);
    auto integrand = [&](double u) {
        if (u <= 0.0) return 0.0;
        return (gamma_scalar(bath, omega + u) - gamma_scalar(bath, omega - u)) / u;
    };
    std::vector<double> breaks{0.0};
    if (omega != 0.0 && std::abs(omega) < cutoff) breaks.push_back(std::abs(omega));
    // Resolve the thermal and cutoff scales near the origin before the long tail.
    for (double b : {std::abs(omega) + 4.0 * bath.omega_c, std::abs(omega) + 20.0 / bath.beta})
        if (b < cutoff) breaks.push_back(b);
    breaks.push_back(cutoff);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    using Rule = boost::math::quadrature::gauss<double, 20>;
    double total = 0.0;
    for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
        const double a = breaks[s];
        const double width = (breaks[s + 1] - a) / panels;
        for (int p = 0; p < panels; ++p) total += Rule::integrate(integrand, a + p * width, a + (p + 1) * width);
    }
    return -total / (2.0 * std::numbers::pi);
}

// Doubles the panel count until successive estimates agree to the requested
// tolerance (relative to max(|S|, peak γ)).
inline double s_principal_value(const BathSpec& bath, double omega, const PrincipalValueOptions& opts = {})
{
    if (bath.mu == 0.0) return 0.0;
    const double scale = std::max(ohmic_peak_value(bath), std::numeric_limits<double>::min());
    int panels = opts.initial_panels;
    double prev = s_principal_value_fixed(bath, omega, panels);
    for (int it = 0; it < opts.max_doublings; ++it) {
        panels *= 2;
        const double next = s_principal_value_fixed(bath, omega, panels);
        if (std::abs(next - prev) <= opts.tolerance * std::max(std::abs(next), scale)) return next;
        prev = next;
    }
    throw NumericalFailure("principal-value quadrature did not converge at omega = " + std::to_string(omega));
}

// Γ(ω) = γ(ω)/2 + i S(ω) for the scalar factor of Γ_{αβ} = c_{αβ} Γ(ω).
inline Complex gamma_one_sided(const BathSpec& bath, double omega, const PrincipalValueOptions& opts = {})
{
    return {0.5 * gamma_scalar(bath, omega), s_principal_value(bath, omega, opts)};
}

} // namespace penaltylab
