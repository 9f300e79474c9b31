// analysis.hpp — closed-form excitation rate out of the ground subspace,
// with its bounds and the penalty/size sweeps built on it

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "penaltylab/bath.hpp"
#include "penaltylab/codes.hpp"
#include "penaltylab/dynamics.hpp"
#include "penaltylab/generators.hpp"

namespace penaltylab {

// The Hamiltonian whose ground subspace is protected, plus the encoding data
// when a code is configured.
struct SystemModel {
    Operator hamiltonian;
    std::optional<Operator> codespace;
    double eta_p{0.0};
    double gap{0.0};

    static SystemModel bare(Operator h) { return {std::move(h), std::nullopt, 0.0, 0.0}; }
    static SystemModel encoded(const EncodedSystem& s) { return {s.hamiltonian(), s.P_C, s.eta_p, s.gap}; }

    bool is_encoded() const noexcept { return codespace.has_value(); }
    Eigen::Index dim() const { return hamiltonian.rows(); }
};

inline constexpr double kSupportTol = 1e-10;

namespace detail {

inline void require_density_matrix(const Operator& rho, Eigen::Index dim)
{
    if (rho.rows() != dim || rho.cols() != dim) throw ConfigError("initial state has wrong dimension");
    if (!is_hermitian(rho, kSupportTol)) throw ConfigError("initial state is not Hermitian");
    if (std::abs(rho.trace().real() - 1.0) > kSupportTol) throw ConfigError("initial state does not have unit trace");
    if (min_eigenvalue(0.5 * (rho + rho.adjoint())) < -kSupportTol)
        throw ConfigError("initial state is not positive semi-definite");
}

inline bool level_in_code(const Operator& projector, const Operator& codespace)
{
    return (projector - codespace * projector).cwiseAbs().maxCoeff() <= kSupportTol;
}

struct RateSetup {
    SpectralDecomposition spectrum;
    std::vector<bool> in_code;   // level l lies inside the codespace
    Eigen::VectorXd weights;     // eigenvalues of the coupling matrix
    std::vector<Operator> F;     // F_a = Σ_β (U†)_{aβ} A_β
    std::vector<Operator> G;     // F_a ρ₀ F_a†; Tr[ρ₀F_a†Π_lF_a] = Tr[Π_l G_a]

    const Operator& ground() const { return spectrum.ground().projector; }
    double epsilon0() const { return spectrum.ground().energy; }
    bool excited_outside_code(std::size_t l) const { return l != 0 && !in_code[l]; }
};

inline std::string describe_detection_failures(const Operator& codespace, const InteractionSet& set,
                                               const SpectralDecomposition& spec, const Operator& rho0,
                                               const BathSpec& bath)
{
    std::ostringstream msg;
    msg << "code does not detect every interaction operator:";
    for (std::size_t a = 0; a < set.size(); ++a) {
        const double r = detection_residual(codespace, set.operators[a]);
        if (r > kSupportTol) msg << ' ' << (a < set.labels.size() ? set.labels[a] : std::to_string(a)) << " (|P A P| = " << r << ")";
    }
    // Rate carried by levels inside the codespace, which detection would have removed.
    double unsuppressed = 0.0;
    for (std::size_t l = 1; l < spec.size(); ++l) {
        if (!level_in_code(spec[l].projector, codespace)) continue;
        const double g = gamma_scalar(bath, spec[0].energy - spec[l].energy);
        for (std::size_t a = 0; a < set.size(); ++a)
            for (std::size_t b = 0; b < set.size(); ++b) {
                const Complex c = bath.coupling(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
                if (c == Complex(0, 0)) continue;
                unsuppressed -= (c * g *
                                 trace_product(spec[l].projector * set.operators[b] * rho0, set.operators[a]))
                                    .real();
            }
    }
    msg << "; unsuppressed in-code rate contribution = " << unsuppressed;
    return msg.str();
}

inline RateSetup setup_rate(const Operator& rho0, const SystemModel& model, const InteractionSet& set,
                            const BathSpec& bath)
{
    validate(bath);
    validate(set, model.dim());
    validate_coupling(set, bath);
    require_density_matrix(rho0, model.dim());

    RateSetup rs;
    rs.spectrum = spectral_decompose(model.hamiltonian);
    const Operator& p0 = rs.ground();
    const double leak = (rho0 - p0 * rho0 * p0).cwiseAbs().maxCoeff();
    if (leak > kSupportTol)
        throw ContractViolation("initial state is not supported on the ground subspace (max off-subspace entry " +
                                std::to_string(leak) + ")");

    rs.in_code.assign(rs.spectrum.size(), false);
    if (model.codespace) {
        const Operator& pc = *model.codespace;
        bool all_detected = true;
        for (const auto& a : set.operators) all_detected = all_detected && detection_residual(pc, a) <= kSupportTol;
        if (!all_detected) throw ContractViolation(describe_detection_failures(pc, set, rs.spectrum, rho0, bath));
        for (std::size_t l = 0; l < rs.spectrum.size(); ++l) {
            rs.in_code[l] = level_in_code(rs.spectrum[l].projector, pc);
            if (l == 0 || !rs.in_code[l]) continue;
            for (std::size_t a = 0; a < set.size(); ++a) {
                const double r = operator_norm(p0 * set.operators[a] * rs.spectrum[l].projector);
                if (r > kSupportTol)
                    throw ContractViolation("in-code level " + std::to_string(l) + " couples to the ground level via " +
                                            set.labels.at(a) + " (norm " + std::to_string(r) + ")");
            }
        }
    }

    const auto ce = coupling_eigensystem(bath);
    rs.weights = ce.weights;
    const Eigen::Index d = model.dim();
    for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(set.size()); ++a) {
        Operator f = Operator::Zero(d, d);
        for (Eigen::Index b = 0; b < static_cast<Eigen::Index>(set.size()); ++b)
            f += std::conj(ce.U(b, a)) * set.operators[static_cast<std::size_t>(b)];
        rs.G.push_back(f * rho0 * f.adjoint());
        rs.F.push_back(std::move(f));
    }
    return rs;
}

} // namespace detail

// One summand −γ_a(ε₀−ε_l) Tr[ρ₀F_a†Π_lF_a] of the diagonalized rate.
struct RateTerm {
    std::size_t channel{0};
    std::size_t level{0};
    double omega{0.0};  // ε₀ − ε_l
    double rate{0.0};   // γ_a(ε₀ − ε_l)
    double weight{0.0}; // Tr[ρ₀F_a†Π_lF_a] ≥ 0
    double value{0.0};
};

inline std::vector<RateTerm> rate_terms(const Operator& rho0, const SystemModel& model, const InteractionSet& set,
                                        const BathSpec& bath)
{
    const auto rs = detail::setup_rate(rho0, model, set, bath);
    std::vector<RateTerm> terms;
    for (std::size_t l = 0; l < rs.spectrum.size(); ++l) {
        if (!rs.excited_outside_code(l)) continue;
        const double omega = rs.epsilon0() - rs.spectrum[l].energy;
        const double g = gamma_scalar(bath, omega);
        for (std::size_t a = 0; a < rs.F.size(); ++a) {
            const double rate = rs.weights(static_cast<Eigen::Index>(a)) * g;
            const double w = trace_product(rs.spectrum[l].projector, rs.G[a]).real();
            terms.push_back({a, l, omega, rate, w, -rate * w});
        }
    }
    return terms;
}

// R = −Σ_a Σ_{l∈C⊥} γ_a(ε₀−ε_l) Tr[ρ₀F_a†Π_lF_a]; unencoded: l ≠ 0.
inline double excitation_rate(const Operator& rho0, const SystemModel& model, const InteractionSet& set,
                              const BathSpec& bath)
{
    double r = 0.0;
    for (const auto& t : rate_terms(rho0, model, set, bath)) r += t.value;
    return r;
}

// Same rate from the undiagonalized rate matrix:
// R = −Σ_{αβ} Σ_{l∈C⊥} γ_{αβ}(ε₀−ε_l) Tr[ρ₀A_α†Π_lA_β].
inline double excitation_rate_matrix_form(const Operator& rho0, const SystemModel& model, const InteractionSet& set,
                                          const BathSpec& bath)
{
    const auto rs = detail::setup_rate(rho0, model, set, bath);
    std::vector<Operator> a_rho;
    for (const auto& a : set.operators) a_rho.push_back(a * rho0);
    Complex r{0.0, 0.0};
    for (std::size_t l = 0; l < rs.spectrum.size(); ++l) {
        if (!rs.excited_outside_code(l)) continue;
        const double g = gamma_scalar(bath, rs.epsilon0() - rs.spectrum[l].energy);
        if (g == 0.0) continue;
        for (std::size_t b = 0; b < set.size(); ++b) {
            const Operator z = rs.spectrum[l].projector * a_rho[b];
            for (std::size_t a = 0; a < set.size(); ++a) {
                const Complex c = bath.coupling(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
                if (c == Complex(0, 0)) continue;
                r -= c * g * trace_product(z, set.operators[a].adjoint());
            }
        }
    }
    return r.real();
}

// Re Tr[Π₀ L(ρ₀)] for the full generator, with Π₀ its ground projector.
inline double ground_trace_rate(const Liouvillian& gen, const Operator& rho0)
{
    return trace_product(gen.ground_projector(), gen.apply(rho0)).real();
}

// Re Tr[Π₀ D(ρ₀)], dissipator only.
inline double dissipator_ground_trace(const Liouvillian& gen, const Operator& rho0)
{
    return trace_product(gen.ground_projector(), gen.dissipator(rho0)).real();
}

struct PureStateRates {
    double R{0.0};
    std::optional<double> R_prime; // ⟨ψ₀|ρ̇(0)|ψ₀⟩, defined only for pure ρ₀
};

// R from the closed form; R' from the Lindblad generator applied to ρ₀.
inline PureStateRates pure_state_rate_check(const Operator& rho0, const SystemModel& model, const InteractionSet& set,
                                            const BathSpec& bath, bool include_lamb_shift = false)
{
    PureStateRates out;
    out.R = excitation_rate(rho0, model, set, bath);
    if (std::abs(purity_of(rho0) - 1.0) > kSupportTol) return out;
    Eigen::SelfAdjointEigenSolver<Operator> es(0.5 * (rho0 + rho0.adjoint()));
    const StateVector psi = es.eigenvectors().col(es.eigenvalues().size() - 1);
    const auto gen = build_lindblad(model.hamiltonian, set, bath, include_lamb_shift);
    out.R_prime = (psi.adjoint() * gen.apply(rho0) * psi)(0, 0).real();
    return out;
}

inline PureStateRates pure_state_rate_check(const StateVector& psi0, const SystemModel& model,
                                            const InteractionSet& set, const BathSpec& bath,
                                            bool include_lamb_shift = false)
{
    const StateVector psi = psi0 / psi0.norm();
    return pure_state_rate_check(Operator(psi * psi.adjoint()), model, set, bath, include_lamb_shift);
}

struct RateBounds {
    double gamma_max{0.0};          // max_{l∈C⊥, a} γ_a(ε₀ − ε_l)
    double gamma_max_reflected{0.0}; // max_{l∈C⊥, a} γ_a(ε_l − ε₀)
    double channel_weight{0.0};     // Σ_a Tr[ρ₀F_a†F_a]
    double suppression{1.0};        // e^{−βgη_p}; 1 without encoding
    double bound_poly{0.0};
    double bound_exp{0.0};
};

inline RateBounds rate_bounds(const Operator& rho0, const SystemModel& model, const InteractionSet& set,
                              const BathSpec& bath)
{
    const auto rs = detail::setup_rate(rho0, model, set, bath);
    RateBounds b;
    for (std::size_t l = 0; l < rs.spectrum.size(); ++l) {
        if (!rs.excited_outside_code(l)) continue;
        const double omega = rs.epsilon0() - rs.spectrum[l].energy;
        for (Eigen::Index a = 0; a < rs.weights.size(); ++a) {
            b.gamma_max = std::max(b.gamma_max, rs.weights(a) * gamma_scalar(bath, omega));
            b.gamma_max_reflected = std::max(b.gamma_max_reflected, rs.weights(a) * gamma_scalar(bath, -omega));
        }
    }
    for (const auto& g : rs.G) b.channel_weight += g.trace().real();
    if (model.is_encoded() && std::isfinite(model.gap)) b.suppression = std::exp(-bath.beta * model.gap * model.eta_p);
    b.bound_poly = b.gamma_max * b.channel_weight;
    b.bound_exp = b.suppression * b.gamma_max_reflected * b.channel_weight;
    return b;
}

// --------------------------------------------------------------------------
// Encoded experiments and sweeps
// --------------------------------------------------------------------------

enum class InitialState { ground_mixed, ground_pure };

struct EncodedExperiment {
    StabilizerCode code;
    std::vector<PauliString> logical_terms;
    std::vector<PauliString> couplings; // physical Pauli operators A_α
    BathSpec bath;
    InitialState initial{InitialState::ground_mixed};
    std::uint64_t seed{0};

    EncodedSystem system(double eta_p) const { return encode_logical(logical_terms, code, eta_p); }
    InteractionSet interactions() const { return interactions_from_paulis(couplings); }
};

// Projector onto the lowest H̄_S level inside the codespace. This subspace is
// part of the ground level of H̄_S + η_p H_p for every η_p ≥ 0.
inline Operator encoded_ground_projector(const EncodedSystem& sys)
{
    const double shift = 1.0 + 2.0 * operator_norm(sys.H_bar);
    const double gap = std::isfinite(sys.gap) && sys.gap > 0.0 ? sys.gap : 1.0;
    return spectral_decompose(sys.H_bar + (shift / gap) * sys.H_p).ground().projector;
}

inline Operator initial_state(const Operator& ground_projector, InitialState kind, std::uint64_t seed)
{
    if (kind == InitialState::ground_mixed) return ground_projector / ground_projector.trace().real();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    StateVector v(ground_projector.rows());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Complex(normal(rng), normal(rng));
    StateVector psi = ground_projector * v;
    psi /= psi.norm();
    return psi * psi.adjoint();
}

inline Operator initial_state(const EncodedExperiment& exp, const EncodedSystem& sys)
{
    return initial_state(encoded_ground_projector(sys), exp.initial, exp.seed);
}

struct RateReport {
    double eta_p{0.0};
    std::size_t n{0};
    double R_closed{0.0};
    double R_oracle{std::numeric_limits<double>::quiet_NaN()};
    double R_dsame{std::numeric_limits<double>::quiet_NaN()};
    double gamma_max{0.0};
    double bound_poly{0.0};
    double bound_exp{0.0};
    double beta{0.0};
    double g{0.0};
    double slope_fit{std::numeric_limits<double>::quiet_NaN()};
};

struct ReportOptions {
    bool with_oracle{true};
    bool with_dsame{true};
    bool oracle_lamb_shift{false};
    double oracle_step{0.0}; // 0: default_rate_step
    PrincipalValueOptions pv{};
};

inline RateReport rate_report(const Operator& rho0, const SystemModel& model, const InteractionSet& set,
                              const BathSpec& bath, std::size_t n_qubits, const ReportOptions& opts = {})
{
    RateReport row;
    row.eta_p = model.eta_p;
    row.n = n_qubits;
    row.beta = bath.beta;
    row.g = model.gap;
    row.R_closed = excitation_rate(rho0, model, set, bath);
    const auto b = rate_bounds(rho0, model, set, bath);
    row.gamma_max = b.gamma_max;
    row.bound_poly = b.bound_poly;
    row.bound_exp = b.bound_exp;
    if (opts.with_oracle) {
        GeneratorOptions go;
        go.pv = opts.pv;
        const auto gen = build_lindblad(model.hamiltonian, set, bath, opts.oracle_lamb_shift, go);
        row.R_oracle = finite_difference_rate(gen, rho0, opts.oracle_step);
    }
    if (opts.with_dsame) {
        GeneratorOptions go;
        go.pv = opts.pv;
        row.R_dsame = ground_trace_rate(build_dsame(model.hamiltonian, set, bath, go), rho0);
    }
    return row;
}

inline RateReport rate_report(const EncodedExperiment& exp, double eta_p, const ReportOptions& opts = {})
{
    const auto sys = exp.system(eta_p);
    return rate_report(initial_state(exp, sys), SystemModel::encoded(sys), exp.interactions(), exp.bath,
                       exp.code.n_physical, opts);
}

// Ordinary least squares slope of y on x.
inline double ols_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

// d ln|R| / dη_p over the top half of the grid (rows sorted by η_p).
inline double fit_log_slope(const std::vector<RateReport>& rows)
{
    if (rows.size() < 4) throw ConfigError("penalty sweep needs at least 4 grid points");
    std::vector<double> x, y;
    for (std::size_t i = rows.size() / 2; i < rows.size(); ++i) {
        if (rows[i].R_closed == 0.0) throw NumericalFailure("rate vanished on the fit window; cannot take its log");
        x.push_back(rows[i].eta_p);
        y.push_back(std::log(std::abs(rows[i].R_closed)));
    }
    return ols_slope(x, y);
}

struct PenaltySweep {
    std::vector<RateReport> rows;
    double slope{0.0};
};

inline PenaltySweep penalty_sweep(const EncodedExperiment& exp, std::vector<double> eta_grid,
                                  const ReportOptions& opts = {})
{
    if (eta_grid.size() < 4) throw ConfigError("penalty sweep needs at least 4 grid points");
    std::sort(eta_grid.begin(), eta_grid.end());
    PenaltySweep sweep;
    for (double eta : eta_grid) sweep.rows.push_back(rate_report(exp, eta, opts));
    sweep.slope = fit_log_slope(sweep.rows);
    for (auto& r : sweep.rows) r.slope_fit = sweep.slope;
    return sweep;
}

inline std::vector<double> linear_grid(double lo, double hi, std::size_t points)
{
    if (points < 2) return {lo};
    std::vector<double> g(points);
    for (std::size_t i = 0; i < points; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
    return g;
}

// m disjoint copies of one block: H = Σ_b H^{(b)}, couplings local to each
// block, block-diagonal bath coupling. Used to check blockwise evaluation.
struct ReplicatedSystem {
    SystemModel model;
    InteractionSet interactions;
    BathSpec bath;
    Operator rho0;
};

inline ReplicatedSystem replicate_blocks(const EncodedSystem& block, const InteractionSet& couplings,
                                         const BathSpec& bath, const Operator& block_rho0, int m)
{
    if (m < 1) throw ConfigError("block count must be >= 1");
    const Eigen::Index d = block.H_bar.rows();
    const Operator id = identity(d);
    auto embed = [&](const Operator& op, int pos) {
        Operator out = Operator::Identity(1, 1);
        for (int b = 0; b < m; ++b) out = kron(out, b == pos ? op : id);
        return out;
    };
    ReplicatedSystem rep;
    const Eigen::Index total = static_cast<Eigen::Index>(std::pow(static_cast<double>(d), m));
    Operator h = Operator::Zero(total, total);
    Operator pc = Operator::Identity(1, 1);
    Operator rho = Operator::Identity(1, 1);
    for (int b = 0; b < m; ++b) {
        h += embed(block.hamiltonian(), b);
        pc = kron(pc, block.P_C);
        rho = kron(rho, block_rho0);
        for (std::size_t a = 0; a < couplings.size(); ++a) {
            rep.interactions.operators.push_back(embed(couplings.operators[a], b));
            rep.interactions.labels.push_back("b" + std::to_string(b) + ":" +
                                              (a < couplings.labels.size() ? couplings.labels[a] : std::to_string(a)));
        }
    }
    rep.interactions.k_locality = couplings.k_locality;
    rep.model = {h, pc, block.eta_p, block.gap};
    const Eigen::Index ch = bath.channels();
    rep.bath = bath;
    rep.bath.coupling = Operator::Zero(ch * m, ch * m);
    for (int b = 0; b < m; ++b) rep.bath.coupling.block(b * ch, b * ch, ch, ch) = bath.coupling;
    rep.rho0 = rho;
    return rep;
}

struct SizeSweepOptions {
    std::vector<int> blocks{1, 2, 3};
    double reference_eta{4.0};
    std::optional<double> target; // default: |R(reference_eta, m = 1)|
    double eta_max{40.0};
    double scan_step{0.25};
    double eta_tol{1e-10};
};

struct SizeRow {
    int m{1};
    std::size_t n{0};
    double eta_star{0.0};
    double rate_at_star{0.0};
    double target{0.0};
    double predicted_shift{0.0}; // ln m / (βg)
};

struct SizeSweep {
    std::vector<SizeRow> rows;
    double target{0.0};
    double ln_n_slope{std::numeric_limits<double>::quiet_NaN()};
};

// Rate of m independent identical blocks: block rates add, so the total is
// m times the single-block rate.
inline double block_rate(const EncodedExperiment& exp, double eta_p, int m)
{
    const auto sys = exp.system(eta_p);
    const double r1 = excitation_rate(initial_state(exp, sys), SystemModel::encoded(sys), exp.interactions(), exp.bath);
    return m * r1;
}

// Smallest η_p ≥ 0 with |R(η_p)| ≤ target, by a forward scan then bisection.
inline double minimal_penalty(const std::function<double(double)>& abs_rate, double target, double eta_max,
                              double scan_step, double eta_tol)
{
    if (abs_rate(0.0) <= target) return 0.0;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::quiet_NaN();
    for (double eta = scan_step; eta <= eta_max + 1e-12; eta += scan_step) {
        if (abs_rate(eta) <= target) {
            hi = eta;
            break;
        }
        lo = eta;
    }
    if (std::isnan(hi))
        throw ContractViolation("target rate " + std::to_string(target) + " not reached for eta_p <= " +
                                std::to_string(eta_max));
    while (hi - lo > eta_tol) {
        const double mid = 0.5 * (lo + hi);
        (abs_rate(mid) <= target ? hi : lo) = mid;
    }
    return hi;
}

inline SizeSweep size_scaling_sweep(const EncodedExperiment& exp, const SizeSweepOptions& opts = {})
{
    if (opts.blocks.empty()) throw ConfigError("size sweep needs at least one block count");
    SizeSweep sweep;
    sweep.target = opts.target ? *opts.target : std::abs(block_rate(exp, opts.reference_eta, 1));
    const auto sys0 = exp.system(0.0);
    const double beta_g = exp.bath.beta * sys0.gap;
    std::vector<double> ln_n, eta;
    for (int m : opts.blocks) {
        if (m < 1) throw ConfigError("block count must be >= 1");
        auto abs_rate = [&](double e) { return std::abs(block_rate(exp, e, m)); };
        SizeRow row;
        row.m = m;
        row.n = exp.code.n_physical * static_cast<std::size_t>(m);
        row.eta_star = minimal_penalty(abs_rate, sweep.target, opts.eta_max, opts.scan_step, opts.eta_tol);
        row.rate_at_star = block_rate(exp, row.eta_star, m);
        row.target = sweep.target;
        row.predicted_shift = std::log(static_cast<double>(m)) / beta_g;
        ln_n.push_back(std::log(static_cast<double>(row.n)));
        eta.push_back(row.eta_star);
        sweep.rows.push_back(row);
    }
    if (sweep.rows.size() >= 2) sweep.ln_n_slope = ols_slope(ln_n, eta);
    return sweep;
}

} // namespace penaltylab
