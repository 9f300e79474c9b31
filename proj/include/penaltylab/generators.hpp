// generators.hpp — frequency-resolved interaction operators A_α(ω) and the
// two Markovian generators: Lindblad form (with optional Lamb shift) and the
// non-secular double-sided adiabatic master equation (DSAME)

#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "penaltylab/bath.hpp"
#include "penaltylab/operators.hpp"

namespace penaltylab {

// System operators A_α of H_SB = Σ_α A_α ⊗ B_α. All Hermitian.
struct InteractionSet {
    std::vector<Operator> operators;
    std::vector<std::string> labels;
    std::size_t k_locality{0};

    std::size_t size() const noexcept { return operators.size(); }
    bool empty() const noexcept { return operators.empty(); }
};

inline InteractionSet interactions_from_paulis(const std::vector<PauliString>& paulis)
{
    InteractionSet set;
    for (const auto& p : paulis) {
        set.operators.push_back(pauli_matrix(p));
        set.labels.push_back(p.str());
        set.k_locality = std::max(set.k_locality, p.weight());
    }
    return set;
}

// X, Y, Z on every qubit: 3n couplings.
inline std::vector<PauliString> all_weight_one(std::size_t n_qubits)
{
    std::vector<PauliString> out;
    for (std::size_t q = 0; q < n_qubits; ++q)
        for (char c : {'X', 'Y', 'Z'}) out.push_back(PauliString::single(n_qubits, q, c));
    return out;
}

inline void validate(const InteractionSet& set, Eigen::Index dim)
{
    for (std::size_t a = 0; a < set.size(); ++a) {
        const auto& op = set.operators[a];
        if (op.rows() != dim || op.cols() != dim)
            throw ConfigError("interaction " + std::to_string(a) + " has dimension " + std::to_string(op.rows()) +
                              ", system has " + std::to_string(dim));
        if (!is_hermitian(op, 1e-12)) throw ConfigError("interaction " + std::to_string(a) + " is not Hermitian");
    }
}

inline void validate_coupling(const InteractionSet& set, const BathSpec& bath)
{
    if (static_cast<std::size_t>(bath.channels()) != set.size())
        throw ConfigError("bath coupling matrix is " + std::to_string(bath.channels()) + "x" +
                          std::to_string(bath.channels()) + " but there are " + std::to_string(set.size()) +
                          " interaction operators");
}

// --------------------------------------------------------------------------
// Bohr frequencies
// --------------------------------------------------------------------------

// All level pairs (l, l') whose Bohr frequency ε_{l'} − ε_l falls in the bin.
struct BohrBin {
    double omega{0.0};
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

inline double default_frequency_tol(const SpectralDecomposition& spec)
{
    const double range = spec.levels.back().energy - spec.levels.front().energy;
    const double scale = std::max(std::abs(spec.levels.back().energy), std::abs(spec.levels.front().energy));
    return std::max(1e-9 * range, 1e-12 * std::max(scale, 1.0));
}

// Frequencies closer than `tol` are merged. A merged bin wider than 1% of
// `tol` holds genuinely distinct frequencies and is rejected.
inline std::vector<BohrBin> bohr_bins(const SpectralDecomposition& spec, double tol)
{
    if (!(tol > 0.0)) throw ConfigError("frequency tolerance must be positive");
    struct Entry {
        double omega;
        std::size_t l, lp;
    };
    std::vector<Entry> entries;
    entries.reserve(spec.size() * spec.size());
    for (std::size_t l = 0; l < spec.size(); ++l)
        for (std::size_t lp = 0; lp < spec.size(); ++lp)
            entries.push_back({spec[lp].energy - spec[l].energy, l, lp});
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.omega < b.omega; });

    std::vector<double> sorted(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) sorted[i] = entries[i].omega;

    std::vector<BohrBin> bins;
    for (const auto& c : cluster_sorted(sorted, tol)) {
        if (c.diameter > 1e-2 * tol)
            throw NumericalFailure("ambiguous Bohr-frequency binning near omega = " + std::to_string(c.center) +
                                   ": distinct frequencies within the tolerance " + std::to_string(tol));
        BohrBin bin;
        bin.omega = c.center;
        for (std::size_t i = c.begin; i < c.end; ++i) bin.pairs.emplace_back(entries[i].l, entries[i].lp);
        bins.push_back(std::move(bin));
    }
    // Exact zero for the diagonal bin, which also holds all l = l' pairs.
    for (auto& b : bins)
        for (const auto& [l, lp] : b.pairs)
            if (l == lp) b.omega = 0.0;
    return bins;
}

// A(ω) = Σ_{ε_{l'}−ε_l=ω} Π_l A Π_{l'}, one operator per bin.
struct FrequencyComponents {
    std::vector<double> omegas;
    std::vector<Operator> parts;
};

inline FrequencyComponents decompose_interaction(const Operator& a, const SpectralDecomposition& spec,
                                                 const std::vector<BohrBin>& bins)
{
    if (a.rows() != spec.dim() || a.cols() != spec.dim())
        throw ConfigError("decompose_interaction: dimension mismatch");
    std::vector<Operator> left(spec.size());
    for (std::size_t l = 0; l < spec.size(); ++l) left[l] = spec[l].projector * a;
    FrequencyComponents out;
    for (const auto& bin : bins) {
        Operator part = Operator::Zero(a.rows(), a.cols());
        for (const auto& [l, lp] : bin.pairs) part.noalias() += left[l] * spec[lp].projector;
        out.omegas.push_back(bin.omega);
        out.parts.push_back(std::move(part));
    }
    return out;
}

inline FrequencyComponents decompose_interaction(const Operator& a, const SpectralDecomposition& spec,
                                                 double frequency_tol)
{
    return decompose_interaction(a, spec, bohr_bins(spec, frequency_tol));
}

// Per channel α, the A_α(ω) on a shared list of bins.
struct FrequencyResolvedOps {
    std::vector<double> omegas;
    std::vector<std::vector<Operator>> parts; // [α][bin]
    double frequency_tol{0.0};

    std::size_t bins() const noexcept { return omegas.size(); }
};

inline FrequencyResolvedOps resolve_frequencies(const InteractionSet& set, const SpectralDecomposition& spec,
                                                double frequency_tol)
{
    const auto bins = bohr_bins(spec, frequency_tol);
    FrequencyResolvedOps out;
    out.frequency_tol = frequency_tol;
    for (const auto& b : bins) out.omegas.push_back(b.omega);
    for (const auto& a : set.operators) out.parts.push_back(decompose_interaction(a, spec, bins).parts);
    return out;
}

// --------------------------------------------------------------------------
// Liouvillian
// --------------------------------------------------------------------------

enum class GeneratorKind { lindblad, dsame };

inline const char* to_string(GeneratorKind k) { return k == GeneratorKind::lindblad ? "lindblad" : "dsame"; }

// L(ρ) = −i[K, ρ] + D(ρ), with K = H (+ H_LS) and the dissipator held in
// sandwich form D(ρ) = Σ_j X_j ρ Y_j + Pρ + ρQ.
class Liouvillian {
public:
    struct Sandwich {
        Operator left;
        Operator right;
    };

    Liouvillian(GeneratorKind kind, Operator hamiltonian, Operator lamb_shift, SpectralDecomposition spectrum,
                std::vector<Sandwich> sandwiches, Operator pre, Operator post)
        : kind_(kind),
          hamiltonian_(std::move(hamiltonian)),
          lamb_shift_(std::move(lamb_shift)),
          spectrum_(std::make_shared<const SpectralDecomposition>(std::move(spectrum))),
          sandwiches_(std::move(sandwiches)),
          pre_(std::move(pre)),
          post_(std::move(post))
    {
        if (dim() <= kMaterializeMaxDim) matrix_ = std::make_shared<const Operator>(build_superoperator());
    }

    static constexpr Eigen::Index kMaterializeMaxDim = 32; // n <= 5

    GeneratorKind kind() const noexcept { return kind_; }
    Eigen::Index dim() const noexcept { return hamiltonian_.rows(); }
    const Operator& hamiltonian() const noexcept { return hamiltonian_; }
    const Operator& lamb_shift() const noexcept { return lamb_shift_; }
    Operator hamiltonian_part() const { return hamiltonian_ + lamb_shift_; }
    const SpectralDecomposition& spectrum() const noexcept { return *spectrum_; }
    const Operator& ground_projector() const { return spectrum_->ground().projector; }
    bool materialized() const noexcept { return static_cast<bool>(matrix_); }

    Operator dissipator(const Operator& rho) const
    {
        Operator out = pre_ * rho + rho * post_;
        for (const auto& s : sandwiches_) out.noalias() += s.left * rho * s.right;
        return out;
    }

    Operator apply(const Operator& rho) const
    {
        if (rho.rows() != dim() || rho.cols() != dim()) throw ConfigError("Liouvillian: state dimension mismatch");
        if (matrix_) {
            const Eigen::Index d2 = dim() * dim();
            Eigen::VectorXcd v = (*matrix_) * Eigen::Map<const Eigen::VectorXcd>(rho.data(), d2);
            return Eigen::Map<Operator>(v.data(), dim(), dim());
        }
        return apply_direct(rho);
    }

    // Column-stacking representation: vec(L(ρ)) = M vec(ρ).
    Operator superoperator() const { return matrix_ ? *matrix_ : build_superoperator(); }

    // Upper bound on the row-sum norm of L, used as a step-size scale.
    double rate_scale() const
    {
        double s = hamiltonian_part().cwiseAbs().rowwise().sum().maxCoeff();
        s += pre_.cwiseAbs().rowwise().sum().maxCoeff() + post_.cwiseAbs().rowwise().sum().maxCoeff();
        for (const auto& sw : sandwiches_)
            s += sw.left.cwiseAbs().rowwise().sum().maxCoeff() * sw.right.cwiseAbs().rowwise().sum().maxCoeff();
        return s;
    }

private:
    Operator apply_direct(const Operator& rho) const
    {
        const Operator k = hamiltonian_part();
        const Complex mi(0.0, -1.0);
        return mi * (k * rho - rho * k) + dissipator(rho);
    }

    Operator build_superoperator() const
    {
        const Eigen::Index d = dim();
        const Operator id = identity(d);
        const Complex mi(0.0, -1.0);
        const Operator k = hamiltonian_part();
        // vec(XρY) = (Yᵀ ⊗ X) vec(ρ)
        Operator m = kron(id, mi * k + pre_) + kron((post_ - mi * k).transpose(), id);
        for (const auto& s : sandwiches_) m += kron(s.right.transpose(), s.left);
        return m;
    }

    GeneratorKind kind_;
    Operator hamiltonian_;
    Operator lamb_shift_;
    std::shared_ptr<const SpectralDecomposition> spectrum_;
    std::vector<Sandwich> sandwiches_;
    Operator pre_;
    Operator post_;
    std::shared_ptr<const Operator> matrix_;
};

struct GeneratorOptions {
    double frequency_tol{0.0};        // 0 selects default_frequency_tol
    bool include_lamb_shift{false};   // Lindblad only
    bool zero_principal_value{false}; // DSAME test mode: Γ = γ/2
    bool secular{false};              // DSAME: keep only equal-frequency terms
    PrincipalValueOptions pv{};
};

namespace detail {

inline bool negligible(const Operator& m) { return m.cwiseAbs().maxCoeff() <= 1e-14; }

// Σ_β c_{αβ} A_β(ω) for one bin.
inline std::vector<Operator> mix_channels(const Operator& c, const FrequencyResolvedOps& ops, std::size_t bin)
{
    const auto n = ops.parts.size();
    const Eigen::Index d = n == 0 ? 0 : ops.parts[0][bin].rows();
    std::vector<Operator> out(n, Operator::Zero(d, d));
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            const Complex cab = c(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            if (cab != Complex(0.0, 0.0)) out[a] += cab * ops.parts[b][bin];
        }
    return out;
}

struct Prepared {
    SpectralDecomposition spectrum;
    FrequencyResolvedOps ops;
};

inline Prepared prepare(const Operator& h, const InteractionSet& set, const BathSpec& bath,
                        const GeneratorOptions& opts)
{
    validate(bath);
    validate(set, h.rows());
    validate_coupling(set, bath);
    auto spec = spectral_decompose(h);
    const double tol = opts.frequency_tol > 0.0 ? opts.frequency_tol : default_frequency_tol(spec);
    auto ops = resolve_frequencies(set, spec, tol);
    return {std::move(spec), std::move(ops)};
}

} // namespace detail

// −i[H + H_LS, ·] + Σ_ω Σ_{αβ} γ_{αβ}(ω)[A_β(ω) ρ A_α†(ω) − ½{A_α†(ω)A_β(ω), ρ}],
// H_LS = Σ_ω Σ_{αβ} S_{αβ}(ω) A_α†(ω)A_β(ω).
inline Liouvillian build_lindblad(const Operator& h, const InteractionSet& set, const BathSpec& bath,
                                  bool include_lamb_shift, GeneratorOptions opts = {})
{
    opts.include_lamb_shift = include_lamb_shift;
    auto prep = detail::prepare(h, set, bath, opts);
    const Eigen::Index d = h.rows();
    Operator k_loss = Operator::Zero(d, d);
    Operator h_ls = Operator::Zero(d, d);
    std::vector<Liouvillian::Sandwich> sandwiches;

    for (std::size_t bin = 0; bin < prep.ops.bins(); ++bin) {
        const double omega = prep.ops.omegas[bin];
        const double g = gamma_scalar(bath, omega);
        if (g == 0.0 && !opts.include_lamb_shift) continue;
        const auto mixed = detail::mix_channels(bath.coupling, prep.ops, bin);
        const double s = opts.include_lamb_shift ? s_principal_value(bath, omega, opts.pv) : 0.0;
        for (std::size_t a = 0; a < set.size(); ++a) {
            const Operator& a_w = prep.ops.parts[a][bin];
            if (detail::negligible(a_w) || detail::negligible(mixed[a])) continue;
            const Operator a_dag = a_w.adjoint();
            if (g != 0.0) {
                sandwiches.push_back({g * mixed[a], a_dag});
                k_loss += g * (a_dag * mixed[a]);
            }
            if (s != 0.0) h_ls += s * (a_dag * mixed[a]);
        }
    }
    h_ls = 0.5 * (h_ls + h_ls.adjoint()).eval();
    Operator half = -0.5 * k_loss;
    return Liouvillian(GeneratorKind::lindblad, h, std::move(h_ls), std::move(prep.spectrum), std::move(sandwiches),
                       half, half);
}

// −i[H, ·] + Σ_{αβ} Σ_{ll'} Γ_{αβ}(ω_{ll'}) [Π_l A_β Π_{l'} ρ, A_α] + h.c.,
// with Γ_{αβ}(ω) = c_{αβ}(γ(ω)/2 + i S(ω)). Not completely positive in general.
inline Liouvillian build_dsame(const Operator& h, const InteractionSet& set, const BathSpec& bath,
                               GeneratorOptions opts = {})
{
    auto prep = detail::prepare(h, set, bath, opts);
    const Eigen::Index d = h.rows();
    Operator pre = Operator::Zero(d, d);
    Operator post = Operator::Zero(d, d);
    std::vector<Liouvillian::Sandwich> sandwiches;

    auto one_sided = [&](double omega) {
        const double g = 0.5 * gamma_scalar(bath, omega);
        return opts.zero_principal_value ? Complex(g, 0.0) : Complex(g, s_principal_value(bath, omega, opts.pv));
    };

    // Each term contributes  Ã ρ B − B Ã ρ  and its conjugate  B† ρ Ã† − ρ Ã† B†.
    auto add_term = [&](const Operator& tilde, const Operator& b) {
        if (detail::negligible(tilde) || detail::negligible(b)) return;
        const Operator tilde_dag = tilde.adjoint();
        const Operator b_dag = b.adjoint();
        sandwiches.push_back({tilde, b});
        sandwiches.push_back({b_dag, tilde_dag});
        pre -= b * tilde;
        post -= tilde_dag * b_dag;
    };

    if (opts.secular) {
        for (std::size_t bin = 0; bin < prep.ops.bins(); ++bin) {
            const Complex gam = one_sided(prep.ops.omegas[bin]);
            const auto mixed = detail::mix_channels(bath.coupling, prep.ops, bin);
            for (std::size_t a = 0; a < set.size(); ++a)
                add_term(gam * mixed[a], prep.ops.parts[a][bin].adjoint());
        }
    } else {
        std::vector<Operator> tilde(set.size(), Operator::Zero(d, d));
        for (std::size_t bin = 0; bin < prep.ops.bins(); ++bin) {
            const Complex gam = one_sided(prep.ops.omegas[bin]);
            if (gam == Complex(0.0, 0.0)) continue;
            const auto mixed = detail::mix_channels(bath.coupling, prep.ops, bin);
            for (std::size_t a = 0; a < set.size(); ++a) tilde[a] += gam * mixed[a];
        }
        for (std::size_t a = 0; a < set.size(); ++a) add_term(tilde[a], set.operators[a]);
    }
    return Liouvillian(GeneratorKind::dsame, h, Operator::Zero(d, d), std::move(prep.spectrum),
                       std::move(sandwiches), std::move(pre), std::move(post));
}

} // namespace penaltylab
