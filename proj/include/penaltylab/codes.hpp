// codes.hpp — stabilizer codes and the penalty encoding of logical
// Hamiltonians into them

#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "penaltylab/operators.hpp"

namespace penaltylab {

struct LogicalKey {
    int qubit{0};
    char letter{'Z'};
    friend auto operator<=>(const LogicalKey&, const LogicalKey&) = default;
};

struct StabilizerCode {
    std::string name;
    std::size_t n_physical{0};
    std::vector<PauliString> generators;
    std::map<LogicalKey, PauliString> logicals;

    std::size_t n_logical() const { return n_physical - generators.size(); }
    Eigen::Index dim() const { return Eigen::Index{1} << n_physical; }
};

namespace detail {

// Rank over GF(2) of the symplectic (x|z) vectors.
inline std::size_t gf2_rank(std::vector<std::uint64_t> rows, std::size_t n_bits)
{
    std::size_t rank = 0;
    for (std::size_t bit = 0; bit < n_bits && rank < rows.size(); ++bit) {
        const std::uint64_t mask = std::uint64_t{1} << bit;
        auto pivot = std::find_if(rows.begin() + static_cast<std::ptrdiff_t>(rank), rows.end(),
                                  [mask](std::uint64_t r) { return (r & mask) != 0; });
        if (pivot == rows.end()) continue;
        std::iter_swap(rows.begin() + static_cast<std::ptrdiff_t>(rank), pivot);
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (i != rank && (rows[i] & mask)) rows[i] ^= rows[rank];
        ++rank;
    }
    return rank;
}

} // namespace detail

// Throws ConfigError for malformed input and ContractViolation for algebraic
// failures (non-commuting or dependent generators, logicals that do not
// commute with the stabilizer).
inline void validate(const StabilizerCode& code)
{
    if (code.n_physical == 0 || code.n_physical > kMaxQubits)
        throw ConfigError("code '" + code.name + "': physical qubit count out of range");
    if (code.generators.size() > code.n_physical)
        throw ContractViolation("code '" + code.name + "': more generators than qubits");
    for (const auto& g : code.generators) {
        if (g.n_qubits() != code.n_physical)
            throw ConfigError("code '" + code.name + "': generator '" + g.str() + "' has wrong length");
        if (std::abs(std::abs(g.coefficient()) - 1.0) > 0.0)
            throw ConfigError("code '" + code.name + "': generator '" + g.str() + "' must have sign +1 or -1");
        if (g.weight() == 0) throw ContractViolation("code '" + code.name + "': identity is not a valid generator");
    }
    for (std::size_t i = 0; i < code.generators.size(); ++i)
        for (std::size_t j = i + 1; j < code.generators.size(); ++j)
            if (!code.generators[i].commutes_with(code.generators[j]))
                throw ContractViolation("code '" + code.name + "': generators '" + code.generators[i].str() +
                                        "' and '" + code.generators[j].str() + "' anticommute");

    std::vector<std::uint64_t> sym;
    for (const auto& g : code.generators) sym.push_back((g.x_mask() << code.n_physical) | g.z_mask());
    if (detail::gf2_rank(sym, 2 * code.n_physical) != code.generators.size())
        throw ContractViolation("code '" + code.name + "': generators are not independent");

    for (const auto& [key, op] : code.logicals) {
        if (op.n_qubits() != code.n_physical)
            throw ConfigError("code '" + code.name + "': logical operator '" + op.str() + "' has wrong length");
        if (key.letter != 'X' && key.letter != 'Y' && key.letter != 'Z')
            throw ConfigError("code '" + code.name + "': logical letter must be X, Y or Z");
        if (key.qubit < 0 || static_cast<std::size_t>(key.qubit) >= code.n_logical())
            throw ConfigError("code '" + code.name + "': logical qubit " + std::to_string(key.qubit) +
                              " out of range");
        for (const auto& g : code.generators)
            if (!op.commutes_with(g))
                throw ContractViolation("code '" + code.name + "': logical " + std::string(1, key.letter) +
                                        std::to_string(key.qubit) + " = '" + op.str() +
                                        "' anticommutes with generator '" + g.str() + "'");
    }
}

// P_C = Π_j (I + S_j)/2
inline Operator codespace_projector(const StabilizerCode& code)
{
    validate(code);
    const Eigen::Index dim = code.dim();
    Operator p = identity(dim);
    for (const auto& g : code.generators) p = p * (0.5 * (identity(dim) + pauli_matrix(g)));
    return p;
}

struct Penalty {
    Operator hamiltonian;
    double gap{0.0};
};

// H_p = Σ_j (I − S_j)/2 counts violated generators: ground energy 0 on the
// codespace. The gap is measured on the constructed spectrum, not assumed.
inline Penalty penalty_hamiltonian(const StabilizerCode& code)
{
    validate(code);
    const Eigen::Index dim = code.dim();
    Operator hp = Operator::Zero(dim, dim);
    for (const auto& g : code.generators) hp += 0.5 * (identity(dim) - pauli_matrix(g));
    if (code.generators.empty()) return {hp, std::numeric_limits<double>::infinity()};

    const auto spec = spectral_decompose(hp);
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t l = 1; l < spec.size(); ++l) gap = std::min(gap, spec[l].energy - spec[0].energy);
    return {hp, gap};
}

inline double detection_residual(const Operator& codespace, const Operator& a)
{
    if (a.rows() != codespace.rows() || a.cols() != codespace.cols())
        throw ConfigError("detection check: operator dimension " + std::to_string(a.rows()) +
                          " does not match code dimension " + std::to_string(codespace.rows()));
    return operator_norm(codespace * a * codespace);
}

// P_C A P_C = 0 within tol (operator norm).
inline bool detects(const StabilizerCode& code, const Operator& a, double tol = 1e-10)
{
    return detection_residual(codespace_projector(code), a) <= tol;
}

// Physical operator for one logical letter; Ȳ is derived as iX̄Z̄ when absent.
inline PauliProduct logical_operator(const StabilizerCode& code, int qubit, char letter)
{
    if (auto it = code.logicals.find({qubit, letter}); it != code.logicals.end()) return {{1.0, 0.0}, it->second};
    if (letter == 'Y') {
        auto x = code.logicals.find({qubit, 'X'});
        auto z = code.logicals.find({qubit, 'Z'});
        if (x != code.logicals.end() && z != code.logicals.end()) {
            auto prod = multiply(x->second, z->second);
            prod.phase *= Complex(0.0, 1.0);
            return prod;
        }
    }
    throw ConfigError("code '" + code.name + "' has no logical " + std::string(1, letter) + " for logical qubit " +
                      std::to_string(qubit));
}

// Substitutes each logical letter by its physical operator. The logical
// string indexes logical qubits; its coefficient carries over.
inline PauliProduct substitute_logical(const StabilizerCode& code, const PauliString& logical)
{
    if (logical.n_qubits() != code.n_logical())
        throw ConfigError("logical term '" + logical.str() + "' must have " + std::to_string(code.n_logical()) +
                          " letters for code '" + code.name + "'");
    PauliProduct acc{{1.0, 0.0}, PauliString::identity(code.n_physical, logical.coefficient())};
    for (std::size_t q = 0; q < logical.n_qubits(); ++q) {
        if (logical[q] == 'I') continue;
        const auto piece = logical_operator(code, static_cast<int>(q), logical[q]);
        auto prod = multiply(acc.string, piece.string);
        acc = {acc.phase * piece.phase * prod.phase, prod.string};
    }
    return acc;
}

struct EncodedSystem {
    Operator H_bar;       // encoded computational Hamiltonian
    Operator H_p;         // penalty Hamiltonian
    Operator P_C;         // codespace projector
    double eta_p{0.0};    // dimensionless penalty strength
    double gap{0.0};      // penalty ground-state gap g
    std::size_t n_physical{0};

    Operator hamiltonian() const { return H_bar + eta_p * H_p; }
    EncodedSystem with_penalty(double eta) const
    {
        EncodedSystem out = *this;
        out.eta_p = eta;
        return out;
    }
};

inline EncodedSystem encode_logical(const std::vector<PauliString>& logical_terms, const StabilizerCode& code,
                                    double eta_p)
{
    if (!(eta_p >= 0.0) || !std::isfinite(eta_p)) throw ConfigError("penalty strength eta_p must be >= 0");
    validate(code);
    EncodedSystem sys;
    sys.n_physical = code.n_physical;
    sys.eta_p = eta_p;
    sys.H_bar = Operator::Zero(code.dim(), code.dim());
    for (const auto& term : logical_terms) {
        const auto phys = substitute_logical(code, term);
        if (std::abs(phys.phase.imag()) > 1e-12)
            throw ContractViolation("logical term '" + term.str() +
                                    "' maps to a non-Hermitian physical operator; check the logical map");
        sys.H_bar += phys.phase.real() * pauli_matrix(phys.string);
    }
    auto pen = penalty_hamiltonian(code);
    sys.H_p = std::move(pen.hamiltonian);
    sys.gap = pen.gap;
    sys.P_C = codespace_projector(code);

    const double comm = commutator(sys.H_bar, sys.H_p).cwiseAbs().maxCoeff();
    if (comm > 1e-10)
        throw ContractViolation("encoded Hamiltonian does not commute with the penalty (max entry " +
                                std::to_string(comm) + ")");
    return sys;
}

// --------------------------------------------------------------------------
// Built-in codes
// --------------------------------------------------------------------------

namespace catalog {

// [[4,2,2]]: detects every weight-1 Pauli.
inline StabilizerCode four_qubit()
{
    StabilizerCode c;
    c.name = "xxxx_zzzz";
    c.n_physical = 4;
    c.generators = {PauliString("XXXX"), PauliString("ZZZZ")};
    c.logicals = {
        {{0, 'X'}, PauliString("XIXI")}, {{0, 'Z'}, PauliString("ZZII")},
        {{1, 'X'}, PauliString("XXII")}, {{1, 'Z'}, PauliString("ZIZI")},
    };
    return c;
}

// Two-qubit parity check; detects single X and Y flips.
inline StabilizerCode zz_parity()
{
    StabilizerCode c;
    c.name = "zz";
    c.n_physical = 2;
    c.generators = {PauliString("ZZ")};
    c.logicals = {{{0, 'X'}, PauliString("XX")}, {{0, 'Z'}, PauliString("ZI")}};
    return c;
}

// Three-qubit bit-flip repetition code.
inline StabilizerCode repetition3()
{
    StabilizerCode c;
    c.name = "zzi_izz";
    c.n_physical = 3;
    c.generators = {PauliString("ZZI"), PauliString("IZZ")};
    c.logicals = {{{0, 'X'}, PauliString("XXX")}, {{0, 'Z'}, PauliString("ZII")}};
    return c;
}

inline std::optional<StabilizerCode> by_name(const std::string& name)
{
    if (name == "xxxx_zzzz") return four_qubit();
    if (name == "zz") return zz_parity();
    if (name == "zzi_izz") return repetition3();
    return std::nullopt;
}

} // namespace catalog

} // namespace penaltylab
