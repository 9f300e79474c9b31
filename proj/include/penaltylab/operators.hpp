// operators.hpp — Pauli-string algebra, dense operator helpers and spectral
// decomposition with degeneracy grouping

#pragma once

#include <algorithm>
#include <cctype>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "penaltylab/errors.hpp"

namespace penaltylab {

using Complex = std::complex<double>;
using Operator = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

inline constexpr std::size_t kMaxQubits = 14;

// --------------------------------------------------------------------------
// Pauli strings
// --------------------------------------------------------------------------

// Real-weighted tensor product of single-qubit Paulis. Letter 0 is the
// leftmost tensor factor (most significant bit of the computational index).
class PauliString {
public:
    PauliString() = default;

    explicit PauliString(std::string letters, double coefficient = 1.0)
        : letters_(std::move(letters)), coefficient_(coefficient)
    {
        if (letters_.empty()) throw ConfigError("Pauli string must act on at least one qubit");
        if (letters_.size() > kMaxQubits)
            throw ConfigError("Pauli string '" + letters_ + "' exceeds " +
                              std::to_string(kMaxQubits) + " qubits");
        for (char& c : letters_) {
            c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z')
                throw ConfigError("invalid Pauli letter '" + std::string(1, c) + "' in '" + letters_ + "'");
        }
        if (!std::isfinite(coefficient_)) throw ConfigError("Pauli coefficient must be finite");
    }

    static PauliString single(std::size_t n_qubits, std::size_t qubit, char letter, double coefficient = 1.0)
    {
        if (qubit >= n_qubits) throw ConfigError("qubit index out of range");
        std::string s(n_qubits, 'I');
        s[qubit] = letter;
        return PauliString(std::move(s), coefficient);
    }

    static PauliString identity(std::size_t n_qubits, double coefficient = 1.0)
    {
        return PauliString(std::string(n_qubits, 'I'), coefficient);
    }

    std::size_t n_qubits() const noexcept { return letters_.size(); }
    const std::string& letters() const noexcept { return letters_; }
    double coefficient() const noexcept { return coefficient_; }
    char operator[](std::size_t q) const { return letters_[q]; }

    PauliString scaled(double factor) const { return PauliString(letters_, coefficient_ * factor); }

    std::size_t weight() const noexcept
    {
        return static_cast<std::size_t>(std::count_if(letters_.begin(), letters_.end(),
                                                      [](char c) { return c != 'I'; }));
    }

    // Bit masks in matrix-index convention (bit n-1-q belongs to qubit q).
    std::uint64_t x_mask() const noexcept { return mask_of([](char c) { return c == 'X' || c == 'Y'; }); }
    std::uint64_t z_mask() const noexcept { return mask_of([](char c) { return c == 'Z' || c == 'Y'; }); }

    bool commutes_with(const PauliString& other) const
    {
        require_same_size(other);
        const auto anti = std::popcount(x_mask() & other.z_mask()) + std::popcount(z_mask() & other.x_mask());
        return anti % 2 == 0;
    }

    void require_same_size(const PauliString& other) const
    {
        if (other.n_qubits() != n_qubits())
            throw ConfigError("Pauli strings '" + letters_ + "' and '" + other.letters_ + "' differ in length");
    }

    std::string str() const
    {
        if (coefficient_ == 1.0) return letters_;
        if (coefficient_ == -1.0) return "-" + letters_;
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g*", coefficient_);
        return buf + letters_;
    }

    friend bool operator==(const PauliString&, const PauliString&) = default;

private:
    template <class Pred>
    std::uint64_t mask_of(Pred pred) const noexcept
    {
        std::uint64_t m = 0;
        const auto n = letters_.size();
        for (std::size_t q = 0; q < n; ++q)
            if (pred(letters_[q])) m |= std::uint64_t{1} << (n - 1 - q);
        return m;
    }

    std::string letters_;
    double coefficient_{1.0};
};

// Accepts "XXII", "-ZZ", "+XY", "0.5*XI", "-0.25*ZZZZ".
inline PauliString parse_pauli(std::string_view text)
{
    auto trim = [](std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return s;
    };
    text = trim(text);
    double coeff = 1.0;
    if (const auto star = text.find('*'); star != std::string_view::npos) {
        const std::string num(trim(text.substr(0, star)));
        std::size_t used = 0;
        try {
            coeff = std::stod(num, &used);
        } catch (const std::exception&) {
            throw ConfigError("cannot parse coefficient in Pauli term '" + std::string(text) + "'");
        }
        if (used != num.size()) throw ConfigError("trailing characters in coefficient '" + num + "'");
        text = trim(text.substr(star + 1));
    } else if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
        coeff = text.front() == '-' ? -1.0 : 1.0;
        text = trim(text.substr(1));
    }
    return PauliString(std::string(text), coeff);
}

// p·q = phase · string, with string.coefficient() = p.coefficient()·q.coefficient().
struct PauliProduct {
    Complex phase{1.0, 0.0};
    PauliString string;
};

inline PauliProduct multiply(const PauliString& p, const PauliString& q)
{
    p.require_same_size(q);
    // Single-qubit table: a·b = phase · c
    auto letter_product = [](char a, char b, Complex& phase) -> char {
        if (a == 'I') return b;
        if (b == 'I') return a;
        if (a == b) return 'I';
        static constexpr char cyc[] = {'X', 'Y', 'Z'};
        const int ia = a == 'X' ? 0 : (a == 'Y' ? 1 : 2);
        const int ib = b == 'X' ? 0 : (b == 'Y' ? 1 : 2);
        const int ic = 3 - ia - ib;
        const bool cyclic = (ib - ia + 3) % 3 == 1;
        phase *= cyclic ? Complex(0, 1) : Complex(0, -1);
        return cyc[ic];
    };
    Complex phase{1.0, 0.0};
    std::string out(p.n_qubits(), 'I');
    for (std::size_t i = 0; i < p.n_qubits(); ++i) out[i] = letter_product(p[i], q[i], phase);
    return {phase, PauliString(std::move(out), p.coefficient() * q.coefficient())};
}

// Dense 2^n × 2^n matrix of coefficient · P_0 ⊗ … ⊗ P_{n-1}.
inline Operator pauli_matrix(const PauliString& p)
{
    const auto n = p.n_qubits();
    if (n == 0) throw ConfigError("pauli_matrix needs at least one qubit");
    const Eigen::Index dim = Eigen::Index{1} << n;
    const std::uint64_t xm = p.x_mask();
    const std::uint64_t zm = p.z_mask();
    const auto n_y = std::popcount(xm & zm);
    // Y = i·X·Z per factor, so the global factor is i^{#Y}.
    static const Complex ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const Complex base = p.coefficient() * ipow[n_y % 4];

    Operator m = Operator::Zero(dim, dim);
    for (std::uint64_t col = 0; col < static_cast<std::uint64_t>(dim); ++col) {
        const std::uint64_t row = col ^ xm;
        const bool neg = std::popcount(col & zm) % 2 == 1;
        m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = neg ? -base : base;
    }
    return m;
}

inline Operator pauli_sum_matrix(std::span<const PauliString> terms, std::size_t n_qubits)
{
    const Eigen::Index dim = Eigen::Index{1} << n_qubits;
    Operator m = Operator::Zero(dim, dim);
    for (const auto& t : terms) {
        if (t.n_qubits() != n_qubits) throw ConfigError("term '" + t.str() + "' has wrong qubit count");
        m += pauli_matrix(t);
    }
    return m;
}

// --------------------------------------------------------------------------
// Dense operator helpers
// --------------------------------------------------------------------------

inline Operator identity(Eigen::Index dim) { return Operator::Identity(dim, dim); }

inline Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

inline double hermiticity_error(const Operator& m)
{
    if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
    if (m.size() == 0) return 0.0;
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const Operator& m, double tol = 1e-12) { return hermiticity_error(m) <= tol; }

// Largest singular value.
inline double operator_norm(const Operator& m)
{
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Operator> svd(m);
    return svd.singularValues()(0);
}

inline double trace_real(const Operator& m) { return m.trace().real(); }

// Tr[A·B] without forming the product.
inline Complex trace_product(const Operator& a, const Operator& b)
{
    return (a.transpose().cwiseProduct(b)).sum();
}

inline double min_eigenvalue(const Operator& hermitian)
{
    Eigen::SelfAdjointEigenSolver<Operator> es(hermitian, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

inline Operator kron(const Operator& a, const Operator& b)
{
    Operator out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline std::size_t qubits_for_dim(Eigen::Index dim)
{
    if (dim <= 0 || !std::has_single_bit(static_cast<std::uint64_t>(dim)))
        throw ConfigError("operator dimension " + std::to_string(dim) + " is not a power of two");
    return static_cast<std::size_t>(std::countr_zero(static_cast<std::uint64_t>(dim)));
}

// --------------------------------------------------------------------------
// Tolerance clustering
// --------------------------------------------------------------------------

// Half-open index range [begin, end) into a sorted array, with its mean.
struct Cluster {
    double center{0.0};
    std::size_t begin{0};
    std::size_t end{0};
    double diameter{0.0};
};

// Consecutive sorted values whose neighbour gap is <= tol form a cluster.
inline std::vector<Cluster> cluster_sorted(std::span<const double> sorted, double tol)
{
    std::vector<Cluster> out;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i + 1;
        while (j < sorted.size() && sorted[j] - sorted[j - 1] <= tol) ++j;
        double sum = 0.0;
        for (std::size_t k = i; k < j; ++k) sum += sorted[k];
        out.push_back({sum / static_cast<double>(j - i), i, j, sorted[j - 1] - sorted[i]});
        i = j;
    }
    return out;
}

// --------------------------------------------------------------------------
// Spectral decomposition
// --------------------------------------------------------------------------

struct Level {
    double energy{0.0};
    Operator projector;
    int multiplicity{0};
};

// H = Σ_l ε_l Π_l with ε_0 < ε_1 < … ; projectors are basis-invariant.
struct SpectralDecomposition {
    std::vector<Level> levels;
    double grouping_tol{0.0};

    std::size_t size() const noexcept { return levels.size(); }
    const Level& operator[](std::size_t l) const { return levels[l]; }
    const Level& ground() const { return levels.front(); }
    Eigen::Index dim() const { return levels.empty() ? 0 : levels.front().projector.rows(); }

    Operator reconstruct() const
    {
        Operator h = Operator::Zero(dim(), dim());
        for (const auto& lv : levels) h += lv.energy * lv.projector;
        return h;
    }
};

inline double spectral_range(const Eigen::VectorXd& eigenvalues)
{
    return eigenvalues.size() == 0 ? 0.0 : eigenvalues(eigenvalues.size() - 1) - eigenvalues(0);
}

// 1e-8 of the spectral range, floored so that an exactly degenerate
// (range 0) operator still groups floating-point noise.
inline double default_grouping_tol(double range, double scale)
{
    return std::max(1e-8 * range, 1e-12 * std::max(scale, 1.0));
}

inline SpectralDecomposition spectral_decompose(const Operator& h, double grouping_tol)
{
    if (h.rows() != h.cols() || h.rows() == 0) throw ConfigError("spectral_decompose needs a non-empty square operator");
    if (!(grouping_tol > 0.0)) throw ConfigError("grouping tolerance must be positive");
    const double herm_err = hermiticity_error(h);
    if (herm_err > 1e-12 * std::max(1.0, h.cwiseAbs().maxCoeff()))
        throw ConfigError("spectral_decompose: operator is not Hermitian (max asymmetry " +
                          std::to_string(herm_err) + ")");

    const Operator sym = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<Operator> es(sym);
    if (es.info() != Eigen::Success) throw NumericalFailure("eigensolver failed to converge");
    const Eigen::VectorXd& evals = es.eigenvalues();
    const Operator& evecs = es.eigenvectors();

    std::vector<double> sorted(evals.data(), evals.data() + evals.size());
    SpectralDecomposition out;
    out.grouping_tol = grouping_tol;
    for (const auto& c : cluster_sorted(sorted, grouping_tol)) {
        if (c.diameter > 10.0 * grouping_tol)
            throw NumericalFailure("eigenvalue cluster near " + std::to_string(c.center) + " spans " +
                                   std::to_string(c.diameter) + ", more than 10x the grouping tolerance");
        const auto cols = static_cast<Eigen::Index>(c.end - c.begin);
        const auto v = evecs.middleCols(static_cast<Eigen::Index>(c.begin), cols);
        out.levels.push_back({c.center, v * v.adjoint(), static_cast<int>(cols)});
    }
    return out;
}

inline SpectralDecomposition spectral_decompose(const Operator& h)
{
    if (h.rows() != h.cols() || h.rows() == 0) throw ConfigError("spectral_decompose needs a non-empty square operator");
    Eigen::SelfAdjointEigenSolver<Operator> es(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
    const double range = spectral_range(es.eigenvalues());
    const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
    return spectral_decompose(h, default_grouping_tol(range, scale));
}

} // namespace penaltylab
