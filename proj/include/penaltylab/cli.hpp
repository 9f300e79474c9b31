// cli.hpp — INI experiment configuration and the command runner behind the
// penaltylab tool

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "penaltylab/analysis.hpp"
#include "penaltylab/csv.hpp"

#ifndef PENALTYLAB_VERSION
#define PENALTYLAB_VERSION "0.1.0"
#endif

namespace penaltylab::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kConfigError = 2,
    kContractViolation = 3,
    kNumericalFailure = 4,
};

enum class Mode { encoded, bare };

struct RunSettings {
    bool include_lamb_shift{false};
    double oracle_step{0.0}; // 0: automatic
    double pv_tolerance{1e-10};
    double detection_tol{1e-10};
    double t_end{5.0};
    double dt{0.01};
    GeneratorKind generator{GeneratorKind::lindblad};
    std::vector<int> blocks{1, 2, 3};
    double reference_eta{4.0};
    double target{0.0}; // 0: |R(reference_eta, m = 1)|
    double eta_max{40.0};
    std::uint64_t seed{0};
};

struct ExperimentConfig {
    Mode mode{Mode::encoded};
    std::optional<StabilizerCode> code;
    std::vector<PauliString> hamiltonian_terms; // logical (encoded) or physical (bare)
    std::size_t n_qubits{0};
    double eta_p{0.0};
    std::vector<double> eta_grid;
    InitialState initial{InitialState::ground_mixed};
    BathSpec bath;
    std::vector<PauliString> couplings;
    RunSettings run;
    std::map<std::string, std::string> echo; // "section.key" -> raw value
};

// --------------------------------------------------------------------------
// Parsing
// --------------------------------------------------------------------------

namespace detail {

inline std::string trim(std::string s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline double to_double(const std::string& key, const std::string& v)
{
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
    if (used != v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
    if (!std::isfinite(x)) throw ConfigError(key + ": value must be finite");
    return x;
}

inline long long to_int(const std::string& key, const std::string& v)
{
    const double x = to_double(key, v);
    if (x != std::floor(x)) throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return static_cast<long long>(x);
}

inline bool to_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

// "lo:hi:count" or "a, b, c"
inline std::vector<double> parse_grid(const std::string& key, const std::string& v)
{
    if (v.find(':') != std::string::npos) {
        const auto parts = split(v, ':');
        if (parts.size() != 3) throw ConfigError(key + ": range must be start:stop:count");
        const auto count = to_int(key, parts[2]);
        if (count < 2) throw ConfigError(key + ": range count must be >= 2");
        if (!(to_double(key, parts[1]) > to_double(key, parts[0]))) throw ConfigError(key + ": range must increase");
        return linear_grid(to_double(key, parts[0]), to_double(key, parts[1]), static_cast<std::size_t>(count));
    }
    std::vector<double> out;
    for (const auto& p : split(v, ',')) out.push_back(to_double(key, p));
    return out;
}

inline std::vector<PauliString> parse_pauli_list(const std::string& v)
{
    std::vector<PauliString> out;
    for (const auto& p : split(v, ',')) out.push_back(parse_pauli(p));
    return out;
}

inline Operator parse_matrix_rows(const std::string& key, const std::string& v)
{
    const auto rows = split(v, ';');
    const auto n = static_cast<Eigen::Index>(rows.size());
    Operator m = Operator::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto cells = split(rows[static_cast<std::size_t>(i)], ',');
        if (static_cast<Eigen::Index>(cells.size()) != n) throw ConfigError(key + ": coupling matrix must be square");
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = to_double(key, cells[static_cast<std::size_t>(j)]);
    }
    return m;
}

inline const std::map<std::string, std::set<std::string>>& known_keys()
{
    static const std::map<std::string, std::set<std::string>> keys{
        {"system", {"mode", "code", "generators", "logicals", "hamiltonian", "eta_p", "eta_grid", "initial_state"}},
        {"bath", {"beta", "mu", "k", "omega_c", "coupling"}},
        {"interactions", {"paulis"}},
        {"run",
         {"include_lamb_shift", "oracle_step", "pv_tolerance", "detection_tol", "t_end", "dt", "generator", "blocks",
          "reference_eta", "target", "eta_max", "seed"}},
    };
    return keys;
}

} // namespace detail

inline ExperimentConfig parse_config(std::istream& is)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    ExperimentConfig cfg;
    std::map<std::string, std::string> kv;
    for (const auto& [section, body] : tree) {
        const auto known = detail::known_keys().find(section);
        if (known == detail::known_keys().end()) throw ConfigError("config: unknown section [" + section + "]");
        if (body.empty()) throw ConfigError("config: key '" + section + "' outside of a section");
        for (const auto& [key, value] : body) {
            if (!known->second.contains(key)) throw ConfigError("config: unknown key '" + key + "' in [" + section + "]");
            kv[section + "." + key] = detail::trim(value.data());
        }
    }
    cfg.echo = kv;
    auto get = [&](const std::string& k) -> std::optional<std::string> {
        if (auto it = kv.find(k); it != kv.end()) return it->second;
        return std::nullopt;
    };

    // [system]
    const std::string mode = get("system.mode").value_or("encoded");
    if (mode == "encoded") cfg.mode = Mode::encoded;
    else if (mode == "bare") cfg.mode = Mode::bare;
    else throw ConfigError("system.mode must be 'encoded' or 'bare'");

    if (cfg.mode == Mode::encoded) {
        const std::string code_name = get("system.code").value_or("xxxx_zzzz");
        if (code_name == "custom") {
            StabilizerCode c;
            c.name = "custom";
            c.generators = detail::parse_pauli_list(get("system.generators").value_or(""));
            if (c.generators.empty()) throw ConfigError("system.generators is required for a custom code");
            c.n_physical = c.generators.front().n_qubits();
            for (const auto& item : detail::split(get("system.logicals").value_or(""), ',')) {
                const auto colon = item.find(':');
                if (colon == std::string::npos || colon < 2)
                    throw ConfigError("system.logicals entries look like X0:XIXI, got '" + item + "'");
                const std::string label = item.substr(0, colon);
                const char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(label[0])));
                const auto qubit = detail::to_int("system.logicals", label.substr(1));
                c.logicals[{static_cast<int>(qubit), letter}] = parse_pauli(item.substr(colon + 1));
            }
            cfg.code = std::move(c);
        } else {
            cfg.code = catalog::by_name(code_name);
            if (!cfg.code) throw ConfigError("system.code: unknown code '" + code_name + "'");
            if (get("system.generators") || get("system.logicals"))
                throw ConfigError("system.generators/logicals only apply to code = custom");
        }
        try {
            validate(*cfg.code);
        } catch (const ContractViolation& e) {
            throw ConfigError(std::string("system.code: ") + e.what());
        }
        cfg.n_qubits = cfg.code->n_physical;
    }

    cfg.hamiltonian_terms = detail::parse_pauli_list(get("system.hamiltonian").value_or(""));
    if (cfg.mode == Mode::bare) {
        if (cfg.hamiltonian_terms.empty()) throw ConfigError("system.hamiltonian is required in bare mode");
        if (get("system.code")) throw ConfigError("system.code is not used in bare mode");
        cfg.n_qubits = cfg.hamiltonian_terms.front().n_qubits();
        for (const auto& t : cfg.hamiltonian_terms)
            if (t.n_qubits() != cfg.n_qubits) throw ConfigError("system.hamiltonian terms differ in length");
    } else {
        for (const auto& t : cfg.hamiltonian_terms)
            if (t.n_qubits() != cfg.code->n_logical())
                throw ConfigError("system.hamiltonian: logical term '" + t.str() + "' must have " +
                                  std::to_string(cfg.code->n_logical()) + " letters");
    }

    if (auto v = get("system.eta_p")) cfg.eta_p = detail::to_double("system.eta_p", *v);
    if (cfg.eta_p < 0.0) throw ConfigError("system.eta_p must be >= 0");
    if (auto v = get("system.eta_grid")) cfg.eta_grid = detail::parse_grid("system.eta_grid", *v);
    for (double e : cfg.eta_grid)
        if (e < 0.0) throw ConfigError("system.eta_grid values must be >= 0");
    if (cfg.mode == Mode::bare && (get("system.eta_p") || get("system.eta_grid")))
        throw ConfigError("penalty settings require mode = encoded");

    const std::string init = get("system.initial_state").value_or("ground_mixed");
    if (init == "ground_mixed") cfg.initial = InitialState::ground_mixed;
    else if (init == "ground_pure") cfg.initial = InitialState::ground_pure;
    else throw ConfigError("system.initial_state must be ground_mixed or ground_pure");

    // [interactions]
    const std::string paulis = get("interactions.paulis").value_or("all-weight-1");
    cfg.couplings = paulis == "all-weight-1" ? all_weight_one(cfg.n_qubits) : detail::parse_pauli_list(paulis);
    for (const auto& p : cfg.couplings)
        if (p.n_qubits() != cfg.n_qubits)
            throw ConfigError("interactions.paulis: '" + p.str() + "' does not act on " + std::to_string(cfg.n_qubits) +
                              " qubits");

    // [bath]
    auto num = [&](const std::string& k, double def) {
        auto v = get(k);
        return v ? detail::to_double(k, *v) : def;
    };
    cfg.bath.beta = num("bath.beta", 1.0);
    cfg.bath.mu = num("bath.mu", 1.0);
    cfg.bath.k = static_cast<int>(detail::to_int("bath.k", get("bath.k").value_or("1")));
    cfg.bath.omega_c = num("bath.omega_c", 10.0);
    const std::string coupling = get("bath.coupling").value_or("identity");
    const auto n_ch = static_cast<Eigen::Index>(cfg.couplings.size());
    cfg.bath.coupling = coupling == "identity" ? Operator::Identity(n_ch, n_ch)
                                               : detail::parse_matrix_rows("bath.coupling", coupling);
    if (cfg.bath.coupling.rows() != n_ch)
        throw ConfigError("bath.coupling must be " + std::to_string(n_ch) + "x" + std::to_string(n_ch));
    validate(cfg.bath);

    // [run]
    auto& run = cfg.run;
    if (auto v = get("run.include_lamb_shift")) run.include_lamb_shift = detail::to_bool("run.include_lamb_shift", *v);
    run.oracle_step = num("run.oracle_step", 0.0);
    run.pv_tolerance = num("run.pv_tolerance", 1e-10);
    run.detection_tol = num("run.detection_tol", 1e-10);
    run.t_end = num("run.t_end", 5.0);
    run.dt = num("run.dt", 0.01);
    run.reference_eta = num("run.reference_eta", 4.0);
    run.target = num("run.target", 0.0);
    run.eta_max = num("run.eta_max", 40.0);
    if (auto v = get("run.seed")) run.seed = static_cast<std::uint64_t>(detail::to_int("run.seed", *v));
    if (auto v = get("run.generator")) {
        if (*v == "lindblad") run.generator = GeneratorKind::lindblad;
        else if (*v == "dsame") run.generator = GeneratorKind::dsame;
        else throw ConfigError("run.generator must be lindblad or dsame");
    }
    if (auto v = get("run.blocks")) {
        run.blocks.clear();
        for (const auto& b : detail::split(*v, ',')) {
            const auto m = detail::to_int("run.blocks", b);
            if (m < 1) throw ConfigError("run.blocks entries must be >= 1");
            run.blocks.push_back(static_cast<int>(m));
        }
    }
    if (run.oracle_step < 0.0) throw ConfigError("run.oracle_step must be >= 0");
    if (!(run.pv_tolerance > 0.0)) throw ConfigError("run.pv_tolerance must be > 0");
    if (!(run.detection_tol > 0.0)) throw ConfigError("run.detection_tol must be > 0");
    if (!(run.dt > 0.0)) throw ConfigError("run.dt must be > 0");
    if (run.t_end < 0.0) throw ConfigError("run.t_end must be >= 0");
    if (run.reference_eta < 0.0 || run.eta_max <= 0.0) throw ConfigError("run.reference_eta/eta_max out of range");
    if (run.target < 0.0) throw ConfigError("run.target must be >= 0");
    return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    return parse_config(in);
}

// --------------------------------------------------------------------------
// Scenarios
// --------------------------------------------------------------------------

struct Scenario {
    SystemModel model;
    Operator rho0;
    InteractionSet interactions;
    BathSpec bath;
    std::size_t n{0};
};

inline EncodedExperiment to_experiment(const ExperimentConfig& cfg)
{
    if (cfg.mode != Mode::encoded) throw ConfigError("this command requires system.mode = encoded");
    return {*cfg.code, cfg.hamiltonian_terms, cfg.couplings, cfg.bath, cfg.initial, cfg.run.seed};
}

inline Scenario scenario_at(const ExperimentConfig& cfg, double eta_p)
{
    Scenario sc;
    sc.interactions = interactions_from_paulis(cfg.couplings);
    sc.bath = cfg.bath;
    sc.n = cfg.n_qubits;
    if (cfg.mode == Mode::encoded) {
        const auto exp = to_experiment(cfg);
        const auto sys = exp.system(eta_p);
        sc.model = SystemModel::encoded(sys);
        sc.rho0 = initial_state(exp, sys);
    } else {
        sc.model = SystemModel::bare(pauli_sum_matrix(cfg.hamiltonian_terms, cfg.n_qubits));
        sc.rho0 = initial_state(spectral_decompose(sc.model.hamiltonian).ground().projector, cfg.initial, cfg.run.seed);
    }
    return sc;
}

inline std::vector<double> eta_points(const ExperimentConfig& cfg)
{
    if (cfg.mode == Mode::bare) return {0.0};
    return cfg.eta_grid.empty() ? std::vector<double>{cfg.eta_p} : cfg.eta_grid;
}

// --------------------------------------------------------------------------
// Commands
// --------------------------------------------------------------------------

struct CommandOutput {
    std::string filename;
    std::string contents;
};

inline const std::vector<std::string>& commands()
{
    static const std::vector<std::string> names{"check-code", "rate",       "compare-dsame",
                                                "sweep-penalty", "sweep-size", "propagate"};
    return names;
}

inline const std::vector<std::string>& rate_columns()
{
    static const std::vector<std::string> cols{"eta_p",     "n",          "R_closed",  "R_oracle", "R_dsame",
                                               "gamma_max", "bound_poly", "bound_exp", "slope_fit"};
    return cols;
}

inline void write_rate_rows(std::ostream& os, const std::vector<RateReport>& rows)
{
    using csv::format_double;
    csv::write_row(os, rate_columns());
    for (const auto& r : rows)
        csv::write_row(os, {format_double(r.eta_p), std::to_string(r.n), format_double(r.R_closed),
                            format_double(r.R_oracle), format_double(r.R_dsame), format_double(r.gamma_max),
                            format_double(r.bound_poly), format_double(r.bound_exp), format_double(r.slope_fit)});
}

namespace detail {

inline RateReport report_for(const ExperimentConfig& cfg, double eta)
{
    const auto sc = scenario_at(cfg, eta);
    ReportOptions opts;
    opts.oracle_lamb_shift = cfg.run.include_lamb_shift;
    opts.oracle_step = cfg.run.oracle_step;
    opts.pv.tolerance = cfg.run.pv_tolerance;
    return rate_report(sc.rho0, sc.model, sc.interactions, sc.bath, sc.n, opts);
}

} // namespace detail

// Returns the exit code; `summary` is the human-readable report.
inline int run_command(const std::string& command, const ExperimentConfig& cfg, std::vector<CommandOutput>& outputs,
                       std::ostream& summary)
{
    using csv::format_double;
    std::ostringstream out;

    if (command == "check-code") {
        if (cfg.mode != Mode::encoded) throw ConfigError("check-code requires system.mode = encoded");
        const Operator pc = codespace_projector(*cfg.code);
        csv::write_row(out, {"error", "residual", "detected"});
        int failures = 0;
        for (const auto& p : cfg.couplings) {
            const double r = detection_residual(pc, pauli_matrix(p));
            const bool ok = r <= cfg.run.detection_tol;
            failures += ok ? 0 : 1;
            csv::write_row(out, {p.str(), format_double(r), ok ? "detected" : "undetected"});
        }
        outputs.push_back({"detection.csv", out.str()});
        summary << "code " << cfg.code->name << ": " << cfg.couplings.size() - static_cast<std::size_t>(failures)
                << " detected, " << failures << " undetected\n";
        return failures == 0 ? kOk : kContractViolation;
    }

    if (command == "rate") {
        const double eta = cfg.mode == Mode::encoded ? cfg.eta_p : 0.0;
        const auto row = detail::report_for(cfg, eta);
        write_rate_rows(out, {row});
        outputs.push_back({"rate.csv", out.str()});
        summary << "R_closed = " << format_double(row.R_closed) << ", R_oracle = " << format_double(row.R_oracle)
                << ", R_dsame = " << format_double(row.R_dsame) << '\n';
        return kOk;
    }

    if (command == "compare-dsame") {
        csv::write_row(out, {"eta_p", "n", "R_closed", "R_lindblad", "R_dsame", "abs_difference", "rel_difference"});
        double worst = 0.0;
        for (double eta : eta_points(cfg)) {
            const auto sc = scenario_at(cfg, eta);
            const GeneratorOptions go{.pv = {.tolerance = cfg.run.pv_tolerance}};
            const double closed = excitation_rate(sc.rho0, sc.model, sc.interactions, sc.bath);
            const double lind = ground_trace_rate(
                build_lindblad(sc.model.hamiltonian, sc.interactions, sc.bath, cfg.run.include_lamb_shift, go), sc.rho0);
            const double dsame = ground_trace_rate(build_dsame(sc.model.hamiltonian, sc.interactions, sc.bath, go), sc.rho0);
            const double diff = std::abs(dsame - lind);
            const double rel = lind != 0.0 ? diff / std::abs(lind) : diff;
            worst = std::max(worst, rel);
            csv::write_row(out, {format_double(sc.model.eta_p), std::to_string(sc.n), format_double(closed),
                                 format_double(lind), format_double(dsame), format_double(diff), format_double(rel)});
        }
        outputs.push_back({"dsame.csv", out.str()});
        summary << "max relative Lindblad/DSAME difference = " << format_double(worst) << '\n';
        return kOk;
    }

    if (command == "sweep-penalty") {
        const auto grid = eta_points(cfg);
        if (grid.size() < 4) throw ConfigError("sweep-penalty needs system.eta_grid with at least 4 points");
        std::vector<RateReport> rows;
        for (double eta : grid) rows.push_back(detail::report_for(cfg, eta));
        std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.eta_p < b.eta_p; });
        const double slope = fit_log_slope(rows);
        for (auto& r : rows) r.slope_fit = slope;
        write_rate_rows(out, rows);
        outputs.push_back({"sweep_penalty.csv", out.str()});
        summary << "fitted d ln|R| / d eta_p = " << format_double(slope) << " (beta*g = "
                << format_double(cfg.bath.beta * rows.front().g) << ")\n";
        return kOk;
    }

    if (command == "sweep-size") {
        SizeSweepOptions opts;
        opts.blocks = cfg.run.blocks;
        opts.reference_eta = cfg.run.reference_eta;
        opts.eta_max = cfg.run.eta_max;
        if (cfg.run.target > 0.0) opts.target = cfg.run.target;
        const auto sweep = size_scaling_sweep(to_experiment(cfg), opts);
        csv::write_row(out, {"m", "n", "eta_star", "R_at_eta_star", "R_target", "predicted_shift", "ln_n_slope"});
        for (const auto& r : sweep.rows)
            csv::write_row(out, {std::to_string(r.m), std::to_string(r.n), format_double(r.eta_star),
                                 format_double(r.rate_at_star), format_double(r.target),
                                 format_double(r.predicted_shift), format_double(sweep.ln_n_slope)});
        outputs.push_back({"sweep_size.csv", out.str()});
        summary << "eta_star vs ln n slope = " << format_double(sweep.ln_n_slope) << '\n';
        return kOk;
    }

    if (command == "propagate") {
        const double eta = cfg.mode == Mode::encoded ? cfg.eta_p : 0.0;
        const auto sc = scenario_at(cfg, eta);
        const GeneratorOptions go{.pv = {.tolerance = cfg.run.pv_tolerance}};
        const auto gen = cfg.run.generator == GeneratorKind::lindblad
                             ? build_lindblad(sc.model.hamiltonian, sc.interactions, sc.bath,
                                              cfg.run.include_lamb_shift, go)
                             : build_dsame(sc.model.hamiltonian, sc.interactions, sc.bath, go);
        const auto traj = propagate(gen, sc.rho0, cfg.run.t_end, cfg.run.dt);
        write_trajectory_csv(out, traj);
        outputs.push_back({"trajectory.csv", out.str()});
        summary << "final ground population = " << format_double(traj.ground_population.back())
                << ", step-halving error = " << format_double(traj.step_halving_error) << '\n';
        return kOk;
    }

    throw ConfigError("unknown command '" + command + "'");
}

// --------------------------------------------------------------------------
// Manifest
// --------------------------------------------------------------------------

inline std::string utc_timestamp(std::chrono::system_clock::time_point tp)
{
    const std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

inline nlohmann::json manifest(const std::string& command, const ExperimentConfig& cfg,
                               const std::vector<CommandOutput>& outputs, int exit_code, const std::string& error,
                               std::chrono::system_clock::time_point started, double elapsed_seconds)
{
    nlohmann::json j;
    j["tool"] = "penaltylab";
    j["version"] = PENALTYLAB_VERSION;
    j["command"] = command;
    j["seed"] = cfg.run.seed;
    j["config"] = cfg.echo;
    j["started_utc"] = utc_timestamp(started);
    j["wall_clock_seconds"] = elapsed_seconds;
    j["exit_code"] = exit_code;
    if (!error.empty()) j["error"] = error;
    j["outputs"] = nlohmann::json::array();
    for (const auto& o : outputs) j["outputs"].push_back(o.filename);
    return j;
}

inline void write_outputs(const std::filesystem::path& dir, const std::vector<CommandOutput>& outputs)
{
    std::filesystem::create_directories(dir);
    for (const auto& o : outputs) {
        std::ofstream f(dir / o.filename, std::ios::binary);
        f << o.contents;
        if (!f) throw std::runtime_error("cannot write " + (dir / o.filename).string());
    }
}

// Parses the config, runs the command and writes its files plus manifest.json.
inline int execute(const std::string& command, const std::filesystem::path& config_path,
                   const std::filesystem::path& out_dir, std::optional<std::uint64_t> seed, std::ostream& log,
                   std::ostream& err)
{
    const auto started = std::chrono::system_clock::now();
    const auto t0 = std::chrono::steady_clock::now();
    if (std::find(commands().begin(), commands().end(), command) == commands().end()) {
        err << "unknown command '" << command << "'\n";
        return kUsage;
    }
    ExperimentConfig cfg;
    try {
        cfg = load_config(config_path);
        if (seed) cfg.run.seed = *seed;
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    }

    std::vector<CommandOutput> outputs;
    int code = kOk;
    std::string message;
    try {
        code = run_command(command, cfg, outputs, log);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const ContractViolation& e) {
        code = kContractViolation;
        message = e.what();
    } catch (const NumericalFailure& e) {
        code = kNumericalFailure;
        message = e.what();
    }
    if (!message.empty()) err << (code == kContractViolation ? "contract violation: " : "numerical failure: ") << message << '\n';

    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_outputs(out_dir, outputs);
    std::ofstream mf(out_dir / "manifest.json");
    mf << manifest(command, cfg, outputs, code, message, started, elapsed).dump(2) << '\n';
    return code;
}

} // namespace penaltylab::cli
