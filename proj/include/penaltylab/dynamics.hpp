// dynamics.hpp — RK4 propagation of density operators and the
// finite-difference rate oracle that rides on it

#pragma once

#include <cmath>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "penaltylab/csv.hpp"
#include "penaltylab/generators.hpp"

namespace penaltylab {

struct Trajectory {
    std::vector<double> times;
    std::vector<Operator> states; // empty unless requested
    std::vector<double> ground_population;
    std::vector<double> purity;
    std::vector<double> trace_error;
    std::vector<double> min_eigenvalue; // empty unless requested
    double step_halving_error{0.0};
};

struct PropagateOptions {
    bool store_states{false};
    bool track_positivity{false};
    bool validate_step_halving{true};
    double halving_tol_per_time{1e-8};
    double max_trace_drift{1e-6};
};

using GeneratorSchedule = std::function<Liouvillian(double)>;
using HamiltonianSchedule = std::function<Operator(double)>;

inline double purity_of(const Operator& rho) { return trace_product(rho, rho).real(); }

inline double population(const Operator& projector, const Operator& rho) { return trace_product(projector, rho).real(); }

namespace detail {

inline Operator rk4_step(const Liouvillian& gen, const Operator& rho, double dt)
{
    const Operator k1 = gen.apply(rho);
    const Operator k2 = gen.apply(rho + (0.5 * dt) * k1);
    const Operator k3 = gen.apply(rho + (0.5 * dt) * k2);
    const Operator k4 = gen.apply(rho + dt * k3);
    return rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Time-dependent generator: stages use the generator at t, t+dt/2, t+dt.
inline Operator rk4_step(const GeneratorSchedule& gen, double t, const Operator& rho, double dt)
{
    const Liouvillian mid = gen(t + 0.5 * dt);
    const Operator k1 = gen(t).apply(rho);
    const Operator k2 = mid.apply(rho + (0.5 * dt) * k1);
    const Operator k3 = mid.apply(rho + (0.5 * dt) * k2);
    const Operator k4 = gen(t + dt).apply(rho + dt * k3);
    return rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline Operator evolve(const Liouvillian& gen, Operator rho, double dt, int steps)
{
    for (int s = 0; s < steps; ++s) rho = rk4_step(gen, rho, dt);
    return rho;
}

inline void require_density(const Operator& rho, Eigen::Index dim)
{
    if (rho.rows() != dim || rho.cols() != dim)
        throw ConfigError("state dimension " + std::to_string(rho.rows()) + " does not match generator dimension " +
                          std::to_string(dim));
}

inline void require_ground_support(const Operator& projector, const Operator& rho)
{
    const double leak = (rho - projector * rho * projector).cwiseAbs().maxCoeff();
    if (leak > 1e-10)
        throw ContractViolation("initial state is not supported on the ground subspace (max off-subspace entry " +
                                std::to_string(leak) + ")");
}

// One-sided difference quotient of f(ρ(t)) at 0⁺ with one Richardson step.
inline double richardson_rate(const std::function<Operator(double)>& state_at,
                              const std::function<double(const Operator&)>& f, const Operator& rho0, double h)
{
    const double f0 = f(rho0);
    const double d_h = (f(state_at(h)) - f0) / h;
    const double d_h2 = (f(state_at(0.5 * h)) - f0) / (0.5 * h);
    return 2.0 * d_h2 - d_h;
}

} // namespace detail

inline Trajectory propagate(const Liouvillian& gen, const Operator& rho0, double t_end, double dt,
                            const PropagateOptions& opts = {})
{
    detail::require_density(rho0, gen.dim());
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("propagate: dt must be > 0");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ConfigError("propagate: t_end must be >= 0");
    const int steps = static_cast<int>(std::ceil(t_end / dt - 1e-9));
    const double step = steps > 0 ? t_end / steps : dt;
    const Operator& ground = gen.ground_projector();

    Trajectory traj;
    auto record = [&](double t, const Operator& rho) {
        const double tr_err = std::abs(rho.trace().real() - 1.0);
        if (!(tr_err <= opts.max_trace_drift))
            throw NumericalFailure("propagate: trace drift " + csv::format_double(tr_err) + " at t = " +
                                   csv::format_double(t) + "; reduce dt");
        traj.times.push_back(t);
        traj.ground_population.push_back(population(ground, rho));
        traj.purity.push_back(purity_of(rho));
        traj.trace_error.push_back(tr_err);
        if (opts.track_positivity) traj.min_eigenvalue.push_back(min_eigenvalue(0.5 * (rho + rho.adjoint())));
        if (opts.store_states) traj.states.push_back(rho);
    };

    Operator rho = rho0;
    record(0.0, rho);
    for (int s = 1; s <= steps; ++s) {
        rho = detail::rk4_step(gen, rho, step);
        record(s * step, rho);
    }

    if (opts.validate_step_halving && steps > 0) {
        Operator fine = rho0;
        double err = 0.0;
        for (int s = 1; s <= steps; ++s) {
            fine = detail::evolve(gen, fine, 0.5 * step, 2);
            err = std::max(err, std::abs(population(ground, fine) - traj.ground_population[static_cast<std::size_t>(s)]));
        }
        traj.step_halving_error = err;
        if (!(err <= opts.halving_tol_per_time * std::max(1.0, t_end)))
            throw NumericalFailure("propagate: step-halving disagreement " + csv::format_double(err) +
                                   " exceeds tolerance; reduce dt");
    }
    return traj;
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj)
{
    csv::write_row(os, {"t", "ground_population", "purity", "trace_error"});
    for (std::size_t i = 0; i < traj.times.size(); ++i)
        csv::write_row(os, {csv::format_double(traj.times[i]), csv::format_double(traj.ground_population[i]),
                            csv::format_double(traj.purity[i]), csv::format_double(traj.trace_error[i])});
}

inline double default_rate_step(const Liouvillian& gen) { return 1e-4 / std::max(1.0, gen.rate_scale()); }

// [Tr Π₀ρ(h) − Tr Π₀ρ₀]/h extrapolated over {h, h/2}; error O(h²).
inline double finite_difference_rate(const Liouvillian& gen, const Operator& rho0, double h = 0.0)
{
    detail::require_density(rho0, gen.dim());
    const Operator& ground = gen.ground_projector();
    detail::require_ground_support(ground, rho0);
    if (h <= 0.0) h = default_rate_step(gen);
    constexpr int kSubsteps = 4;
    auto state_at = [&](double t) { return detail::evolve(gen, rho0, t / kSubsteps, kSubsteps); };
    auto pop = [&](const Operator& r) { return population(ground, r); };
    return detail::richardson_rate(state_at, pop, rho0, h);
}

// d/dt Tr ρ² at 0⁺, same stencil as the rate oracle.
inline double purity_decay_rate(const Liouvillian& gen, const Operator& rho0, double h = 0.0)
{
    detail::require_density(rho0, gen.dim());
    if (h <= 0.0) h = default_rate_step(gen);
    constexpr int kSubsteps = 4;
    auto state_at = [&](double t) { return detail::evolve(gen, rho0, t / kSubsteps, kSubsteps); };
    return detail::richardson_rate(state_at, purity_of, rho0, h);
}

inline Operator ground_projector_at(const HamiltonianSchedule& schedule, double t)
{
    return spectral_decompose(schedule(t)).ground().projector;
}

// ‖Π₀(t0) · [Π₀(t0+h) − Π₀(t0−h)]/(2h) · Π₀(t0)‖; vanishes analytically.
inline double projector_derivative_check(const HamiltonianSchedule& schedule, double t0, double h)
{
    if (!(h > 0.0)) throw ConfigError("projector_derivative_check: h must be > 0");
    const auto at = [&](double t) { return spectral_decompose(schedule(t)).ground(); };
    const Level centre = at(t0);
    const Level plus = at(t0 + h);
    const Level minus = at(t0 - h);
    if (plus.multiplicity != centre.multiplicity || minus.multiplicity != centre.multiplicity)
        throw ContractViolation("ground level changes rank inside the stencil around t = " + std::to_string(t0));
    const Operator& p = centre.projector;
    return operator_norm(p * ((plus.projector - minus.projector) / (2.0 * h)) * p);
}

// d/dt Tr[Π₀(t)ρ(t)] at t0⁺ with the projector moving along the schedule and
// the generator rebuilt at every RK stage.
inline double moving_projector_rate(const HamiltonianSchedule& schedule, const GeneratorSchedule& gen,
                                    const Operator& rho0, double t0, double h)
{
    if (!(h > 0.0)) throw ConfigError("moving_projector_rate: h must be > 0");
    detail::require_ground_support(ground_projector_at(schedule, t0), rho0);
    constexpr int kSubsteps = 4;
    const double f0 = population(ground_projector_at(schedule, t0), rho0);
    auto quotient = [&](double step) {
        Operator rho = rho0;
        const double dt = step / kSubsteps;
        for (int s = 0; s < kSubsteps; ++s) rho = detail::rk4_step(gen, t0 + s * dt, rho, dt);
        return (population(ground_projector_at(schedule, t0 + step), rho) - f0) / step;
    };
    return 2.0 * quotient(0.5 * h) - quotient(h);
}

} // namespace penaltylab
