#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace svir {

// Numerical tolerances used by the state-space contracts.
inline constexpr double tol_state = 1e-9; // allowed undershoot of a population fraction
inline constexpr double tol_eq = 1e-8;    // max vector-field norm at a reported equilibrium

/// Epidemiological rates of the controlled SVIR model plus the control cap.
/// Rates are per day; eps scales transmission to vaccinees (beta1 = eps*beta).
struct ModelParams {
    double beta0 = 0.22;  // baseline transmission rate
    double alpha = 0.004; // vaccination rate
    double gamma = 0.095; // recovery rate of infected
    double gamma1 = 0.071; // immunization rate of vaccinees
    double mu = 0.0;      // birth-death rate
    double eps = 0.078;   // vaccine leakage factor, in [0,1]
    double u_bar = 1.0;   // maximum admissible control, in [0,1]

    /// Throws invalid_input naming the offending field.
    void validate() const;
};

/// One point of the (S, V, I, R) compartments, as population fractions.
struct SvirState {
    double s = 0.0;
    double v = 0.0;
    double i = 0.0;
    double r = 0.0;

    double sum() const { return s + v + i + r; }
    bool finite() const;
};

/// Uniform time grid on [t0, tf] with n_steps steps (n_steps + 1 nodes).
struct TimeGrid {
    double t0 = 0.0;
    double tf = 240.0;
    std::size_t n_steps = 2400;

    double dt() const { return (tf - t0) / static_cast<double>(n_steps); }
    std::size_t n_nodes() const { return n_steps + 1; }
    double time(std::size_t k) const { return t0 + dt() * static_cast<double>(k); }

    void validate() const;
};

/// One control value per grid node; piecewise-constant per step (left node).
using ControlPath = std::vector<double>;

ControlPath constant_control(const TimeGrid& grid, double value);

/// Throws invalid_input if the path is misaligned with the grid or leaves [0, u_bar].
void validate_control(const ControlPath& u, const TimeGrid& grid, double u_bar);

enum class EquilibriumKind { disease_free, endemic };

struct Equilibrium {
    EquilibriumKind kind = EquilibriumKind::disease_free;
    SvirState state;
};

/// Controlled transmission rate beta(u) = beta0 * (1 - u).
double transmission_rate(const ModelParams& p, double u);

/// Right-hand side of the controlled SVIR system at a state, for control u.
/// The R equation is carried along so conservation can be tested, not assumed.
SvirState controlled_rhs(const SvirState& x, double u, const ModelParams& p);

/// Classical fixed-step RK4 over the grid; u is held constant on each step
/// (value at the step's left node). Returns n_steps + 1 states.
/// Throws numerical_error naming the step if a component drops below
/// -tol_state or turns non-finite.
std::vector<SvirState> integrate_forward(const ModelParams& p, const ControlPath& u,
                                         const SvirState& x0, const TimeGrid& grid);

/// Basic reproduction number of the uncontrolled system.
double reproduction_number(const ModelParams& p);

/// Disease-free equilibrium; the R component is filled so the full
/// four-equation vector field vanishes.
Equilibrium disease_free_equilibrium(const ModelParams& p);

/// Endemic equilibrium, present iff reproduction_number > 1. I+ is found by
/// bracketed bisection on the infection balance; the returned state satisfies
/// |controlled_rhs(x, 0)| <= tol_eq componentwise by construction.
std::optional<Equilibrium> endemic_equilibrium(const ModelParams& p);

} // namespace svir
