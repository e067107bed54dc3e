#include "svir/model.hpp"

#include <cmath>
#include <sstream>

#include "svir/errors.hpp"

namespace svir {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw invalid_input(message);
}

} // namespace

void ModelParams::validate() const {
    require(std::isfinite(beta0) && beta0 > 0.0, "model.beta0: must be > 0");
    require(std::isfinite(gamma) && gamma > 0.0, "model.gamma: must be > 0");
    require(std::isfinite(gamma1) && gamma1 >= 0.0, "model.gamma1: must be >= 0");
    require(std::isfinite(mu) && mu >= 0.0, "model.mu: must be >= 0");
    require(std::isfinite(alpha) && alpha >= 0.0, "model.alpha: must be >= 0");
    require(std::isfinite(eps) && eps >= 0.0 && eps <= 1.0, "model.eps: must be within [0, 1]");
    require(std::isfinite(u_bar) && u_bar >= 0.0 && u_bar <= 1.0,
            "model.u_bar: must be within [0, 1]");
}

bool SvirState::finite() const {
    return std::isfinite(s) && std::isfinite(v) && std::isfinite(i) && std::isfinite(r);
}

void TimeGrid::validate() const {
    if (!(std::isfinite(t0) && std::isfinite(tf)) || !(tf > t0))
        throw invalid_input("horizon.tf: must be > horizon.t0");
    if (n_steps < 1) throw invalid_input("horizon.n_steps: must be >= 1");
}

ControlPath constant_control(const TimeGrid& grid, double value) {
    return ControlPath(grid.n_nodes(), value);
}

void validate_control(const ControlPath& u, const TimeGrid& grid, double u_bar) {
    if (u.size() != grid.n_nodes())
        throw invalid_input("control path: length must equal n_steps + 1");
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (!std::isfinite(u[k]) || u[k] < 0.0 || u[k] > u_bar) {
            std::ostringstream msg;
            msg << "control path: value " << u[k] << " at node " << k << " outside [0, " << u_bar
                << "]";
            throw invalid_input(msg.str());
        }
    }
}

double transmission_rate(const ModelParams& p, double u) {
    return p.beta0 * (1.0 - u);
}

SvirState controlled_rhs(const SvirState& x, double u, const ModelParams& p) {
    if (!x.finite()) throw invalid_input("controlled_rhs: non-finite state");
    if (!std::isfinite(u) || u < 0.0 || u > 1.0)
        throw invalid_input("controlled_rhs: control outside [0, 1]");
    const double bu = transmission_rate(p, u);
    SvirState d;
    d.s = -bu * x.s * x.i - p.alpha * x.s + p.mu - p.mu * x.s;
    d.v = p.alpha * x.s - p.eps * bu * x.v * x.i - p.gamma1 * x.v - p.mu * x.v;
    d.i = bu * x.s * x.i + p.eps * bu * x.v * x.i - p.gamma * x.i - p.mu * x.i;
    d.r = p.gamma1 * x.v + p.gamma * x.i - p.mu * x.r;
    return d;
}

namespace {

SvirState axpy(const SvirState& x, double h, const SvirState& d) {
    return {x.s + h * d.s, x.v + h * d.v, x.i + h * d.i, x.r + h * d.r};
}

SvirState rk4_state_step(const SvirState& x, double u, double h, const ModelParams& p) {
    const SvirState k1 = controlled_rhs(x, u, p);
    const SvirState k2 = controlled_rhs(axpy(x, 0.5 * h, k1), u, p);
    const SvirState k3 = controlled_rhs(axpy(x, 0.5 * h, k2), u, p);
    const SvirState k4 = controlled_rhs(axpy(x, h, k3), u, p);
    SvirState next;
    next.s = x.s + h / 6.0 * (k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s);
    next.v = x.v + h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
    next.i = x.i + h / 6.0 * (k1.i + 2.0 * k2.i + 2.0 * k3.i + k4.i);
    next.r = x.r + h / 6.0 * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r);
    return next;
}

void check_trajectory_state(const SvirState& x, std::size_t step, double t) {
    const double low = std::min(std::min(x.s, x.v), std::min(x.i, x.r));
    if (!x.finite() || low < -tol_state) {
        std::ostringstream msg;
        msg << "integrate_forward: unstable state (min component " << low << ") at step " << step
            << " (t = " << t << ")";
        throw numerical_error(msg.str());
    }
}

} // namespace

std::vector<SvirState> integrate_forward(const ModelParams& p, const ControlPath& u,
                                         const SvirState& x0, const TimeGrid& grid) {
    validate_control(u, grid, p.u_bar);
    if (!x0.finite()) throw invalid_input("integrate_forward: non-finite initial state");
    std::vector<SvirState> states;
    states.reserve(grid.n_nodes());
    states.push_back(x0);
    const double h = grid.dt();
    for (std::size_t k = 0; k < grid.n_steps; ++k) {
        SvirState next = rk4_state_step(states.back(), u[k], h, p);
        check_trajectory_state(next, k + 1, grid.time(k + 1));
        states.push_back(next);
    }
    return states;
}

double reproduction_number(const ModelParams& p) {
    const double d1 = p.mu + p.alpha;
    const double d2 = p.mu + p.gamma;
    const double d3 = p.mu + p.gamma1;
    if (d1 <= 0.0) throw domain_error("reproduction_number: mu + alpha must be > 0");
    if (d2 <= 0.0) throw domain_error("reproduction_number: mu + gamma must be > 0");
    if (d3 <= 0.0) throw domain_error("reproduction_number: mu + gamma1 must be > 0");
    const double beta1 = p.eps * p.beta0;
    return p.mu * p.beta0 / (d1 * d2) + p.alpha * p.mu * beta1 / (d3 * d1 * d2);
}

Equilibrium disease_free_equilibrium(const ModelParams& p) {
    const double d1 = p.mu + p.alpha;
    const double d3 = p.mu + p.gamma1;
    if (d1 <= 0.0) throw domain_error("disease_free_equilibrium: mu + alpha must be > 0");
    if (d3 <= 0.0) throw domain_error("disease_free_equilibrium: mu + gamma1 must be > 0");
    Equilibrium eq;
    eq.kind = EquilibriumKind::disease_free;
    eq.state.s = p.mu / d1;
    eq.state.v = p.alpha * p.mu / (d3 * d1);
    eq.state.i = 0.0;
    // With mu > 0 the stationary R closes the population to 1; with mu = 0
    // any R is stationary and 1 - S - V - I keeps the same closure.
    eq.state.r = 1.0 - eq.state.s - eq.state.v;
    return eq;
}

std::optional<Equilibrium> endemic_equilibrium(const ModelParams& p) {
    if (reproduction_number(p) <= 1.0) return std::nullopt;

    // Steady S and V as functions of I, substituted into the I balance.
    const auto s_of = [&](double i) { return p.mu / (p.mu + p.alpha + p.beta0 * i); };
    const auto v_of = [&](double i) {
        return p.alpha * p.mu /
               ((p.mu + p.alpha + p.beta0 * i) * (p.mu + p.gamma1 + p.eps * p.beta0 * i));
    };
    const auto balance = [&](double i) {
        return p.beta0 * s_of(i) + p.eps * p.beta0 * v_of(i) - (p.gamma + p.mu);
    };

    double lo = 0.0; // balance(0) = (gamma+mu)(R0-1) > 0 here
    double hi = 1.0;
    if (balance(hi) >= 0.0) throw numerical_error("endemic_equilibrium: no sign change on (0, 1]");
    for (int iter = 0; iter < 200 && (hi - lo) > 1e-16; ++iter) {
        const double mid = 0.5 * (lo + hi);
        (balance(mid) > 0.0 ? lo : hi) = mid;
    }
    const double i_plus = 0.5 * (lo + hi);

    Equilibrium eq;
    eq.kind = EquilibriumKind::endemic;
    eq.state.s = s_of(i_plus);
    eq.state.v = v_of(i_plus);
    eq.state.i = i_plus;
    eq.state.r = 1.0 - eq.state.s - eq.state.v - eq.state.i;

    const SvirState res = controlled_rhs(eq.state, 0.0, p);
    const double norm = std::sqrt(res.s * res.s + res.v * res.v + res.i * res.i + res.r * res.r);
    if (!(norm <= tol_eq))
        throw numerical_error("endemic_equilibrium: residual above tolerance after bisection");
    return eq;
}

} // namespace svir
