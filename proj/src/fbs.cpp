#include "svir/fbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "svir/errors.hpp"

namespace svir {

void FbsConfig::validate() const {
    grid.validate();
    if (max_iters < 1) throw invalid_input("solver.max_iters: must be >= 1");
    if (!(relaxation > 0.0 && relaxation <= 1.0))
        throw invalid_input("solver.relaxation: must be in (0, 1]");
    if (!(rel_tol > 0.0)) throw invalid_input("solver.rel_tol: must be > 0");
}

namespace {

constexpr double norm_floor = 1e-12;

double rel_change(const std::vector<double>& next, const std::vector<double>& prev) {
    double diff = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < next.size(); ++k) {
        diff = std::max(diff, std::abs(next[k] - prev[k]));
        scale = std::max(scale, std::abs(next[k]));
    }
    return diff / std::max(scale, norm_floor);
}

double rel_change(const std::vector<SvirState>& next, const std::vector<SvirState>& prev) {
    double diff = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < next.size(); ++k) {
        diff = std::max({diff, std::abs(next[k].s - prev[k].s), std::abs(next[k].v - prev[k].v),
                         std::abs(next[k].i - prev[k].i), std::abs(next[k].r - prev[k].r)});
        scale = std::max({scale, std::abs(next[k].s), std::abs(next[k].v), std::abs(next[k].i),
                          std::abs(next[k].r)});
    }
    return diff / std::max(scale, norm_floor);
}

double rel_change(const std::vector<Costate>& next, const std::vector<Costate>& prev) {
    double diff = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < next.size(); ++k) {
        diff = std::max({diff, std::abs(next[k].l1 - prev[k].l1),
                         std::abs(next[k].l2 - prev[k].l2), std::abs(next[k].l3 - prev[k].l3)});
        scale = std::max(
            {scale, std::abs(next[k].l1), std::abs(next[k].l2), std::abs(next[k].l3)});
    }
    return diff / std::max(scale, norm_floor);
}

ControlPath apply_control_map(const std::vector<SvirState>& states,
                              const std::vector<Costate>& costates, const ControlPath& previous,
                              const ModelParams& p, const CostSpec& spec, double tol_switch) {
    ControlPath mapped(states.size());
    switch (spec.social.family) {
    case CostFamily::quadratic:
        for (std::size_t k = 0; k < states.size(); ++k)
            mapped[k] = optimal_control_quadratic(states[k], costates[k], p, spec.social.param);
        break;
    case CostFamily::exponential:
        for (std::size_t k = 0; k < states.size(); ++k)
            mapped[k] = optimal_control_exponential(states[k], costates[k], p, spec.social.param);
        break;
    case CostFamily::linear:
        for (std::size_t k = 0; k < states.size(); ++k)
            mapped[k] =
                optimal_control_linear(states[k], costates[k], p, spec, previous[k], tol_switch).u;
        break;
    }
    return mapped;
}

} // namespace

SolutionPath solve(const ModelParams& p, const SvirState& x0, const CostSpec& spec,
                   const FbsConfig& cfg) {
    p.validate();
    spec.validate();
    cfg.validate();
    if (!x0.finite()) throw invalid_input("solve: non-finite initial state");

    ControlPath u = cfg.initial_control ? *cfg.initial_control
                                        : constant_control(cfg.grid, 0.0);
    validate_control(u, cfg.grid, p.u_bar);

    std::vector<SvirState> prev_states;
    std::vector<Costate> prev_costates;
    double delta = std::numeric_limits<double>::infinity();
    double theta = cfg.relaxation;
    bool converged = false;
    std::size_t iterations = 0;

    // Stagnation control: a damped limit cycle keeps delta pinned at an
    // amplitude proportional to theta, so when a window of iterations brings
    // no improvement the damping is halved until the cycle quenches.
    constexpr std::size_t stagnation_window = 20;
    constexpr double min_theta = 1e-6;
    double window_best = std::numeric_limits<double>::infinity();
    double previous_window_best = std::numeric_limits<double>::infinity();
    std::size_t window_count = 0;

    while (iterations < cfg.max_iters) {
        ++iterations;
        std::vector<SvirState> states = integrate_forward(p, u, x0, cfg.grid);
        std::vector<Costate> costates = integrate_backward(states, u, p, spec, cfg.grid);
        const ControlPath mapped = apply_control_map(states, costates, u, p, spec, cfg.tol_switch);

        ControlPath u_next(u.size());
        for (std::size_t k = 0; k < u.size(); ++k)
            u_next[k] = theta * mapped[k] + (1.0 - theta) * u[k];

        const double du = rel_change(u_next, u);
        const double dx = prev_states.empty() ? std::numeric_limits<double>::infinity()
                                              : rel_change(states, prev_states);
        const double dl = prev_costates.empty() ? std::numeric_limits<double>::infinity()
                                                : rel_change(costates, prev_costates);
        delta = std::max({du, dx, dl});

        u = std::move(u_next);
        prev_states = std::move(states);
        prev_costates = std::move(costates);

        if (delta <= cfg.rel_tol) {
            converged = true;
            break;
        }

        if (cfg.adapt_relaxation) {
            window_best = std::min(window_best, delta);
            if (++window_count == stagnation_window) {
                if (window_best > 0.9 * previous_window_best && theta > min_theta)
                    theta = std::max(0.5 * theta, min_theta);
                previous_window_best = window_best;
                window_best = std::numeric_limits<double>::infinity();
                window_count = 0;
            }
        }
    }

    // Project the relaxed iterate onto the pointwise argmin characterization,
    // so the returned control is the discrete PMP witness; bang-bang controls
    // come out clean instead of keeping the damped ramp across the switch.
    {
        const std::vector<SvirState> states = integrate_forward(p, u, x0, cfg.grid);
        const std::vector<Costate> costates = integrate_backward(states, u, p, spec, cfg.grid);
        u = apply_control_map(states, costates, u, p, spec, cfg.tol_switch);
    }

    SolutionPath out;
    out.grid = cfg.grid;
    out.control = u;
    out.states = integrate_forward(p, u, x0, cfg.grid);
    out.costates = integrate_backward(out.states, u, p, spec, cfg.grid);
    out.cost = evaluate_costs(out.states, u, spec, p, cfg.grid);
    out.iterations = iterations;
    out.converged = converged;
    out.final_rel_change = delta;
    out.final_relaxation = theta;
    return out;
}

SolutionPath evaluate_constant_policy(const ModelParams& p, const SvirState& x0,
                                      const CostSpec& spec, const TimeGrid& grid, double u_const) {
    p.validate();
    spec.validate();
    grid.validate();
    if (!(u_const >= 0.0 && u_const <= p.u_bar))
        throw invalid_input("evaluate_constant_policy: u_const outside [0, u_bar]");
    SolutionPath out;
    out.grid = grid;
    out.control = constant_control(grid, u_const);
    out.states = integrate_forward(p, out.control, x0, grid);
    out.cost = evaluate_costs(out.states, out.control, spec, p, grid);
    out.iterations = 0;
    out.converged = true;
    out.final_rel_change = 0.0;
    return out;
}

SweepTable sweep_parameter(const ModelParams& p, const SvirState& x0, const CostSpec& spec_template,
                           const FbsConfig& cfg, const std::vector<double>& param_values) {
    if (param_values.empty()) throw invalid_input("sweep_parameter: empty parameter list");
    SweepTable table;
    double last_ok_j_opt = -std::numeric_limits<double>::infinity();
    for (const double value : param_values) {
        SweepRow row;
        row.param = value;
        try {
            CostSpec spec = spec_template;
            spec.social.param = value;
            row.j_none = evaluate_constant_policy(p, x0, spec, cfg.grid, 0.0).cost.j_total;
            row.j_full = evaluate_constant_policy(p, x0, spec, cfg.grid, p.u_bar).cost.j_total;
            const SolutionPath opt = solve(p, x0, spec, cfg);
            row.j_opt = opt.cost.j_total;
            row.converged = opt.converged;
            if (row.j_opt < last_ok_j_opt) table.j_opt_nondecreasing = false;
            last_ok_j_opt = row.j_opt;
        } catch (const std::exception& e) {
            row.failed = true;
            row.error = e.what();
            ++table.n_failed;
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

} // namespace svir
