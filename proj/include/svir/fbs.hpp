#pragma once

#include <optional>
#include <string>
#include <vector>

#include "svir/adjoint.hpp"
#include "svir/cost.hpp"
#include "svir/model.hpp"

namespace svir {

/// Forward-backward sweep configuration. relaxation is the initial damping
/// theta of the control update u_new = theta*u_map + (1-theta)*u_old; when
/// the iteration stalls in a damped limit cycle (bang-bang switch nodes,
/// steep control maps), theta is halved until the cycle quenches.
struct FbsConfig {
    std::size_t max_iters = 500;
    double relaxation = 0.1;
    double rel_tol = 1e-4;
    TimeGrid grid;
    std::optional<ControlPath> initial_control; // defaults to all zeros
    double tol_switch = tol_switch_default;     // linear family only
    bool adapt_relaxation = true;               // stagnation-triggered halving

    void validate() const;
};

/// Discrete witness of an optimal (or constant-policy) solution.
struct SolutionPath {
    TimeGrid grid;
    std::vector<SvirState> states;
    std::vector<Costate> costates; // empty for constant-policy evaluations
    ControlPath control;
    CostBreakdown cost;
    std::size_t iterations = 0;
    bool converged = false;
    double final_rel_change = 0.0;
    double final_relaxation = 0.0; // effective theta at exit
};

/// Forward-backward sweep: forward states, backward costates, pointwise
/// control map, relaxed update; stops when the relative sup-norm changes of
/// control, states and costates all fall below rel_tol. Non-convergence is
/// reported through converged = false, never an exception.
SolutionPath solve(const ModelParams& p, const SvirState& x0, const CostSpec& spec,
                   const FbsConfig& cfg);

/// Single forward pass under u(t) = u_const with cost evaluation; costates
/// are omitted.
SolutionPath evaluate_constant_policy(const ModelParams& p, const SvirState& x0,
                                      const CostSpec& spec, const TimeGrid& grid, double u_const);

struct SweepRow {
    double param = 0.0;
    double j_none = 0.0;
    double j_full = 0.0;
    double j_opt = 0.0;
    bool converged = false;
    bool failed = false;
    std::string error;
};

struct SweepTable {
    std::vector<SweepRow> rows;
    bool j_opt_nondecreasing = true; // over the rows in input order
    std::size_t n_failed = 0;
};

/// One solve plus the two constant policies (0 and u_bar) per parameter
/// value; per-entry failures are recorded and the sweep continues.
SweepTable sweep_parameter(const ModelParams& p, const SvirState& x0, const CostSpec& spec_template,
                           const FbsConfig& cfg, const std::vector<double>& param_values);

} // namespace svir
