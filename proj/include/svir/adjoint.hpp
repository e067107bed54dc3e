#pragma once

#include <utility>
#include <vector>

#include "svir/cost.hpp"
#include "svir/model.hpp"

namespace svir {

// Switching-logic tolerances for the linear (bang-bang) family.
inline constexpr double tol_switch_default = 1e-6;
inline constexpr double tol_singular = 1e-10;

/// Shadow prices of S, V, I.
struct Costate {
    double l1 = 0.0;
    double l2 = 0.0;
    double l3 = 0.0;

    bool finite() const;
};

enum class ControlRegime { lower, singular, upper };

/// Evaluation record of the bang-bang decision at one point.
struct SwitchingDiagnostics {
    double phi = 0.0; // dH/du
    double a1 = 0.0;  // singular-control coefficients: d2/dt2(dH/du) = a1*u - a2
    double a2 = 0.0;
    ControlRegime regime = ControlRegime::lower;
};

/// Pontryagin Hamiltonian: running cost plus costate-weighted dynamics.
double hamiltonian(const SvirState& x, const Costate& lam, double u, const ModelParams& p,
                   const CostSpec& spec);

/// Right-hand side of the costate system; equals -dH/d(S,V,I).
Costate costate_rhs(const SvirState& x, const Costate& lam, double u, const ModelParams& p,
                    const CostSpec& spec);

/// RK4 backward from the transversality condition lambda(T) = 0, on the same
/// grid as the forward trajectory; states at half-steps are interpolated
/// linearly between nodes. Returns n_steps + 1 costates, last one exactly 0.
std::vector<Costate> integrate_backward(const std::vector<SvirState>& states,
                                        const ControlPath& u, const ModelParams& p,
                                        const CostSpec& spec, const TimeGrid& grid);

/// Closed-form minimizer of H for c(u) = b*u^2, clamped to [0, u_bar].
double optimal_control_quadratic(const SvirState& x, const Costate& lam, const ModelParams& p,
                                 double b);

/// Closed-form minimizer of H for c(u) = e^{k*u} - 1, clamped to [0, u_bar];
/// returns 0 when K = S(l3-l1) + eps*V(l3-l2) <= 0 or the log argument is not
/// positive.
double optimal_control_exponential(const SvirState& x, const Costate& lam, const ModelParams& p,
                                   double k);

/// Switching function dH/du for the linear family: a + beta0*(l1-l3)*S*I +
/// eps*beta0*(l2-l3)*V*I.
double switching_function(const SvirState& x, const Costate& lam, const ModelParams& p, double a);

/// Time derivative of the switching function along the optimal flow. The
/// control terms cancel, so the value does not depend on u.
double switching_function_rate(const SvirState& x, const Costate& lam, const ModelParams& p,
                               const CostSpec& spec);

/// Coefficients (A1, A2) with d2/dt2(dH/du) = A1*u - A2; both vanish when
/// I = 0. The singular control on a vanishing-phi arc is A2/A1.
std::pair<double, double> singular_control_coefficients(const SvirState& x, const Costate& lam,
                                                        const ModelParams& p,
                                                        const CostSpec& spec);

struct LinearControlResult {
    double u = 0.0;
    SwitchingDiagnostics diag;
};

/// Bang-bang/singular control map for c(u) = a*u:
///   phi < -tol_switch -> u_bar; phi > tol_switch -> 0;
///   |phi| <= tol_switch -> clamp(A2/A1, 0, u_bar), or hold previous_u when
///   |A1| <= tol_singular.
/// spec must carry the linear family; its c1, c2 enter A1, A2.
LinearControlResult optimal_control_linear(const SvirState& x, const Costate& lam,
                                           const ModelParams& p, const CostSpec& spec,
                                           double previous_u,
                                           double tol_switch = tol_switch_default);

} // namespace svir
