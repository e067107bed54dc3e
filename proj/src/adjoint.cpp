#include "svir/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "svir/errors.hpp"

namespace svir {

bool Costate::finite() const {
    return std::isfinite(l1) && std::isfinite(l2) && std::isfinite(l3);
}

double hamiltonian(const SvirState& x, const Costate& lam, double u, const ModelParams& p,
                   const CostSpec& spec) {
    const SvirState d = controlled_rhs(x, u, p);
    return running_cost(x, u, spec, p.alpha) + lam.l1 * d.s + lam.l2 * d.v + lam.l3 * d.i;
}

Costate costate_rhs(const SvirState& x, const Costate& lam, double u, const ModelParams& p,
                    const CostSpec& spec) {
    if (!x.finite() || !lam.finite()) throw invalid_input("costate_rhs: non-finite input");
    if (!std::isfinite(u) || u < 0.0 || u > 1.0)
        throw invalid_input("costate_rhs: control outside [0, 1]");
    const double bu = transmission_rate(p, u);
    Costate d;
    d.l1 = (bu * x.i + p.alpha + p.mu) * lam.l1 - p.alpha * lam.l2 - bu * x.i * lam.l3 -
           spec.c2 * p.alpha;
    d.l2 = (p.eps * bu * x.i + p.gamma1 + p.mu) * lam.l2 - p.eps * bu * x.i * lam.l3;
    d.l3 = bu * x.s * lam.l1 + p.eps * bu * x.v * lam.l2 -
           (bu * x.s + p.eps * bu * x.v - p.gamma - p.mu) * lam.l3 - spec.c1;
    return d;
}

namespace {

Costate axpy(const Costate& l, double h, const Costate& d) {
    return {l.l1 + h * d.l1, l.l2 + h * d.l2, l.l3 + h * d.l3};
}

SvirState midpoint(const SvirState& a, const SvirState& b) {
    return {0.5 * (a.s + b.s), 0.5 * (a.v + b.v), 0.5 * (a.i + b.i), 0.5 * (a.r + b.r)};
}

} // namespace

std::vector<Costate> integrate_backward(const std::vector<SvirState>& states,
                                        const ControlPath& u, const ModelParams& p,
                                        const CostSpec& spec, const TimeGrid& grid) {
    if (states.size() != grid.n_nodes() || u.size() != grid.n_nodes())
        throw invalid_input("integrate_backward: trajectory/control not aligned with the grid");
    const double h = grid.dt();
    std::vector<Costate> lam(grid.n_nodes());
    lam.back() = Costate{0.0, 0.0, 0.0}; // transversality
    for (std::size_t k = grid.n_steps; k-- > 0;) {
        const SvirState& x_right = states[k + 1];
        const SvirState& x_left = states[k];
        const SvirState x_mid = midpoint(x_left, x_right);
        const double uk = u[k];
        const Costate& l1 = lam[k + 1];
        const Costate k1 = costate_rhs(x_right, l1, uk, p, spec);
        const Costate k2 = costate_rhs(x_mid, axpy(l1, -0.5 * h, k1), uk, p, spec);
        const Costate k3 = costate_rhs(x_mid, axpy(l1, -0.5 * h, k2), uk, p, spec);
        const Costate k4 = costate_rhs(x_left, axpy(l1, -h, k3), uk, p, spec);
        lam[k] = {l1.l1 - h / 6.0 * (k1.l1 + 2.0 * k2.l1 + 2.0 * k3.l1 + k4.l1),
                  l1.l2 - h / 6.0 * (k1.l2 + 2.0 * k2.l2 + 2.0 * k3.l2 + k4.l2),
                  l1.l3 - h / 6.0 * (k1.l3 + 2.0 * k2.l3 + 2.0 * k3.l3 + k4.l3)};
        if (!lam[k].finite()) {
            std::ostringstream msg;
            msg << "integrate_backward: non-finite costate at step " << k;
            throw numerical_error(msg.str());
        }
    }
    return lam;
}

double optimal_control_quadratic(const SvirState& x, const Costate& lam, const ModelParams& p,
                                 double b) {
    if (!(b > 0.0)) throw invalid_input("optimal_control_quadratic: b must be > 0");
    const double raw = p.beta0 * x.i *
                       (x.s * (lam.l3 - lam.l1) + p.eps * x.v * (lam.l3 - lam.l2)) / (2.0 * b);
    return std::clamp(raw, 0.0, p.u_bar);
}

double optimal_control_exponential(const SvirState& x, const Costate& lam, const ModelParams& p,
                                   double k) {
    if (!(k > 0.0)) throw invalid_input("optimal_control_exponential: k must be > 0");
    const double kt = x.s * (lam.l3 - lam.l1) + p.eps * x.v * (lam.l3 - lam.l2);
    if (kt <= 0.0) return 0.0;
    const double arg = p.beta0 * x.i * kt / k;
    if (arg <= 0.0) return 0.0; // continuous extension of max[0, .] as I -> 0
    const double raw = std::log(arg) / k;
    return std::clamp(raw, 0.0, p.u_bar);
}

double switching_function(const SvirState& x, const Costate& lam, const ModelParams& p, double a) {
    return a + p.beta0 * (lam.l1 - lam.l3) * x.s * x.i +
           p.eps * p.beta0 * (lam.l2 - lam.l3) * x.v * x.i;
}

namespace {

// d(phi)/dt = beta0 * G with G below; the control terms cancel along the
// flow, so G is u-free. (The g1 bracket carries the eps*alpha*(l2-l3)
// vaccination-inflow term.)
struct SwitchRateTerms {
    double g1;
    double g2;
    double value; // G itself
};

SwitchRateTerms switch_rate_terms(const SvirState& x, const Costate& lam, const ModelParams& p,
                                  const CostSpec& spec) {
    SwitchRateTerms t;
    t.g1 = -(p.gamma + p.mu) * lam.l1 - p.alpha * lam.l2 + (p.alpha + p.mu) * lam.l3 + spec.c1 -
           p.alpha * spec.c2 + p.eps * p.alpha * (lam.l2 - lam.l3);
    t.g2 = -(p.gamma + p.mu) * lam.l2 + (p.gamma1 + p.mu) * lam.l3 + spec.c1;
    t.value = t.g1 * x.s * x.i + p.mu * (lam.l1 - lam.l3) * x.i + p.eps * t.g2 * x.v * x.i;
    return t;
}

// d2(phi)/dt2 for a given control value; affine in u.
double switch_second_derivative(const SvirState& x, const Costate& lam, const ModelParams& p,
                                const CostSpec& spec, double u) {
    const SwitchRateTerms t = switch_rate_terms(x, lam, p, spec);
    const double dg_ds = t.g1 * x.i;
    const double dg_dv = p.eps * t.g2 * x.i;
    const double dg_di = t.g1 * x.s + p.mu * (lam.l1 - lam.l3) + p.eps * t.g2 * x.v;
    const double dg_dl1 = -(p.gamma + p.mu) * x.s * x.i + p.mu * x.i;
    const double dg_dl2 =
        (p.eps - 1.0) * p.alpha * x.s * x.i - p.eps * (p.gamma + p.mu) * x.v * x.i;
    const double dg_dl3 = (p.alpha + p.mu - p.eps * p.alpha) * x.s * x.i - p.mu * x.i +
                          p.eps * (p.gamma1 + p.mu) * x.v * x.i;
    const SvirState dx = controlled_rhs(x, u, p);
    const Costate dl = costate_rhs(x, lam, u, p, spec);
    return p.beta0 * (dg_ds * dx.s + dg_dv * dx.v + dg_di * dx.i + dg_dl1 * dl.l1 +
                      dg_dl2 * dl.l2 + dg_dl3 * dl.l3);
}

} // namespace

double switching_function_rate(const SvirState& x, const Costate& lam, const ModelParams& p,
                               const CostSpec& spec) {
    return p.beta0 * switch_rate_terms(x, lam, p, spec).value;
}

std::pair<double, double> singular_control_coefficients(const SvirState& x, const Costate& lam,
                                                        const ModelParams& p,
                                                        const CostSpec& spec) {
    // d2/dt2(dH/du) is exactly affine in u, so two evaluations recover the
    // coefficients of A1*u - A2 without any differencing error.
    const double at_zero = switch_second_derivative(x, lam, p, spec, 0.0);
    const double at_one = switch_second_derivative(x, lam, p, spec, 1.0);
    return {at_one - at_zero, -at_zero};
}

LinearControlResult optimal_control_linear(const SvirState& x, const Costate& lam,
                                           const ModelParams& p, const CostSpec& spec,
                                           double previous_u, double tol_switch) {
    if (spec.social.family != CostFamily::linear)
        throw invalid_input("optimal_control_linear: cost family must be linear");
    const double a = spec.social.param;
    if (!(a > 0.0)) throw invalid_input("optimal_control_linear: a must be > 0");

    LinearControlResult out;
    out.diag.phi = switching_function(x, lam, p, a);
    if (out.diag.phi < -tol_switch) {
        out.diag.regime = ControlRegime::upper;
        out.u = p.u_bar;
        return out;
    }
    if (out.diag.phi > tol_switch) {
        out.diag.regime = ControlRegime::lower;
        out.u = 0.0;
        return out;
    }
    out.diag.regime = ControlRegime::singular;
    const auto [a1, a2] = singular_control_coefficients(x, lam, p, spec);
    out.diag.a1 = a1;
    out.diag.a2 = a2;
    if (std::abs(a1) > tol_singular) {
        out.u = std::clamp(a2 / a1, 0.0, p.u_bar);
    } else {
        // Degenerate plateau: hold the caller's previous value to avoid chatter.
        out.u = std::clamp(previous_u, 0.0, p.u_bar);
    }
    return out;
}

} // namespace svir
