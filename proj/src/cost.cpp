#include "svir/cost.hpp"

#include <cmath>

#include "svir/errors.hpp"

namespace svir {

void SocialCost::validate() const {
    if (!std::isfinite(param) || param <= 0.0)
        throw invalid_input("cost.param: social-cost parameter must be > 0");
}

void CostSpec::validate() const {
    if (!std::isfinite(c1) || c1 < 0.0) throw invalid_input("cost.c1: must be >= 0");
    if (!std::isfinite(c2) || c2 < 0.0) throw invalid_input("cost.c2: must be >= 0");
    social.validate();
}

namespace {

void check_control_range(double u, const char* where) {
    if (!std::isfinite(u) || u < 0.0 || u > 1.0)
        throw invalid_input(std::string(where) + ": control outside [0, 1]");
}

} // namespace

double social_cost(const SocialCost& c, double u) {
    check_control_range(u, "social_cost");
    switch (c.family) {
    case CostFamily::quadratic: return c.param * u * u;
    case CostFamily::exponential: return std::exp(c.param * u) - 1.0;
    case CostFamily::linear: return c.param * u;
    }
    throw invalid_input("social_cost: unknown cost family");
}

double marginal_social_cost(const SocialCost& c, double u) {
    check_control_range(u, "marginal_social_cost");
    switch (c.family) {
    case CostFamily::quadratic: return 2.0 * c.param * u;
    case CostFamily::exponential: return c.param * std::exp(c.param * u);
    case CostFamily::linear: return c.param;
    }
    throw invalid_input("marginal_social_cost: unknown cost family");
}

double running_cost(const SvirState& x, double u, const CostSpec& spec, double alpha) {
    check_control_range(u, "running_cost");
    return social_cost(spec.social, u) + spec.c1 * x.i + spec.c2 * alpha * x.s;
}

CostBreakdown evaluate_costs(const std::vector<SvirState>& states, const ControlPath& u,
                             const CostSpec& spec, const ModelParams& p, const TimeGrid& grid) {
    if (states.size() != grid.n_nodes() || u.size() != grid.n_nodes())
        throw invalid_input("evaluate_costs: trajectory/control not aligned with the grid");
    const double h = grid.dt();
    double j_soc = 0.0, j_inf = 0.0, j_vac = 0.0;
    for (std::size_t k = 0; k < states.size(); ++k) {
        const double w = (k == 0 || k + 1 == states.size()) ? 0.5 * h : h;
        j_soc += w * social_cost(spec.social, u[k]);
        j_inf += w * spec.c1 * states[k].i;
        j_vac += w * spec.c2 * p.alpha * states[k].s;
    }
    CostBreakdown out;
    out.j_social = j_soc;
    out.j_infection = j_inf;
    out.j_vaccination = j_vac;
    out.j_total = j_soc + j_inf + j_vac;
    return out;
}

} // namespace svir
