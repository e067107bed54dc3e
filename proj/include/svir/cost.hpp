#pragma once

#include <cstddef>
#include <vector>

#include "svir/model.hpp"

namespace svir {

enum class CostFamily { quadratic, exponential, linear };

/// Social-restriction cost family: b*u^2, e^{k*u}-1, or a*u.
/// The single positive parameter is b, k or a respectively.
struct SocialCost {
    CostFamily family = CostFamily::quadratic;
    double param = 0.02;

    static SocialCost quadratic(double b) { return {CostFamily::quadratic, b}; }
    static SocialCost exponential(double k) { return {CostFamily::exponential, k}; }
    static SocialCost linear(double a) { return {CostFamily::linear, a}; }

    void validate() const;
};

/// Weights of the three cost terms: c1 per unit of I per day, c2 per
/// vaccinated susceptible per day, plus the social-cost family.
struct CostSpec {
    double c1 = 1.0;
    double c2 = 0.02;
    SocialCost social;

    void validate() const;
};

/// Integral of each cost term over the horizon. j_total is the sum of the
/// three parts by construction.
struct CostBreakdown {
    double j_social = 0.0;
    double j_infection = 0.0;
    double j_vaccination = 0.0;
    double j_total = 0.0;

    double social_share() const { return j_total > 0.0 ? j_social / j_total : 0.0; }
    double infection_share() const { return j_total > 0.0 ? j_infection / j_total : 0.0; }
    double vaccination_share() const { return j_total > 0.0 ? j_vaccination / j_total : 0.0; }
};

/// c(u) for the given family. u must lie in [0, 1].
double social_cost(const SocialCost& c, double u);

/// dc/du for the given family.
double marginal_social_cost(const SocialCost& c, double u);

/// Integrand of the cost functional: c(u) + c1*I + c2*alpha*S.
double running_cost(const SvirState& x, double u, const CostSpec& spec, double alpha);

/// Composite trapezoidal quadrature of the three cost terms separately,
/// on the trajectory's own grid.
CostBreakdown evaluate_costs(const std::vector<SvirState>& states, const ControlPath& u,
                             const CostSpec& spec, const ModelParams& p, const TimeGrid& grid);

} // namespace svir
