#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "svir/model.hpp"

namespace svir {

// Smallest denominator accepted by the per-day closed forms.
inline constexpr double tol_denominator = 1e-12;

/// Daily observations of the four compartments as population fractions.
struct ObservedSeries {
    std::vector<double> day; // ordinal days, strictly increasing
    std::vector<double> s, v, i, r;
    double population = 1.0; // normalization constant used at ingestion

    std::size_t size() const { return day.size(); }
    void validate() const;
};

/// One day of the stacked regression A_n * theta = Delta_n with
/// theta = (beta, alpha, gamma1, gamma).
struct DayBlock {
    std::array<std::array<double, 4>, 4> a{};
    std::array<double, 4> delta{};
};

/// Per-day blocks of the first-order discrete SVIR scheme (dt = 1 day), with
/// mu exogenous. Constructed so that data generated by the discrete model
/// satisfies A_n*theta = Delta_n exactly.
std::vector<DayBlock> build_regression(const ObservedSeries& series, double mu, double eps);

struct EstimationResult {
    std::array<double, 4> theta{};             // beta, alpha, gamma1, gamma (all >= 0)
    double residual_sse = 0.0;                 // sum over days of |Delta_n - A_n theta|^2
    std::array<double, 4> equation_residual{}; // rms residual of each block equation
    std::array<double, 4> gradient{};          // KKT gradient of the SSE at theta
    bool rank_deficient = false;
    std::vector<std::array<double, 4>> degenerate_directions;
};

/// Nonnegatively-constrained least squares over the stacked system, solved by
/// active-set enumeration with KKT certification (gradient >= 0 on the active
/// bounds, ~0 on free coordinates). Rank-deficient systems report their
/// degenerate directions and return the minimal-norm solution.
EstimationResult estimate_constant_params(const ObservedSeries& series, double mu, double eps);

/// Same, with selected components of theta pinned to zero (free_mask[j] =
/// false fixes component j).
EstimationResult estimate_constant_params(const ObservedSeries& series, double mu, double eps,
                                          const std::array<bool, 4>& free_mask);

/// Day-by-day closed-form rates of the SIR reduction (alpha = gamma1 = 0).
/// Days where S_n*I_n or I_n fall below tol_denominator are marked missing.
struct DailyRates {
    std::vector<double> day; // N-1 entries: day n of each forward difference
    std::vector<std::optional<double>> beta;
    std::vector<std::optional<double>> gamma;
};

DailyRates estimate_time_varying_sir(const ObservedSeries& series, double mu);

/// Realized-policy reconstruction u_n = 1 - beta_n/beta0, clamped to [0, 1]
/// with a flag where the raw value fell outside.
struct ExpostSeries {
    double beta0 = 0.0;
    std::vector<double> day;
    std::vector<std::optional<double>> beta_hat;
    std::vector<std::optional<double>> u_hat;
    std::vector<bool> clamped;
};

ExpostSeries expost_control(const DailyRates& daily, double beta0);

/// Baseline transmission rate over [day_begin, day_end] (inclusive), by the
/// constrained OLS with alpha = gamma1 fixed at zero.
double estimate_baseline_beta(const ObservedSeries& series, double mu, double day_begin,
                              double day_end);

/// Reads `date,S,V,I,R` (fractions) or `date,S_count,V_count,I_count,R_count`
/// (requires population). Dates are integers or ISO YYYY-MM-DD, strictly
/// increasing. Throws invalid_input with the offending row number.
ObservedSeries read_series_csv(const std::string& path, std::optional<double> population);

/// First-order discrete SVIR stepper used for fixtures and round-trip tests;
/// beta may vary per day.
std::vector<SvirState> simulate_discrete_svir(const std::vector<double>& beta_per_day,
                                              double alpha, double gamma1, double gamma, double mu,
                                              double eps, const SvirState& x0, std::size_t n_days);

} // namespace svir
