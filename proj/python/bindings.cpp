#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "svir/adjoint.hpp"
#include "svir/calibration.hpp"
#include "svir/cost.hpp"
#include "svir/errors.hpp"
#include "svir/fbs.hpp"
#include "svir/model.hpp"

namespace py = pybind11;
using namespace svir;

PYBIND11_MODULE(_core, m) {
    m.doc() = "SVIR optimal social-distancing control: dynamics, Pontryagin adjoint system, "
              "forward-backward sweep solver and calibration";

    py::register_exception<invalid_input>(m, "InvalidInput", PyExc_ValueError);
    py::register_exception<domain_error>(m, "DomainError", PyExc_ValueError);
    py::register_exception<numerical_error>(m, "NumericalError", PyExc_RuntimeError);

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init<>())
        .def(py::init([](double beta0, double alpha, double gamma, double gamma1, double mu,
                         double eps, double u_bar) {
                 return ModelParams{beta0, alpha, gamma, gamma1, mu, eps, u_bar};
             }),
             py::arg("beta0") = 0.22, py::arg("alpha") = 0.004, py::arg("gamma") = 0.095,
             py::arg("gamma1") = 0.071, py::arg("mu") = 0.0, py::arg("eps") = 0.078,
             py::arg("u_bar") = 1.0)
        .def_readwrite("beta0", &ModelParams::beta0)
        .def_readwrite("alpha", &ModelParams::alpha)
        .def_readwrite("gamma", &ModelParams::gamma)
        .def_readwrite("gamma1", &ModelParams::gamma1)
        .def_readwrite("mu", &ModelParams::mu)
        .def_readwrite("eps", &ModelParams::eps)
        .def_readwrite("u_bar", &ModelParams::u_bar)
        .def("validate", &ModelParams::validate);

    py::class_<SvirState>(m, "SvirState")
        .def(py::init<>())
        .def(py::init([](double s, double v, double i, double r) {
                 return SvirState{s, v, i, r};
             }),
             py::arg("s"), py::arg("v"), py::arg("i"), py::arg("r"))
        .def_readwrite("s", &SvirState::s)
        .def_readwrite("v", &SvirState::v)
        .def_readwrite("i", &SvirState::i)
        .def_readwrite("r", &SvirState::r)
        .def("sum", &SvirState::sum);

    py::class_<TimeGrid>(m, "TimeGrid")
        .def(py::init([](double t0, double tf, std::size_t n_steps) {
                 return TimeGrid{t0, tf, n_steps};
             }),
             py::arg("t0"), py::arg("tf"), py::arg("n_steps"))
        .def_readwrite("t0", &TimeGrid::t0)
        .def_readwrite("tf", &TimeGrid::tf)
        .def_readwrite("n_steps", &TimeGrid::n_steps)
        .def("dt", &TimeGrid::dt)
        .def("n_nodes", &TimeGrid::n_nodes)
        .def("time", &TimeGrid::time);

    py::enum_<EquilibriumKind>(m, "EquilibriumKind")
        .value("disease_free", EquilibriumKind::disease_free)
        .value("endemic", EquilibriumKind::endemic);

    py::class_<Equilibrium>(m, "Equilibrium")
        .def_readonly("kind", &Equilibrium::kind)
        .def_readonly("state", &Equilibrium::state);

    py::enum_<CostFamily>(m, "CostFamily")
        .value("quadratic", CostFamily::quadratic)
        .value("exponential", CostFamily::exponential)
        .value("linear", CostFamily::linear);

    py::class_<SocialCost>(m, "SocialCost")
        .def_static("quadratic", &SocialCost::quadratic, py::arg("b"))
        .def_static("exponential", &SocialCost::exponential, py::arg("k"))
        .def_static("linear", &SocialCost::linear, py::arg("a"))
        .def_readwrite("family", &SocialCost::family)
        .def_readwrite("param", &SocialCost::param);

    py::class_<CostSpec>(m, "CostSpec")
        .def(py::init<>())
        .def(py::init([](double c1, double c2, SocialCost social) {
                 return CostSpec{c1, c2, social};
             }),
             py::arg("c1") = 1.0, py::arg("c2") = 0.02,
             py::arg("social") = SocialCost{CostFamily::quadratic, 0.02})
        .def_readwrite("c1", &CostSpec::c1)
        .def_readwrite("c2", &CostSpec::c2)
        .def_readwrite("social", &CostSpec::social);

    py::class_<CostBreakdown>(m, "CostBreakdown")
        .def_readonly("j_social", &CostBreakdown::j_social)
        .def_readonly("j_infection", &CostBreakdown::j_infection)
        .def_readonly("j_vaccination", &CostBreakdown::j_vaccination)
        .def_readonly("j_total", &CostBreakdown::j_total)
        .def("social_share", &CostBreakdown::social_share)
        .def("infection_share", &CostBreakdown::infection_share)
        .def("vaccination_share", &CostBreakdown::vaccination_share);

    py::class_<Costate>(m, "Costate")
        .def(py::init<>())
        .def(py::init([](double l1, double l2, double l3) {
                 return Costate{l1, l2, l3};
             }),
             py::arg("l1"), py::arg("l2"), py::arg("l3"))
        .def_readwrite("l1", &Costate::l1)
        .def_readwrite("l2", &Costate::l2)
        .def_readwrite("l3", &Costate::l3);

    py::class_<FbsConfig>(m, "FbsConfig")
        .def(py::init([](TimeGrid grid, std::size_t max_iters, double relaxation, double rel_tol) {
                 FbsConfig cfg;
                 cfg.grid = grid;
                 cfg.max_iters = max_iters;
                 cfg.relaxation = relaxation;
                 cfg.rel_tol = rel_tol;
                 return cfg;
             }),
             py::arg("grid"), py::arg("max_iters") = 500, py::arg("relaxation") = 0.5,
             py::arg("rel_tol") = 1e-4)
        .def_readwrite("max_iters", &FbsConfig::max_iters)
        .def_readwrite("relaxation", &FbsConfig::relaxation)
        .def_readwrite("rel_tol", &FbsConfig::rel_tol)
        .def_readwrite("grid", &FbsConfig::grid)
        .def_readwrite("initial_control", &FbsConfig::initial_control);

    py::class_<SolutionPath>(m, "SolutionPath")
        .def_readonly("grid", &SolutionPath::grid)
        .def_readonly("states", &SolutionPath::states)
        .def_readonly("costates", &SolutionPath::costates)
        .def_readonly("control", &SolutionPath::control)
        .def_readonly("cost", &SolutionPath::cost)
        .def_readonly("iterations", &SolutionPath::iterations)
        .def_readonly("converged", &SolutionPath::converged)
        .def_readonly("final_rel_change", &SolutionPath::final_rel_change);

    m.def("transmission_rate", &transmission_rate, py::arg("params"), py::arg("u"));
    m.def("controlled_rhs", &controlled_rhs, py::arg("state"), py::arg("u"), py::arg("params"));
    m.def("integrate_forward", &integrate_forward, py::arg("params"), py::arg("control"),
          py::arg("x0"), py::arg("grid"));
    m.def("reproduction_number", &reproduction_number, py::arg("params"));
    m.def("disease_free_equilibrium", &disease_free_equilibrium, py::arg("params"));
    m.def("endemic_equilibrium", &endemic_equilibrium, py::arg("params"));

    m.def("social_cost", &social_cost, py::arg("social"), py::arg("u"));
    m.def("marginal_social_cost", &marginal_social_cost, py::arg("social"), py::arg("u"));
    m.def("running_cost", &running_cost, py::arg("state"), py::arg("u"), py::arg("spec"),
          py::arg("alpha"));
    m.def("evaluate_costs", &evaluate_costs, py::arg("states"), py::arg("control"),
          py::arg("spec"), py::arg("params"), py::arg("grid"));

    m.def("hamiltonian", &hamiltonian, py::arg("state"), py::arg("costate"), py::arg("u"),
          py::arg("params"), py::arg("spec"));
    m.def("costate_rhs", &costate_rhs, py::arg("state"), py::arg("costate"), py::arg("u"),
          py::arg("params"), py::arg("spec"));
    m.def("integrate_backward", &integrate_backward, py::arg("states"), py::arg("control"),
          py::arg("params"), py::arg("spec"), py::arg("grid"));
    m.def("optimal_control_quadratic", &optimal_control_quadratic, py::arg("state"),
          py::arg("costate"), py::arg("params"), py::arg("b"));
    m.def("optimal_control_exponential", &optimal_control_exponential, py::arg("state"),
          py::arg("costate"), py::arg("params"), py::arg("k"));
    m.def("switching_function", &switching_function, py::arg("state"), py::arg("costate"),
          py::arg("params"), py::arg("a"));
    m.def("switching_function_rate", &switching_function_rate, py::arg("state"),
          py::arg("costate"), py::arg("params"), py::arg("spec"));
    m.def("singular_control_coefficients", &singular_control_coefficients, py::arg("state"),
          py::arg("costate"), py::arg("params"), py::arg("spec"));
    m.def(
        "optimal_control_linear",
        [](const SvirState& x, const Costate& lam, const ModelParams& p, const CostSpec& spec,
           double previous_u, double tol_switch) {
            const LinearControlResult res = optimal_control_linear(x, lam, p, spec, previous_u,
                                                                   tol_switch);
            return py::make_tuple(res.u, res.diag.phi, res.diag.a1, res.diag.a2);
        },
        py::arg("state"), py::arg("costate"), py::arg("params"), py::arg("spec"),
        py::arg("previous_u"), py::arg("tol_switch") = tol_switch_default);

    m.def("solve", &solve, py::arg("params"), py::arg("x0"), py::arg("spec"), py::arg("config"));
    m.def("evaluate_constant_policy", &evaluate_constant_policy, py::arg("params"), py::arg("x0"),
          py::arg("spec"), py::arg("grid"), py::arg("u_const"));

    py::class_<ObservedSeries>(m, "ObservedSeries")
        .def(py::init([](std::vector<double> day, std::vector<double> s, std::vector<double> v,
                         std::vector<double> i, std::vector<double> r) {
                 ObservedSeries series;
                 series.day = std::move(day);
                 series.s = std::move(s);
                 series.v = std::move(v);
                 series.i = std::move(i);
                 series.r = std::move(r);
                 return series;
             }),
             py::arg("day"), py::arg("s"), py::arg("v"), py::arg("i"), py::arg("r"))
        .def_readonly("day", &ObservedSeries::day)
        .def_readonly("s", &ObservedSeries::s)
        .def_readonly("v", &ObservedSeries::v)
        .def_readonly("i", &ObservedSeries::i)
        .def_readonly("r", &ObservedSeries::r)
        .def("validate", &ObservedSeries::validate);

    py::class_<EstimationResult>(m, "EstimationResult")
        .def_readonly("theta", &EstimationResult::theta)
        .def_readonly("residual_sse", &EstimationResult::residual_sse)
        .def_readonly("equation_residual", &EstimationResult::equation_residual)
        .def_readonly("gradient", &EstimationResult::gradient)
        .def_readonly("rank_deficient", &EstimationResult::rank_deficient);

    py::class_<DailyRates>(m, "DailyRates")
        .def_readonly("day", &DailyRates::day)
        .def_readonly("beta", &DailyRates::beta)
        .def_readonly("gamma", &DailyRates::gamma);

    py::class_<ExpostSeries>(m, "ExpostSeries")
        .def_readonly("beta0", &ExpostSeries::beta0)
        .def_readonly("day", &ExpostSeries::day)
        .def_readonly("beta_hat", &ExpostSeries::beta_hat)
        .def_readonly("u_hat", &ExpostSeries::u_hat)
        .def_readonly("clamped", &ExpostSeries::clamped);

    m.def("estimate_constant_params",
          py::overload_cast<const ObservedSeries&, double, double>(&estimate_constant_params),
          py::arg("series"), py::arg("mu"), py::arg("eps"));
    m.def("estimate_time_varying_sir", &estimate_time_varying_sir, py::arg("series"),
          py::arg("mu"));
    m.def("expost_control", &expost_control, py::arg("daily"), py::arg("beta0"));
    m.def("estimate_baseline_beta", &estimate_baseline_beta, py::arg("series"), py::arg("mu"),
          py::arg("day_begin"), py::arg("day_end"));
    m.def("simulate_discrete_svir", &simulate_discrete_svir, py::arg("beta_per_day"),
          py::arg("alpha"), py::arg("gamma1"), py::arg("gamma"), py::arg("mu"), py::arg("eps"),
          py::arg("x0"), py::arg("n_days"));
}
