#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "svir/scenario.hpp"

namespace {

void add_scenario_options(CLI::App* cmd, svir::CommandOptions& opt) {
    cmd->add_option("--config", opt.config_path, "Scenario config file (INI sections)");
    cmd->add_option("--out", opt.out_dir, "Output directory")->capture_default_str();
}

void add_data_options(CLI::App* cmd, svir::CommandOptions& opt,
                      std::optional<double>& population) {
    cmd->add_option("--data", opt.data_path, "Input CSV (date,S,V,I,R or *_count columns)")
        ->required();
    cmd->add_option("--out", opt.out_dir, "Output directory")->capture_default_str();
    cmd->add_option("--population", population,
                    "Population constant for count-valued data");
    cmd->add_option("--mu", opt.mu, "Exogenous birth-death rate")->capture_default_str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal social-distancing control for the SVIR epidemic model"};
    app.require_subcommand(1);

    svir::CommandOptions opt;
    std::optional<double> population;

    CLI::App* simulate = app.add_subcommand("simulate", "Forward run under a fixed strategy");
    add_scenario_options(simulate, opt);

    CLI::App* optimize = app.add_subcommand("optimize", "Forward-backward sweep optimal control");
    add_scenario_options(optimize, opt);

    CLI::App* sweep = app.add_subcommand("sweep", "Cost comparison over a cost-parameter list");
    add_scenario_options(sweep, opt);
    sweep->add_option("--param", opt.sweep_param, "Swept parameter: b, k or a")->required();
    sweep->add_option("--values", opt.sweep_values, "Comma-separated parameter values")
        ->required()
        ->delimiter(',');

    CLI::App* calibrate = app.add_subcommand("calibrate", "Constrained least-squares estimation");
    add_data_options(calibrate, opt, population);
    calibrate->add_option("--eps", opt.eps, "Vaccine leakage factor")->capture_default_str();
    calibrate->add_option("--mode", opt.calibrate_mode, "constant | daily")
        ->capture_default_str();

    CLI::App* expost = app.add_subcommand("expost", "Realized-policy reconstruction u = 1 - beta/beta0");
    add_data_options(expost, opt, population);
    expost->add_option("--baseline-window", opt.baseline_window,
                       "start:end days for the beta0 fit (default: first 21 days)");

    CLI11_PARSE(app, argc, argv);
    opt.population = population;

    if (simulate->parsed()) return svir::cmd_simulate(opt, std::cout, std::cerr);
    if (optimize->parsed()) return svir::cmd_optimize(opt, std::cout, std::cerr);
    if (sweep->parsed()) return svir::cmd_sweep(opt, std::cout, std::cerr);
    if (calibrate->parsed()) return svir::cmd_calibrate(opt, std::cout, std::cerr);
    if (expost->parsed()) return svir::cmd_expost(opt, std::cout, std::cerr);
    return svir::exit_validation;
}
