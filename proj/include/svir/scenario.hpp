#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "svir/calibration.hpp"
#include "svir/cost.hpp"
#include "svir/fbs.hpp"
#include "svir/model.hpp"

namespace svir {

// Process exit codes shared by the CLI commands.
inline constexpr int exit_ok = 0;
inline constexpr int exit_validation = 2;
inline constexpr int exit_numerical = 3;
inline constexpr int exit_no_convergence = 4;

enum class Strategy { none, full, constant, optimal };

std::string to_string(Strategy s);

/// Full description of one run. Defaults reproduce the 240-day baseline
/// scenario (reference rates, eps = 0.078, c1 = 1, c2 = 0.02, quadratic b =
/// 0.02, S0 = 0.85, I0 = 0.15), so an empty config file is a valid scenario.
struct ScenarioConfig {
    ModelParams model;
    SvirState x0{0.85, 0.0, 0.15, 0.0};
    TimeGrid horizon;
    CostSpec cost;
    std::size_t max_iters = 500;
    double relaxation = 0.5;
    double rel_tol = 1e-4;
    Strategy strategy = Strategy::optimal;
    bool strategy_explicit = false; // true when the config file named a strategy
    double u_const = 0.0;

    FbsConfig solver_config() const;
    /// Throws invalid_input with a field-path message ("model.beta0: ...").
    void validate() const;
};

/// Parses the INI-style scenario file (sections [model], [initial],
/// [horizon], [cost], [solver], [run]); unknown sections or keys are
/// rejected. Every key is optional; omitted keys keep the baseline defaults.
ScenarioConfig load_scenario(const std::string& path);

/// Parses the in-memory text form (used by tests).
ScenarioConfig parse_scenario(const std::string& text, const std::string& origin = "<config>");

struct CommandOptions {
    std::string config_path; // empty = all defaults
    std::string data_path;
    std::string out_dir = ".";
    std::optional<double> population;
    double mu = 0.0;
    double eps = 0.078;
    std::string baseline_window; // "start:end" in day units
    std::string sweep_param;     // one of b, k, a
    std::vector<double> sweep_values;
    std::string calibrate_mode = "constant"; // constant | daily
};

// Each command validates inputs, runs, writes its files under out_dir and a
// report.json, and returns one of the exit codes above. Error text goes to
// the err stream.
int cmd_simulate(const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_optimize(const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_sweep(const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_calibrate(const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_expost(const CommandOptions& opt, std::ostream& out, std::ostream& err);

/// Formats a double with 10 significant digits (the file-output contract).
std::string format_number(double value);

/// Reads back a trajectory CSV emitted by simulate/optimize.
struct TrajectoryFile {
    std::vector<double> t;
    std::vector<SvirState> states;
    ControlPath control;
};
TrajectoryFile read_trajectory_csv(const std::string& path);

} // namespace svir
