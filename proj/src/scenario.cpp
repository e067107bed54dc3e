#include "svir/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "svir/errors.hpp"

namespace svir {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Strategy s) {
    switch (s) {
    case Strategy::none: return "none";
    case Strategy::full: return "full";
    case Strategy::constant: return "constant";
    case Strategy::optimal: return "optimal";
    }
    return "?";
}

FbsConfig ScenarioConfig::solver_config() const {
    FbsConfig cfg;
    cfg.max_iters = max_iters;
    cfg.relaxation = relaxation;
    cfg.rel_tol = rel_tol;
    cfg.grid = horizon;
    return cfg;
}

void ScenarioConfig::validate() const {
    model.validate();
    if (!x0.finite()) throw invalid_input("initial: state must be finite");
    if (x0.s < 0.0) throw invalid_input("initial.S: must be >= 0");
    if (x0.v < 0.0) throw invalid_input("initial.V: must be >= 0");
    if (x0.i < 0.0) throw invalid_input("initial.I: must be >= 0");
    if (x0.r < 0.0) throw invalid_input("initial.R: must be >= 0");
    horizon.validate();
    cost.validate();
    solver_config().validate();
    if (!(u_const >= 0.0 && u_const <= model.u_bar))
        throw invalid_input("run.u_const: must be within [0, u_bar]");
}

namespace {

double parse_double(const std::string& value, const std::string& where) {
    char* end = nullptr;
    const double out = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0' || !std::isfinite(out))
        throw invalid_input(where + ": unparsable number '" + value + "'");
    return out;
}

std::size_t parse_size(const std::string& value, const std::string& where) {
    const double out = parse_double(value, where);
    if (out < 0.0 || out != std::floor(out))
        throw invalid_input(where + ": must be a nonnegative integer");
    return static_cast<std::size_t>(out);
}

std::string trim(const std::string& text) {
    std::size_t b = text.find_first_not_of(" \t\r");
    std::size_t e = text.find_last_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return text.substr(b, e - b + 1);
}

} // namespace

ScenarioConfig parse_scenario(const std::string& text, const std::string& origin) {
    ScenarioConfig cfg;
    std::string family_key;    // which of b/k/a (or generic "param") appeared
    std::string family_value;  // explicit family = ... if present
    double family_param = cfg.cost.social.param;
    bool family_param_set = false;

    std::istringstream in(text);
    std::string raw;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::size_t comment = raw.find_first_of("#;");
        std::string line = trim(comment == std::string::npos ? raw : raw.substr(0, comment));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw invalid_input(origin + ": malformed section header at line " +
                                    std::to_string(line_no));
            section = trim(line.substr(1, line.size() - 2));
            if (section != "model" && section != "initial" && section != "horizon" &&
                section != "cost" && section != "solver" && section != "run")
                throw invalid_input(section + ": unknown section");
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw invalid_input(origin + ": expected key = value at line " +
                                std::to_string(line_no));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string path = section.empty() ? key : section + "." + key;

        if (section == "model") {
            if (key == "beta0") cfg.model.beta0 = parse_double(value, path);
            else if (key == "alpha") cfg.model.alpha = parse_double(value, path);
            else if (key == "gamma") cfg.model.gamma = parse_double(value, path);
            else if (key == "gamma1") cfg.model.gamma1 = parse_double(value, path);
            else if (key == "mu") cfg.model.mu = parse_double(value, path);
            else if (key == "eps") cfg.model.eps = parse_double(value, path);
            else if (key == "u_bar") cfg.model.u_bar = parse_double(value, path);
            else throw invalid_input(path + ": unknown key");
        } else if (section == "initial") {
            if (key == "S") cfg.x0.s = parse_double(value, path);
            else if (key == "V") cfg.x0.v = parse_double(value, path);
            else if (key == "I") cfg.x0.i = parse_double(value, path);
            else if (key == "R") cfg.x0.r = parse_double(value, path);
            else throw invalid_input(path + ": unknown key");
        } else if (section == "horizon") {
            if (key == "t0") cfg.horizon.t0 = parse_double(value, path);
            else if (key == "tf") cfg.horizon.tf = parse_double(value, path);
            else if (key == "n_steps") cfg.horizon.n_steps = parse_size(value, path);
            else throw invalid_input(path + ": unknown key");
        } else if (section == "cost") {
            if (key == "family") family_value = value;
            else if (key == "b" || key == "k" || key == "a" || key == "param") {
                if (!family_key.empty() && family_key != key)
                    throw invalid_input(path + ": conflicting social-cost parameter keys");
                family_key = key;
                family_param = parse_double(value, path);
                family_param_set = true;
            } else if (key == "c1") cfg.cost.c1 = parse_double(value, path);
            else if (key == "c2") cfg.cost.c2 = parse_double(value, path);
            else throw invalid_input(path + ": unknown key");
        } else if (section == "solver") {
            if (key == "max_iters") cfg.max_iters = parse_size(value, path);
            else if (key == "relaxation") cfg.relaxation = parse_double(value, path);
            else if (key == "rel_tol") cfg.rel_tol = parse_double(value, path);
            else throw invalid_input(path + ": unknown key");
        } else if (section == "run") {
            if (key == "strategy") {
                if (value == "none") cfg.strategy = Strategy::none;
                else if (value == "full") cfg.strategy = Strategy::full;
                else if (value == "constant") cfg.strategy = Strategy::constant;
                else if (value == "optimal") cfg.strategy = Strategy::optimal;
                else throw invalid_input("run.strategy: unknown strategy '" + value + "'");
                cfg.strategy_explicit = true;
            } else if (key == "u_const") cfg.u_const = parse_double(value, path);
            else throw invalid_input(path + ": unknown key");
        } else {
            throw invalid_input(path + ": key outside any section");
        }
    }

    // Resolve the cost family from the explicit name and/or the parameter key.
    std::map<std::string, CostFamily> families{{"quadratic", CostFamily::quadratic},
                                               {"exponential", CostFamily::exponential},
                                               {"linear", CostFamily::linear}};
    std::map<std::string, std::string> param_of{
        {"quadratic", "b"}, {"exponential", "k"}, {"linear", "a"}};
    if (!family_value.empty()) {
        const auto it = families.find(family_value);
        if (it == families.end())
            throw invalid_input("cost.family: unknown cost family '" + family_value + "'");
        cfg.cost.social.family = it->second;
        if (!family_key.empty() && family_key != "param" && family_key != param_of[family_value])
            throw invalid_input("cost." + family_key + ": parameter key does not match cost.family '" +
                                family_value + "'");
    } else if (family_key == "b") cfg.cost.social.family = CostFamily::quadratic;
    else if (family_key == "k") cfg.cost.social.family = CostFamily::exponential;
    else if (family_key == "a") cfg.cost.social.family = CostFamily::linear;
    if (family_param_set) cfg.cost.social.param = family_param;

    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    if (path.empty()) return ScenarioConfig{};
    std::ifstream file(path);
    if (!file) throw invalid_input("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << file.rdbuf();
    return parse_scenario(buffer.str(), path);
}

std::string format_number(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", value);
    return buf;
}

namespace {

double round_sig(double value) { return std::strtod(format_number(value).c_str(), nullptr); }

std::string family_name(CostFamily f) {
    switch (f) {
    case CostFamily::quadratic: return "quadratic";
    case CostFamily::exponential: return "exponential";
    case CostFamily::linear: return "linear";
    }
    return "?";
}

json scenario_json(const ScenarioConfig& cfg) {
    return json{{"model",
                 {{"beta0", cfg.model.beta0},
                  {"alpha", cfg.model.alpha},
                  {"gamma", cfg.model.gamma},
                  {"gamma1", cfg.model.gamma1},
                  {"mu", cfg.model.mu},
                  {"eps", cfg.model.eps},
                  {"u_bar", cfg.model.u_bar}}},
                {"initial", {{"S", cfg.x0.s}, {"V", cfg.x0.v}, {"I", cfg.x0.i}, {"R", cfg.x0.r}}},
                {"horizon",
                 {{"t0", cfg.horizon.t0}, {"tf", cfg.horizon.tf}, {"n_steps", cfg.horizon.n_steps}}},
                {"cost",
                 {{"family", family_name(cfg.cost.social.family)},
                  {"param", cfg.cost.social.param},
                  {"c1", cfg.cost.c1},
                  {"c2", cfg.cost.c2}}},
                {"solver",
                 {{"max_iters", cfg.max_iters},
                  {"relaxation", cfg.relaxation},
                  {"rel_tol", cfg.rel_tol}}},
                {"run", {{"strategy", to_string(cfg.strategy)}, {"u_const", cfg.u_const}}}};
}

json cost_json(const CostBreakdown& cost) {
    return json{{"j_total", round_sig(cost.j_total)},
                {"j_social", round_sig(cost.j_social)},
                {"j_infection", round_sig(cost.j_infection)},
                {"j_vaccination", round_sig(cost.j_vaccination)},
                {"shares",
                 {{"social", round_sig(cost.social_share())},
                  {"infection", round_sig(cost.infection_share())},
                  {"vaccination", round_sig(cost.vaccination_share())}}}};
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw numerical_error("cannot write output file: " + path.string());
    file << content;
}

std::string render_trajectory_csv(const SolutionPath& sol) {
    std::ostringstream out;
    out << "t,S,V,I,R,u\n";
    for (std::size_t k = 0; k < sol.states.size(); ++k) {
        out << format_number(sol.grid.time(k)) << ',' << format_number(sol.states[k].s) << ','
            << format_number(sol.states[k].v) << ',' << format_number(sol.states[k].i) << ','
            << format_number(sol.states[k].r) << ',' << format_number(sol.control[k]) << '\n';
    }
    return out.str();
}

std::string render_costates_csv(const SolutionPath& sol) {
    std::ostringstream out;
    out << "t,lambda1,lambda2,lambda3\n";
    for (std::size_t k = 0; k < sol.costates.size(); ++k) {
        out << format_number(sol.grid.time(k)) << ',' << format_number(sol.costates[k].l1) << ','
            << format_number(sol.costates[k].l2) << ',' << format_number(sol.costates[k].l3)
            << '\n';
    }
    return out.str();
}

fs::path prepare_out_dir(const std::string& dir) {
    const fs::path out(dir.empty() ? "." : dir);
    fs::create_directories(out);
    return out;
}

int run_constant_strategy(const CommandOptions& opt, const ScenarioConfig& cfg, double u_value,
                          std::ostream& out, std::ostream& err) {
    const fs::path dir = prepare_out_dir(opt.out_dir);
    SolutionPath sol;
    try {
        sol = evaluate_constant_policy(cfg.model, cfg.x0, cfg.cost, cfg.horizon, u_value);
    } catch (const invalid_input& e) {
        err << "config error: " << e.what() << "\n";
        return exit_validation;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    }
    const fs::path traj = dir / "trajectory.csv";
    write_text_file(traj, render_trajectory_csv(sol));

    json report{{"command", "simulate"},
                {"scenario", scenario_json(cfg)},
                {"cost", cost_json(sol.cost)},
                {"files", {{"trajectory", traj.string()}}}};
    write_text_file(dir / "report.json", report.dump(2) + "\n");
    out << "J = " << format_number(sol.cost.j_total) << " (strategy " << to_string(cfg.strategy)
        << ", u = " << format_number(u_value) << ")\n";
    return exit_ok;
}

} // namespace

int cmd_simulate(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
    ScenarioConfig cfg;
    try {
        cfg = load_scenario(opt.config_path);
        if (!cfg.strategy_explicit) cfg.strategy = Strategy::none;
        cfg.validate();
    } catch (const invalid_input& e) {
        err << "config error: " << e.what() << "\n";
        return exit_validation;
    }
    double u_value = 0.0;
    switch (cfg.strategy) {
    case Strategy::none: u_value = 0.0; break;
    case Strategy::full: u_value = cfg.model.u_bar; break;
    case Strategy::constant: u_value = cfg.u_const; break;
    case Strategy::optimal:
        err << "config error: run.strategy: must be none, full or constant for simulate\n";
        return exit_validation;
    }
    return run_constant_strategy(opt, cfg, u_value, out, err);
}

int cmd_optimize(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
    ScenarioConfig cfg;
    try {
        cfg = load_scenario(opt.config_path);
        if (!cfg.strategy_explicit) cfg.strategy = Strategy::optimal;
        cfg.validate();
        if (cfg.strategy != Strategy::optimal)
            throw invalid_input("run.strategy: must be 'optimal' for the optimize command");
    } catch (const invalid_input& e) {
        err << "config error: " << e.what() << "\n";
        return exit_validation;
    }

    const fs::path dir = prepare_out_dir(opt.out_dir);
    SolutionPath sol;
    try {
        sol = solve(cfg.model, cfg.x0, cfg.cost, cfg.solver_config());
    } catch (const invalid_input& e) {
        err << "config error: " << e.what() << "\n";
        return exit_validation;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    }

    const fs::path traj = dir / "trajectory.csv";
    const fs::path costates = dir / "costates.csv";
    const fs::path cost_file = dir / "cost.json";
    write_text_file(traj, render_trajectory_csv(sol));
    write_text_file(costates, render_costates_csv(sol));
    write_text_file(cost_file, cost_json(sol.cost).dump(2) + "\n");

    json report{{"command", "optimize"},
                {"scenario", scenario_json(cfg)},
                {"cost", cost_json(sol.cost)},
                {"solver",
                 {{"iterations", sol.iterations},
                  {"converged", sol.converged},
                  {"final_rel_change", round_sig(sol.final_rel_change)}}},
                {"files",
                 {{"trajectory", traj.string()},
                  {"costates", costates.string()},
                  {"cost", cost_file.string()}}}};
    write_text_file(dir / "report.json", report.dump(2) + "\n");

    out << "J(u*) = " << format_number(sol.cost.j_total) << " after " << sol.iterations
        << " sweeps (" << (sol.converged ? "converged" : "NOT converged") << ")\n";
    return sol.converged ? exit_ok : exit_no_convergence;
}

int cmd_sweep(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
    ScenarioConfig cfg;
    try {
        cfg = load_scenario(opt.config_path);
        if (opt.sweep_param == "b") cfg.cost.social.family = CostFamily::quadratic;
        else if (opt.sweep_param == "k") cfg.cost.social.family = CostFamily::exponential;
        else if (opt.sweep_param == "a") cfg.cost.social.family = CostFamily::linear;
        else throw invalid_input("sweep parameter must be one of b, k, a");
        if (opt.sweep_values.empty()) throw invalid_input("sweep needs a nonempty value list");
        for (const double v : opt.sweep_values)
            if (!(v > 0.0)) throw invalid_input("sweep values must be > 0");
        cfg.validate();
    } catch (const invalid_input& e) {
        err << "config error: " << e.what() << "\n";
        return exit_validation;
    }

    const fs::path dir = prepare_out_dir(opt.out_dir);
    const SweepTable table =
        sweep_parameter(cfg.model, cfg.x0, cfg.cost, cfg.solver_config(), opt.sweep_values);

    std::ostringstream wide, tall;
    wide << "param,J_none,J_full,J_opt\n";
    tall << "param,strategy,J\n";
    for (const SweepRow& row : table.rows) {
        if (row.failed) {
            wide << format_number(row.param) << ",failed,failed,failed\n";
            continue;
        }
        wide << format_number(row.param) << ',' << format_number(row.j_none) << ','
             << format_number(row.j_full) << ',' << format_number(row.j_opt) << '\n';
        tall << format_number(row.param) << ",none," << format_number(row.j_none) << '\n';
        tall << format_number(row.param) << ",full," << format_number(row.j_full) << '\n';
        tall << format_number(row.param) << ",optimal," << format_number(row.j_opt) << '\n';
    }
    const fs::path wide_path = dir / "sweep.csv";
    const fs::path tall_path = dir / "sweep_long.csv";
    write_text_file(wide_path, wide.str());
    write_text_file(tall_path, tall.str());

    json rows = json::array();
    for (const SweepRow& row : table.rows) {
        json r{{"param", round_sig(row.param)}, {"failed", row.failed}};
        if (row.failed) r["error"] = row.error;
        else {
            r["j_none"] = round_sig(row.j_none);
            r["j_full"] = round_sig(row.j_full);
            r["j_opt"] = round_sig(row.j_opt);
            r["converged"] = row.converged;
        }
        rows.push_back(r);
    }
    json report{{"command", "sweep"},
                {"scenario", scenario_json(cfg)},
                {"param", opt.sweep_param},
                {"rows", rows},
                {"j_opt_nondecreasing", table.j_opt_nondecreasing},
                {"files", {{"sweep", wide_path.string()}, {"sweep_long", tall_path.string()}}}};
    write_text_file(dir / "report.json", report.dump(2) + "\n");

    const std::size_t ok_rows = table.rows.size() - table.n_failed;
    out << ok_rows << "/" << table.rows.size() << " sweep rows succeeded\n";
    return ok_rows > 0 ? exit_ok : exit_numerical;
}

int cmd_calibrate(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
    ObservedSeries series;
    try {
        if (opt.data_path.empty()) throw invalid_input("calibrate requires --data");
        series = read_series_csv(opt.data_path, opt.population);
        if (opt.calibrate_mode != "constant" && opt.calibrate_mode != "daily")
            throw invalid_input("calibrate mode must be 'constant' or 'daily'");
    } catch (const invalid_input& e) {
        err << "data error: " << e.what() << "\n";
        return exit_validation;
    }

    const fs::path dir = prepare_out_dir(opt.out_dir);
    json report{{"command", "calibrate"},
                {"data", opt.data_path},
                {"mode", opt.calibrate_mode},
                {"mu", opt.mu},
                {"eps", opt.eps}};
    try {
        if (opt.calibrate_mode == "constant") {
            const EstimationResult fit = estimate_constant_params(series, opt.mu, opt.eps);
            report["theta"] = {{"beta", round_sig(fit.theta[0])},
                               {"alpha", round_sig(fit.theta[1])},
                               {"gamma1", round_sig(fit.theta[2])},
                               {"gamma", round_sig(fit.theta[3])}};
            report["residual_sse"] = round_sig(fit.residual_sse);
            report["equation_residual"] = {round_sig(fit.equation_residual[0]),
                                           round_sig(fit.equation_residual[1]),
                                           round_sig(fit.equation_residual[2]),
                                           round_sig(fit.equation_residual[3])};
            report["rank_deficient"] = fit.rank_deficient;
            out << "theta = (" << format_number(fit.theta[0]) << ", "
                << format_number(fit.theta[1]) << ", " << format_number(fit.theta[2]) << ", "
                << format_number(fit.theta[3]) << "), sse = " << format_number(fit.residual_sse)
                << "\n";
        } else {
            const DailyRates daily = estimate_time_varying_sir(series, opt.mu);
            json days = json::array(), betas = json::array(), gammas = json::array();
            for (std::size_t n = 0; n < daily.day.size(); ++n) {
                days.push_back(round_sig(daily.day[n]));
                betas.push_back(daily.beta[n] ? json(round_sig(*daily.beta[n])) : json(nullptr));
                gammas.push_back(daily.gamma[n] ? json(round_sig(*daily.gamma[n])) : json(nullptr));
            }
            report["day"] = days;
            report["beta"] = betas;
            report["gamma"] = gammas;
            out << daily.day.size() << " daily estimates written\n";
        }
    } catch (const invalid_input& e) {
        err << "data error: " << e.what() << "\n";
        return exit_validation;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    }
    write_text_file(dir / "calibration.json", report.dump(2) + "\n");
    return exit_ok;
}

int cmd_expost(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
    ObservedSeries series;
    double window_begin = 0.0, window_end = 0.0;
    try {
        if (opt.data_path.empty()) throw invalid_input("expost requires --data");
        series = read_series_csv(opt.data_path, opt.population);
        if (opt.baseline_window.empty()) {
            window_begin = series.day.front();
            window_end = window_begin + 20.0; // default: first 21 days
        } else {
            const std::size_t colon = opt.baseline_window.find(':');
            if (colon == std::string::npos)
                throw invalid_input("baseline window must be start:end");
            window_begin = parse_double(opt.baseline_window.substr(0, colon), "baseline window");
            window_end = parse_double(opt.baseline_window.substr(colon + 1), "baseline window");
        }
    } catch (const invalid_input& e) {
        err << "data error: " << e.what() << "\n";
        return exit_validation;
    }

    const fs::path dir = prepare_out_dir(opt.out_dir);
    try {
        const double beta0 = estimate_baseline_beta(series, opt.mu, window_begin, window_end);
        const DailyRates daily = estimate_time_varying_sir(series, opt.mu);
        const ExpostSeries expost = expost_control(daily, beta0);

        std::ostringstream csv;
        csv << "date,beta_hat,u_hat,clamped_flag\n";
        for (std::size_t n = 0; n < expost.day.size(); ++n) {
            csv << format_number(expost.day[n]) << ',';
            if (expost.beta_hat[n]) {
                csv << format_number(*expost.beta_hat[n]) << ','
                    << format_number(*expost.u_hat[n]) << ',' << (expost.clamped[n] ? 1 : 0);
            } else {
                csv << "NA,NA,NA";
            }
            csv << '\n';
        }
        const fs::path csv_path = dir / "expost.csv";
        write_text_file(csv_path, csv.str());

        json report{{"command", "expost"},
                    {"data", opt.data_path},
                    {"mu", opt.mu},
                    {"baseline_window", {{"begin", window_begin}, {"end", window_end}}},
                    {"beta0", round_sig(beta0)},
                    {"files", {{"expost", csv_path.string()}}}};
        write_text_file(dir / "report.json", report.dump(2) + "\n");
        out << "beta0 = " << format_number(beta0) << ", " << expost.day.size()
            << " days written\n";
        return exit_ok;
    } catch (const invalid_input& e) {
        err << "data error: " << e.what() << "\n";
        return exit_validation;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    }
}

TrajectoryFile read_trajectory_csv(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw invalid_input("cannot open trajectory file: " + path);
    std::string line;
    if (!std::getline(file, line) || trim(line) != "t,S,V,I,R,u")
        throw invalid_input("trajectory file: unexpected header");
    TrajectoryFile data;
    while (std::getline(file, line)) {
        if (trim(line).empty()) continue;
        std::istringstream row(line);
        std::string field;
        std::vector<double> values;
        while (std::getline(row, field, ','))
            values.push_back(parse_double(trim(field), "trajectory value"));
        if (values.size() != 6) throw invalid_input("trajectory file: expected 6 columns");
        data.t.push_back(values[0]);
        data.states.push_back({values[1], values[2], values[3], values[4]});
        data.control.push_back(values[5]);
    }
    return data;
}

} // namespace svir
