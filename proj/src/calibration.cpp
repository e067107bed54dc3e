#include "svir/calibration.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "svir/errors.hpp"

namespace svir {

void ObservedSeries::validate() const {
    const std::size_t n = day.size();
    if (s.size() != n || v.size() != n || i.size() != n || r.size() != n)
        throw invalid_input("series: columns must have equal length");
    if (n < 2) throw invalid_input("series: need at least 2 days");
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t row = k + 2; // header is row 1
        if (k > 0 && !(day[k] > day[k - 1])) {
            std::ostringstream msg;
            msg << "series: dates not strictly increasing at row " << row;
            throw invalid_input(msg.str());
        }
        for (const double frac : {s[k], v[k], i[k], r[k]}) {
            if (!std::isfinite(frac) || frac < 0.0 || frac > 1.0) {
                std::ostringstream msg;
                msg << "series: fraction outside [0, 1] at row " << row;
                throw invalid_input(msg.str());
            }
        }
        const double total = s[k] + v[k] + i[k] + r[k];
        if (total < 0.95 || total > 1.05) {
            std::ostringstream msg;
            msg << "series: compartment sum " << total << " outside [0.95, 1.05] at row " << row;
            throw invalid_input(msg.str());
        }
    }
}

std::vector<DayBlock> build_regression(const ObservedSeries& series, double mu, double eps) {
    series.validate();
    std::vector<DayBlock> blocks;
    blocks.reserve(series.size() - 1);
    for (std::size_t n = 0; n + 1 < series.size(); ++n) {
        if (series.day[n + 1] - series.day[n] != 1.0) continue; // scheme needs dt = 1 day
        const double sn = series.s[n], vn = series.v[n], in = series.i[n], rn = series.r[n];
        DayBlock b;
        b.delta[0] = series.s[n + 1] - sn * (1.0 - mu) - mu; // birth inflow removed
        b.delta[1] = series.v[n + 1] - vn * (1.0 - mu);
        b.delta[2] = series.i[n + 1] - in * (1.0 - mu);
        b.delta[3] = series.r[n + 1] - rn * (1.0 - mu);
        // theta = (beta, alpha, gamma1, gamma)
        b.a[0] = {-sn * in, -sn, 0.0, 0.0};
        b.a[1] = {-eps * vn * in, sn, -vn, 0.0};
        b.a[2] = {(sn + eps * vn) * in, 0.0, 0.0, -in};
        b.a[3] = {0.0, 0.0, vn, in};
        blocks.push_back(b);
    }
    if (blocks.empty()) throw invalid_input("series: no consecutive-day pairs to regress on");
    return blocks;
}

namespace {

struct StackedSystem {
    Eigen::MatrixXd a;
    Eigen::VectorXd d;
};

StackedSystem stack(const std::vector<DayBlock>& blocks) {
    StackedSystem sys;
    sys.a.resize(static_cast<Eigen::Index>(4 * blocks.size()), 4);
    sys.d.resize(static_cast<Eigen::Index>(4 * blocks.size()));
    for (std::size_t n = 0; n < blocks.size(); ++n) {
        for (int row = 0; row < 4; ++row) {
            const Eigen::Index k = static_cast<Eigen::Index>(4 * n + row);
            for (int col = 0; col < 4; ++col) sys.a(k, col) = blocks[n].a[row][col];
            sys.d(k) = blocks[n].delta[row];
        }
    }
    return sys;
}

// Minimal-norm least squares on the selected columns.
Eigen::VectorXd solve_subset(const Eigen::MatrixXd& a, const Eigen::VectorXd& d,
                             const std::vector<int>& cols) {
    Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = a.col(cols[j]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-12);
    return svd.solve(d);
}

} // namespace

EstimationResult estimate_constant_params(const ObservedSeries& series, double mu, double eps) {
    return estimate_constant_params(series, mu, eps, {true, true, true, true});
}

EstimationResult estimate_constant_params(const ObservedSeries& series, double mu, double eps,
                                          const std::array<bool, 4>& free_mask) {
    const std::vector<DayBlock> blocks = build_regression(series, mu, eps);
    if (4 * blocks.size() < 4) throw invalid_input("series: stacked system needs >= 4 rows");
    const StackedSystem sys = stack(blocks);

    EstimationResult result;

    // Rank analysis of the stacked matrix (restricted to free columns).
    std::vector<int> free_cols;
    for (int j = 0; j < 4; ++j)
        if (free_mask[static_cast<std::size_t>(j)]) free_cols.push_back(j);
    if (free_cols.empty()) throw invalid_input("estimate_constant_params: no free parameters");
    {
        Eigen::MatrixXd sub(sys.a.rows(), static_cast<Eigen::Index>(free_cols.size()));
        for (std::size_t j = 0; j < free_cols.size(); ++j)
            sub.col(static_cast<Eigen::Index>(j)) = sys.a.col(free_cols[j]);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub, Eigen::ComputeThinV);
        const double sigma_max = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
        const double thresh = std::max(sigma_max, 1.0) * 1e-12;
        for (Eigen::Index j = 0; j < svd.singularValues().size(); ++j) {
            if (svd.singularValues()(j) <= thresh) {
                result.rank_deficient = true;
                std::array<double, 4> dir{0.0, 0.0, 0.0, 0.0};
                for (std::size_t c = 0; c < free_cols.size(); ++c)
                    dir[static_cast<std::size_t>(free_cols[c])] =
                        svd.matrixV()(static_cast<Eigen::Index>(c), j);
                result.degenerate_directions.push_back(dir);
            }
        }
    }

    const Eigen::MatrixXd gram = sys.a.transpose() * sys.a;
    const Eigen::VectorXd atd = sys.a.transpose() * sys.d;
    const double kkt_tol = 1e-8 * std::max(1.0, atd.cwiseAbs().maxCoeff());

    // Active-set enumeration over the free coordinates: with four parameters
    // the 2^|free| passive sets can be checked exhaustively against the KKT
    // conditions of min |A theta - d|^2 s.t. theta >= 0.
    Eigen::Vector4d best = Eigen::Vector4d::Zero();
    double best_sse = std::numeric_limits<double>::infinity();
    double best_norm = std::numeric_limits<double>::infinity();
    bool have_kkt = false;
    const std::size_t n_free = free_cols.size();
    for (std::size_t mask = 0; mask < (1u << n_free); ++mask) {
        std::vector<int> passive;
        for (std::size_t j = 0; j < n_free; ++j)
            if (mask & (1u << j)) passive.push_back(free_cols[j]);

        Eigen::Vector4d theta = Eigen::Vector4d::Zero();
        if (!passive.empty()) {
            const Eigen::VectorXd sol = solve_subset(sys.a, sys.d, passive);
            bool feasible = true;
            for (Eigen::Index j = 0; j < sol.size(); ++j)
                if (sol(j) < -1e-12) feasible = false;
            if (!feasible) continue;
            for (std::size_t j = 0; j < passive.size(); ++j)
                theta(passive[j]) = std::max(0.0, sol(static_cast<Eigen::Index>(j)));
        }

        const Eigen::Vector4d grad = 2.0 * (gram * theta - atd);
        bool kkt = true;
        for (const int j : free_cols) {
            if (theta(j) > 0.0 && std::abs(grad(j)) > kkt_tol) kkt = false;
            if (theta(j) == 0.0 && grad(j) < -kkt_tol) kkt = false;
        }
        const double sse = (sys.d - sys.a * theta).squaredNorm();
        const double norm = theta.norm();
        const bool better =
            (kkt && !have_kkt) ||
            (kkt == have_kkt &&
             (sse < best_sse - 1e-14 * std::max(1.0, best_sse) ||
              (std::abs(sse - best_sse) <= 1e-14 * std::max(1.0, best_sse) && norm < best_norm)));
        if (better) {
            best = theta;
            best_sse = sse;
            best_norm = norm;
            have_kkt = have_kkt || kkt;
        }
    }

    for (int j = 0; j < 4; ++j) result.theta[static_cast<std::size_t>(j)] = best(j);
    result.residual_sse = best_sse;
    const Eigen::Vector4d grad = 2.0 * (gram * best - atd);
    for (int j = 0; j < 4; ++j) result.gradient[static_cast<std::size_t>(j)] = grad(j);
    const Eigen::VectorXd res = sys.d - sys.a * best;
    for (int row = 0; row < 4; ++row) {
        double acc = 0.0;
        for (std::size_t n = 0; n < blocks.size(); ++n) {
            const double e = res(static_cast<Eigen::Index>(4 * n + static_cast<std::size_t>(row)));
            acc += e * e;
        }
        result.equation_residual[static_cast<std::size_t>(row)] = std::sqrt(acc);
    }
    return result;
}

DailyRates estimate_time_varying_sir(const ObservedSeries& series, double mu) {
    series.validate();
    DailyRates rates;
    for (std::size_t n = 0; n + 1 < series.size(); ++n) {
        if (series.day[n + 1] - series.day[n] != 1.0) continue;
        rates.day.push_back(series.day[n]);
        const double sn = series.s[n], in = series.i[n];
        const double d1 = series.s[n + 1] - sn * (1.0 - mu) - mu;
        const double d4 = series.r[n + 1] - series.r[n] * (1.0 - mu);
        if (sn * in > tol_denominator)
            rates.beta.push_back(-d1 / (sn * in));
        else
            rates.beta.push_back(std::nullopt);
        if (in > tol_denominator)
            rates.gamma.push_back(d4 / in);
        else
            rates.gamma.push_back(std::nullopt);
    }
    return rates;
}

ExpostSeries expost_control(const DailyRates& daily, double beta0) {
    if (!(beta0 > 0.0)) throw invalid_input("expost_control: beta0 must be > 0");
    ExpostSeries out;
    out.beta0 = beta0;
    out.day = daily.day;
    out.beta_hat = daily.beta;
    out.u_hat.resize(daily.beta.size());
    out.clamped.assign(daily.beta.size(), false);
    for (std::size_t n = 0; n < daily.beta.size(); ++n) {
        if (!daily.beta[n]) continue;
        const double raw = 1.0 - *daily.beta[n] / beta0;
        out.clamped[n] = raw < 0.0 || raw > 1.0;
        out.u_hat[n] = std::clamp(raw, 0.0, 1.0);
    }
    return out;
}

double estimate_baseline_beta(const ObservedSeries& series, double mu, double day_begin,
                              double day_end) {
    if (!(day_end > day_begin)) throw invalid_input("baseline window: end must be > start");
    ObservedSeries window;
    window.population = series.population;
    for (std::size_t k = 0; k < series.size(); ++k) {
        if (series.day[k] < day_begin || series.day[k] > day_end) continue;
        window.day.push_back(series.day[k]);
        window.s.push_back(series.s[k]);
        window.v.push_back(series.v[k]);
        window.i.push_back(series.i[k]);
        window.r.push_back(series.r[k]);
    }
    if (window.size() < 2) throw invalid_input("baseline window outside series");
    // SIR reduction: alpha = gamma1 = 0, so eps never enters (V plays no role).
    const EstimationResult fit =
        estimate_constant_params(window, mu, 0.0, {true, false, false, true});
    return fit.theta[0];
}

namespace {

// Howard Hinnant's days-from-civil; epoch 1970-01-01.
long days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

double parse_date_field(const std::string& field, std::size_t row) {
    std::ostringstream bad;
    bad << "data row " << row << ": unparsable date '" << field << "'";
    if (field.size() == 10 && field[4] == '-' && field[7] == '-') {
        int y;
        unsigned m, d;
        char dash1, dash2;
        std::istringstream in(field);
        if (in >> y >> dash1 >> m >> dash2 >> d && dash1 == '-' && dash2 == '-' && m >= 1 &&
            m <= 12 && d >= 1 && d <= 31)
            return static_cast<double>(days_from_civil(y, m, d));
        throw invalid_input(bad.str());
    }
    char* end = nullptr;
    const double value = std::strtod(field.c_str(), &end);
    if (end == field.c_str() || *end != '\0' || !std::isfinite(value))
        throw invalid_input(bad.str());
    return value;
}

double parse_number_field(const std::string& field, std::size_t row, const char* column) {
    char* end = nullptr;
    const double value = std::strtod(field.c_str(), &end);
    if (end == field.c_str() || *end != '\0' || !std::isfinite(value)) {
        std::ostringstream msg;
        msg << "data row " << row << ": unparsable " << column << " value '" << field << "'";
        throw invalid_input(msg.str());
    }
    return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' '))
            field.pop_back();
        std::size_t start = 0;
        while (start < field.size() && field[start] == ' ') ++start;
        fields.push_back(field.substr(start));
    }
    return fields;
}

} // namespace

ObservedSeries read_series_csv(const std::string& path, std::optional<double> population) {
    std::ifstream file(path);
    if (!file) throw invalid_input("cannot open data file: " + path);
    std::string line;
    if (!std::getline(file, line)) throw invalid_input("data file is empty: " + path);
    const std::vector<std::string> header = split_csv_line(line);
    bool counts = false;
    if (header == std::vector<std::string>{"date", "S", "V", "I", "R"}) {
        counts = false;
    } else if (header ==
               std::vector<std::string>{"date", "S_count", "V_count", "I_count", "R_count"}) {
        counts = true;
        if (!population)
            throw invalid_input("count-valued data requires --population");
    } else {
        throw invalid_input("data row 1: header must be date,S,V,I,R or "
                            "date,S_count,V_count,I_count,R_count");
    }
    const double scale = counts ? *population : 1.0;
    if (!(scale > 0.0)) throw invalid_input("population must be > 0");

    ObservedSeries series;
    series.population = scale;
    std::size_t row = 1;
    while (std::getline(file, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != 5) {
            std::ostringstream msg;
            msg << "data row " << row << ": expected 5 fields, got " << fields.size();
            throw invalid_input(msg.str());
        }
        series.day.push_back(parse_date_field(fields[0], row));
        series.s.push_back(parse_number_field(fields[1], row, "S") / scale);
        series.v.push_back(parse_number_field(fields[2], row, "V") / scale);
        series.i.push_back(parse_number_field(fields[3], row, "I") / scale);
        series.r.push_back(parse_number_field(fields[4], row, "R") / scale);
    }
    series.validate();
    return series;
}

std::vector<SvirState> simulate_discrete_svir(const std::vector<double>& beta_per_day,
                                              double alpha, double gamma1, double gamma, double mu,
                                              double eps, const SvirState& x0,
                                              std::size_t n_days) {
    if (beta_per_day.size() < n_days)
        throw invalid_input("simulate_discrete_svir: need one beta per day");
    std::vector<SvirState> states;
    states.reserve(n_days + 1);
    states.push_back(x0);
    for (std::size_t n = 0; n < n_days; ++n) {
        const SvirState& x = states.back();
        const double beta = beta_per_day[n];
        SvirState next;
        next.s = x.s - beta * x.s * x.i - alpha * x.s + mu - mu * x.s;
        next.v = x.v + alpha * x.s - eps * beta * x.v * x.i - gamma1 * x.v - mu * x.v;
        next.i = x.i + beta * x.s * x.i + eps * beta * x.v * x.i - gamma * x.i - mu * x.i;
        next.r = x.r + gamma1 * x.v + gamma * x.i - mu * x.r;
        states.push_back(next);
    }
    return states;
}

} // namespace svir
