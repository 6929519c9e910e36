#include "hdsurr/metrics.hpp"

#include "hdsurr/errors.hpp"

#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace hdsurr {

double err2(const Vector& predictions, const Vector& targets) {
    if (predictions.size() != targets.size() || targets.size() == 0)
        throw ArgumentError("err2: predictions and targets must have equal nonzero length");
    const double den = targets.squaredNorm();
    if (!(den > 0.0)) throw MetricError("err2: targets are all zero");
    return std::sqrt((predictions - targets).squaredNorm() / den);
}

namespace {

const char* law_name(const ControlLaw& law) {
    switch (law.index()) {
        case 0: return "sdre";
        case 1: return "surrogate";
        case 2: return "two-boxes";
        default: return "zero";
    }
}

Trajectory run_named(const SemilinearModel& model, const ControlLaw& law, const Vector& x0, double t_final,
                     double dt) {
    try {
        return integrate_closed_loop(model, law, x0, t_final, dt);
    } catch (const InstabilityError& e) {
        throw InstabilityError(std::string(law_name(law)) + " law: " + e.what(), e.time());
    }
}

double final_inf_norm(const Trajectory& traj) {
    return traj.states.bottomRows(1).cwiseAbs().maxCoeff();
}

[[noreturn]] void io_failure(const std::string& what, const std::string& path) {
    throw IoError(what + " " + path + ": " + std::strerror(errno));
}

void check_field(const std::string& s, const char* name) {
    if (s.find_first_of(",;=\n\r") != std::string::npos)
        throw ArgumentError(std::string("report: ") + name + " contains a reserved character: " + s);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double parse_number(const std::string& s) {
    if (s == "n/a") return std::numeric_limits<double>::quiet_NaN();
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw ArgumentError("report: bad number " + s);
    return v;
}

}  // namespace

CostComparison compare_costs(const SemilinearModel& model, const ControlLaw& law, const Vector& x0, double t_final,
                             double dt) {
    const Trajectory ref = run_named(model, SdreLaw{}, x0, t_final, dt);
    const Trajectory sur = run_named(model, law, x0, t_final, dt);
    CostComparison c;
    c.cost_sdre = trajectory_cost(ref);
    c.cost_surrogate = trajectory_cost(sur);
    c.err_cost = std::abs(c.cost_sdre - c.cost_surrogate);
    c.final_norm_sdre = final_inf_norm(ref);
    c.final_norm_surrogate = final_inf_norm(sur);
    return c;
}

double err_cost(const SemilinearModel& model, const ControlLaw& law, const Vector& x0, double t_final, double dt) {
    return compare_costs(model, law, x0, t_final, dt).err_cost;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "n/a";
    std::ostringstream os;
    os.precision(16);
    os << std::scientific << v;
    return os.str();
}

void write_report(std::ostream& out, const std::vector<ExperimentReport>& rows) {
    out << report_header << '\n';
    for (const auto& r : rows) {
        check_field(r.method, "method");
        check_field(r.problem, "problem");
        out << r.method << ',' << r.problem << ',' << r.dim << ',' << format_number(r.err_train_2) << ','
            << format_number(r.err_test_2) << ',' << r.dofs << ',' << r.n_train << ','
            << format_number(r.cpu_train_s) << ',' << format_number(r.cpu_test_s) << ',';
        bool first = true;
        for (const auto& [k, v] : r.extra) {
            check_field(k, "extra key");
            check_field(v, "extra value");
            out << (first ? "" : ";") << k << '=' << v;
            first = false;
        }
        out << '\n';
    }
}

void write_report(const std::string& path, const std::vector<ExperimentReport>& rows) {
    std::ofstream out(path);
    if (!out) io_failure("cannot open", path);
    write_report(out, rows);
    if (!out.flush()) io_failure("cannot write", path);
}

void append_report(const std::string& path, const std::vector<ExperimentReport>& rows) {
    bool fresh = true;
    {
        std::ifstream probe(path);
        fresh = !probe || probe.peek() == std::ifstream::traits_type::eof();
    }
    std::ostringstream body;
    write_report(body, rows);
    std::string text = body.str();
    if (!fresh) text.erase(0, text.find('\n') + 1);
    std::ofstream out(path, std::ios::app);
    if (!out) io_failure("cannot open", path);
    out << text;
    if (!out.flush()) io_failure("cannot write", path);
}

std::vector<ExperimentReport> read_report(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != report_header) throw ArgumentError("report: missing or wrong header");
    std::vector<ExperimentReport> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 10) throw ArgumentError("report: expected 10 fields in: " + line);
        ExperimentReport r;
        r.method = f[0];
        r.problem = f[1];
        r.dim = std::stoi(f[2]);
        r.err_train_2 = parse_number(f[3]);
        r.err_test_2 = parse_number(f[4]);
        r.dofs = std::stol(f[5]);
        r.n_train = std::stol(f[6]);
        r.cpu_train_s = parse_number(f[7]);
        r.cpu_test_s = parse_number(f[8]);
        if (!f[9].empty()) {
            for (const auto& kv : split(f[9], ';')) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) throw ArgumentError("report: bad extra entry " + kv);
                r.extra[kv.substr(0, eq)] = kv.substr(eq + 1);
            }
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<ExperimentReport> read_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) io_failure("cannot open", path);
    return read_report(in);
}

void dump_trajectory(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) io_failure("cannot open", path);
    write_trajectory_csv(out, traj);
    if (!out.flush()) io_failure("cannot write", path);
}

}  // namespace hdsurr
