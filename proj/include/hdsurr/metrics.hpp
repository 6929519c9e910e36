#pragma once

#include "hdsurr/common.hpp"
#include "hdsurr/sdre_control.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace hdsurr {

/// √(Σ(pⱼ − tⱼ)² / Σtⱼ²). Throws MetricError for all-zero targets.
double err2(const Vector& predictions, const Vector& targets);

struct CostComparison {
    double cost_sdre = 0.0;
    double cost_surrogate = 0.0;
    double err_cost = 0.0;
    double final_norm_sdre = 0.0;       ///< ‖y(t_final)‖∞
    double final_norm_surrogate = 0.0;
};

/// Integrates the SDRE loop and `law` from x0; err_cost = |J_SDRE − J_law|.
/// An unstable loop raises InstabilityError naming the law.
CostComparison compare_costs(const SemilinearModel& model, const ControlLaw& law, const Vector& x0, double t_final,
                             double dt);
double err_cost(const SemilinearModel& model, const ControlLaw& law, const Vector& x0, double t_final, double dt);

/// One table cell. NaN fields are written as "n/a".
struct ExperimentReport {
    std::string method;
    std::string problem;
    int dim = 0;
    double err_train_2 = 0.0;
    double err_test_2 = 0.0;
    long dofs = 0;
    long n_train = 0;
    double cpu_train_s = 0.0;
    double cpu_test_s = 0.0;
    std::map<std::string, std::string> extra;  ///< written as k=v;k=v

    bool operator==(const ExperimentReport&) const = default;
};

inline constexpr const char* report_header =
    "method,problem,dim,err_train_2,err_test_2,dofs,n_train,cpu_train_s,cpu_test_s,extra";

void write_report(std::ostream& out, const std::vector<ExperimentReport>& rows);
void write_report(const std::string& path, const std::vector<ExperimentReport>& rows);
/// Appends rows, writing the header only when the file is new or empty.
void append_report(const std::string& path, const std::vector<ExperimentReport>& rows);
std::vector<ExperimentReport> read_report(std::istream& in);
std::vector<ExperimentReport> read_report(const std::string& path);

/// Scientific notation, 17 significant digits; NaN as "n/a".
std::string format_number(double v);

void dump_trajectory(const Trajectory& traj, const std::string& path);

}  // namespace hdsurr
