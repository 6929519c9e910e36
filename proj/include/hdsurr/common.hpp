#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hdsurr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Sample points (one row per sample), target values and optional target gradients.
struct Dataset {
    Matrix points;                   ///< N × d
    Vector values;                   ///< N
    std::optional<Matrix> gradients; ///< N × d when present

    Eigen::Index size() const { return points.rows(); }
    Eigen::Index dim() const { return points.cols(); }
    bool has_gradients() const { return gradients.has_value(); }
};

/// Anything exposing a value and a gradient at a point.
class Surrogate {
public:
    virtual ~Surrogate() = default;
    virtual int dim() const = 0;
    virtual double value(const Vector& x) const = 0;
    virtual Vector gradient(const Vector& x) const = 0;
};

/// Summary of a fit, common to all fitters.
struct FitStats {
    double err_train_2 = 0.0;
    long dofs = 0;
    long n_train_samples = 0;   ///< distinct training points
    long n_queries_total = 0;   ///< oracle calls including repeats (cross only)
    double cpu_train_s = 0.0;
    int sweeps = 0;
    std::vector<int> final_ranks;
    bool converged = false;
    bool regularized = false;
    std::vector<double> history;  ///< per-sweep stopping measure / per-epoch loss
};

/// ‖pred − ref‖₂ / ‖ref‖₂ (absolute norm when ref vanishes).
double relative_l2(const Vector& pred, const Vector& ref);

/// Monotonic wall-clock stopwatch.
class Stopwatch {
public:
    Stopwatch();
    double seconds() const;

private:
    std::int64_t start_ns_;
};

}  // namespace hdsurr
