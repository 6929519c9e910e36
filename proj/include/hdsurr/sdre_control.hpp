#pragma once

#include "hdsurr/care.hpp"
#include "hdsurr/common.hpp"
#include "hdsurr/poly_basis.hpp"

#include <functional>
#include <iosfwd>
#include <variant>
#include <vector>

namespace hdsurr {

/// ẏ = A(y)y + B(y)u with running cost yᵀQ(y)y + uᵀRu.
struct SemilinearModel {
    using MatrixFn = std::function<Matrix(const Vector&)>;

    int d = 0;
    int m = 0;
    MatrixFn A, B, Q;
    Matrix R;

    Vector drift(const Vector& y) const { return A(y) * y; }
    double running_cost(const Vector& y, const Vector& u) const;
    /// Throws ArgumentError unless shapes fit, Q(y) is symmetric PSD and R symmetric PD.
    void check_at(const Vector& y) const;
};

/// Constant A, B, Q, R.
SemilinearModel linear_model(Matrix A, Matrix B, Matrix Q, Matrix R);

/// u = −R⁻¹B(y)ᵀP(y)y with P from the CARE frozen at y.
Vector sdre_feedback(const SemilinearModel& model, const Vector& y, double tolerance = 1e-10);
/// P(y) of the frozen CARE; solver errors are rethrown with the state in the message.
CareSolution sdre_riccati(const SemilinearModel& model, const Vector& y, double tolerance = 1e-10);

/// u = −½R⁻¹B(y)ᵀ∇Ṽ(y). With a nonempty box, states outside it raise OutOfBoxError.
Vector surrogate_feedback(const SemilinearModel& model, const Surrogate& surrogate, const Vector& y,
                          const std::vector<Interval>& box = {});

struct SdreLaw {
    double tolerance = 1e-10;
    int stride = 1;  ///< re-solve P every `stride` steps
};

struct SurrogateLaw {
    const Surrogate* surrogate = nullptr;
    std::vector<Interval> box;  ///< training box; empty = unchecked
};

/// LQR with P₀ for ‖y‖ ≤ radius, surrogate gradient outside.
struct TwoBoxesLaw {
    const Surrogate* surrogate = nullptr;
    Matrix P0;
    double radius = 0.2;
    std::vector<Interval> box;
};

/// u ≡ 0.
struct ZeroLaw {};

using ControlLaw = std::variant<SdreLaw, SurrogateLaw, TwoBoxesLaw, ZeroLaw>;

Vector two_boxes_feedback(const SemilinearModel& model, const TwoBoxesLaw& law, const Vector& y);

struct Trajectory {
    std::vector<double> times;
    Matrix states;              ///< one row per time
    Matrix controls;            ///< control applied from each time (last row: law at the final state)
    std::vector<double> running;     ///< ℓ(yₖ, uₖ)
    std::vector<double> cumulative;  ///< trapezoidal ∫₀^tₖ ℓ
};

struct IntegrationOptions {
    double blowup = 1e6;
};

/// RK4 with the control held over each step (evaluated at the step's start
/// state); a final partial step lands exactly on t_final. Throws
/// InstabilityError when ‖y‖ exceeds the blow-up guard or stops being finite.
Trajectory integrate_closed_loop(const SemilinearModel& model, const ControlLaw& law, const Vector& x0,
                                 double t_final, double dt, const IntegrationOptions& options = {});

/// Trapezoidal ∫ of samples over strictly increasing times.
double trapezoid(const std::vector<double>& times, const std::vector<double>& values);
double trajectory_cost(const Trajectory& traj);

/// CSV with columns t, y_1…y_d, u_1…u_m, running_cost.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

}  // namespace hdsurr
