#include "hdsurr/sdre_control.hpp"

#include "hdsurr/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <ostream>
#include <sstream>

namespace hdsurr {

namespace {

std::string describe(const Vector& y) {
    std::ostringstream os;
    os.precision(6);
    os << "[";
    for (Eigen::Index i = 0; i < y.size(); ++i) os << (i ? ", " : "") << y[i];
    os << "]";
    return os.str();
}

template <class E>
[[noreturn]] void rethrow_with_state(const E& e, const Vector& y) {
    throw E(std::string(e.what()) + " at state " + describe(y));
}

void check_box(const std::vector<Interval>& box, const Vector& y) {
    if (box.empty()) return;
    if (static_cast<Eigen::Index>(box.size()) != y.size()) throw ArgumentError("feedback: box dimension mismatch");
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (!(y[i] >= box[i].lo && y[i] <= box[i].hi))
            throw OutOfBoxError("feedback: state left the surrogate's training box at " + describe(y),
                                std::vector<double>(y.data(), y.data() + y.size()));
    }
}

Vector lqr_control(const SemilinearModel& model, const Matrix& P, const Vector& y) {
    return -model.R.llt().solve(model.B(y).transpose() * (P * y));
}

}  // namespace

double SemilinearModel::running_cost(const Vector& y, const Vector& u) const {
    return y.dot(Q(y) * y) + u.dot(R * u);
}

void SemilinearModel::check_at(const Vector& y) const {
    if (y.size() != d) throw ArgumentError("model: state dimension mismatch");
    const Matrix a = A(y), b = B(y), q = Q(y);
    if (a.rows() != d || a.cols() != d || b.rows() != d || b.cols() != m || q.rows() != d || q.cols() != d ||
        R.rows() != m || R.cols() != m)
        throw ArgumentError("model: matrix shapes are inconsistent");
    const double qs = std::max(1.0, q.norm());
    if ((q - q.transpose()).norm() > 1e-12 * qs) throw ArgumentError("model: Q(y) is not symmetric");
    if (Eigen::SelfAdjointEigenSolver<Matrix>(q).eigenvalues().minCoeff() < -1e-12 * qs)
        throw ArgumentError("model: Q(y) is not positive semidefinite");
    if ((R - R.transpose()).norm() > 1e-12 * std::max(1.0, R.norm()) || R.llt().info() != Eigen::Success)
        throw ArgumentError("model: R is not symmetric positive definite");
}

SemilinearModel linear_model(Matrix A, Matrix B, Matrix Q, Matrix R) {
    SemilinearModel m;
    m.d = static_cast<int>(A.rows());
    m.m = static_cast<int>(B.cols());
    m.A = [A = std::move(A)](const Vector&) { return A; };
    m.B = [B = std::move(B)](const Vector&) { return B; };
    m.Q = [Q = std::move(Q)](const Vector&) { return Q; };
    m.R = std::move(R);
    return m;
}

CareSolution sdre_riccati(const SemilinearModel& model, const Vector& y, double tolerance) {
    if (y.size() != model.d) throw ArgumentError("sdre: state dimension mismatch");
    try {
        return solve_care(model.A(y), model.B(y), model.Q(y), model.R, tolerance);
    } catch (const StabilizabilityError& e) {
        rethrow_with_state(e, y);
    } catch (const ConditioningError& e) {
        rethrow_with_state(e, y);
    }
}

Vector sdre_feedback(const SemilinearModel& model, const Vector& y, double tolerance) {
    if (y.size() != model.d) throw ArgumentError("sdre: state dimension mismatch");
    if (y.isZero(0.0)) return Vector::Zero(model.m);
    return lqr_control(model, sdre_riccati(model, y, tolerance).P, y);
}

Vector surrogate_feedback(const SemilinearModel& model, const Surrogate& surrogate, const Vector& y,
                          const std::vector<Interval>& box) {
    if (y.size() != model.d || surrogate.dim() != model.d) throw ArgumentError("feedback: dimension mismatch");
    check_box(box, y);
    Vector grad;
    try {
        grad = surrogate.gradient(y);
    } catch (const DomainError& e) {
        throw OutOfBoxError(std::string(e.what()) + " at state " + describe(y),
                            std::vector<double>(y.data(), y.data() + y.size()));
    }
    return -0.5 * model.R.llt().solve(model.B(y).transpose() * grad);
}

Vector two_boxes_feedback(const SemilinearModel& model, const TwoBoxesLaw& law, const Vector& y) {
    if (!(law.radius > 0.0)) throw ArgumentError("two-boxes: radius must be positive");
    if (y.norm() <= law.radius) return lqr_control(model, law.P0, y);
    if (!law.surrogate) throw ArgumentError("two-boxes: no surrogate");
    return surrogate_feedback(model, *law.surrogate, y, law.box);
}

double trapezoid(const std::vector<double>& times, const std::vector<double>& values) {
    if (times.size() != values.size()) throw ArgumentError("trapezoid: size mismatch");
    double s = 0.0;
    for (std::size_t k = 1; k < times.size(); ++k) s += 0.5 * (times[k] - times[k - 1]) * (values[k] + values[k - 1]);
    return s;
}

double trajectory_cost(const Trajectory& traj) {
    if (traj.times.empty()) throw ArgumentError("trajectory_cost: empty trajectory");
    return traj.cumulative.back();
}

Trajectory integrate_closed_loop(const SemilinearModel& model, const ControlLaw& law, const Vector& x0,
                                 double t_final, double dt, const IntegrationOptions& options) {
    if (!(dt > 0.0)) throw ArgumentError("integrate: dt must be positive");
    if (!(t_final >= 0.0)) throw ArgumentError("integrate: t_final must be nonnegative");
    if (x0.size() != model.d) throw ArgumentError("integrate: initial state dimension mismatch");

    const long full = static_cast<long>(std::floor(t_final / dt + 1e-9));
    const double rest = t_final - static_cast<double>(full) * dt;
    const long steps = full + (rest > 1e-9 * dt ? 1 : 0);

    // Per-trajectory controller state (cached Riccati solution for strided SDRE).
    Matrix cached_p;
    long since_solve = 0;
    auto control = [&](const Vector& y) -> Vector {
        return std::visit(
            [&](const auto& l) -> Vector {
                using L = std::decay_t<decltype(l)>;
                if constexpr (std::is_same_v<L, SdreLaw>) {
                    if (l.stride < 1) throw ArgumentError("sdre law: stride must be >= 1");
                    if (y.isZero(0.0)) return Vector::Zero(model.m);
                    if (cached_p.size() == 0 || since_solve >= l.stride) {
                        cached_p = sdre_riccati(model, y, l.tolerance).P;
                        since_solve = 0;
                    }
                    ++since_solve;
                    return lqr_control(model, cached_p, y);
                } else if constexpr (std::is_same_v<L, SurrogateLaw>) {
                    if (!l.surrogate) throw ArgumentError("surrogate law: no surrogate");
                    return surrogate_feedback(model, *l.surrogate, y, l.box);
                } else if constexpr (std::is_same_v<L, TwoBoxesLaw>) {
                    return two_boxes_feedback(model, l, y);
                } else {
                    return Vector::Zero(model.m);
                }
            },
            law);
    };

    Trajectory traj;
    traj.states.resize(steps + 1, model.d);
    traj.controls.resize(steps + 1, model.m);
    Vector y = x0;
    double t = 0.0;
    for (long k = 0; k <= steps; ++k) {
        if (!y.allFinite() || y.norm() > options.blowup) {
            std::ostringstream os;
            os << "closed loop blew up at t = " << t;
            throw InstabilityError(os.str(), t);
        }
        const Vector u = control(y);
        traj.times.push_back(t);
        traj.states.row(k) = y.transpose();
        traj.controls.row(k) = u.transpose();
        traj.running.push_back(model.running_cost(y, u));
        traj.cumulative.push_back(
            k == 0 ? 0.0 : traj.cumulative.back() + 0.5 * (t - traj.times[k - 1]) * (traj.running[k] + traj.running[k - 1]));
        if (k == steps) break;

        const double h = k < full ? dt : rest;
        auto f = [&](const Vector& z) -> Vector { return model.A(z) * z + model.B(z) * u; };
        const Vector k1 = f(y);
        const Vector k2 = f(y + 0.5 * h * k1);
        const Vector k3 = f(y + 0.5 * h * k2);
        const Vector k4 = f(y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = k + 1 <= full ? static_cast<double>(k + 1) * dt : t_final;
    }
    return traj;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    const auto d = traj.states.cols(), m = traj.controls.cols();
    out << "t";
    for (Eigen::Index i = 0; i < d; ++i) out << ",y_" << i + 1;
    for (Eigen::Index i = 0; i < m; ++i) out << ",u_" << i + 1;
    out << ",running_cost\n";
    out.precision(17);
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        out << traj.times[k];
        for (Eigen::Index i = 0; i < d; ++i) out << ',' << traj.states(k, i);
        for (Eigen::Index i = 0; i < m; ++i) out << ',' << traj.controls(k, i);
        out << ',' << traj.running[k] << '\n';
    }
}

}  // namespace hdsurr
