#include "hdsurr/care.hpp"

#include "hdsurr/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cmath>
#include <lapacke.h>
#include <limits>

namespace hdsurr {

namespace {

lapack_logical left_half_plane(const double* re, const double* /*im*/) { return *re < 0.0; }

struct Schur {
    Matrix T, Z;
    int selected = 0;
};

Schur real_schur(const Matrix& m, bool order_stable) {
    const lapack_int n = static_cast<lapack_int>(m.rows());
    Schur s;
    s.T = m;
    s.Z.resize(n, n);
    Vector wr(n), wi(n);
    lapack_int sdim = 0;
    const lapack_int info =
        LAPACKE_dgees(LAPACK_COL_MAJOR, 'V', order_stable ? 'S' : 'N', order_stable ? left_half_plane : nullptr, n,
                      s.T.data(), n, &sdim, wr.data(), wi.data(), s.Z.data(), n);
    // info = n+2 means rounding changed the ordering; the caller checks sdim.
    if (info < 0 || (info > 0 && info <= n)) throw ConditioningError("real Schur decomposition did not converge");
    s.selected = static_cast<int>(sdim);
    return s;
}

void check_shapes(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R) {
    const auto d = A.rows();
    if (A.cols() != d || B.rows() != d || Q.rows() != d || Q.cols() != d || R.rows() != B.cols() ||
        R.cols() != B.cols())
        throw ArgumentError("solve_care: inconsistent matrix shapes");
    if (d == 0) throw ArgumentError("solve_care: empty system");
}

}  // namespace

Matrix solve_lyapunov(const Matrix& A, const Matrix& C) {
    const lapack_int n = static_cast<lapack_int>(A.rows());
    const Schur s = real_schur(A, false);
    Matrix y = -(s.Z.transpose() * C * s.Z);
    double scale = 1.0;
    const lapack_int info =
        LAPACKE_dtrsyl(LAPACK_COL_MAJOR, 'T', 'N', 1, n, n, s.T.data(), n, s.T.data(), n, y.data(), n, &scale);
    if (info < 0) throw ArgumentError("solve_lyapunov: invalid arguments");
    if (info == 1) throw ConditioningError("solve_lyapunov: A and -A have close eigenvalues");
    Matrix x = s.Z * (y / scale) * s.Z.transpose();
    return 0.5 * (x + x.transpose());
}

double care_residual(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R, const Matrix& P) {
    const Matrix bt_p = B.transpose() * P;
    return (A.transpose() * P + P * A - bt_p.transpose() * R.llt().solve(bt_p) + Q).norm();
}

CareSolution solve_care(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R, double tolerance) {
    check_shapes(A, B, Q, R);
    if (!(tolerance > 0.0)) throw ArgumentError("solve_care: tolerance must be positive");
    const Eigen::Index d = A.rows();
    const Eigen::LLT<Matrix> r_llt(R);
    if (r_llt.info() != Eigen::Success) throw ConditioningError("solve_care: R is not positive definite");
    const Matrix g = B * r_llt.solve(B.transpose());  // B R⁻¹ Bᵀ

    Matrix h(2 * d, 2 * d);
    h << A, -g, -Q, -A.transpose();
    const Schur s = real_schur(h, true);
    if (s.selected != d)
        throw StabilizabilityError("solve_care: Hamiltonian has " + std::to_string(s.selected) +
                                   " stable eigenvalues, expected " + std::to_string(d));
    const Matrix u1 = s.Z.topLeftCorner(d, d), u2 = s.Z.bottomLeftCorner(d, d);
    const Eigen::PartialPivLU<Matrix> lu(u1.transpose());
    if (!(lu.rcond() > 1e3 * std::numeric_limits<double>::epsilon()))
        throw ConditioningError("solve_care: stable subspace basis U1 is singular");
    Matrix p = lu.solve(u2.transpose()).transpose();
    p = 0.5 * (p + p.transpose());

    CareSolution sol;
    sol.P = p;
    sol.residual_norm = care_residual(A, B, Q, R, p);
    // Newton–Kleinman polish: P ← solution of (A − GP)ᵀX + X(A − GP) = −(Q + PGP).
    for (int step = 0; step < 30 && sol.residual_norm > tolerance; ++step) {
        const Matrix closed = A - g * sol.P;
        Matrix next;
        try {
            next = solve_lyapunov(closed, Q + sol.P * g * sol.P);
        } catch (const Error&) {
            break;
        }
        if (!next.allFinite()) break;
        const double res = care_residual(A, B, Q, R, next);
        if (!(res < sol.residual_norm)) break;
        sol.P = std::move(next);
        sol.residual_norm = res;
        sol.newton_steps = step + 1;
    }
    return sol;
}

}  // namespace hdsurr
