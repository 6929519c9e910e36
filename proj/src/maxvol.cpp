#include "hdsurr/maxvol.hpp"

#include "hdsurr/errors.hpp"

#include <Eigen/LU>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace hdsurr {

namespace {

std::vector<int> initial_rows(const Matrix& a, int mode) {
    const Eigen::Index n = a.rows(), r = a.cols();
    Matrix work = a;
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    const double scale = std::max(a.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    const double tiny = 64.0 * std::numeric_limits<double>::epsilon() * scale * std::max(n, r);
    for (Eigen::Index j = 0; j < r; ++j) {
        Eigen::Index best = j;
        double best_val = std::abs(work(j, j));
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const double v = std::abs(work(i, j));
            if (v > best_val || (v == best_val && perm[i] < perm[best])) {
                best = i;
                best_val = v;
            }
        }
        if (best_val <= tiny) {
            std::ostringstream os;
            os << "maxvol: matrix is rank deficient (column " << j << ")";
            throw PivotError(os.str(), mode);
        }
        if (best != j) {
            work.row(j).swap(work.row(best));
            std::swap(perm[j], perm[best]);
        }
        const double piv = work(j, j);
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const double f = work(i, j) / piv;
            if (f != 0.0) work.row(i).tail(r - j) -= f * work.row(j).tail(r - j);
        }
    }
    return {perm.begin(), perm.begin() + r};
}

}  // namespace

std::vector<int> maxvol(const Matrix& a, double delta, int mode, int max_iterations) {
    const Eigen::Index n = a.rows(), r = a.cols();
    if (r == 0) return {};
    if (n < r) throw ArgumentError("maxvol: matrix must have at least as many rows as columns");
    if (delta <= 0.0) throw ArgumentError("maxvol: delta must be positive");

    std::vector<int> rows = initial_rows(a, mode);
    Matrix sub(r, r);
    for (Eigen::Index j = 0; j < r; ++j) sub.row(j) = a.row(rows[j]);
    Eigen::PartialPivLU<Matrix> lu(sub);
    Matrix b = a * lu.inverse();

    for (int it = 0; it < max_iterations; ++it) {
        Eigen::Index bi = 0, bj = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < r; ++j) {
                const double v = std::abs(b(i, j));
                if (v > best) {
                    best = v;
                    bi = i;
                    bj = j;
                }
            }
        }
        if (best <= 1.0 + delta) break;
        // Replace pivot row j by row i: B ← B − B[:,j]·(B[i,:] − e_j)/B[i,j]
        const double pivot = b(bi, bj);
        Vector col = b.col(bj);
        Eigen::RowVectorXd row = b.row(bi);
        row[bj] -= 1.0;
        b.noalias() -= col * (row / pivot);
        rows[bj] = static_cast<int>(bi);
    }
    return rows;
}

}  // namespace hdsurr
