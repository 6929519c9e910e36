#include "hdsurr/poly_basis.hpp"

#include "hdsurr/errors.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <sstream>

namespace hdsurr {

BasisSpec::BasisSpec(int degree_count, Interval domain)
    : degree_count_(degree_count), domain_(domain) {
    if (degree_count < 1)
        throw ArgumentError("BasisSpec: degree_count must be >= 1");
    if (!(domain.lo < domain.hi))
        throw ArgumentError("BasisSpec: empty domain");
}

double BasisSpec::to_reference(double x) const {
    const double slack = 64.0 * std::numeric_limits<double>::epsilon() *
                         std::max({1.0, std::abs(domain_.lo), std::abs(domain_.hi)});
    if (!(x >= domain_.lo - slack && x <= domain_.hi + slack)) {
        std::ostringstream os;
        os << "basis evaluated at " << x << " outside [" << domain_.lo << ", " << domain_.hi
           << "]";
        throw DomainError(os.str());
    }
    return (2.0 * x - domain_.lo - domain_.hi) / domain_.length();
}

void eval_basis(const BasisSpec& spec, double x, double* values, double* derivatives) {
    const double t = spec.to_reference(x);
    const double jac = 2.0 / spec.domain().length();
    const int n = spec.degree_count();

    // P_{k+1} = ((2k+1) t P_k − k P_{k−1}) / (k+1);  P'_{k+1} = P'_{k−1} + (2k+1) P_k
    double p_prev = 0.0, p = 1.0;
    double dp_prev = 0.0, dp = 0.0;
    for (int k = 0; k < n; ++k) {
        const double scale = std::sqrt(2.0 * k + 1.0);
        if (values) values[k] = scale * p;
        if (derivatives) derivatives[k] = scale * dp * jac;
        const double p_next = ((2.0 * k + 1.0) * t * p - k * p_prev) / (k + 1.0);
        const double dp_next = dp_prev + (2.0 * k + 1.0) * p;
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
    }
}

Vector eval_basis_vector(const BasisSpec& spec, double x) {
    Vector v(spec.degree_count());
    eval_basis(spec, x, v.data(), nullptr);
    return v;
}

Vector eval_basis_derivative(const BasisSpec& spec, double x) {
    Vector v(spec.degree_count());
    eval_basis(spec, x, nullptr, v.data());
    return v;
}

QuadratureRule gauss_legendre_rule(int node_count, Interval domain) {
    if (node_count < 1) throw ArgumentError("gauss_legendre_rule: node_count must be >= 1");
    if (!(domain.lo < domain.hi)) throw ArgumentError("gauss_legendre_rule: empty domain");
    const int n = node_count;

    Vector diag = Vector::Zero(n);
    Vector sub(std::max(n - 1, 0));
    for (int k = 1; k < n; ++k) sub[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);

    Vector t(n), w(n);
    if (n == 1) {
        t[0] = 0.0;
        w[0] = 2.0;
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> eig;
        eig.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        t = eig.eigenvalues();
        // Newton polish on P_n, then weights from the derivative formula.
        for (int i = 0; i < n; ++i) {
            for (int it = 0; it < 3; ++it) {
                double p_prev = 1.0, p = t[i];
                for (int k = 1; k < n; ++k) {
                    const double p_next = ((2.0 * k + 1.0) * t[i] * p - k * p_prev) / (k + 1.0);
                    p_prev = p;
                    p = p_next;
                }
                const double dp = n * (t[i] * p - p_prev) / (t[i] * t[i] - 1.0);
                t[i] -= p / dp;
            }
            double p_prev = 1.0, p = t[i];
            for (int k = 1; k < n; ++k) {
                const double p_next = ((2.0 * k + 1.0) * t[i] * p - k * p_prev) / (k + 1.0);
                p_prev = p;
                p = p_next;
            }
            const double dp = n * (t[i] * p - p_prev) / (t[i] * t[i] - 1.0);
            w[i] = 2.0 / ((1.0 - t[i] * t[i]) * dp * dp);
        }
        // symmetrize against rounding
        for (int i = 0; i < n / 2; ++i) {
            const double a = 0.5 * (t[n - 1 - i] - t[i]);
            t[i] = -a;
            t[n - 1 - i] = a;
            const double ww = 0.5 * (w[i] + w[n - 1 - i]);
            w[i] = w[n - 1 - i] = ww;
        }
        if (n % 2 == 1) t[n / 2] = 0.0;
    }

    const double half = 0.5 * domain.length();
    const double mid = 0.5 * (domain.lo + domain.hi);
    QuadratureRule rule;
    rule.nodes = (mid + half * t.array()).matrix();
    rule.weights = half * w;
    return rule;
}

Matrix basis_matrix(const BasisSpec& spec, const Vector& nodes) {
    Matrix m(nodes.size(), spec.degree_count());
    Vector row(spec.degree_count());
    for (Eigen::Index i = 0; i < nodes.size(); ++i) {
        eval_basis(spec, nodes[i], row.data(), nullptr);
        m.row(i) = row.transpose();
    }
    return m;
}

Matrix basis_derivative_matrix(const BasisSpec& spec, const Vector& nodes) {
    Matrix m(nodes.size(), spec.degree_count());
    Vector row(spec.degree_count());
    for (Eigen::Index i = 0; i < nodes.size(); ++i) {
        eval_basis(spec, nodes[i], nullptr, row.data());
        m.row(i) = row.transpose();
    }
    return m;
}

}  // namespace hdsurr
