#pragma once

#include "hdsurr/common.hpp"

namespace hdsurr {

struct Interval {
    double lo = -1.0;
    double hi = 1.0;

    double length() const { return hi - lo; }
    bool operator==(const Interval&) const = default;
};

/// Orthonormal Legendre basis ψ₀,…,ψ_{n−1} on [lo,hi]. Orthonormality is with
/// respect to the uniform probability measure, i.e. ψₖ = √(2k+1)·Pₖ after the
/// affine pullback to [−1,1].
class BasisSpec {
public:
    BasisSpec(int degree_count, Interval domain);

    int degree_count() const { return degree_count_; }
    const Interval& domain() const { return domain_; }

    /// Throws DomainError unless x lies in the domain (up to rounding slack).
    double to_reference(double x) const;

    bool operator==(const BasisSpec&) const = default;

private:
    int degree_count_;
    Interval domain_;
};

Vector eval_basis_vector(const BasisSpec& spec, double x);
Vector eval_basis_derivative(const BasisSpec& spec, double x);

/// Values and derivatives in one recurrence pass. Both outputs must hold
/// degree_count entries.
void eval_basis(const BasisSpec& spec, double x, double* values, double* derivatives);

struct QuadratureRule {
    Vector nodes;    ///< strictly increasing
    Vector weights;  ///< positive, sum to the interval length
};

/// Gauss–Legendre rule from the symmetric Jacobi matrix, Newton-polished.
QuadratureRule gauss_legendre_rule(int node_count, Interval domain);

/// n × n matrices Ψ[i,k] = ψₖ(nodeᵢ) and Ψ'[i,k] = ψₖ'(nodeᵢ).
Matrix basis_matrix(const BasisSpec& spec, const Vector& nodes);
Matrix basis_derivative_matrix(const BasisSpec& spec, const Vector& nodes);

}  // namespace hdsurr
