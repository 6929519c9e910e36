#pragma once

#include "hdsurr/common.hpp"

namespace hdsurr {

struct CareSolution {
    Matrix P;
    double residual_norm = 0.0;  ///< ‖AᵀP + PA − PBR⁻¹BᵀP + Q‖_F
    int newton_steps = 0;
};

/// ‖AᵀP + PA − PBR⁻¹BᵀP + Q‖_F.
double care_residual(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R, const Matrix& P);

/// Stabilizing solution of AᵀP + PA − PBR⁻¹BᵀP + Q = 0: ordered real Schur
/// form of the Hamiltonian, then Newton–Kleinman steps until the residual is
/// below `tolerance` or stops improving.
/// Throws StabilizabilityError without a d-dimensional stable subspace and
/// ConditioningError when U₁ is singular or R is not positive definite.
CareSolution solve_care(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                        double tolerance = 1e-10);

/// Solves AᵀX + XA = −C for stable A (Bartels–Stewart).
Matrix solve_lyapunov(const Matrix& A, const Matrix& C);

}  // namespace hdsurr
