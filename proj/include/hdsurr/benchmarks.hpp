#pragma once

#include "hdsurr/common.hpp"
#include "hdsurr/poly_basis.hpp"
#include "hdsurr/sdre_control.hpp"
#include "hdsurr/tt_cross.hpp"

#include <array>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace hdsurr {

/// Target with analytic value and gradient on a box.
struct TestFunction {
    std::string name;
    int d = 0;
    std::vector<Interval> box;
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> gradient;

    /// Value + gradient oracle for the cross algorithm.
    OracleFunction oracle() const;
};

/// Exact target behind the Surrogate interface (reference feedback laws).
class AnalyticSurrogate final : public Surrogate {
public:
    explicit AnalyticSurrogate(TestFunction f) : f_(std::move(f)) {}
    int dim() const override { return f_.d; }
    double value(const Vector& x) const override { return f_.value(x); }
    Vector gradient(const Vector& x) const override { return f_.gradient(x); }

private:
    TestFunction f_;
};

/// (a) exp(−Σxᵢ/(2d)) on [−1,1]^d, (b) exp(−Πxᵢ) on [−1,1]^d, (c) exp(−Πxᵢ) on [0,2]^d.
TestFunction lowrank_fn(char which, int d);

/// λ₀‖x‖² + λ₁‖x − y₁‖ + λ₂√‖x − y₂‖ on [−1,1]^d, y₁ = 0.5·𝟏, y₂ = −0.5·𝟏.
/// The gradient throws SingularityError at y₁ (λ₁ > 0) and y₂ (λ₂ > 0).
TestFunction regularity_fn(const std::array<double, 3>& lambda, int d);

/// V(x) = ‖x‖²(g₁ + g₂), gᵢ = exp(−‖x − μᵢ‖²/σᵢ²).
struct AcademicProblem {
    int d = 0;
    Vector mu1, mu2;
    double sigma1 = 1.0, sigma2 = 1.0;

    /// μ₁ = 0, μ₂ = 0.5·𝟏, σ₁ = σ₂ = 1.
    static AcademicProblem standard(int d);
};

double academic_value(const AcademicProblem& p, const Vector& x);
Vector academic_grad(const AcademicProblem& p, const Vector& x);
/// r(x) = ½‖∇V(x)‖².
double academic_running_cost(const AcademicProblem& p, const Vector& x);
TestFunction academic_fn(const AcademicProblem& p);

struct AcademicMatrices {
    Matrix A, B, Q, R;
};

/// A = 0, B = I, R = ½I, Q = ½·diag((∂ᵢV/xᵢ)²). At xᵢ = 0 the analytic limit is
/// used when it exists; otherwise SingularityError.
AcademicMatrices academic_sdre_matrices(const AcademicProblem& p, const Vector& x);
SemilinearModel academic_model(const AcademicProblem& p);

struct AllenCahnConfig {
    int d = 30;
    double sigma = 1e-2;
    double gamma = 0.1;
    bool trapezoid_weights = true;  ///< halve the end weights of Q and R
};

/// Grid points linspace(0, 1, d).
Vector allen_cahn_grid(int d);
/// Neumann second-difference matrix: interior rows (1, −2, 1)/h², end rows (−1, 1)/h².
Matrix neumann_laplacian(int d);
/// A(y) = σA₀ + I − diag(y⊙y), B = I, Q = W, R = γW with W the spatial quadrature weights.
SemilinearModel allen_cahn_model(const AllenCahnConfig& config = {});

/// y₀(x) = Σₖ (aₖ/2) cos(2πkx) k^{−β} on the grid.
Vector fourier_ic(std::span<const double> a, double beta, const Vector& grid);
/// Same form with aₖ ~ U(−1, 1), k = 1…4.
Vector random_fourier_ic(std::mt19937_64& rng, double beta, const Vector& grid);

enum class SamplerKind { uniform, halton, fourier };

struct SamplerSpec {
    SamplerKind kind = SamplerKind::uniform;
    std::vector<Interval> box;  ///< uniform and Halton
    double beta = 3.0;          ///< Fourier
};

/// Points from the sampler (Halton ignores the seed).
Matrix sample_points(const SamplerSpec& sampler, int count, std::uint64_t seed);

/// Exact values and gradients of an analytic target.
Dataset generate_dataset(const TestFunction& f, const SamplerSpec& sampler, int count, std::uint64_t seed);

/// SDRE data: V(x) = xᵀP(x)x, ∇V(x) = 2P(x)x (∂P/∂x neglected). Points where the
/// CARE fails are skipped and replaced; `skipped` receives their number.
Dataset generate_dataset(const SemilinearModel& model, const SamplerSpec& sampler, int count, std::uint64_t seed,
                         int* skipped = nullptr);

/// The SDRE value data above as a cross oracle.
OracleFunction sdre_value_oracle(const SemilinearModel& model, double tolerance = 1e-10);

}  // namespace hdsurr
