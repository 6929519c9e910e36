#pragma once

#include "hdsurr/common.hpp"
#include "hdsurr/poly_basis.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hdsurr {

enum class KernelFamily { gaussian, exponential, matern2 };

KernelFamily parse_kernel_family(std::string_view name);
std::string to_string(KernelFamily family);

/// Radial kernel φ(ε·‖x − y‖) with φ(0) = 1.
struct KernelSpec {
    KernelFamily family = KernelFamily::matern2;
    double shape = 1.0;
};

/// φ(ε·r).
double kernel_profile(const KernelSpec& spec, double r);
double kernel_eval(const KernelSpec& spec, const Vector& x, const Vector& y);

/// First `count` Halton points (bases 2, 3, 5, …, index from 1) mapped to the box.
Matrix halton_points(int count, std::span<const Interval> box);
Matrix halton_points(int count, int d, Interval side = {});

/// s(x) = Σⱼ αⱼ k(x, xⱼ).
class KernelSurrogate final : public Surrogate {
public:
    KernelSurrogate() = default;
    KernelSurrogate(KernelSpec spec, Matrix centers, Vector coefficients, double regularization = 0.0);

    int dim() const override { return static_cast<int>(centers_.cols()); }
    double value(const Vector& x) const override;
    /// Exponential kernel: contributions from a center hit exactly are zero.
    Vector gradient(const Vector& x) const override;
    Vector values(const Matrix& points) const;

    const KernelSpec& spec() const { return spec_; }
    const Matrix& centers() const { return centers_; }
    const Vector& coefficients() const { return coefficients_; }
    double regularization() const { return regularization_; }

private:
    KernelSpec spec_;
    Matrix centers_;  ///< M × d
    Vector coefficients_;
    double regularization_ = 0.0;
};

double predict(const KernelSurrogate& s, const Vector& x);
Vector predict_grad(const KernelSurrogate& s, const Vector& x);

/// Symmetric Gram matrix. Throws ArgumentError for centers closer than 1e-12.
Matrix gram_matrix(const KernelSpec& spec, const Matrix& centers);

struct KernelFit {
    KernelSurrogate surrogate;
    FitStats stats;
    double jitter = 0.0;  ///< diagonal shift actually added (0 unless escalated)
};

/// Solves (K + regularization·I)α = y by Cholesky. At regularization 0 a failed
/// factorization is retried with 1e-14, 1e-12, 1e-10 times ‖K‖ on the diagonal;
/// ConditioningError if all fail.
KernelFit fit_interpolant(const Dataset& data, const KernelSpec& spec, double regularization = 0.0);

/// ε ∈ {1/(2√d), 1/(4√d), 1/(8√d)}.
std::vector<double> shape_presets(int d);

struct ShapeSelection {
    KernelFit fit;                         ///< refit on all data with the chosen shape
    double shape = 0.0;
    std::vector<double> validation_errors; ///< relative l2 per candidate
};

/// Fits every candidate on a seeded 90 % split, scores it on the other 10 %,
/// and refits the best one on the full data.
ShapeSelection select_shape(const Dataset& data, KernelFamily family, std::span<const double> shapes,
                            std::uint64_t seed = 0, double holdout_fraction = 0.1);

}  // namespace hdsurr
