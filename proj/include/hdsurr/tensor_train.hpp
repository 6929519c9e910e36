#pragma once

#include "hdsurr/common.hpp"
#include "hdsurr/poly_basis.hpp"

#include <span>
#include <vector>

namespace hdsurr {

/// One 3-way TT core of shape (r_left, n, r_right).
///
/// Storage is column-major: entry (a,i,b) lives at a + r_left·(i + n·b). The
/// left unfolding ((a,i) × b) and the right unfolding (a × (i,b)) are therefore
/// plain column-major matrices over the same buffer.
class TTCore {
public:
    TTCore() = default;
    TTCore(int r_left, int n, int r_right);

    int r_left() const { return r_left_; }
    int n() const { return n_; }
    int r_right() const { return r_right_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(int a, int i, int b) { return data_[index(a, i, b)]; }
    double operator()(int a, int i, int b) const { return data_[index(a, i, b)]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    Eigen::Map<Matrix> left_unfolding() { return {data_.data(), r_left_ * n_, r_right_}; }
    Eigen::Map<const Matrix> left_unfolding() const {
        return {data_.data(), r_left_ * n_, r_right_};
    }
    Eigen::Map<Matrix> right_unfolding() { return {data_.data(), r_left_, n_ * r_right_}; }
    Eigen::Map<const Matrix> right_unfolding() const {
        return {data_.data(), r_left_, n_ * r_right_};
    }

    /// r_left × r_right matrix Σᵢ wᵢ·U[:,i,:].
    Matrix contract_mode(const double* weights) const;
    /// Slice U[:,i,:].
    Matrix slice(int i) const;

    static TTCore from_left_unfolding(const Matrix& m, int r_left, int n);
    static TTCore from_right_unfolding(const Matrix& m, int n, int r_right);

    bool operator==(const TTCore&) const = default;

private:
    std::size_t index(int a, int i, int b) const {
        return static_cast<std::size_t>(a) +
               static_cast<std::size_t>(r_left_) *
                   (static_cast<std::size_t>(i) + static_cast<std::size_t>(n_) * b);
    }

    int r_left_ = 0;
    int n_ = 0;
    int r_right_ = 0;
    std::vector<double> data_;
};

/// Chain of cores with boundary ranks 1.
class TensorTrain {
public:
    TensorTrain() = default;
    explicit TensorTrain(std::vector<TTCore> cores);

    int dim() const { return static_cast<int>(cores_.size()); }
    const TTCore& core(int k) const { return cores_[k]; }
    TTCore& core(int k) { return cores_[k]; }
    const std::vector<TTCore>& cores() const { return cores_; }
    void set_core(int k, TTCore c) { cores_[k] = std::move(c); }

    /// (r₁,…,r_{d−1})
    std::vector<int> ranks() const;
    std::vector<int> mode_sizes() const;

    /// Throws ArgumentError on inconsistent bond dimensions.
    void validate() const;

    /// Random Gaussian cores with the given interior ranks.
    static TensorTrain random(std::span<const int> mode_sizes, std::span<const int> ranks,
                              std::uint64_t seed);

    bool operator==(const TensorTrain&) const = default;

private:
    std::vector<TTCore> cores_;
};

/// Full coefficient tensor, first index fastest.
struct DenseTensor {
    std::vector<int> shape;
    std::vector<double> data;

    double operator()(std::span<const int> idx) const;
};

/// Functional tensor train: TT coefficients contracted with per-mode bases.
class FunctionalTT final : public Surrogate {
public:
    FunctionalTT() = default;
    FunctionalTT(TensorTrain train, std::vector<BasisSpec> bases);

    const TensorTrain& train() const { return train_; }
    TensorTrain& train() { return train_; }
    const std::vector<BasisSpec>& bases() const { return bases_; }

    int dim() const override { return train_.dim(); }
    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;

    bool operator==(const FunctionalTT& other) const {
        return train_ == other.train_ && bases_ == other.bases_;
    }

private:
    TensorTrain train_;
    std::vector<BasisSpec> bases_;
};

double tt_eval(const FunctionalTT& surrogate, const Vector& x);
Vector tt_grad(const FunctionalTT& surrogate, const Vector& x);

inline constexpr std::size_t kDenseSizeGuard = 10'000'000;

DenseTensor tt_to_dense(const TensorTrain& train);

/// Cores left of pivot become left-orthogonal, cores right of it right-orthogonal.
TensorTrain tt_orthogonalize(const TensorTrain& train, int pivot);

/// TT-SVD rounding to relative Frobenius accuracy `tolerance` (0 drops only
/// numerically exact rank deficiency). Singular values are cut against a fixed
/// per-bond threshold, which makes the operation idempotent.
TensorTrain tt_round(const TensorTrain& train, double tolerance);

/// Σₖ r_{k−1}·nₖ·rₖ
long tt_dofs(const TensorTrain& train);

double tt_dot(const TensorTrain& a, const TensorTrain& b);
double tt_norm(const TensorTrain& train);
/// alpha·a + beta·b, ranks add.
TensorTrain tt_axpby(double alpha, const TensorTrain& a, double beta, const TensorTrain& b);
/// ‖a − b‖_F evaluated through an orthogonalised difference train.
double tt_distance(const TensorTrain& a, const TensorTrain& b);

}  // namespace hdsurr
