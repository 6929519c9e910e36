#include "hdsurr/kernel_surrogate.hpp"

#include "hdsurr/errors.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace hdsurr {

KernelFamily parse_kernel_family(std::string_view name) {
    if (name == "gaussian") return KernelFamily::gaussian;
    if (name == "exponential") return KernelFamily::exponential;
    if (name == "matern2") return KernelFamily::matern2;
    throw ArgumentError("unknown kernel family '" + std::string(name) + "'");
}

std::string to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::gaussian: return "gaussian";
        case KernelFamily::exponential: return "exponential";
        case KernelFamily::matern2: return "matern2";
    }
    return "?";
}

double kernel_profile(const KernelSpec& spec, double r) {
    const double s = spec.shape * r;
    switch (spec.family) {
        case KernelFamily::gaussian: return std::exp(-s * s);
        case KernelFamily::exponential: return std::exp(-s);
        case KernelFamily::matern2: return (1.0 + s + s * s / 3.0) * std::exp(-s);
    }
    return 0.0;
}

namespace {

void check_spec(const KernelSpec& spec) {
    if (!(spec.shape > 0.0) || !std::isfinite(spec.shape))
        throw ArgumentError("kernel shape parameter must be positive");
}

// ∇ₓ φ(ε‖x−y‖) = w · (x − y); returns w.
double gradient_weight(const KernelSpec& spec, double r) {
    const double e = spec.shape, s = e * r;
    switch (spec.family) {
        case KernelFamily::gaussian: return -2.0 * e * e * std::exp(-s * s);
        case KernelFamily::exponential: return r > 0.0 ? -e * std::exp(-s) / r : 0.0;
        case KernelFamily::matern2: return -e * e * (1.0 + s) * std::exp(-s) / 3.0;
    }
    return 0.0;
}

constexpr int kPrimes[100] = {
    2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,  43,  47,  53,  59,
    61,  67,  71,  73,  79,  83,  89,  97,  101, 103, 107, 109, 113, 127, 131, 137, 139,
    149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229, 233,
    239, 241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307, 311, 313, 317, 331, 337,
    347, 349, 353, 359, 367, 373, 379, 383, 389, 397, 401, 409, 419, 421, 431, 433, 439,
    443, 449, 457, 461, 463, 467, 479, 487, 491, 499, 503, 509, 521, 523, 541};

double radical_inverse(long index, int base) {
    double result = 0.0, f = 1.0 / base;
    while (index > 0) {
        result += f * static_cast<double>(index % base);
        index /= base;
        f /= base;
    }
    return result;
}

}  // namespace

double kernel_eval(const KernelSpec& spec, const Vector& x, const Vector& y) {
    if (x.size() != y.size()) throw ArgumentError("kernel_eval: dimension mismatch");
    return kernel_profile(spec, (x - y).norm());
}

Matrix halton_points(int count, std::span<const Interval> box) {
    const int d = static_cast<int>(box.size());
    if (count < 0) throw ArgumentError("halton_points: negative count");
    if (d < 1 || d > 100) throw ArgumentError("halton_points: dimension must be in 1..100");
    Matrix pts(count, d);
    for (int i = 0; i < count; ++i)
        for (int k = 0; k < d; ++k)
            pts(i, k) = box[k].lo + box[k].length() * radical_inverse(i + 1, kPrimes[k]);
    return pts;
}

Matrix halton_points(int count, int d, Interval side) {
    const std::vector<Interval> box(std::max(d, 0), side);
    return halton_points(count, box);
}

KernelSurrogate::KernelSurrogate(KernelSpec spec, Matrix centers, Vector coefficients, double regularization)
    : spec_(spec), centers_(std::move(centers)), coefficients_(std::move(coefficients)),
      regularization_(regularization) {
    check_spec(spec_);
    if (coefficients_.size() != centers_.rows())
        throw ArgumentError("kernel surrogate: coefficient count differs from center count");
    if (regularization_ < 0.0) throw ArgumentError("kernel surrogate: negative regularization");
}

double KernelSurrogate::value(const Vector& x) const {
    if (x.size() != centers_.cols()) throw ArgumentError("kernel predict: dimension mismatch");
    double s = 0.0;
    for (Eigen::Index j = 0; j < centers_.rows(); ++j)
        s += coefficients_[j] * kernel_profile(spec_, (centers_.row(j).transpose() - x).norm());
    return s;
}

Vector KernelSurrogate::gradient(const Vector& x) const {
    if (x.size() != centers_.cols()) throw ArgumentError("kernel predict_grad: dimension mismatch");
    Vector g = Vector::Zero(x.size());
    for (Eigen::Index j = 0; j < centers_.rows(); ++j) {
        const Vector diff = x - centers_.row(j).transpose();
        g += coefficients_[j] * gradient_weight(spec_, diff.norm()) * diff;
    }
    return g;
}

Vector KernelSurrogate::values(const Matrix& points) const {
    Vector out(points.rows());
    for (Eigen::Index i = 0; i < points.rows(); ++i) out[i] = value(points.row(i).transpose());
    return out;
}

double predict(const KernelSurrogate& s, const Vector& x) { return s.value(x); }
Vector predict_grad(const KernelSurrogate& s, const Vector& x) { return s.gradient(x); }

Matrix gram_matrix(const KernelSpec& spec, const Matrix& centers) {
    check_spec(spec);
    const Eigen::Index m = centers.rows();
    const Matrix ct = centers.transpose();  // column access is contiguous
    Matrix k(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        k(j, j) = 1.0;
        for (Eigen::Index i = j + 1; i < m; ++i) {
            const double r = (ct.col(i) - ct.col(j)).norm();
            if (r <= 1e-12) throw ArgumentError("kernel fit: centers are not pairwise distinct");
            k(i, j) = k(j, i) = kernel_profile(spec, r);
        }
    }
    return k;
}

KernelFit fit_interpolant(const Dataset& data, const KernelSpec& spec, double regularization) {
    if (data.size() == 0) throw ArgumentError("kernel fit: empty dataset");
    if (regularization < 0.0) throw ArgumentError("kernel fit: negative regularization");
    Stopwatch clock;
    const Matrix k = gram_matrix(spec, data.points);
    const Eigen::Index m = k.rows();

    std::vector<double> shifts{regularization};
    if (regularization == 0.0) {
        const double norm = k.norm();
        for (double level : {1e-14, 1e-12, 1e-10}) shifts.push_back(level * norm);
    }
    KernelFit fit;
    for (std::size_t attempt = 0; attempt < shifts.size(); ++attempt) {
        Matrix shifted = k;
        shifted.diagonal().array() += shifts[attempt];
        Eigen::LLT<Matrix> llt(shifted);
        if (llt.info() != Eigen::Success) continue;
        Vector alpha = llt.solve(data.values);
        if (!alpha.allFinite()) continue;
        fit.jitter = attempt == 0 ? 0.0 : shifts[attempt];
        fit.stats.err_train_2 = relative_l2(k * alpha, data.values);
        fit.surrogate = KernelSurrogate(spec, data.points, std::move(alpha), regularization + fit.jitter);
        fit.stats.dofs = m;
        fit.stats.n_train_samples = m;
        fit.stats.regularized = attempt > 0;
        fit.stats.converged = true;
        fit.stats.cpu_train_s = clock.seconds();
        return fit;
    }
    throw ConditioningError("kernel fit: Cholesky failed at every jitter level");
}

std::vector<double> shape_presets(int d) {
    const double s = std::sqrt(static_cast<double>(d));
    return {1.0 / (2.0 * s), 1.0 / (4.0 * s), 1.0 / (8.0 * s)};
}

ShapeSelection select_shape(const Dataset& data, KernelFamily family, std::span<const double> shapes,
                            std::uint64_t seed, double holdout_fraction) {
    if (shapes.empty()) throw ArgumentError("select_shape: no candidate shapes");
    if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0))
        throw ArgumentError("select_shape: holdout fraction must lie in (0,1)");
    const Eigen::Index n = data.size();
    const Eigen::Index n_val = static_cast<Eigen::Index>(std::llround(holdout_fraction * n));
    if (n_val < 1 || n_val >= n) throw ArgumentError("select_shape: dataset too small for a hold-out split");

    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    Dataset train, val;
    train.points.resize(n - n_val, data.dim());
    train.values.resize(n - n_val);
    val.points.resize(n_val, data.dim());
    val.values.resize(n_val);
    for (Eigen::Index i = 0; i < n; ++i) {
        Dataset& dst = i < n_val ? val : train;
        const Eigen::Index row = i < n_val ? i : i - n_val;
        dst.points.row(row) = data.points.row(order[i]);
        dst.values[row] = data.values[order[i]];
    }

    ShapeSelection sel;
    double best = std::numeric_limits<double>::infinity();
    for (double shape : shapes) {
        const KernelFit f = fit_interpolant(train, {family, shape});
        const double err = relative_l2(f.surrogate.values(val.points), val.values);
        sel.validation_errors.push_back(err);
        if (err < best) {
            best = err;
            sel.shape = shape;
        }
    }
    sel.fit = fit_interpolant(data, {family, sel.shape});
    return sel;
}

}  // namespace hdsurr
