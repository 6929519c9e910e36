#include "hdsurr/benchmarks.hpp"

#include "hdsurr/errors.hpp"
#include "hdsurr/kernel_surrogate.hpp"

#include <cmath>
#include <numbers>

namespace hdsurr {

OracleFunction TestFunction::oracle() const {
    return OracleFunction(value, gradient);
}

TestFunction lowrank_fn(char which, int d) {
    if (d < 2) throw ArgumentError("lowrank_fn: d must be >= 2");
    TestFunction f;
    f.d = d;
    switch (which) {
        case 'a':
            f.name = "lowrank-a";
            f.box.assign(d, {-1.0, 1.0});
            f.value = [d](const Vector& x) { return std::exp(-x.sum() / (2.0 * d)); };
            f.gradient = [d](const Vector& x) {
                return Vector::Constant(x.size(), -std::exp(-x.sum() / (2.0 * d)) / (2.0 * d));
            };
            return f;
        case 'b':
        case 'c':
            f.name = std::string("lowrank-") + which;
            f.box.assign(d, which == 'b' ? Interval{-1.0, 1.0} : Interval{0.0, 2.0});
            f.value = [](const Vector& x) { return std::exp(-x.prod()); };
            f.gradient = [](const Vector& x) {
                // ∂ᵢ = −e^{−Πx}·Π_{j≠i}xⱼ via prefix/suffix products (no division).
                const Eigen::Index n = x.size();
                Vector prefix(n + 1), suffix(n + 1);
                prefix[0] = 1.0;
                suffix[n] = 1.0;
                for (Eigen::Index i = 0; i < n; ++i) prefix[i + 1] = prefix[i] * x[i];
                for (Eigen::Index i = n; i-- > 0;) suffix[i] = suffix[i + 1] * x[i];
                const double e = std::exp(-prefix[n]);
                Vector g(n);
                for (Eigen::Index i = 0; i < n; ++i) g[i] = -e * prefix[i] * suffix[i + 1];
                return g;
            };
            return f;
        default:
            throw ArgumentError(std::string("lowrank_fn: unknown case '") + which + "'");
    }
}

TestFunction regularity_fn(const std::array<double, 3>& lambda, int d) {
    if (d < 1) throw ArgumentError("regularity_fn: d must be >= 1");
    for (double l : lambda)
        if (!(l >= 0.0)) throw ArgumentError("regularity_fn: lambda components must be >= 0");
    TestFunction f;
    f.d = d;
    f.name = "regularity";
    f.box.assign(d, {-1.0, 1.0});
    const Vector y1 = Vector::Constant(d, 0.5), y2 = Vector::Constant(d, -0.5);
    f.value = [=](const Vector& x) {
        return lambda[0] * x.squaredNorm() + lambda[1] * (x - y1).norm() + lambda[2] * std::sqrt((x - y2).norm());
    };
    f.gradient = [=](const Vector& x) {
        Vector g = 2.0 * lambda[0] * x;
        if (lambda[1] > 0.0) {
            const double r = (x - y1).norm();
            if (r == 0.0) throw SingularityError("regularity_fn: gradient undefined at y1");
            g += lambda[1] * (x - y1) / r;
        }
        if (lambda[2] > 0.0) {
            const double r = (x - y2).norm();
            if (r == 0.0) throw SingularityError("regularity_fn: gradient undefined at y2");
            g += lambda[2] * (x - y2) / (2.0 * std::pow(r, 1.5));
        }
        return g;
    };
    return f;
}

AcademicProblem AcademicProblem::standard(int d) {
    if (d < 1) throw ArgumentError("academic problem: d must be >= 1");
    AcademicProblem p;
    p.d = d;
    p.mu1 = Vector::Zero(d);
    p.mu2 = Vector::Constant(d, 0.5);
    return p;
}

namespace {

void check_problem(const AcademicProblem& p, const Vector& x) {
    if (!(p.sigma1 > 0.0 && p.sigma2 > 0.0)) throw ArgumentError("academic problem: widths must be positive");
    if (p.mu1.size() != p.d || p.mu2.size() != p.d || x.size() != p.d)
        throw ArgumentError("academic problem: dimension mismatch");
}

struct Gaussians {
    double g1, g2;
};

Gaussians gaussians(const AcademicProblem& p, const Vector& x) {
    return {std::exp(-(x - p.mu1).squaredNorm() / (p.sigma1 * p.sigma1)),
            std::exp(-(x - p.mu2).squaredNorm() / (p.sigma2 * p.sigma2))};
}

}  // namespace

double academic_value(const AcademicProblem& p, const Vector& x) {
    check_problem(p, x);
    const auto g = gaussians(p, x);
    return x.squaredNorm() * (g.g1 + g.g2);
}

Vector academic_grad(const AcademicProblem& p, const Vector& x) {
    check_problem(p, x);
    const auto g = gaussians(p, x);
    const double s1 = p.sigma1 * p.sigma1, s2 = p.sigma2 * p.sigma2;
    const double n2 = x.squaredNorm();
    return 2.0 * (g.g1 + g.g2) * x - n2 * (2.0 * g.g1 / s1 * (x - p.mu1) + 2.0 * g.g2 / s2 * (x - p.mu2));
}

double academic_running_cost(const AcademicProblem& p, const Vector& x) {
    return 0.5 * academic_grad(p, x).squaredNorm();
}

TestFunction academic_fn(const AcademicProblem& p) {
    TestFunction f;
    f.name = "academic-" + std::to_string(p.d);
    f.d = p.d;
    f.box.assign(p.d, {-1.0, 1.0});
    f.value = [p](const Vector& x) { return academic_value(p, x); };
    f.gradient = [p](const Vector& x) { return academic_grad(p, x); };
    return f;
}

AcademicMatrices academic_sdre_matrices(const AcademicProblem& p, const Vector& x) {
    check_problem(p, x);
    const auto g = gaussians(p, x);
    const double s1 = p.sigma1 * p.sigma1, s2 = p.sigma2 * p.sigma2;
    const double n2 = x.squaredNorm();
    // ∂ᵢV/xᵢ = 2(g₁+g₂) − 2‖x‖²(g₁/σ₁² + g₂/σ₂²) + 2‖x‖²(μ₁ᵢg₁/σ₁² + μ₂ᵢg₂/σ₂²)/xᵢ
    const double regular = 2.0 * (g.g1 + g.g2) - 2.0 * n2 * (g.g1 / s1 + g.g2 / s2);
    AcademicMatrices m;
    m.A = Matrix::Zero(p.d, p.d);
    m.B = Matrix::Identity(p.d, p.d);
    m.R = 0.5 * Matrix::Identity(p.d, p.d);
    m.Q = Matrix::Zero(p.d, p.d);
    for (int i = 0; i < p.d; ++i) {
        const double singular = 2.0 * n2 * (p.mu1[i] * g.g1 / s1 + p.mu2[i] * g.g2 / s2);
        double ratio;
        if (x[i] != 0.0) {
            ratio = academic_grad(p, x)[i] / x[i];
        } else if (singular == 0.0) {
            ratio = regular;
        } else {
            throw SingularityError("academic Q(x): dV/dx_" + std::to_string(i + 1) +
                                   " does not vanish at x_" + std::to_string(i + 1) + " = 0");
        }
        m.Q(i, i) = 0.5 * ratio * ratio;
    }
    return m;
}

SemilinearModel academic_model(const AcademicProblem& p) {
    SemilinearModel m;
    m.d = p.d;
    m.m = p.d;
    m.A = [d = p.d](const Vector&) { return Matrix::Zero(d, d).eval(); };
    m.B = [d = p.d](const Vector&) { return Matrix::Identity(d, d).eval(); };
    m.Q = [p](const Vector& x) { return academic_sdre_matrices(p, x).Q; };
    m.R = 0.5 * Matrix::Identity(p.d, p.d);
    return m;
}

Vector allen_cahn_grid(int d) {
    if (d < 2) throw ArgumentError("allen_cahn_grid: d must be >= 2");
    return Vector::LinSpaced(d, 0.0, 1.0);
}

Matrix neumann_laplacian(int d) {
    if (d < 3) throw ArgumentError("neumann_laplacian: d must be >= 3");
    const double h = 1.0 / (d - 1), s = 1.0 / (h * h);
    Matrix a = Matrix::Zero(d, d);
    for (int i = 1; i + 1 < d; ++i) {
        a(i, i - 1) = s;
        a(i, i) = -2.0 * s;
        a(i, i + 1) = s;
    }
    a(0, 0) = -s;
    a(0, 1) = s;
    a(d - 1, d - 2) = s;
    a(d - 1, d - 1) = -s;
    return a;
}

SemilinearModel allen_cahn_model(const AllenCahnConfig& config) {
    if (config.d < 3) throw ArgumentError("allen_cahn_model: d must be >= 3");
    if (!(config.sigma > 0.0) || !(config.gamma > 0.0))
        throw ArgumentError("allen_cahn_model: sigma and gamma must be positive");
    const int d = config.d;
    const double h = 1.0 / (d - 1);
    Vector w = Vector::Constant(d, h);
    if (config.trapezoid_weights) w[0] = w[d - 1] = 0.5 * h;
    const Matrix base = config.sigma * neumann_laplacian(d) + Matrix::Identity(d, d);
    const Matrix weights = w.asDiagonal();

    SemilinearModel m;
    m.d = d;
    m.m = d;
    m.A = [base](const Vector& y) {
        Matrix a = base;
        a.diagonal() -= y.cwiseAbs2();
        return a;
    };
    m.B = [d](const Vector&) { return Matrix::Identity(d, d).eval(); };
    m.Q = [weights](const Vector&) { return weights; };
    m.R = config.gamma * weights;
    return m;
}

Vector fourier_ic(std::span<const double> a, double beta, const Vector& grid) {
    Vector y = Vector::Zero(grid.size());
    for (std::size_t k = 1; k <= a.size(); ++k) {
        const double c = a[k - 1] / 2.0 * std::pow(static_cast<double>(k), -beta);
        if (c == 0.0) continue;
        y += c * (2.0 * std::numbers::pi * static_cast<double>(k) * grid.array()).cos().matrix();
    }
    return y;
}

Vector random_fourier_ic(std::mt19937_64& rng, double beta, const Vector& grid) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::array<double, 4> a{};
    for (double& c : a) c = u(rng);
    return fourier_ic(a, beta, grid);
}

namespace {

// Endless point source for one sampler.
class PointStream {
public:
    PointStream(const SamplerSpec& s, int d, std::uint64_t seed) : spec_(s), d_(d), rng_(seed) {
        if (s.kind != SamplerKind::fourier && static_cast<int>(s.box.size()) != d)
            throw ArgumentError("sampler: box dimension mismatch");
        if (s.kind == SamplerKind::fourier) grid_ = allen_cahn_grid(d);
    }

    Vector next() {
        switch (spec_.kind) {
            case SamplerKind::uniform: {
                Vector x(d_);
                for (int k = 0; k < d_; ++k)
                    x[k] = std::uniform_real_distribution<double>(spec_.box[k].lo, spec_.box[k].hi)(rng_);
                return x;
            }
            case SamplerKind::halton: {
                if (index_ >= halton_.rows()) halton_ = halton_points(std::max<int>(64, 2 * index_), spec_.box);
                return halton_.row(index_++).transpose();
            }
            case SamplerKind::fourier:
                return random_fourier_ic(rng_, spec_.beta, grid_);
        }
        return {};
    }

private:
    SamplerSpec spec_;
    int d_;
    std::mt19937_64 rng_;
    Vector grid_;
    Matrix halton_;
    int index_ = 0;
};

int sampler_dim(const SamplerSpec& s, int fallback) {
    return s.kind == SamplerKind::fourier ? fallback : static_cast<int>(s.box.size());
}

}  // namespace

Matrix sample_points(const SamplerSpec& sampler, int count, std::uint64_t seed) {
    if (count < 0) throw ArgumentError("sample_points: negative count");
    if (sampler.kind == SamplerKind::fourier) throw ArgumentError("sample_points: Fourier sampling needs a dimension");
    const int d = static_cast<int>(sampler.box.size());
    if (sampler.kind == SamplerKind::halton) return halton_points(count, sampler.box);
    PointStream s(sampler, d, seed);
    Matrix pts(count, d);
    for (int i = 0; i < count; ++i) pts.row(i) = s.next().transpose();
    return pts;
}

Dataset generate_dataset(const TestFunction& f, const SamplerSpec& sampler, int count, std::uint64_t seed) {
    if (count < 0) throw ArgumentError("generate_dataset: negative count");
    if (sampler_dim(sampler, f.d) != f.d) throw ArgumentError("generate_dataset: sampler dimension mismatch");
    PointStream s(sampler, f.d, seed);
    Dataset data;
    data.points.resize(count, f.d);
    data.values.resize(count);
    data.gradients = Matrix(count, f.d);
    for (int i = 0; i < count; ++i) {
        const Vector x = s.next();
        data.points.row(i) = x.transpose();
        data.values[i] = f.value(x);
        data.gradients->row(i) = f.gradient(x).transpose();
    }
    return data;
}

Dataset generate_dataset(const SemilinearModel& model, const SamplerSpec& sampler, int count, std::uint64_t seed,
                         int* skipped) {
    if (count < 0) throw ArgumentError("generate_dataset: negative count");
    if (sampler_dim(sampler, model.d) != model.d) throw ArgumentError("generate_dataset: sampler dimension mismatch");
    PointStream s(sampler, model.d, seed);
    Dataset data;
    data.points.resize(count, model.d);
    data.values.resize(count);
    data.gradients = Matrix(count, model.d);
    int failed = 0;
    for (int i = 0; i < count;) {
        const Vector x = s.next();
        Matrix p;
        try {
            p = sdre_riccati(model, x).P;
        } catch (const Error&) {
            if (++failed > 10 * count + 100) throw FitError("generate_dataset: CARE fails almost everywhere");
            continue;
        }
        const Vector px = p * x;
        data.points.row(i) = x.transpose();
        data.values[i] = x.dot(px);
        data.gradients->row(i) = 2.0 * px.transpose();
        ++i;
    }
    if (skipped) *skipped = failed;
    return data;
}

OracleFunction sdre_value_oracle(const SemilinearModel& model, double tolerance) {
    return OracleFunction(
        [model, tolerance](const Vector& x) {
            if (x.isZero(0.0)) return OracleSample{0.0, Vector::Zero(x.size())};
            const Matrix p = sdre_riccati(model, x, tolerance).P;
            const Vector px = p * x;
            return OracleSample{x.dot(px), 2.0 * px};
        },
        true);
}

}  // namespace hdsurr
