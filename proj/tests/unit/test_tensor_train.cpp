#include "doctest.h"
#include "helpers.hpp"

#include "hdsurr/errors.hpp"
#include "hdsurr/tensor_train.hpp"

#include <cmath>

using namespace hdsurr;
using namespace testing_helpers;

namespace {

// Dense contraction Σ c[i] Π ψ_{i_k}(x_k), the evaluation oracle.
double dense_eval(const DenseTensor& c, const std::vector<BasisSpec>& bases, const Vector& x) {
    std::vector<Vector> psi;
    for (std::size_t k = 0; k < bases.size(); ++k) psi.push_back(eval_basis_vector(bases[k], x[k]));
    double sum = 0.0;
    std::vector<int> idx(c.shape.size(), 0);
    for (std::size_t flat = 0; flat < c.data.size(); ++flat) {
        double w = c.data[flat];
        for (std::size_t k = 0; k < idx.size(); ++k) w *= psi[k][idx[k]];
        sum += w;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            if (++idx[k] < c.shape[k]) break;
            idx[k] = 0;
        }
    }
    return sum;
}

double dense_norm(const DenseTensor& t) {
    double s = 0.0;
    for (double v : t.data) s += v * v;
    return std::sqrt(s);
}

double dense_dist(const DenseTensor& a, const DenseTensor& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) s += (a.data[i] - b.data[i]) * (a.data[i] - b.data[i]);
    return std::sqrt(s);
}

FunctionalTT constant_ftt(int d, int n, double c) {
    std::vector<TTCore> cores;
    for (int k = 0; k < d; ++k) {
        TTCore core(1, n, 1);
        core(0, 0, 0) = k == 0 ? c : 1.0;
        cores.push_back(core);
    }
    return {TensorTrain(cores), legendre_bases(d, n)};
}

}  // namespace

TEST_CASE("constant functional TT") {
    const FunctionalTT one = constant_ftt(4, 3, 1.0);
    std::mt19937_64 rng(1);
    for (int t = 0; t < 5; ++t) {
        const Vector x = uniform_point(rng, 4);
        CHECK(tt_eval(one, x) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(tt_grad(one, x).norm() == 0.0);
    }
}

TEST_CASE("rank-one exponential at the origin") {
    // exp(−x/(2d)) per mode projected on a 7-point Legendre grid via interpolation
    const int d = 16, n = 7;
    const BasisSpec spec(n, {-1, 1});
    const auto rule = gauss_legendre_rule(n, spec.domain());
    const Matrix psi = basis_matrix(spec, rule.nodes);
    Vector vals(n);
    for (int i = 0; i < n; ++i) vals[i] = std::exp(-rule.nodes[i] / (2.0 * d));
    const Vector coef = psi.partialPivLu().solve(vals);
    std::vector<TTCore> cores;
    for (int k = 0; k < d; ++k) {
        TTCore c(1, n, 1);
        for (int i = 0; i < n; ++i) c(0, i, 0) = coef[i];
        cores.push_back(c);
    }
    const FunctionalTT f(TensorTrain(cores), legendre_bases(d, n));
    CHECK(tt_eval(f, Vector::Zero(d)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("evaluation agrees with the dense contraction") {
    const FunctionalTT f = random_ftt({3, 3, 3}, {2, 2}, 11);
    const DenseTensor c = tt_to_dense(f.train());
    std::mt19937_64 rng(2);
    for (int t = 0; t < 20; ++t) {
        const Vector x = uniform_point(rng, 3);
        CHECK(std::abs(tt_eval(f, x) - dense_eval(c, f.bases(), x)) < 1e-12 * std::max(1.0, std::abs(tt_eval(f, x))));
    }
}

TEST_CASE("property: evaluation oracle over random small trains") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> dim(1, 4), size(1, 4), rank(1, 3);
    for (int trial = 0; trial < 60; ++trial) {
        const int d = dim(rng);
        std::vector<int> sizes(d), ranks(d - 1);
        for (auto& n : sizes) n = size(rng);
        for (auto& r : ranks) r = rank(rng);
        const FunctionalTT f = random_ftt(sizes, ranks, 100 + trial);
        const DenseTensor c = tt_to_dense(f.train());
        for (int t = 0; t < 3; ++t) {
            const Vector x = uniform_point(rng, d);
            const double v = tt_eval(f, x);
            CHECK(std::abs(v - dense_eval(c, f.bases(), x)) < 1e-12 * std::max(1.0, std::abs(v)));
        }
    }
}

TEST_CASE("property: gradient against finite differences") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        const int d = 2 + trial % 5;
        const FunctionalTT f = random_ftt(std::vector<int>(d, 4), std::vector<int>(d - 1, 3), 500 + trial);
        const Vector x = uniform_point(rng, d, -0.99, 0.99);
        const Vector g = tt_grad(f, x);
        const Vector fd = fd_gradient([&](const Vector& y) { return tt_eval(f, y); }, x);
        CHECK(rel_diff(g, fd) < 1e-6);
        CHECK(f.gradient(x) == g);
    }
}

TEST_CASE("separable product gradient") {
    const int d = 4, n = 5;
    std::vector<TTCore> cores;
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    for (int k = 0; k < d; ++k) {
        TTCore c(1, n, 1);
        for (int i = 0; i < n; ++i) c(0, i, 0) = nd(rng);
        cores.push_back(c);
    }
    const FunctionalTT f(TensorTrain(cores), legendre_bases(d, n));
    const Vector x = uniform_point(rng, d);
    Vector g(d), gp(d);
    for (int k = 0; k < d; ++k) {
        const Vector coef = Eigen::Map<const Vector>(cores[k].data().data(), n);
        g[k] = eval_basis_vector(f.bases()[k], x[k]).dot(coef);
        gp[k] = eval_basis_derivative(f.bases()[k], x[k]).dot(coef);
    }
    const Vector grad = tt_grad(f, x);
    for (int k = 0; k < d; ++k) {
        double expect = gp[k];
        for (int j = 0; j < d; ++j)
            if (j != k) expect *= g[j];
        CHECK(std::abs(grad[k] - expect) < 1e-10 * std::max(1.0, std::abs(expect)));
    }
}

TEST_CASE("dense conversion") {
    TTCore only(1, 5, 1);
    for (int i = 0; i < 5; ++i) only(0, i, 0) = i + 0.5;
    const DenseTensor single = tt_to_dense(TensorTrain({only}));
    CHECK(single.data == only.data());

    TTCore u(1, 3, 1), w(1, 2, 1);
    u.data() = {1.0, -2.0, 3.0};
    w.data() = {0.5, 4.0};
    const DenseTensor outer = tt_to_dense(TensorTrain({u, w}));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) {
            const int idx[2] = {i, j};
            CHECK(outer(idx) == u.data()[i] * w.data()[j]);
        }

    const auto big = TensorTrain::random(std::vector<int>(8, 10), std::vector<int>(7, 1), 1);
    CHECK_THROWS_AS(tt_to_dense(big), SizeGuardError);
}

TEST_CASE("orthogonalization") {
    const TensorTrain t = TensorTrain::random(std::vector<int>{3, 4, 2, 3}, std::vector<int>{2, 3, 2}, 9);
    const DenseTensor before = tt_to_dense(t);
    for (int pivot = 0; pivot < 4; ++pivot) {
        const TensorTrain o = tt_orthogonalize(t, pivot);
        CHECK(dense_dist(tt_to_dense(o), before) < 1e-12 * dense_norm(before));
        for (int k = 0; k < 4; ++k) {
            const TTCore& c = o.core(k);
            if (k < pivot) {
                const Matrix g = c.left_unfolding().transpose() * c.left_unfolding();
                CHECK((g - Matrix::Identity(g.rows(), g.cols())).norm() < 1e-12);
            } else if (k > pivot) {
                const Matrix g = c.right_unfolding() * c.right_unfolding().transpose();
                CHECK((g - Matrix::Identity(g.rows(), g.cols())).norm() < 1e-12);
            }
        }
        const auto& pc = o.core(pivot).data();
        const double pivot_norm = Eigen::Map<const Vector>(pc.data(), pc.size()).norm();
        CHECK(std::abs(pivot_norm - dense_norm(before)) < 1e-12 * dense_norm(before));

        // orthogonalizing again leaves the tensor unchanged
        const TensorTrain again = tt_orthogonalize(o, pivot);
        CHECK(dense_dist(tt_to_dense(again), before) < 1e-12 * dense_norm(before));
    }
}

TEST_CASE("rounding") {
    // rank-one tensor embedded at rank two
    const TensorTrain r1 = TensorTrain::random(std::vector<int>{3, 3, 3}, std::vector<int>{1, 1}, 21);
    const TensorTrain r2 = tt_axpby(0.25, r1, 0.75, r1);
    CHECK(r2.ranks() == std::vector<int>{2, 2});
    const TensorTrain rounded = tt_round(r2, 1e-10);
    CHECK(rounded.ranks() == std::vector<int>{1, 1});
    CHECK(dense_dist(tt_to_dense(rounded), tt_to_dense(r1)) <= 1e-14 * dense_norm(tt_to_dense(r1)) * 10);

    // lossless rounding only drops exact deficiency
    const TensorTrain full = TensorTrain::random(std::vector<int>{3, 3, 3}, std::vector<int>{3, 3}, 22);
    CHECK(tt_round(full, 0.0).ranks() == std::vector<int>{3, 3});
    CHECK(tt_round(r2, 0.0).ranks() == std::vector<int>{1, 1});

    // error bound and idempotence
    const TensorTrain t = TensorTrain::random(std::vector<int>{4, 5, 4}, std::vector<int>{4, 4}, 23);
    const DenseTensor dense = tt_to_dense(t);
    for (double tol : {1e-3, 1e-1, 0.5}) {
        const TensorTrain a = tt_round(t, tol);
        CHECK(dense_dist(tt_to_dense(a), dense) <= tol * dense_norm(dense) * (1 + 1e-12));
        for (std::size_t k = 0; k < a.ranks().size(); ++k) CHECK(a.ranks()[k] <= t.ranks()[k]);
        const TensorTrain b = tt_round(a, tol);
        CHECK(b.ranks() == a.ranks());
        CHECK(dense_dist(tt_to_dense(b), tt_to_dense(a)) <= 1e-14 * dense_norm(dense) * 10);
    }
    CHECK_THROWS_AS(tt_round(t, 1.0), ArgumentError);
}

TEST_CASE("degrees of freedom") {
    CHECK(tt_dofs(TensorTrain::random(std::vector<int>{2, 2, 2}, std::vector<int>{1, 1}, 0)) == 6);
    CHECK(tt_dofs(TensorTrain::random(std::vector<int>{5}, std::vector<int>{}, 0)) == 5);
    CHECK(tt_dofs(TensorTrain::random(std::vector<int>{3, 3, 3, 3}, std::vector<int>{2, 3, 2}, 0)) == 48);
}

TEST_CASE("inner products, sums and distances") {
    const TensorTrain a = TensorTrain::random(std::vector<int>{3, 2, 4}, std::vector<int>{2, 3}, 31);
    const TensorTrain b = TensorTrain::random(std::vector<int>{3, 2, 4}, std::vector<int>{3, 2}, 32);
    const DenseTensor da = tt_to_dense(a), db = tt_to_dense(b);
    double dot = 0.0;
    for (std::size_t i = 0; i < da.data.size(); ++i) dot += da.data[i] * db.data[i];
    CHECK(tt_dot(a, b) == doctest::Approx(dot).epsilon(1e-12));
    CHECK(tt_norm(a) == doctest::Approx(dense_norm(da)).epsilon(1e-12));
    const DenseTensor sum = tt_to_dense(tt_axpby(2.0, a, -0.5, b));
    for (std::size_t i = 0; i < sum.data.size(); ++i)
        CHECK(sum.data[i] == doctest::Approx(2.0 * da.data[i] - 0.5 * db.data[i]).epsilon(1e-12));
    CHECK(tt_distance(a, b) == doctest::Approx(dense_dist(da, db)).epsilon(1e-10));
    CHECK(tt_distance(a, a) < 1e-12 * tt_norm(a));
}

TEST_CASE("shape validation") {
    CHECK_THROWS_AS(TensorTrain({TTCore(2, 3, 1)}), ArgumentError);
    CHECK_THROWS_AS(TensorTrain({TTCore(1, 3, 2), TTCore(3, 3, 1)}), ArgumentError);
    CHECK_THROWS_AS(FunctionalTT(TensorTrain({TTCore(1, 3, 1)}), legendre_bases(1, 4)), ArgumentError);
    const FunctionalTT f = random_ftt({3, 3}, {2}, 1);
    CHECK_THROWS_AS(tt_eval(f, Vector::Zero(3)), ArgumentError);
    CHECK_THROWS_AS(tt_eval(f, Vector::Constant(2, 1.5)), DomainError);
}
