#include "doctest.h"
#include "helpers.hpp"

#include "hdsurr/errors.hpp"
#include "hdsurr/poly_basis.hpp"

#include <cmath>

using namespace hdsurr;
using namespace testing_helpers;

TEST_CASE("legendre values at reference points") {
    const BasisSpec spec(3, {-1.0, 1.0});
    CHECK(eval_basis_vector(spec, 0.7)[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(eval_basis_vector(spec, 1.0)[1] == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));
    CHECK(eval_basis_vector(spec, 0.5)[2] ==
          doctest::Approx(std::sqrt(5.0) * (3 * 0.25 - 1) / 2).epsilon(1e-14));
    CHECK(eval_basis_vector(spec, 0.5)[2] == doctest::Approx(-0.2795085).epsilon(1e-7));
}

TEST_CASE("legendre derivatives") {
    const BasisSpec spec(6, {-1.0, 1.0});
    for (double x : {-1.0, -0.2, 0.3, 0.99}) CHECK(eval_basis_derivative(spec, x)[0] == 0.0);
    CHECK(eval_basis_derivative(spec, 0.3)[1] == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));

    std::mt19937_64 rng(7);
    for (const Interval dom : {Interval{-1, 1}, Interval{0, 2.5}, Interval{-3, -1}}) {
        const BasisSpec s(8, dom);
        for (int t = 0; t < 100; ++t) {
            const double x = uniform_point(rng, 1, dom.lo + 1e-3, dom.hi - 1e-3)[0];
            const Vector dv = eval_basis_derivative(s, x);
            const double h = 1e-6;
            const Vector fd = (eval_basis_vector(s, x + h) - eval_basis_vector(s, x - h)) / (2 * h);
            CHECK(rel_diff(dv, fd) < 1e-6);
        }
    }
}

TEST_CASE("values and derivatives from one pass agree with the separate calls") {
    const BasisSpec spec(5, {0.0, 3.0});
    Vector v(5), dv(5);
    eval_basis(spec, 1.2, v.data(), dv.data());
    CHECK((v - eval_basis_vector(spec, 1.2)).norm() == 0.0);
    CHECK((dv - eval_basis_derivative(spec, 1.2)).norm() == 0.0);
}

TEST_CASE("points outside the domain are rejected") {
    const BasisSpec spec(4, {0.0, 1.0});
    CHECK_THROWS_AS(eval_basis_vector(spec, 1.1), DomainError);
    CHECK_THROWS_AS(eval_basis_derivative(spec, -0.01), DomainError);
    CHECK_NOTHROW(eval_basis_vector(spec, 1.0));
    CHECK_THROWS_AS(BasisSpec(0, {0.0, 1.0}), ArgumentError);
    CHECK_THROWS_AS(BasisSpec(3, {1.0, 1.0}), ArgumentError);
}

TEST_CASE("domain map matches the affine pullback exactly") {
    const BasisSpec ref(6, {-1.0, 1.0});
    const BasisSpec dom(6, {2.0, 6.0});
    for (double t : {-1.0, -0.5, 0.0, 0.25, 1.0}) {
        const double x = 4.0 + 2.0 * t;
        CHECK((eval_basis_vector(dom, x) - eval_basis_vector(ref, t)).norm() == 0.0);
    }
}

TEST_CASE("gauss-legendre rules") {
    const auto r1 = gauss_legendre_rule(1, {-1, 1});
    CHECK(r1.nodes[0] == doctest::Approx(0.0));
    CHECK(r1.weights[0] == doctest::Approx(2.0));

    const auto r2 = gauss_legendre_rule(2, {-1, 1});
    CHECK(r2.nodes[0] == doctest::Approx(-0.5773503).epsilon(1e-7));
    CHECK(r2.nodes[1] == doctest::Approx(0.5773503).epsilon(1e-7));
    CHECK(r2.weights[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r2.weights[1] == doctest::Approx(1.0).epsilon(1e-14));

    const auto r3 = gauss_legendre_rule(3, {-1, 1});
    CHECK(std::abs(r3.weights.dot(r3.nodes.array().pow(4).matrix()) - 0.4) < 1e-12);

    CHECK_THROWS_AS(gauss_legendre_rule(0, {-1, 1}), ArgumentError);
}

TEST_CASE("quadrature exactness and weight sums over many node counts") {
    for (int n : {1, 2, 5, 7, 12, 20, 33}) {
        const Interval dom{-0.5, 2.0};
        const auto rule = gauss_legendre_rule(n, dom);
        CHECK(std::abs(rule.weights.sum() - dom.length()) < 1e-12);
        for (Eigen::Index i = 1; i < n; ++i) CHECK(rule.nodes[i] > rule.nodes[i - 1]);
        CHECK((rule.weights.array() > 0).all());
        for (int p = 0; p <= 2 * n - 1; ++p) {
            const double exact = (std::pow(dom.hi, p + 1) - std::pow(dom.lo, p + 1)) / (p + 1);
            const double approx = rule.weights.dot(rule.nodes.array().pow(p).matrix());
            CHECK(std::abs(approx - exact) <= 1e-12 * std::max(1.0, std::abs(exact)));
        }
    }
}

TEST_CASE("orthonormality under the uniform probability measure") {
    for (int n : {1, 4, 9, 20}) {
        const BasisSpec spec(n, {-2.0, 5.0});
        const auto rule = gauss_legendre_rule(n + 1, spec.domain());
        const Matrix psi = basis_matrix(spec, rule.nodes);
        const Matrix gram =
            psi.transpose() * (rule.weights / spec.domain().length()).asDiagonal() * psi;
        CHECK((gram - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
    }
}
