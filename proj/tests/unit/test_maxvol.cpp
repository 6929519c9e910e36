#include "doctest.h"
#include "helpers.hpp"

#include "hdsurr/errors.hpp"
#include "hdsurr/maxvol.hpp"

#include <algorithm>

using namespace hdsurr;

namespace {
double dominance(const Matrix& a, const std::vector<int>& rows) {
    Matrix sub(rows.size(), a.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) sub.row(i) = a.row(rows[i]);
    return (a * sub.inverse()).cwiseAbs().maxCoeff();
}
}  // namespace

TEST_CASE("maxvol on small matrices") {
    Matrix a(3, 2);
    a << 1, 0, 0, 1, 0.5, 0.5;
    auto rows = maxvol(a);
    std::sort(rows.begin(), rows.end());
    CHECK(rows == std::vector<int>{0, 1});

    Matrix col(3, 1);
    col << 1, 2, 3;
    CHECK(maxvol(col) == std::vector<int>{2});
}

TEST_CASE("ties resolve to the lowest row") {
    Matrix col(4, 1);
    col << 1, -3, 3, 2;
    CHECK(maxvol(col) == std::vector<int>{1});
}

TEST_CASE("property: dominance bound on random matrices") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 50, r = 1 + trial % 8;
        Matrix a(n, r);
        for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = nd(rng);
        for (double delta : {1e-2, 1e-1}) {
            const auto rows = maxvol(a, delta);
            CHECK(rows.size() == static_cast<std::size_t>(r));
            CHECK(dominance(a, rows) <= 1.0 + delta + 1e-12);
        }
    }
}

TEST_CASE("rank deficiency is reported with the mode") {
    Matrix a(5, 2);
    a.col(0) = Vector::LinSpaced(5, 1, 5);
    a.col(1) = 2 * a.col(0);
    try {
        maxvol(a, 1e-2, 7);
        FAIL("expected PivotError");
    } catch (const PivotError& e) {
        CHECK(e.mode() == 7);
    }
    CHECK_THROWS_AS(maxvol(Matrix::Ones(1, 2)), ArgumentError);
}
