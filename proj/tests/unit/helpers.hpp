#pragma once

#include "hdsurr/common.hpp"
#include "hdsurr/tensor_train.hpp"

#include <functional>
#include <random>

namespace testing_helpers {

using hdsurr::Matrix;
using hdsurr::Vector;

inline Vector uniform_point(std::mt19937_64& rng, int d, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Vector x(d);
    for (int i = 0; i < d; ++i) x[i] = u(rng);
    return x;
}

/// Central differences, step h.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, Vector x, double h = 1e-6) {
    Vector g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        x[i] = xi + h;
        const double fp = f(x);
        x[i] = xi - h;
        const double fm = f(x);
        x[i] = xi;
        g[i] = (fp - fm) / (2 * h);
    }
    return g;
}

inline double rel_diff(const Vector& a, const Vector& b) {
    const double s = std::max({a.norm(), b.norm(), 1e-300});
    return (a - b).norm() / s;
}

inline std::vector<hdsurr::BasisSpec> legendre_bases(int d, int n, double lo = -1.0, double hi = 1.0) {
    return std::vector<hdsurr::BasisSpec>(d, hdsurr::BasisSpec(n, {lo, hi}));
}

inline hdsurr::FunctionalTT random_ftt(const std::vector<int>& sizes, const std::vector<int>& ranks,
                                       std::uint64_t seed) {
    std::vector<hdsurr::BasisSpec> bases;
    for (int n : sizes) bases.emplace_back(n, hdsurr::Interval{-1.0, 1.0});
    return {hdsurr::TensorTrain::random(sizes, ranks, seed), bases};
}

}  // namespace testing_helpers
