#include "doctest.h"
#include "helpers.hpp"

#include "hdsurr/errors.hpp"
#include "hdsurr/neural_surrogate.hpp"
#include "hdsurr/serialization.hpp"

#include <cmath>
#include <sstream>

using namespace hdsurr;
using testing_helpers::fd_gradient;
using testing_helpers::rel_diff;
using testing_helpers::uniform_point;

namespace {

MLPConfig small_config(Activation act, bool residual, std::vector<int> widths = {5, 5}) {
    MLPConfig c;
    c.input_dim = 3;
    c.hidden_widths = std::move(widths);
    c.activation = act;
    c.residual = residual;
    c.seed = 21;
    return c;
}

Dataset nn_data(int n, int d, std::uint64_t seed, const std::function<double(const Vector&)>& f) {
    std::mt19937_64 rng(seed);
    Dataset data;
    data.points.resize(n, d);
    data.values.resize(n);
    for (int i = 0; i < n; ++i) {
        const Vector x = uniform_point(rng, d);
        data.points.row(i) = x.transpose();
        data.values[i] = f(x);
    }
    return data;
}

// Central differences of the batch loss with respect to one parameter entry.
double fd_param(MLPParams p, const MLPConfig& c, const Dataset& data, bool weight, std::size_t l, Eigen::Index i,
                double h) {
    double& entry = weight ? p.weights[l].data()[i] : p.biases[l][i];
    const double orig = entry;
    entry = orig + h;
    const double up = loss_and_grad(p, c, data.points, data.values).loss;
    entry = orig - h;
    const double down = loss_and_grad(p, c, data.points, data.values).loss;
    return (up - down) / (2 * h);
}

}  // namespace

TEST_CASE("3x512 network size") {
    CHECK(parameter_count(mlp_3x512(16)) == 797185);
    CHECK(init_params(mlp_3x512(16)).size() == 797185);
}

TEST_CASE("zero parameters give zero output and gradient") {
    const auto c = small_config(Activation::relu, false);
    const MLPParams p = zero_params(c);
    std::mt19937_64 rng(1);
    for (int t = 0; t < 5; ++t) {
        const Vector x = uniform_point(rng, 3);
        CHECK(forward(p, c, x) == 0.0);
        CHECK(input_gradient(p, c, x) == Vector::Zero(3));
    }
}

TEST_CASE("residual layer with zero weights is the identity") {
    const auto c = small_config(Activation::tanh, true, {3, 3});
    MLPParams p = zero_params(c);
    p.weights[2] << 1.0, 2.0, 3.0;
    p.biases[2][0] = 0.5;
    std::mt19937_64 rng(2);
    for (int t = 0; t < 5; ++t) {
        const Vector x = uniform_point(rng, 3);
        CHECK(forward(p, c, x) == doctest::Approx(x[0] + 2 * x[1] + 3 * x[2] + 0.5).epsilon(1e-15));
        CHECK(input_gradient(p, c, x) == Vector(Eigen::Vector3d(1.0, 2.0, 3.0)));
    }
}

TEST_CASE("single tanh unit") {
    const auto c = small_config(Activation::tanh, false, {1});
    MLPParams p = zero_params(c);
    p.weights[0].setOnes();
    p.weights[1](0, 0) = 2.0;
    std::mt19937_64 rng(3);
    for (int t = 0; t < 5; ++t) {
        const Vector x = uniform_point(rng, 3);
        CHECK(forward(p, c, x) == doctest::Approx(2.0 * std::tanh(x.sum())).epsilon(1e-14));
    }
}

TEST_CASE("parameter gradients match finite differences") {
    const auto data = nn_data(12, 3, 4, [](const Vector& x) { return std::sin(x.sum()); });
    for (auto act : {Activation::tanh, Activation::relu}) {
        for (bool residual : {false, true}) {
            CAPTURE(to_string(act));
            CAPTURE(residual);
            const auto c = small_config(act, residual);
            const MLPParams p = init_params(c);
            const auto lg = loss_and_grad(p, c, data.points, data.values);
            const double tol = act == Activation::tanh ? 1e-4 : 1e-3;
            // With h = 1e-6 relu kinks are crossed with negligible probability.
            for (std::size_t l = 0; l < p.weights.size(); ++l) {
                for (Eigen::Index i = 0; i < p.weights[l].size(); ++i) {
                    const double fd = fd_param(p, c, data, true, l, i, 1e-6);
                    CHECK(std::abs(lg.grad.weights[l].data()[i] - fd) <= tol * std::max(1e-3, std::abs(fd)));
                }
                for (Eigen::Index i = 0; i < p.biases[l].size(); ++i) {
                    const double fd = fd_param(p, c, data, false, l, i, 1e-6);
                    CHECK(std::abs(lg.grad.biases[l][i] - fd) <= tol * std::max(1e-3, std::abs(fd)));
                }
            }
        }
    }
}

TEST_CASE("perfect fit has zero loss and zero gradient") {
    const auto c = small_config(Activation::tanh, false);
    const MLPParams p = init_params(c);
    auto data = nn_data(20, 3, 5, [](const Vector&) { return 0.0; });
    data.values = forward_batch(p, c, data.points);
    const auto lg = loss_and_grad(p, c, data.points, data.values);
    CHECK(lg.loss == 0.0);
    for (const auto& w : lg.grad.weights) CHECK(w.norm() == 0.0);
    for (const auto& b : lg.grad.biases) CHECK(b.norm() == 0.0);
}

TEST_CASE("head-only network has the least-squares gradient") {
    const auto c = small_config(Activation::relu, false, {});
    MLPParams p = init_params(c);
    const auto data = nn_data(30, 3, 6, [](const Vector& x) { return x[0] - 2 * x[2]; });
    const auto lg = loss_and_grad(p, c, data.points, data.values);
    const Vector r = (data.points * p.weights[0].transpose()).col(0).array() + p.biases[0][0] - data.values.array();
    const Vector expected = 2.0 / 30.0 * data.points.transpose() * r;
    CHECK(rel_diff(lg.grad.weights[0].transpose(), expected) <= 1e-13);
    CHECK(lg.grad.biases[0][0] == doctest::Approx(2.0 / 30.0 * r.sum()).epsilon(1e-13));
    // Input gradient of a linear model is its weight vector everywhere.
    std::mt19937_64 rng(7);
    CHECK(input_gradient(p, c, uniform_point(rng, 3)) == Vector(p.weights[0].transpose()));
}

TEST_CASE("input gradients match finite differences") {
    std::mt19937_64 rng(8);
    for (bool residual : {false, true}) {
        const auto c = small_config(Activation::tanh, residual, {6, 6, 6});
        const MLPParams p = init_params(c);
        auto f = [&](const Vector& x) { return forward(p, c, x); };
        for (int t = 0; t < 20; ++t) {
            const Vector x = uniform_point(rng, 3);
            CHECK(rel_diff(input_gradient(p, c, x), fd_gradient(f, x)) <= 1e-5);
        }
    }
}

TEST_CASE("adam steps") {
    const auto c = small_config(Activation::tanh, false, {});
    TrainConfig t;
    MLPParams p = zero_params(c);
    p.weights[0] << 0.3, -0.2, 0.1;
    const MLPParams start = p;
    AdamState s = adam_init(p);
    MLPParams g = zero_params(c);
    adam_step(p, s, g, t);
    CHECK(p == start);

    g.weights[0](0, 0) = 2.0;
    p = start;
    s = adam_init(p);
    adam_step(p, s, g, t);
    const double first = start.weights[0](0, 0) - p.weights[0](0, 0);
    CHECK(first == doctest::Approx(1e-3 * 2.0 / (2.0 + 1e-8)).epsilon(1e-12));
    const double before = p.weights[0](0, 0);
    adam_step(p, s, g, t);
    const double second = before - p.weights[0](0, 0);
    CHECK(second >= 0.9e-3);
    CHECK(second <= 1e-3);
}

TEST_CASE("training fits a linear target") {
    const int d = 4;
    const auto data = nn_data(1000, d, 9, [](const Vector& x) { return x.sum(); });
    MLPConfig c;
    c.input_dim = d;
    c.hidden_widths = {128, 128};
    c.seed = 1;
    TrainConfig t;
    t.epochs = 200;
    t.seed = 2;
    const auto fit = train_mlp(data, c, t);
    CHECK(fit.stats.err_train_2 <= 1e-2);
    CHECK(fit.stats.history.size() == 200);
    CHECK(fit.stats.dofs == parameter_count(c));
}

TEST_CASE("training on the zero target decreases the loss") {
    const auto data = nn_data(256, 3, 10, [](const Vector&) { return 0.0; });
    TrainConfig t;
    t.epochs = 1;
    const auto fit = train_mlp(data, small_config(Activation::relu, false, {16, 16}), t);
    const double after = (fit.surrogate.values(data.points)).squaredNorm() / 256;
    CHECK(after < fit.initial_loss);
}

TEST_CASE("training is deterministic") {
    const auto data = nn_data(300, 3, 11, [](const Vector& x) { return std::cos(x[0]) * x[1]; });
    TrainConfig t;
    t.epochs = 3;
    const auto c = small_config(Activation::tanh, true, {8, 8});
    const auto a = train_mlp(data, c, t), b = train_mlp(data, c, t);
    CHECK(a.surrogate.params() == b.surrogate.params());
    std::ostringstream log;
    write_training_log(log, a);
    CHECK(log.str().rfind("epoch,train_loss\n0,", 0) == 0);
}

TEST_CASE("divergence is reported") {
    const auto data = nn_data(64, 3, 12, [](const Vector& x) { return 1e3 * x.sum(); });
    TrainConfig t;
    t.epochs = 50;
    t.learning_rate = 1e300;
    CHECK_THROWS_AS(train_mlp(data, small_config(Activation::relu, false), t), FitError);
}

TEST_CASE("network configuration is validated") {
    CHECK_THROWS_AS(parameter_count(small_config(Activation::relu, true, {4, 5})), ArgumentError);
    CHECK_THROWS_AS(parameter_count(small_config(Activation::relu, false, {0})), ArgumentError);
    const auto c = small_config(Activation::relu, false);
    CHECK_THROWS_AS(forward(init_params(c), c, Vector::Zero(2)), ArgumentError);
    CHECK_THROWS_AS(parse_activation("gelu"), ArgumentError);
}

TEST_CASE("networks round-trip through the binary container") {
    const auto c = small_config(Activation::tanh, true, {4, 4});
    const NeuralSurrogate s(c, init_params(c));
    std::stringstream buf;
    write_mlp_binary(buf, s);
    const auto r = read_mlp_binary(buf);
    CHECK(r.params() == s.params());
    CHECK(r.config().hidden_widths == c.hidden_widths);
    CHECK(r.config().residual);
    CHECK(r.config().activation == Activation::tanh);
}
