#include "hdsurr/neural_surrogate.hpp"

#include "hdsurr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

namespace hdsurr {

Activation parse_activation(std::string_view name) {
    if (name == "relu") return Activation::relu;
    if (name == "tanh") return Activation::tanh;
    throw ArgumentError("unknown activation '" + std::string(name) + "'");
}

std::string to_string(Activation activation) { return activation == Activation::relu ? "relu" : "tanh"; }

MLPConfig mlp_3x512(int input_dim, Activation activation, bool residual) {
    MLPConfig c;
    c.input_dim = input_dim;
    c.hidden_widths = {512, 512, 512, 512};
    c.activation = activation;
    c.residual = residual;
    return c;
}

namespace {

void validate(const MLPConfig& c) {
    if (c.input_dim < 1) throw ArgumentError("mlp: input_dim must be >= 1");
    for (int w : c.hidden_widths)
        if (w < 1) throw ArgumentError("mlp: hidden widths must be >= 1");
    if (c.residual)
        for (std::size_t l = 1; l < c.hidden_widths.size(); ++l)
            if (c.hidden_widths[l] != c.hidden_widths[l - 1])
                throw ArgumentError("mlp: residual layers need equal consecutive widths");
}

std::vector<int> layer_dims(const MLPConfig& c) {
    std::vector<int> dims{c.input_dim};
    dims.insert(dims.end(), c.hidden_widths.begin(), c.hidden_widths.end());
    dims.push_back(1);
    return dims;
}

void check_shapes(const MLPParams& p, const MLPConfig& c) {
    const auto dims = layer_dims(c);
    const std::size_t layers = dims.size() - 1;
    if (p.weights.size() != layers || p.biases.size() != layers)
        throw ArgumentError("mlp: parameter layer count does not match the config");
    for (std::size_t l = 0; l < layers; ++l)
        if (p.weights[l].rows() != dims[l + 1] || p.weights[l].cols() != dims[l] || p.biases[l].size() != dims[l + 1])
            throw ArgumentError("mlp: parameter shapes do not match the config");
}

bool is_residual(const MLPConfig& c, const std::vector<int>& dims, std::size_t l) {
    return c.residual && dims[l] == dims[l + 1];
}

Matrix activate(const Matrix& z, Activation a) {
    return a == Activation::relu ? Matrix(z.cwiseMax(0.0)) : Matrix(z.array().tanh());
}

// σ'(z) given z and σ(z).
Matrix activation_slope(const Matrix& z, const Matrix& s, Activation a) {
    if (a == Activation::relu) return (z.array() > 0.0).cast<double>();
    return 1.0 - s.array().square();
}

struct Tape {
    std::vector<Matrix> inputs;  ///< hₗ, one column per sample
    std::vector<Matrix> pre;     ///< Wₗhₗ + bₗ
    std::vector<Matrix> act;     ///< σ(pre)
    Matrix output;               ///< 1 × B
};

Tape run(const MLPParams& p, const MLPConfig& c, const Matrix& columns) {
    const auto dims = layer_dims(c);
    const std::size_t hidden = c.hidden_widths.size();
    Tape t;
    Matrix h = columns;
    for (std::size_t l = 0; l < hidden; ++l) {
        Matrix z = p.weights[l] * h;
        z.colwise() += p.biases[l];
        Matrix s = activate(z, c.activation);
        Matrix next = is_residual(c, dims, l) ? Matrix(h + s) : s;
        t.inputs.push_back(std::move(h));
        t.pre.push_back(std::move(z));
        t.act.push_back(std::move(s));
        h = std::move(next);
    }
    t.output = p.weights[hidden] * h;
    t.output.colwise() += p.biases[hidden];
    t.inputs.push_back(std::move(h));
    return t;
}

// Backpropagates dL/d(output) through the tape; fills grad (if given) and
// returns dL/d(input columns).
Matrix backprop(const MLPParams& p, const MLPConfig& c, const Tape& t, const Matrix& d_out, MLPParams* grad) {
    const auto dims = layer_dims(c);
    const std::size_t hidden = c.hidden_widths.size();
    if (grad) {
        grad->weights[hidden] = d_out * t.inputs[hidden].transpose();
        grad->biases[hidden] = d_out.rowwise().sum();
    }
    Matrix dh = p.weights[hidden].transpose() * d_out;
    for (std::size_t l = hidden; l-- > 0;) {
        const Matrix dz = dh.cwiseProduct(activation_slope(t.pre[l], t.act[l], c.activation));
        if (grad) {
            grad->weights[l] = dz * t.inputs[l].transpose();
            grad->biases[l] = dz.rowwise().sum();
        }
        Matrix below = p.weights[l].transpose() * dz;
        if (is_residual(c, dims, l)) below += dh;
        dh = std::move(below);
    }
    return dh;
}

}  // namespace

long parameter_count(const MLPConfig& config) {
    validate(config);
    const auto dims = layer_dims(config);
    long total = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) total += long(dims[l] + 1) * dims[l + 1];
    return total;
}

long MLPParams::size() const {
    long total = 0;
    for (const auto& w : weights) total += w.size();
    for (const auto& b : biases) total += b.size();
    return total;
}

MLPParams zero_params(const MLPConfig& config) {
    validate(config);
    const auto dims = layer_dims(config);
    MLPParams p;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        p.weights.push_back(Matrix::Zero(dims[l + 1], dims[l]));
        p.biases.push_back(Vector::Zero(dims[l + 1]));
    }
    return p;
}

MLPParams init_params(const MLPConfig& config) {
    MLPParams p = zero_params(config);
    std::mt19937_64 rng(config.seed);
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(p.weights[l].cols()));
        std::uniform_real_distribution<double> u(-bound, bound);
        for (Eigen::Index i = 0; i < p.weights[l].size(); ++i) p.weights[l].data()[i] = u(rng);
        for (Eigen::Index i = 0; i < p.biases[l].size(); ++i) p.biases[l][i] = u(rng);
    }
    return p;
}

double forward(const MLPParams& params, const MLPConfig& config, const Vector& x) {
    if (x.size() != config.input_dim) throw ArgumentError("mlp forward: dimension mismatch");
    check_shapes(params, config);
    return run(params, config, x).output(0, 0);
}

Vector forward_batch(const MLPParams& params, const MLPConfig& config, const Matrix& points) {
    if (points.cols() != config.input_dim) throw ArgumentError("mlp forward: dimension mismatch");
    check_shapes(params, config);
    constexpr Eigen::Index kChunk = 1024;
    Vector out(points.rows());
    for (Eigen::Index start = 0; start < points.rows(); start += kChunk) {
        const Eigen::Index len = std::min(kChunk, points.rows() - start);
        out.segment(start, len) = run(params, config, points.middleRows(start, len).transpose()).output.transpose();
    }
    return out;
}

LossGrad loss_and_grad(const MLPParams& params, const MLPConfig& config, const Matrix& points, const Vector& targets) {
    if (points.rows() == 0 || points.rows() != targets.size())
        throw ArgumentError("mlp loss: batch must be nonempty and match the targets");
    if (points.cols() != config.input_dim) throw ArgumentError("mlp loss: dimension mismatch");
    check_shapes(params, config);
    const Tape t = run(params, config, points.transpose());
    const Eigen::RowVectorXd residual = t.output.row(0) - targets.transpose();
    const double n = static_cast<double>(targets.size());
    LossGrad out;
    out.loss = residual.squaredNorm() / n;
    out.grad = zero_params(config);
    backprop(params, config, t, (2.0 / n) * residual, &out.grad);
    return out;
}

Vector input_gradient(const MLPParams& params, const MLPConfig& config, const Vector& x) {
    if (x.size() != config.input_dim) throw ArgumentError("mlp gradient: dimension mismatch");
    check_shapes(params, config);
    const Tape t = run(params, config, x);
    return backprop(params, config, t, Matrix::Ones(1, 1), nullptr).col(0);
}

AdamState adam_init(const MLPParams& params) {
    AdamState s;
    s.m = params;
    for (auto& w : s.m.weights) w.setZero();
    for (auto& b : s.m.biases) b.setZero();
    s.v = s.m;
    return s;
}

void adam_step(MLPParams& params, AdamState& state, const MLPParams& grad, const TrainConfig& config) {
    ++state.step;
    const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
    auto update = [&](auto& p, auto& m, auto& v, const auto& g) {
        m = config.beta1 * m + (1.0 - config.beta1) * g;
        v = config.beta2 * v + (1.0 - config.beta2) * g.cwiseAbs2();
        p.array() -= config.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + config.adam_eps);
    };
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        update(params.weights[l], state.m.weights[l], state.v.weights[l], grad.weights[l]);
        update(params.biases[l], state.m.biases[l], state.v.biases[l], grad.biases[l]);
    }
}

NeuralSurrogate::NeuralSurrogate(MLPConfig config, MLPParams params)
    : config_(std::move(config)), params_(std::move(params)) {
    validate(config_);
    check_shapes(params_, config_);
}

NeuralFit train_mlp(const Dataset& data, const MLPConfig& mlp, const TrainConfig& train) {
    if (data.size() == 0) throw ArgumentError("train_mlp: empty dataset");
    if (data.dim() != mlp.input_dim) throw ArgumentError("train_mlp: data dimension differs from input_dim");
    if (train.batch_size < 1) throw ArgumentError("train_mlp: batch_size must be >= 1");
    if (!(train.learning_rate > 0.0)) throw ArgumentError("train_mlp: learning_rate must be positive");
    if (train.epochs < 0) throw ArgumentError("train_mlp: epochs must be >= 0");

    Stopwatch clock;
    MLPParams params = init_params(mlp);
    AdamState adam = adam_init(params);
    NeuralFit fit;
    fit.initial_loss = (forward_batch(params, mlp, data.points) - data.values).squaredNorm() / data.size();

    const Eigen::Index n = data.size();
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(train.seed);
    Matrix batch_x;
    Vector batch_y;
    for (int epoch = 0; epoch < train.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double sum = 0.0;
        for (Eigen::Index start = 0; start < n; start += train.batch_size) {
            const Eigen::Index len = std::min<Eigen::Index>(train.batch_size, n - start);
            batch_x.resize(len, data.dim());
            batch_y.resize(len);
            for (Eigen::Index i = 0; i < len; ++i) {
                batch_x.row(i) = data.points.row(order[start + i]);
                batch_y[i] = data.values[order[start + i]];
            }
            const LossGrad lg = loss_and_grad(params, mlp, batch_x, batch_y);
            if (!std::isfinite(lg.loss))
                throw FitError("train_mlp: loss became non-finite in epoch " + std::to_string(epoch + 1));
            sum += lg.loss * static_cast<double>(len);
            adam_step(params, adam, lg.grad, train);
        }
        fit.stats.history.push_back(sum / static_cast<double>(n));
    }

    const Vector pred = forward_batch(params, mlp, data.points);
    if (!pred.allFinite()) throw FitError("train_mlp: trained network produces non-finite outputs");
    fit.stats.err_train_2 = relative_l2(pred, data.values);
    fit.stats.dofs = parameter_count(mlp);
    fit.stats.n_train_samples = n;
    fit.stats.sweeps = train.epochs;
    fit.stats.converged = true;
    fit.stats.cpu_train_s = clock.seconds();
    fit.surrogate = NeuralSurrogate(mlp, std::move(params));
    return fit;
}

void write_training_log(std::ostream& out, const NeuralFit& fit) {
    out << "epoch,train_loss\n";
    out.precision(17);
    out << 0 << ',' << fit.initial_loss << '\n';
    for (std::size_t e = 0; e < fit.stats.history.size(); ++e) out << e + 1 << ',' << fit.stats.history[e] << '\n';
}

}  // namespace hdsurr
