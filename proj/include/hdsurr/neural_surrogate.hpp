#pragma once

#include "hdsurr/common.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace hdsurr {

enum class Activation { relu, tanh };

Activation parse_activation(std::string_view name);
std::string to_string(Activation activation);

/// Hidden layers hₗ₊₁ = σ(Wₗhₗ + bₗ), or hₗ + σ(Wₗhₗ + bₗ) when `residual` and
/// the layer keeps its width; linear scalar head.
struct MLPConfig {
    int input_dim = 1;
    std::vector<int> hidden_widths{512, 512, 512, 512};
    Activation activation = Activation::relu;
    bool residual = false;
    std::uint64_t seed = 0;
};

/// Input lifting to 512 plus three 512→512 layers: 797,185 parameters at d = 16.
MLPConfig mlp_3x512(int input_dim, Activation activation = Activation::relu, bool residual = false);

long parameter_count(const MLPConfig& config);

/// weights[l] is out × in; the last entry is the 1 × width head.
struct MLPParams {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;

    long size() const;
    bool operator==(const MLPParams&) const = default;
};

/// Zero-filled parameters with the config's shapes.
MLPParams zero_params(const MLPConfig& config);
/// Seeded uniform entries in ±1/√fan-in.
MLPParams init_params(const MLPConfig& config);

double forward(const MLPParams& params, const MLPConfig& config, const Vector& x);
/// points is N × d; returns N outputs.
Vector forward_batch(const MLPParams& params, const MLPConfig& config, const Matrix& points);

struct LossGrad {
    double loss = 0.0;
    MLPParams grad;
};

/// Mean squared error over the batch and its exact parameter gradient.
LossGrad loss_and_grad(const MLPParams& params, const MLPConfig& config, const Matrix& points, const Vector& targets);

/// Exact ∇ₓ of forward.
Vector input_gradient(const MLPParams& params, const MLPConfig& config, const Vector& x);

struct TrainConfig {
    int batch_size = 128;
    double learning_rate = 1e-3;
    int epochs = 100;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;
};

struct AdamState {
    MLPParams m, v;
    long step = 0;
};

AdamState adam_init(const MLPParams& params);
void adam_step(MLPParams& params, AdamState& state, const MLPParams& grad, const TrainConfig& config);

class NeuralSurrogate final : public Surrogate {
public:
    NeuralSurrogate() = default;
    NeuralSurrogate(MLPConfig config, MLPParams params);

    int dim() const override { return config_.input_dim; }
    double value(const Vector& x) const override { return forward(params_, config_, x); }
    Vector gradient(const Vector& x) const override { return input_gradient(params_, config_, x); }
    Vector values(const Matrix& points) const { return forward_batch(params_, config_, points); }

    const MLPConfig& config() const { return config_; }
    const MLPParams& params() const { return params_; }

private:
    MLPConfig config_;
    MLPParams params_;
};

struct NeuralFit {
    NeuralSurrogate surrogate;
    FitStats stats;          ///< history holds the mean mini-batch loss per epoch
    double initial_loss = 0; ///< full-data MSE before the first step
};

/// Adam on seeded per-epoch shuffles. Throws FitError when the loss stops being finite.
NeuralFit train_mlp(const Dataset& data, const MLPConfig& mlp, const TrainConfig& train);

/// CSV "epoch,train_loss", epoch 0 being the initial loss.
void write_training_log(std::ostream& out, const NeuralFit& fit);

}  // namespace hdsurr
