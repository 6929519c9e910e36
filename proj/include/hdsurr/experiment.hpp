#pragma once

#include "hdsurr/metrics.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hdsurr {

/// One (preset, method) cell. Zero or empty fields take the preset default.
///
/// Presets: lowrank-a, lowrank-b, lowrank-c, regularity-<λ₀>-<λ₁>-<λ₂>,
/// academic, academic-<d>, allencahn. Methods: tt-cross, bstt, kernel, nn.
struct ExperimentConfig {
    std::string preset;
    std::string method = "tt-cross";
    int dim = 0;                      ///< 16 (30 for allencahn)
    std::uint64_t seed = 0;
    std::optional<double> tol_stop;   ///< cross: 1e-5 (1e-4 for allencahn)
    std::optional<double> gradient_weight; ///< cross: λ of the value + λ·gradient loss; 1 (0 for allencahn)
    std::optional<double> shape;      ///< kernel: skip shape selection
    double a_tb = 0.4;                ///< two-boxes radius
    double gamma = 0.1;
    std::string control;              ///< allencahn: tt | kernel-tb | nn-tb
    std::string traj_out;             ///< surrogate-controlled trajectory from the first initial condition
    int nodes = 0;                    ///< cross / bstt basis size: 7 (6 for allencahn)
    int samples = 0;                  ///< bstt / kernel / nn training size
    int test_samples = 10000;
    int degree = 2;                   ///< bstt total degree
    std::optional<int> locality;      ///< bstt
    int epochs = 100;                 ///< nn
    double learning_rate = 1e-3;      ///< nn
    std::string activation;           ///< nn: relu, tanh for allencahn
    double t_final = 60.0;
    double dt = 1e-2;
};

/// The four initial conditions of the Allen–Cahn cost table.
std::vector<std::array<double, 4>> allen_cahn_test_coefficients();

/// Generates data, fits, evaluates on fresh test samples (seed disjoint from
/// training) and, with a control law, compares closed-loop costs against the
/// SDRE loop. Fit failures and unstable loops are recorded in extra["status"]
/// ("fit-failed" / "unstable") with the message in extra["error"].
/// Unknown presets, methods or inconsistent options throw ArgumentError.
ExperimentReport run_experiment(const ExperimentConfig& config);

}  // namespace hdsurr
