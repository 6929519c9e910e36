// Runs one (preset, method) cell and appends its row to a report CSV.
//
// Exit codes: 0 success, 2 fit failure, 3 instability, 4 bad arguments.

#include "hdsurr/errors.hpp"
#include "hdsurr/experiment.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>

namespace {

constexpr int kFitFailure = 2;
constexpr int kUnstable = 3;
constexpr int kBadArguments = 4;

std::string json_scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw hdsurr::ArgumentError("config values must be scalars, got " + v.dump());
}

// Flags from the config file that the command line did not set.
std::vector<std::string> config_args(const CLI::App& app, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw hdsurr::IoError("cannot open config " + path);
    nlohmann::json cfg;
    try {
        cfg = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw hdsurr::ArgumentError("config " + path + ": " + e.what());
    }
    if (!cfg.is_object()) throw hdsurr::ArgumentError("config " + path + " must be a flat object");
    std::vector<std::string> args;
    for (const auto& item : cfg.items()) {
        std::string key = item.key();
        const auto& value = item.value();
        std::replace(key.begin(), key.end(), '_', '-');
        if (key == "config") throw hdsurr::ArgumentError("config files cannot include other configs");
        if (key == "preset") {
            if (app.get_option("preset")->count() == 0) args.push_back(json_scalar(value));
            continue;
        }
        const CLI::Option* opt = nullptr;
        try {
            opt = app.get_option("--" + key);
        } catch (const CLI::OptionNotFound&) {
            throw hdsurr::ArgumentError("config " + path + ": unknown key '" + key + "'");
        }
        if (opt->count() > 0) continue;
        args.push_back("--" + key);
        args.push_back(json_scalar(value));
    }
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    hdsurr::ExperimentConfig c;
    std::string out_path, config_path;
    double tol_stop = 0.0, shape = 0.0, lambda = 1.0;
    int locality = -1;

    CLI::App app{"Fit one surrogate on one benchmark problem and report its errors"};
    app.add_option("preset", c.preset,
                   "lowrank-a|lowrank-b|lowrank-c|regularity-<l0>-<l1>-<l2>|academic|academic-<d>|allencahn");
    app.add_option("--method", c.method, "tt-cross|bstt|kernel|nn")->capture_default_str();
    app.add_option("--dim", c.dim, "Dimension (0: preset default)");
    app.add_option("--seed", c.seed, "Training seed; the test seed is derived from it");
    app.add_option("--out", out_path, "Report CSV (rows are appended)");
    app.add_option("--tol-stop", tol_stop, "Cross stopping tolerance");
    app.add_option("--lambda", lambda, "Cross gradient weight (default 1, 0 for allencahn)");
    app.add_option("--shape", shape, "Kernel shape parameter (skips shape selection)");
    app.add_option("--a-tb", c.a_tb, "Two-boxes radius")->capture_default_str();
    app.add_option("--gamma", c.gamma, "Allen-Cahn control weight")->capture_default_str();
    app.add_option("--control", c.control, "tt|kernel-tb|nn-tb (allencahn)");
    app.add_option("--traj-out", c.traj_out, "Trajectory CSV of the first initial condition");
    app.add_option("--nodes", c.nodes, "Basis size per mode (0: preset default)");
    app.add_option("--samples", c.samples, "Training samples for bstt, kernel and nn (0: preset default)");
    app.add_option("--test-samples", c.test_samples, "Test samples")->capture_default_str();
    app.add_option("--degree", c.degree, "bstt total degree")->capture_default_str();
    app.add_option("--locality", locality, "bstt locality");
    app.add_option("--epochs", c.epochs, "nn epochs")->capture_default_str();
    app.add_option("--lr", c.learning_rate, "nn learning rate")->capture_default_str();
    app.add_option("--activation", c.activation, "nn activation: relu|tanh");
    app.add_option("--t-final", c.t_final, "Closed-loop horizon")->capture_default_str();
    app.add_option("--dt", c.dt, "Closed-loop time step")->capture_default_str();
    app.add_option("--config", config_path, "Flat JSON object with any of the flags above");

    try {
        app.parse(argc, argv);
        if (!config_path.empty()) {
            std::vector<std::string> args(argv + 1, argv + argc);
            const auto extra = config_args(app, config_path);
            args.insert(args.end(), extra.begin(), extra.end());
            std::reverse(args.begin(), args.end());
            app.clear();
            app.parse(args);
        }
        if (c.preset.empty()) throw hdsurr::ArgumentError("missing preset");
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kBadArguments;
    } catch (const hdsurr::Error& e) {
        std::cerr << "bench: " << e.what() << '\n';
        return kBadArguments;
    }
    if (app.get_option("--tol-stop")->count() > 0) c.tol_stop = tol_stop;
    if (app.get_option("--lambda")->count() > 0) c.gradient_weight = lambda;
    if (app.get_option("--shape")->count() > 0) c.shape = shape;
    if (app.get_option("--locality")->count() > 0) c.locality = locality;

    hdsurr::ExperimentReport row;
    try {
        row = hdsurr::run_experiment(c);
        if (!out_path.empty()) hdsurr::append_report(out_path, {row});
    } catch (const hdsurr::ArgumentError& e) {
        std::cerr << "bench: " << e.what() << '\n';
        return kBadArguments;
    } catch (const hdsurr::IoError& e) {
        std::cerr << "bench: " << e.what() << '\n';
        return kBadArguments;
    } catch (const hdsurr::InstabilityError& e) {
        std::cerr << "bench: " << e.what() << '\n';
        return kUnstable;
    } catch (const hdsurr::Error& e) {
        std::cerr << "bench: " << e.what() << '\n';
        return kFitFailure;
    }
    hdsurr::write_report(std::cout, {row});
    const std::string& status = row.extra.at("status");
    if (status == "fit-failed") return kFitFailure;
    if (status == "unstable") return kUnstable;
    return 0;
}
