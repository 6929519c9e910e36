#include "hdsurr/experiment.hpp"

#include "hdsurr/benchmarks.hpp"
#include "hdsurr/block_sparse_tt.hpp"
#include "hdsurr/errors.hpp"
#include "hdsurr/kernel_surrogate.hpp"
#include "hdsurr/neural_surrogate.hpp"
#include "hdsurr/tt_cross.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace hdsurr {

namespace {

constexpr std::uint64_t kTestSeedOffset = 0x9e3779b97f4a7c15ULL;

struct Problem {
    std::string id;
    int d = 0;
    std::vector<Interval> box;
    std::optional<TestFunction> fn;
    std::optional<SemilinearModel> model;

    bool control() const { return model.has_value(); }

    SamplerSpec sampler(SamplerKind kind) const {
        if (control()) return {SamplerKind::fourier, {}, 3.0};
        return {kind, box};
    }

    Dataset data(SamplerKind kind, int count, std::uint64_t seed) const {
        if (control()) return generate_dataset(*model, sampler(kind), count, seed);
        return generate_dataset(*fn, sampler(kind), count, seed);
    }

    OracleFunction oracle() const { return control() ? sdre_value_oracle(*model) : fn->oracle(); }
};

std::array<double, 3> parse_lambda(const std::string& spec) {
    std::array<double, 3> lambda{};
    std::istringstream is(spec);
    std::string part;
    int k = 0;
    while (std::getline(is, part, '-')) {
        if (k == 3) throw ArgumentError("regularity preset needs three weights: " + spec);
        try {
            std::size_t used = 0;
            lambda[k] = std::stod(part, &used);
            if (used != part.size()) throw std::invalid_argument(part);
        } catch (const std::exception&) {
            throw ArgumentError("regularity preset: bad weight '" + part + "'");
        }
        ++k;
    }
    if (k != 3) throw ArgumentError("regularity preset needs three weights: " + spec);
    return lambda;
}

Problem make_problem(const ExperimentConfig& c) {
    Problem p;
    p.id = c.preset;
    const std::string& id = c.preset;
    if (id == "allencahn") {
        p.d = c.dim > 0 ? c.dim : 30;
        AllenCahnConfig ac;
        ac.d = p.d;
        ac.gamma = c.gamma;
        p.model = allen_cahn_model(ac);
        p.box.assign(p.d, {-1.0, 1.0});
        return p;
    }
    p.d = c.dim > 0 ? c.dim : 16;
    if (id == "lowrank-a" || id == "lowrank-b" || id == "lowrank-c") {
        p.fn = lowrank_fn(id.back(), p.d);
    } else if (id.rfind("regularity-", 0) == 0) {
        p.fn = regularity_fn(parse_lambda(id.substr(11)), p.d);
    } else if (id == "academic") {
        p.fn = academic_fn(AcademicProblem::standard(p.d));
    } else if (id.rfind("academic-", 0) == 0) {
        int d = 0;
        try {
            std::size_t used = 0;
            d = std::stoi(id.substr(9), &used);
            if (used != id.size() - 9) throw std::invalid_argument(id);
        } catch (const std::exception&) {
            throw ArgumentError("academic preset: bad dimension in '" + id + "'");
        }
        if (c.dim > 0 && c.dim != d) throw ArgumentError("preset '" + id + "' conflicts with dim " + std::to_string(c.dim));
        p.d = d;
        p.fn = academic_fn(AcademicProblem::standard(p.d));
    } else {
        throw ArgumentError("unknown preset '" + id + "'");
    }
    p.box = p.fn->box;
    return p;
}

std::string join_ranks(const std::vector<int>& ranks) {
    std::string s;
    for (std::size_t k = 0; k < ranks.size(); ++k) s += (k ? "/" : "") + std::to_string(ranks[k]);
    return s;
}

std::string sanitize(std::string s) {
    for (char& ch : s)
        if (ch == ',' || ch == ';' || ch == '=' || ch == '\n' || ch == '\r') ch = ' ';
    return s;
}

struct Fitted {
    std::unique_ptr<Surrogate> surrogate;
    FitStats stats;
    std::map<std::string, std::string> extra;
};

Fitted fit_tt_cross(const Problem& p, const ExperimentConfig& c) {
    const int n = c.nodes > 0 ? c.nodes : (p.control() ? 6 : 7);
    std::vector<BasisSpec> bases;
    for (const auto& iv : p.box) bases.emplace_back(n, iv);
    CrossConfig cc;
    cc.tol_stop = c.tol_stop.value_or(p.control() ? 1e-4 : 1e-5);
    // SDRE gradient data neglect ∂P/∂x and contradict the values; fit values only.
    cc.gradient_weight = c.gradient_weight.value_or(p.control() ? 0.0 : 1.0);
    cc.seed = c.seed;
    OracleFunction oracle = p.oracle();
    CrossFit fit = fit_gradient_cross(oracle, bases, cc);
    Fitted out;
    out.stats = fit.stats;
    out.extra["ranks"] = join_ranks(fit.stats.final_ranks);
    out.extra["sweeps"] = std::to_string(fit.stats.sweeps);
    out.extra["converged"] = fit.stats.converged ? "1" : "0";
    out.extra["queries_total"] = std::to_string(fit.stats.n_queries_total);
    out.extra["nodes"] = std::to_string(n);
    out.extra["lambda"] = format_number(cc.gradient_weight);
    out.surrogate = std::make_unique<FunctionalTT>(std::move(fit.surrogate));
    return out;
}

Fitted fit_bstt(const Problem& p, const ExperimentConfig& c) {
    const int n = c.nodes > 0 ? c.nodes : (p.control() ? 6 : 7);
    const int count = c.samples > 0 ? c.samples : (p.control() ? 5000 : 2000);
    const Dataset data = p.data(SamplerKind::uniform, count, c.seed);
    std::vector<BasisSpec> bases;
    for (const auto& iv : p.box) bases.emplace_back(n, iv);
    DegreeProfile profile;
    profile.max_degree = c.degree;
    profile.locality = c.locality;
    BlockALSConfig bc;
    bc.seed = c.seed;
    BlockSparseFit fit = bs_als_fit(data, bases, profile, bc);
    Fitted out;
    out.stats = fit.stats;
    out.extra["rounded_dofs"] = std::to_string(fit.rounded_dofs);
    out.extra["sweeps"] = std::to_string(fit.stats.sweeps);
    out.extra["degree"] = std::to_string(c.degree);
    if (c.locality) out.extra["locality"] = std::to_string(*c.locality);
    out.surrogate = std::make_unique<FunctionalTT>(std::move(fit.surrogate));
    return out;
}

Fitted fit_kernel(const Problem& p, const ExperimentConfig& c) {
    const int count = c.samples > 0 ? c.samples : 5000;
    const Dataset data = p.data(SamplerKind::halton, count, c.seed);
    const KernelFamily family = p.control() ? KernelFamily::gaussian : KernelFamily::matern2;
    std::optional<double> shape = c.shape;
    if (!shape && p.control()) shape = 1.0 / std::sqrt(static_cast<double>(p.d));
    if (!shape && p.id.rfind("academic", 0) == 0) shape = 1.0 / (2.0 * std::sqrt(static_cast<double>(p.d)));
    Fitted out;
    if (shape) {
        KernelFit fit = fit_interpolant(data, KernelSpec{family, *shape});
        out.stats = fit.stats;
        out.extra["jitter"] = format_number(fit.jitter);
        out.surrogate = std::make_unique<KernelSurrogate>(std::move(fit.surrogate));
    } else {
        const auto shapes = shape_presets(p.d);
        Stopwatch clock;
        ShapeSelection sel = select_shape(data, family, shapes, c.seed);
        out.stats = sel.fit.stats;
        out.stats.cpu_train_s = clock.seconds();
        shape = sel.shape;
        out.extra["jitter"] = format_number(sel.fit.jitter);
        out.surrogate = std::make_unique<KernelSurrogate>(std::move(sel.fit.surrogate));
    }
    out.extra["kernel"] = to_string(family);
    out.extra["shape"] = format_number(*shape);
    return out;
}

Fitted fit_nn(const Problem& p, const ExperimentConfig& c) {
    const int count = c.samples > 0 ? c.samples : 5000;
    const Dataset data = p.data(SamplerKind::uniform, count, c.seed);
    const Activation act =
        c.activation.empty() ? (p.control() ? Activation::tanh : Activation::relu) : parse_activation(c.activation);
    MLPConfig mlp = mlp_3x512(p.d, act);
    mlp.seed = c.seed;
    TrainConfig tc;
    tc.epochs = c.epochs;
    tc.learning_rate = c.learning_rate;
    tc.seed = c.seed;
    NeuralFit fit = train_mlp(data, mlp, tc);
    Fitted out;
    out.stats = fit.stats;
    out.extra["epochs"] = std::to_string(c.epochs);
    out.extra["activation"] = to_string(act);
    out.extra["initial_loss"] = format_number(fit.initial_loss);
    out.extra["final_loss"] = format_number(fit.stats.history.empty() ? fit.initial_loss : fit.stats.history.back());
    out.surrogate = std::make_unique<NeuralSurrogate>(std::move(fit.surrogate));
    return out;
}

Fitted fit_method(const Problem& p, const ExperimentConfig& c) {
    if (c.method == "tt-cross") return fit_tt_cross(p, c);
    if (c.method == "bstt") return fit_bstt(p, c);
    if (c.method == "kernel") return fit_kernel(p, c);
    if (c.method == "nn") return fit_nn(p, c);
    throw ArgumentError("unknown method '" + c.method + "'");
}

void check_control(const Problem& p, const ExperimentConfig& c) {
    if (c.control.empty()) return;
    if (!p.control()) throw ArgumentError("--control needs the allencahn preset");
    const bool ok = (c.control == "tt" && (c.method == "tt-cross" || c.method == "bstt")) ||
                    (c.control == "kernel-tb" && c.method == "kernel") || (c.control == "nn-tb" && c.method == "nn");
    if (!ok) throw ArgumentError("control '" + c.control + "' does not match method '" + c.method + "'");
    if (!(c.a_tb >= 0.0)) throw ArgumentError("a_tb must be nonnegative");
    if (!(c.dt > 0.0) || !(c.t_final > 0.0)) throw ArgumentError("dt and t_final must be positive");
}

// Closed-loop comparison on the four test initial conditions.
void run_control(const Problem& p, const ExperimentConfig& c, const Surrogate& surrogate, ExperimentReport& row) {
    const SemilinearModel& model = *p.model;
    const Vector zero = Vector::Zero(p.d);
    ControlLaw law;
    if (c.control == "tt") {
        law = SurrogateLaw{&surrogate, p.box};
    } else {
        const Matrix p0 = solve_care(model.A(zero), model.B(zero), model.Q(zero), model.R).P;
        law = TwoBoxesLaw{&surrogate, p0, c.a_tb, {}};
    }
    const Vector grid = allen_cahn_grid(p.d);
    const auto coeffs = allen_cahn_test_coefficients();
    double worst = 0.0, worst_norm = 0.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        const Vector x0 = fourier_ic(coeffs[k], 3.0, grid);
        const CostComparison cmp = compare_costs(model, law, x0, c.t_final, c.dt);
        const std::string tag = "_" + std::to_string(k + 1);
        row.extra["err_cost" + tag] = format_number(cmp.err_cost);
        row.extra["cost_sdre" + tag] = format_number(cmp.cost_sdre);
        row.extra["cost_surr" + tag] = format_number(cmp.cost_surrogate);
        row.extra["final_norm" + tag] = format_number(cmp.final_norm_surrogate);
        worst = std::max(worst, cmp.err_cost);
        worst_norm = std::max(worst_norm, cmp.final_norm_surrogate);
        if (k == 0 && !c.traj_out.empty()) dump_trajectory(integrate_closed_loop(model, law, x0, c.t_final, c.dt), c.traj_out);
    }
    row.extra["err_cost_max"] = format_number(worst);
    row.extra["final_norm_max"] = format_number(worst_norm);
    row.extra["control"] = c.control;
    if (c.control != "tt") row.extra["a_tb"] = format_number(c.a_tb);
}

}  // namespace

std::vector<std::array<double, 4>> allen_cahn_test_coefficients() {
    return {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 1, 1, 0}, {1, 1, 1, 1}};
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
    const Problem problem = make_problem(config);
    check_control(problem, config);
    if (config.method != "tt-cross" && config.method != "bstt" && config.method != "kernel" && config.method != "nn")
        throw ArgumentError("unknown method '" + config.method + "'");
    if (config.test_samples < 1) throw ArgumentError("test_samples must be positive");

    const double nan = std::numeric_limits<double>::quiet_NaN();
    ExperimentReport row;
    row.method = config.method;
    row.problem = problem.id;
    row.dim = problem.d;
    row.err_train_2 = row.err_test_2 = row.cpu_train_s = row.cpu_test_s = nan;
    row.extra["seed"] = std::to_string(config.seed);
    row.extra["status"] = "ok";

    Fitted fitted;
    try {
        fitted = fit_method(problem, config);
    } catch (const ArgumentError&) {
        throw;
    } catch (const Error& e) {
        row.extra["status"] = "fit-failed";
        row.extra["error"] = sanitize(e.what());
        return row;
    }
    row.err_train_2 = fitted.stats.err_train_2;
    row.dofs = fitted.stats.dofs;
    row.n_train = fitted.stats.n_train_samples;
    row.cpu_train_s = fitted.stats.cpu_train_s;
    row.extra.merge(fitted.extra);

    const Dataset test = problem.data(SamplerKind::uniform, config.test_samples, config.seed ^ kTestSeedOffset);
    Stopwatch clock;
    Vector pred(test.size());
    for (Eigen::Index i = 0; i < test.size(); ++i) pred[i] = fitted.surrogate->value(test.points.row(i).transpose());
    row.cpu_test_s = clock.seconds();
    row.err_test_2 = err2(pred, test.values);

    if (!config.control.empty()) {
        try {
            run_control(problem, config, *fitted.surrogate, row);
        } catch (const InstabilityError& e) {
            row.extra["status"] = "unstable";
            row.extra["error"] = sanitize(e.what());
        } catch (const OutOfBoxError& e) {
            row.extra["status"] = "unstable";
            row.extra["error"] = sanitize(e.what());
        }
    }
    return row;
}

}  // namespace hdsurr
