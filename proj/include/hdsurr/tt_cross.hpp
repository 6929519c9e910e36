#pragma once

#include "hdsurr/common.hpp"
#include "hdsurr/poly_basis.hpp"
#include "hdsurr/tensor_train.hpp"

#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

namespace hdsurr {

struct OracleSample {
    double value = 0.0;
    Vector gradient;  ///< empty when the oracle has no gradient
};

/// Value (+ optional gradient) oracle with a cache keyed on the exact point.
/// `query` is safe to call concurrently; the wrapped callables must be too.
class OracleFunction {
public:
    using SampleFn = std::function<OracleSample(const Vector&)>;
    using ValueFn = std::function<double(const Vector&)>;
    using GradientFn = std::function<Vector(const Vector&)>;

    OracleFunction(ValueFn value, GradientFn gradient = {});
    /// Combined oracle; `with_gradient` states whether samples carry gradients.
    OracleFunction(SampleFn sample, bool with_gradient);

    bool has_gradient() const { return has_gradient_; }
    OracleSample query(const Vector& x);

    long distinct_queries() const;
    long total_queries() const;
    /// All cached points (rows) with their values, in first-query order.
    Dataset cached_samples() const;

private:
    SampleFn sample_;
    bool has_gradient_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<Vector> points_;
    std::vector<OracleSample> samples_;
    long total_ = 0;
};

struct CrossConfig {
    double tol_stop = 1e-5;
    double gradient_weight = 1.0;   ///< λ in the value + λ·gradient least-squares loss
    bool scale_gradient_rows = true;///< gradient rows carry 1/√d
    int max_sweeps = 40;
    int rank_cap = 20;
    int kick_rank = 1;              ///< rank increase per sweep while not converged
    double trunc_tol = 1e-10;       ///< relative SVD truncation of solved cores
    double final_round_tol = 1e-12; ///< tt_round applied to the returned train
    double maxvol_delta = 1e-2;
    std::uint64_t seed = 0;
    int threads = 1;                ///< oracle dispatch inside one local system
    bool value_only_first_sweep = true;
    bool require_stable_ranks = true;///< no convergence in a sweep that changed the rounded ranks
    int validation_points = 1000;   ///< uniform hold-out queries ranking unconverged iterates
};

/// Nested interpolation sets: left[k] holds prefixes over modes 0..k (bond
/// between core k and k+1), right[k] suffixes over modes k+1..d−1.
struct IndexSets {
    std::vector<std::vector<std::vector<int>>> left;
    std::vector<std::vector<std::vector<int>>> right;

    /// Every prefix in left[k+1] extends one in left[k] (mirrored on the right).
    bool nested() const;
};

/// Sample set and solution of the most recent local least-squares problem.
struct LocalSystem {
    int core = -1;
    Matrix points;       ///< (r_{k−1}·n·r_k) × d, α fastest, then node, then β
    Vector values;
    Matrix gradients;    ///< empty when no gradient data
    TTCore solution;
    bool regularized = false;
};

/// Alternating cross regression with gradient data. One call to `sweep`
/// performs a single directional pass (alternating left→right, right→left).
class GradientCross {
public:
    GradientCross(OracleFunction& oracle, std::vector<BasisSpec> bases, CrossConfig config);

    /// One directional sweep. Returns the relative Frobenius change of the
    /// coefficient tensor with respect to the previous sweep.
    double sweep();
    bool converged() const { return converged_; }
    int sweeps_done() const { return sweeps_; }

    const IndexSets& index_sets() const { return sets_; }
    const LocalSystem& last_local_system() const { return last_; }
    const std::vector<Vector>& collocation_nodes() const { return nodes_; }

    /// Current train (complete after every finished sweep).
    FunctionalTT current() const;
    std::vector<int> ranks() const;
    bool regularized() const { return regularized_; }
    const std::vector<double>& history() const { return history_; }

private:
    struct Interface {
        Matrix values;               ///< tuple × bond
        std::vector<Matrix> derivs;  ///< one per mode on this side
    };

    TTCore solve_core(int k);
    void advance_left(int k, const TTCore& solved, bool kick);
    void advance_right(int k, const TTCore& solved, bool kick);
    int rank_bound(int bond) const;
    Matrix orthonormal_basis(const Matrix& unfolding, int bond, int max_rank, bool kick);
    Interface left_interface(int k) const;   ///< interface left of core k
    Interface right_interface(int k) const;  ///< interface right of core k
    std::vector<int> left_tuple(int k, int row) const;
    std::vector<int> right_tuple(int k, int row) const;

    OracleFunction& oracle_;
    std::vector<BasisSpec> bases_;
    CrossConfig config_;
    int d_;
    double grad_weight_;
    std::vector<Vector> nodes_;
    std::vector<Matrix> psi_, dpsi_, psi_inv_;
    std::vector<TTCore> cores_;
    std::vector<Interface> left_, right_;
    IndexSets sets_;
    std::vector<bool> truncated_;
    std::optional<TTCore> end_core_;  ///< solved core reusable at the turn
    int direction_ = +1;
    int sweeps_ = 0;
    bool converged_ = false;
    bool regularized_ = false;
    std::optional<TensorTrain> previous_;
    std::vector<int> previous_ranks_;
    std::vector<double> history_;
    LocalSystem last_;
    std::mt19937_64 rng_;
};

struct CrossFit {
    FunctionalTT surrogate;
    FitStats stats;
};

/// Sweeps until convergence or max_sweeps. Without convergence the iterate
/// with the smallest hold-out error is returned (stats.converged = false).
CrossFit fit_gradient_cross(OracleFunction& oracle, std::vector<BasisSpec> bases,
                            const CrossConfig& config);

}  // namespace hdsurr
