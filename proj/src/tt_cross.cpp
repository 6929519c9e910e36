#include "hdsurr/tt_cross.hpp"

#include "hdsurr/errors.hpp"
#include "hdsurr/maxvol.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <set>
#include <thread>

namespace hdsurr {

// ---------------------------------------------------------------------------
// Oracle

OracleFunction::OracleFunction(ValueFn value, GradientFn gradient)
    : has_gradient_(static_cast<bool>(gradient)) {
    if (!value) throw ArgumentError("OracleFunction: value oracle is required");
    sample_ = [value = std::move(value), gradient = std::move(gradient)](const Vector& x) {
        OracleSample s;
        s.value = value(x);
        if (gradient) s.gradient = gradient(x);
        return s;
    };
}

OracleFunction::OracleFunction(SampleFn sample, bool with_gradient)
    : sample_(std::move(sample)), has_gradient_(with_gradient) {
    if (!sample_) throw ArgumentError("OracleFunction: sample oracle is required");
}

OracleSample OracleFunction::query(const Vector& x) {
    std::string key(reinterpret_cast<const char*>(x.data()), sizeof(double) * x.size());
    {
        std::lock_guard lock(mutex_);
        ++total_;
        if (auto it = index_.find(key); it != index_.end()) return samples_[it->second];
    }
    OracleSample s = sample_(x);
    if (has_gradient_ && s.gradient.size() != x.size())
        throw ArgumentError("OracleFunction: gradient has wrong length");
    std::lock_guard lock(mutex_);
    if (auto it = index_.find(key); it != index_.end()) return samples_[it->second];
    index_.emplace(std::move(key), samples_.size());
    points_.push_back(x);
    samples_.push_back(s);
    return s;
}

long OracleFunction::distinct_queries() const {
    std::lock_guard lock(mutex_);
    return static_cast<long>(samples_.size());
}

long OracleFunction::total_queries() const {
    std::lock_guard lock(mutex_);
    return total_;
}

Dataset OracleFunction::cached_samples() const {
    std::lock_guard lock(mutex_);
    Dataset out;
    const auto n = static_cast<Eigen::Index>(points_.size());
    const Eigen::Index d = n > 0 ? points_.front().size() : 0;
    out.points.resize(n, d);
    out.values.resize(n);
    if (has_gradient_) out.gradients = Matrix(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.points.row(i) = points_[i].transpose();
        out.values[i] = samples_[i].value;
        if (has_gradient_) out.gradients->row(i) = samples_[i].gradient.transpose();
    }
    return out;
}

bool IndexSets::nested() const {
    for (std::size_t k = 0; k + 1 < left.size(); ++k) {
        std::set<std::vector<int>> prev(left[k].begin(), left[k].end());
        for (const auto& t : left[k + 1]) {
            if (t.size() != k + 2) return false;
            if (!prev.count(std::vector<int>(t.begin(), t.end() - 1))) return false;
        }
    }
    for (std::size_t k = 1; k < right.size(); ++k) {
        std::set<std::vector<int>> next(right[k].begin(), right[k].end());
        for (const auto& t : right[k - 1]) {
            if (t.size() != right.size() - k + 1) return false;
            if (!next.count(std::vector<int>(t.begin() + 1, t.end()))) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Mode products on 3-way arrays stored like TT cores.

namespace {

TTCore mode1(const Matrix& m, const TTCore& x) {
    TTCore y(static_cast<int>(m.rows()), x.n(), x.r_right());
    y.right_unfolding().noalias() = m * x.right_unfolding();
    return y;
}

TTCore mode2(const Matrix& m, const TTCore& x) {
    TTCore y(x.r_left(), static_cast<int>(m.rows()), x.r_right());
    const int rl = x.r_left();
    for (int b = 0; b < x.r_right(); ++b) {
        Eigen::Map<const Matrix> xs(x.data().data() + std::size_t(rl) * x.n() * b, rl, x.n());
        Eigen::Map<Matrix> ys(y.data().data() + std::size_t(rl) * y.n() * b, rl, y.n());
        ys.noalias() = xs * m.transpose();
    }
    return y;
}

TTCore mode3(const Matrix& m, const TTCore& x) {
    TTCore y(x.r_left(), x.n(), static_cast<int>(m.rows()));
    y.left_unfolding().noalias() = x.left_unfolding() * m.transpose();
    return y;
}

TTCore& add_scaled(TTCore& acc, double a, const TTCore& x) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc.data()[i] += a * x.data()[i];
    return acc;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Columns of q reshaped (rl × n), mapped to A·X·Bᵀ and flattened again.
Matrix apply_left(const Matrix& a, const Matrix& b, const Matrix& q) {
    const Eigen::Index rl = a.cols(), n = b.cols();
    Matrix out(a.rows() * b.rows(), q.cols());
    for (Eigen::Index c = 0; c < q.cols(); ++c) {
        Eigen::Map<const Matrix> x(q.col(c).data(), rl, n);
        Matrix y = a * x * b.transpose();
        out.col(c) = Eigen::Map<const Vector>(y.data(), y.size());
    }
    return out;
}

// Columns of q reshaped (n × rr), mapped to A·X·Bᵀ and flattened again.
Matrix apply_right(const Matrix& a, const Matrix& b, const Matrix& q) {
    const Eigen::Index n = a.cols(), rr = b.cols();
    Matrix out(a.rows() * b.rows(), q.cols());
    for (Eigen::Index c = 0; c < q.cols(); ++c) {
        Eigen::Map<const Matrix> x(q.col(c).data(), n, rr);
        Matrix y = a * x * b.transpose();
        out.col(c) = Eigen::Map<const Vector>(y.data(), y.size());
    }
    return out;
}

Matrix select_rows(const Matrix& m, const std::vector<int>& rows) {
    Matrix out(rows.size(), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = m.row(rows[i]);
    return out;
}

double condition_number(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    const Vector& s = svd.singularValues();
    if (s.size() == 0) return 1.0;
    const double lo = s[s.size() - 1];
    return lo > 0.0 ? s[0] / lo : std::numeric_limits<double>::infinity();
}

constexpr double kSingularCondition = 1e13;
constexpr Eigen::Index kDenseFallbackLimit = 4000;

}  // namespace

// ---------------------------------------------------------------------------
// GradientCross

GradientCross::GradientCross(OracleFunction& oracle, std::vector<BasisSpec> bases,
                             CrossConfig config)
    : oracle_(oracle),
      bases_(std::move(bases)),
      config_(config),
      d_(static_cast<int>(bases_.size())),
      rng_(config.seed) {
    if (d_ < 2) throw ArgumentError("gradient cross: dimension must be at least 2");
    if (!(config_.tol_stop > 0.0)) throw ArgumentError("gradient cross: tol_stop must be > 0");
    if (!(config_.gradient_weight >= 0.0))
        throw ArgumentError("gradient cross: gradient_weight must be >= 0");
    if (config_.gradient_weight > 0.0 && !oracle_.has_gradient())
        throw ArgumentError("gradient cross: gradient_weight > 0 needs a gradient oracle");
    if (config_.max_sweeps < 1 || config_.rank_cap < 1 || config_.kick_rank < 0)
        throw ArgumentError("gradient cross: invalid sweep/rank settings");
    if (!(config_.maxvol_delta > 0.0)) throw ArgumentError("gradient cross: maxvol_delta must be > 0");
    if (config_.trunc_tol < 0.0 || config_.trunc_tol >= 1.0)
        throw ArgumentError("gradient cross: trunc_tol must lie in [0,1)");

    grad_weight_ = config_.gradient_weight;
    if (config_.scale_gradient_rows) grad_weight_ /= static_cast<double>(d_);

    std::vector<int> sizes(d_);
    for (int k = 0; k < d_; ++k) {
        const BasisSpec& b = bases_[k];
        sizes[k] = b.degree_count();
        nodes_.push_back(gauss_legendre_rule(b.degree_count(), b.domain()).nodes);
        psi_.push_back(basis_matrix(b, nodes_[k]));
        dpsi_.push_back(basis_derivative_matrix(b, nodes_[k]));
        psi_inv_.push_back(psi_[k].partialPivLu().inverse());
    }

    const std::vector<int> ones(d_ - 1, 1);
    cores_ = TensorTrain::random(sizes, ones, config_.seed).cores();
    left_.resize(d_ - 1);
    right_.resize(d_ - 1);
    truncated_.assign(d_ - 1, false);
    sets_.left.resize(d_ - 1);
    sets_.right.resize(d_ - 1);
    for (int k = d_ - 1; k >= 1; --k) advance_right(k, cores_[k], false);
}

int GradientCross::rank_bound(int bond) const {
    const long cap = config_.rank_cap;
    long left = 1, right = 1;
    for (int j = 0; j <= bond && left < cap; ++j) left *= bases_[j].degree_count();
    for (int j = bond + 1; j < d_ && right < cap; ++j) right *= bases_[j].degree_count();
    return static_cast<int>(std::min({cap, left, right}));
}

GradientCross::Interface GradientCross::left_interface(int k) const {
    if (k == 0) return {Matrix::Ones(1, 1), {}};
    return left_[k - 1];
}

GradientCross::Interface GradientCross::right_interface(int k) const {
    if (k == d_ - 1) return {Matrix::Ones(1, 1), {}};
    return right_[k];
}

std::vector<int> GradientCross::left_tuple(int k, int row) const {
    if (k == 0) return {};
    return sets_.left[k - 1][row];
}

std::vector<int> GradientCross::right_tuple(int k, int row) const {
    if (k == d_ - 1) return {};
    return sets_.right[k][row];
}

TTCore GradientCross::solve_core(int k) {
    const Interface L = left_interface(k);
    const Interface R = right_interface(k);
    const int rl = static_cast<int>(L.values.rows());
    const int rr = static_cast<int>(R.values.rows());
    const int n = bases_[k].degree_count();
    const Eigen::Index count = Eigen::Index(rl) * n * rr;

    Matrix points(count, d_);
    for (int b = 0; b < rr; ++b) {
        const std::vector<int> rt = right_tuple(k, b);
        for (int i = 0; i < n; ++i) {
            for (int a = 0; a < rl; ++a) {
                const Eigen::Index row = a + Eigen::Index(rl) * (i + Eigen::Index(n) * b);
                const std::vector<int> lt = left_tuple(k, a);
                for (int j = 0; j < k; ++j) points(row, j) = nodes_[j][lt[j]];
                points(row, k) = nodes_[k][i];
                for (int j = k + 1; j < d_; ++j) points(row, j) = nodes_[j][rt[j - k - 1]];
            }
        }
    }

    std::vector<OracleSample> samples(count);
    auto work = [&](Eigen::Index lo, Eigen::Index hi) {
        for (Eigen::Index r = lo; r < hi; ++r) samples[r] = oracle_.query(points.row(r).transpose());
    };
    const int threads = std::max(1, std::min<int>(config_.threads, static_cast<int>(count)));
    if (threads == 1) {
        work(0, count);
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back(work, count * t / threads, count * (t + 1) / threads);
    }

    // The first sweep sees random interfaces on the unvisited side, whose
    // derivatives carry no information, so it interpolates values only.
    const double lam = sweeps_ == 0 && config_.value_only_first_sweep ? 0.0 : grad_weight_;
    const bool use_grad = lam > 0.0;
    TTCore f(rl, n, rr);
    std::vector<TTCore> g;
    for (Eigen::Index r = 0; r < count; ++r) f.data()[r] = samples[r].value;
    if (use_grad) {
        g.assign(d_, TTCore(rl, n, rr));
        for (Eigen::Index r = 0; r < count; ++r)
            for (int j = 0; j < d_; ++j) g[j].data()[r] = samples[r].gradient[j];
    }

    TTCore u;
    bool regularized = false;
    const bool well_posed = condition_number(L.values) < kSingularCondition &&
                            condition_number(R.values) < kSingularCondition;
    if (well_posed) {
        // Exact solve in value coordinates V = (A_L ⊗ Ψ ⊗ A_R)·U: the normal
        // matrix is I + λ'(M₁ ⊕ M₂ ⊕ M₃), diagonal in the joint eigenbasis.
        const Matrix al_inv = L.values.partialPivLu().inverse();
        const Matrix ar_inv = R.values.partialPivLu().inverse();
        TTCore v = f;
        if (use_grad) {
            Matrix m1 = Matrix::Zero(rl, rl), m3 = Matrix::Zero(rr, rr);
            TTCore rhs = f;
            for (int j = 0; j < k; ++j) {
                const Matrix t = L.derivs[j] * al_inv;
                m1.noalias() += t.transpose() * t;
                add_scaled(rhs, lam, mode1(t.transpose(), g[j]));
            }
            const Matrix s = dpsi_[k] * psi_inv_[k];
            const Matrix m2 = s.transpose() * s;
            add_scaled(rhs, lam, mode2(s.transpose(), g[k]));
            for (int j = k + 1; j < d_; ++j) {
                const Matrix t = R.derivs[j - k - 1] * ar_inv;
                m3.noalias() += t.transpose() * t;
                add_scaled(rhs, lam, mode3(t.transpose(), g[j]));
            }
            Eigen::SelfAdjointEigenSolver<Matrix> e1(m1), e2(m2), e3(m3);
            TTCore w = mode3(e3.eigenvectors().transpose(),
                             mode2(e2.eigenvectors().transpose(),
                                   mode1(e1.eigenvectors().transpose(), rhs)));
            for (int b = 0; b < rr; ++b)
                for (int i = 0; i < n; ++i)
                    for (int a = 0; a < rl; ++a)
                        w(a, i, b) /= 1.0 + lam * (e1.eigenvalues()[a] + e2.eigenvalues()[i] +
                                                   e3.eigenvalues()[b]);
            v = mode3(e3.eigenvectors(), mode2(e2.eigenvectors(), mode1(e1.eigenvectors(), w)));
        }
        u = mode3(ar_inv, mode2(psi_inv_[k], mode1(al_inv, v)));
    } else {
        // Degenerate interfaces: Tikhonov-shifted normal equations in core coordinates.
        if (count > kDenseFallbackLimit)
            throw PivotError("gradient cross: singular local system too large to regularize", k);
        const Matrix gl = L.values.transpose() * L.values;
        const Matrix gr = R.values.transpose() * R.values;
        const Matrix gp = psi_[k].transpose() * psi_[k];
        Matrix normal = kron(gr, kron(gp, gl));
        TTCore rhs = mode3(R.values.transpose(),
                           mode2(psi_[k].transpose(), mode1(L.values.transpose(), f)));
        if (use_grad) {
            Matrix gl1 = Matrix::Zero(rl, rl), gr1 = Matrix::Zero(rr, rr);
            for (int j = 0; j < k; ++j) {
                gl1.noalias() += L.derivs[j].transpose() * L.derivs[j];
                add_scaled(rhs, lam,
                           mode3(R.values.transpose(),
                                 mode2(psi_[k].transpose(), mode1(L.derivs[j].transpose(), g[j]))));
            }
            add_scaled(rhs, lam,
                       mode3(R.values.transpose(),
                             mode2(dpsi_[k].transpose(), mode1(L.values.transpose(), g[k]))));
            for (int j = k + 1; j < d_; ++j) {
                const Matrix& e = R.derivs[j - k - 1];
                gr1.noalias() += e.transpose() * e;
                add_scaled(rhs, lam,
                           mode3(e.transpose(),
                                 mode2(psi_[k].transpose(), mode1(L.values.transpose(), g[j]))));
            }
            const Matrix gdp = dpsi_[k].transpose() * dpsi_[k];
            normal += lam * (kron(gr, kron(gp, gl1)) + kron(gr, kron(gdp, gl)) +
                             kron(gr1, kron(gp, gl)));
        }
        const double shift = 1e-12 * normal.trace() / static_cast<double>(count);
        normal.diagonal().array() += shift;
        Eigen::LDLT<Matrix> ldlt(normal);
        if (ldlt.info() != Eigen::Success)
            throw PivotError("gradient cross: regularized local system failed", k);
        u = TTCore(rl, n, rr);
        Eigen::Map<Vector>(u.data().data(), count) =
            ldlt.solve(Eigen::Map<const Vector>(rhs.data().data(), count));
        regularized = true;
        regularized_ = true;
    }

    for (double x : u.data())
        if (!std::isfinite(x)) throw PivotError("gradient cross: non-finite local solution", k);

    last_.core = k;
    last_.points = std::move(points);
    last_.values = Eigen::Map<const Vector>(f.data().data(), count);
    if (use_grad) {
        last_.gradients.resize(count, d_);
        for (int j = 0; j < d_; ++j)
            last_.gradients.col(j) = Eigen::Map<const Vector>(g[j].data().data(), count);
    } else {
        last_.gradients.resize(0, 0);
    }
    last_.solution = u;
    last_.regularized = regularized;
    return u;
}

Matrix GradientCross::orthonormal_basis(const Matrix& unfolding, int bond, int max_rank, bool kick) {
    Eigen::BDCSVD<Matrix> svd(unfolding, Eigen::ComputeThinU);
    const Vector& s = svd.singularValues();
    const double total = s.squaredNorm();
    Eigen::Index keep = s.size();
    if (total == 0.0) {
        keep = 1;
    } else {
        const double budget = config_.trunc_tol * config_.trunc_tol * total;
        double tail = 0.0;
        while (keep > 1 && tail + s[keep - 1] * s[keep - 1] <= budget) {
            tail += s[keep - 1] * s[keep - 1];
            --keep;
        }
    }
    keep = std::min<Eigen::Index>(keep, max_rank);
    Matrix q = svd.matrixU().leftCols(keep);

    // A bond that has once shown numerical rank deficiency is not enriched
    // again; without this the kicked direction is truncated on the next pass
    // and the sample sets never settle.
    if (keep < std::min(unfolding.rows(), unfolding.cols())) truncated_[bond] = true;
    const Eigen::Index extra =
        kick && !truncated_[bond] ? std::min<Eigen::Index>(config_.kick_rank, max_rank - keep) : 0;
    if (extra > 0) {
        std::normal_distribution<double> normal;
        Matrix z(unfolding.rows(), extra);
        for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = normal(rng_);
        for (int pass = 0; pass < 2; ++pass) z -= q * (q.transpose() * z);
        Eigen::HouseholderQR<Matrix> qr(z);
        Matrix zq = qr.householderQ() * Matrix::Identity(z.rows(), extra);
        Matrix joined(q.rows(), keep + extra);
        joined << q, zq;
        q = std::move(joined);
    }
    return q;
}

void GradientCross::advance_left(int k, const TTCore& solved, bool kick) {
    const int rl = solved.r_left(), n = solved.n();
    const int bound = std::min(rank_bound(k), rl * n);
    const Matrix q = orthonormal_basis(solved.left_unfolding(), k, bound, kick);
    const Interface L = left_interface(k);

    const Matrix m = apply_left(L.values, psi_[k], q);
    const std::vector<int> piv = maxvol(m, config_.maxvol_delta, k);

    Interface next;
    next.values = select_rows(m, piv);
    for (int j = 0; j < k; ++j) next.derivs.push_back(select_rows(apply_left(L.derivs[j], psi_[k], q), piv));
    next.derivs.push_back(select_rows(apply_left(L.values, dpsi_[k], q), piv));

    std::vector<std::vector<int>> tuples;
    for (int p : piv) {
        std::vector<int> t = left_tuple(k, p % rl);
        t.push_back(p / rl);
        tuples.push_back(std::move(t));
    }
    sets_.left[k] = std::move(tuples);
    left_[k] = std::move(next);
    cores_[k] = TTCore::from_left_unfolding(q, rl, n);
}

void GradientCross::advance_right(int k, const TTCore& solved, bool kick) {
    const int n = solved.n(), rr = solved.r_right();
    const int bound = std::min(rank_bound(k - 1), n * rr);
    const Matrix q = orthonormal_basis(solved.right_unfolding().transpose(), k - 1, bound, kick);
    const Interface R = right_interface(k);

    const Matrix m = apply_right(psi_[k], R.values, q);
    const std::vector<int> piv = maxvol(m, config_.maxvol_delta, k);

    Interface next;
    next.values = select_rows(m, piv);
    next.derivs.push_back(select_rows(apply_right(dpsi_[k], R.values, q), piv));
    for (int j = k + 1; j < d_; ++j)
        next.derivs.push_back(select_rows(apply_right(psi_[k], R.derivs[j - k - 1], q), piv));

    std::vector<std::vector<int>> tuples;
    for (int p : piv) {
        std::vector<int> t{p % n};
        const std::vector<int> rest = right_tuple(k, p / n);
        t.insert(t.end(), rest.begin(), rest.end());
        tuples.push_back(std::move(t));
    }
    sets_.right[k - 1] = std::move(tuples);
    right_[k - 1] = std::move(next);
    cores_[k] = TTCore::from_right_unfolding(q.transpose(), n, rr);
}

double GradientCross::sweep() {
    const bool kick = sweeps_ > 0 && !converged_ && config_.kick_rank > 0;
    if (direction_ > 0) {
        for (int k = 0; k < d_; ++k) {
            TTCore u = (k == 0 && end_core_) ? *end_core_ : solve_core(k);
            if (k < d_ - 1) {
                advance_left(k, u, kick);
            } else {
                end_core_ = u;
                cores_[k] = std::move(u);
            }
        }
    } else {
        for (int k = d_ - 1; k >= 0; --k) {
            TTCore u = (k == d_ - 1 && end_core_) ? *end_core_ : solve_core(k);
            if (k > 0) {
                advance_right(k, u, kick);
            } else {
                end_core_ = u;
                cores_[k] = std::move(u);
            }
        }
    }
    direction_ = -direction_;
    ++sweeps_;

    TensorTrain now(cores_);
    double diff = std::numeric_limits<double>::infinity();
    if (previous_) {
        const double dist = tt_distance(now, *previous_);
        const double nrm = tt_norm(now);
        diff = nrm > 0.0 ? dist / nrm : dist;
    }
    history_.push_back(diff);
    // Ranks compared after rounding, so that a kicked direction which carries
    // no content does not count as a rank change.
    const std::vector<int> ranks = tt_round(now, config_.trunc_tol).ranks();
    converged_ = diff < config_.tol_stop && (ranks == previous_ranks_ || !config_.require_stable_ranks);
    previous_ranks_ = ranks;
    previous_ = std::move(now);
    return diff;
}

FunctionalTT GradientCross::current() const { return FunctionalTT(TensorTrain(cores_), bases_); }

std::vector<int> GradientCross::ranks() const { return TensorTrain(cores_).ranks(); }

CrossFit fit_gradient_cross(OracleFunction& oracle, std::vector<BasisSpec> bases,
                            const CrossConfig& config) {
    Stopwatch clock;
    const std::vector<BasisSpec> domains = bases;
    GradientCross cross(oracle, std::move(bases), config);

    // Uniform hold-out points pick the iterate returned when the sweeps do not settle.
    Matrix holdout(config.validation_points, static_cast<Eigen::Index>(domains.size()));
    Vector holdout_values(config.validation_points);
    {
        std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
        for (Eigen::Index i = 0; i < holdout.rows(); ++i) {
            for (Eigen::Index j = 0; j < holdout.cols(); ++j) {
                const Interval& iv = domains[j].domain();
                holdout(i, j) = std::uniform_real_distribution<double>(iv.lo, iv.hi)(rng);
            }
            holdout_values[i] = oracle.query(holdout.row(i).transpose()).value;
        }
    }
    auto holdout_error = [&](const FunctionalTT& s) {
        Vector pred(holdout.rows());
        for (Eigen::Index i = 0; i < holdout.rows(); ++i) pred[i] = s.value(holdout.row(i).transpose());
        return relative_l2(pred, holdout_values);
    };

    std::optional<FunctionalTT> best;
    double best_error = std::numeric_limits<double>::infinity();
    while (cross.sweeps_done() < config.max_sweeps) {
        cross.sweep();
        if (cross.converged()) break;
        if (holdout.rows() > 0) {
            FunctionalTT now = cross.current();
            const double e = holdout_error(now);
            if (e < best_error) {
                best_error = e;
                best = std::move(now);
            }
        }
    }
    FunctionalTT surrogate = cross.converged() || !best ? cross.current() : *best;
    if (config.final_round_tol > 0.0)
        surrogate.train() = tt_round(surrogate.train(), config.final_round_tol);

    FitStats stats;
    stats.sweeps = cross.sweeps_done();
    stats.converged = cross.converged();
    stats.regularized = cross.regularized();
    stats.history = cross.history();
    stats.final_ranks = surrogate.train().ranks();
    stats.dofs = tt_dofs(surrogate.train());
    stats.n_train_samples = oracle.distinct_queries();
    stats.n_queries_total = oracle.total_queries();

    const Dataset seen = oracle.cached_samples();
    Vector pred(seen.size());
    for (Eigen::Index i = 0; i < seen.size(); ++i)
        pred[i] = surrogate.value(seen.points.row(i).transpose());
    stats.err_train_2 = relative_l2(pred, seen.values);
    stats.cpu_train_s = clock.seconds();
    return {std::move(surrogate), std::move(stats)};
}

}  // namespace hdsurr
