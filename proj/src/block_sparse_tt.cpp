#include "hdsurr/block_sparse_tt.hpp"

#include "hdsurr/errors.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace hdsurr {

namespace {

constexpr int kOutput = -1;

int find_label(const std::vector<BondLabel>& labels, const BondLabel& l) {
    const auto it = std::find(labels.begin(), labels.end(), l);
    return it == labels.end() ? -1 : static_cast<int>(it - labels.begin());
}

int block_of(const BlockPattern& p, int bond, int index) {
    const auto& off = p.offsets[bond];
    const auto it = std::upper_bound(off.begin(), off.end(), index);
    return static_cast<int>(it - off.begin()) - 1;
}

}  // namespace

int BlockPattern::rank(int bond) const {
    int r = 0;
    for (int s : sizes[bond]) r += s;
    return r;
}

std::vector<int> BlockPattern::ranks() const {
    std::vector<int> r;
    for (int k = 1; k < dim(); ++k) r.push_back(rank(k));
    return r;
}

bool BlockPattern::allows(int core, int a, int i, int b) const {
    const int from = block_of(*this, core, a);
    const int to = block_of(*this, core + 1, b);
    for (const auto& t : transitions[core])
        if (t.from == from && t.slice == i && t.to == to) return true;
    return false;
}

TTCore BlockPattern::mask(int core) const {
    TTCore m(rank(core), mode_sizes[core], rank(core + 1));
    for (const auto& t : transitions[core])
        for (int a = 0; a < sizes[core][t.from]; ++a)
            for (int b = 0; b < sizes[core + 1][t.to]; ++b)
                m(offsets[core][t.from] + a, t.slice, offsets[core + 1][t.to] + b) = 1.0;
    return m;
}

long BlockPattern::free_parameters() const {
    long total = 0;
    for (int k = 0; k < dim(); ++k)
        for (const auto& t : transitions[k])
            total += long(sizes[k][t.from]) * sizes[k + 1][t.to];
    return total;
}

double BlockPattern::admissible_multi_indices() const {
    std::vector<double> count{1.0};
    for (int k = 0; k < dim(); ++k) {
        std::vector<double> next(labels[k + 1].size(), 0.0);
        for (const auto& t : transitions[k]) next[t.to] += count[t.from];
        count = std::move(next);
    }
    return count.empty() ? 0.0 : count[0];
}

BlockPattern block_structure(std::span<const BasisSpec> bases, const DegreeProfile& profile) {
    const int d = static_cast<int>(bases.size());
    const int g = profile.max_degree;
    if (d < 1) throw ArgumentError("block_structure: need at least one mode");
    if (g < 0) throw ArgumentError("block_structure: max_degree must be >= 0");
    for (const auto& b : bases)
        if (g >= b.degree_count())
            throw ArgumentError("block_structure: max_degree must be below every degree_count");
    if (profile.locality && *profile.locality < 1)
        throw ArgumentError("block_structure: locality must be >= 1");
    if (profile.max_block_size && *profile.max_block_size < 1)
        throw ArgumentError("block_structure: max_block_size must be >= 1");

    const bool local = profile.locality.has_value();
    const int K = profile.locality.value_or(0);
    auto step = [&](const BondLabel& l, int m) -> std::optional<BondLabel> {
        BondLabel r{l.degree + m, 0};
        if (r.degree > g) return std::nullopt;
        if (!local) return r;
        if (l.age == 0) {
            r.age = m > 0 ? 1 : 0;
        } else if (l.age < K) {
            r.age = l.age + 1;
        } else {
            if (m > 0) return std::nullopt;
            r.age = K + 1;
        }
        if (r.degree == g && r.age >= 1) r.age = K + 1;  // nothing left to activate
        return r;
    };

    BlockPattern p;
    for (const auto& b : bases) p.mode_sizes.push_back(b.degree_count());
    p.labels.resize(d + 1);
    p.transitions.resize(d);
    p.labels[0] = {BondLabel{0, 0}};
    for (int k = 0; k < d; ++k) {
        for (int from = 0; from < static_cast<int>(p.labels[k].size()); ++from) {
            for (int m = 0; m < p.mode_sizes[k]; ++m) {
                const auto next = step(p.labels[k][from], m);
                if (!next) continue;
                if (k == d - 1) {
                    if (profile.homogeneous && next->degree != g) continue;
                    if (p.labels[d].empty()) p.labels[d] = {BondLabel{kOutput, 0}};
                    p.transitions[k].push_back({from, m, 0});
                } else {
                    int to = find_label(p.labels[k + 1], *next);
                    if (to < 0) {
                        to = static_cast<int>(p.labels[k + 1].size());
                        p.labels[k + 1].push_back(*next);
                    }
                    p.transitions[k].push_back({from, m, to});
                }
            }
        }
    }
    if (p.labels[d].empty()) throw ArgumentError("block_structure: profile admits no polynomial");

    // Drop labels that cannot reach the output, then re-index.
    std::vector<std::vector<double>> right(d + 1);
    right[d] = {1.0};
    for (int k = d - 1; k >= 0; --k) {
        right[k].assign(p.labels[k].size(), 0.0);
        for (const auto& t : p.transitions[k]) right[k][t.from] += right[k + 1][t.to];
    }
    for (int k = 1; k < d; ++k) {
        std::vector<int> remap(p.labels[k].size(), -1);
        std::vector<BondLabel> kept;
        std::vector<double> kept_right;
        for (std::size_t i = 0; i < p.labels[k].size(); ++i) {
            if (right[k][i] > 0.0) {
                remap[i] = static_cast<int>(kept.size());
                kept.push_back(p.labels[k][i]);
                kept_right.push_back(right[k][i]);
            }
        }
        p.labels[k] = std::move(kept);
        right[k] = std::move(kept_right);
        auto fix = [&](std::vector<BlockTransition>& ts, bool as_to) {
            std::vector<BlockTransition> out;
            for (auto t : ts) {
                int& idx = as_to ? t.to : t.from;
                if (remap[idx] < 0) continue;
                idx = remap[idx];
                out.push_back(t);
            }
            ts = std::move(out);
        };
        fix(p.transitions[k - 1], true);
        fix(p.transitions[k], false);
    }

    std::vector<std::vector<double>> left(d + 1);
    left[0] = {1.0};
    for (int k = 0; k < d; ++k) {
        left[k + 1].assign(p.labels[k + 1].size(), 0.0);
        for (const auto& t : p.transitions[k]) left[k + 1][t.to] += left[k][t.from];
    }

    // Block sizes: distinct prefixes / completions, then consistency with the
    // neighbouring bonds until nothing changes.
    const double cap = profile.max_block_size ? *profile.max_block_size : std::numeric_limits<double>::infinity();
    p.sizes.resize(d + 1);
    for (int k = 0; k <= d; ++k) {
        p.sizes[k].resize(p.labels[k].size());
        for (std::size_t i = 0; i < p.labels[k].size(); ++i) {
            const double bound = std::min({left[k][i], right[k][i], cap, 1e9});
            p.sizes[k][i] = k == 0 || k == d ? 1 : static_cast<int>(bound);
        }
    }
    for (bool changed = true; changed;) {
        changed = false;
        for (int k = 1; k < d; ++k) {
            std::vector<long> in(p.labels[k].size(), 0), out(p.labels[k].size(), 0);
            for (const auto& t : p.transitions[k - 1]) in[t.to] += p.sizes[k - 1][t.from];
            for (const auto& t : p.transitions[k]) out[t.from] += p.sizes[k + 1][t.to];
            for (std::size_t i = 0; i < p.labels[k].size(); ++i) {
                const int bound = static_cast<int>(std::min<long>({p.sizes[k][i], in[i], out[i]}));
                if (bound != p.sizes[k][i]) {
                    p.sizes[k][i] = bound;
                    changed = true;
                }
            }
        }
    }

    p.offsets.resize(d + 1);
    for (int k = 0; k <= d; ++k) {
        int off = 0;
        for (int s : p.sizes[k]) {
            p.offsets[k].push_back(off);
            off += s;
        }
    }
    return p;
}

// ---------------------------------------------------------------------------
// ALS

namespace {

struct Entry {
    int a, m, b;
};

class BlockALS {
public:
    BlockALS(const Dataset& data, std::vector<BasisSpec> bases, BlockPattern pattern,
             std::uint64_t seed)
        : y_(data.values), bases_(std::move(bases)), p_(std::move(pattern)), d_(p_.dim()) {
        const Eigen::Index n = data.size();
        for (int k = 0; k < d_; ++k) {
            Matrix phi(n, p_.mode_sizes[k]);
            for (Eigen::Index i = 0; i < n; ++i)
                phi.row(i) = eval_basis_vector(bases_[k], data.points(i, k)).transpose();
            phi_.push_back(std::move(phi));
        }
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal;
        for (int k = 0; k < d_; ++k) {
            std::vector<Entry> entries;
            TTCore core(p_.rank(k), p_.mode_sizes[k], p_.rank(k + 1));
            std::vector<long> fan_in(p_.labels[k + 1].size(), 0);
            for (const auto& t : p_.transitions[k]) fan_in[t.to] += p_.sizes[k][t.from];
            for (const auto& t : p_.transitions[k])
                for (int b = 0; b < p_.sizes[k + 1][t.to]; ++b)
                    for (int a = 0; a < p_.sizes[k][t.from]; ++a) {
                        Entry e{p_.offsets[k][t.from] + a, t.slice, p_.offsets[k + 1][t.to] + b};
                        entries.push_back(e);
                        core(e.a, e.m, e.b) = normal(rng) / std::sqrt(double(fan_in[t.to]));
                    }
            entries_.push_back(std::move(entries));
            cores_.push_back(std::move(core));
        }
        left_.resize(d_ + 1);
        right_.resize(d_ + 1);
        left_[0] = Matrix::Ones(n, 1);
        right_[d_] = Matrix::Ones(n, 1);
        for (int k = d_ - 1; k >= 1; --k) right_orthogonalize(k);
        for (int k = d_ - 1; k >= 0; --k) right_[k] = contract_right(k);
    }

    /// Solves the micro-problem at core k and returns the training MSE.
    double solve(int k) {
        const auto& entries = entries_[k];
        const Eigen::Index n = y_.size();
        const Eigen::Index p = static_cast<Eigen::Index>(entries.size());
        Matrix design(n, p);
        for (Eigen::Index e = 0; e < p; ++e) {
            const Entry& en = entries[e];
            design.col(e) = left_[k].col(en.a).cwiseProduct(phi_[k].col(en.m)).cwiseProduct(right_[k + 1].col(en.b));
        }
        Vector coef;
        bool solved = false;
        if (n >= p) {
            Eigen::ColPivHouseholderQR<Matrix> qr(design);
            if (qr.rank() == p) {
                coef = qr.solve(y_);
                solved = true;
            }
        }
        if (!solved) {
            // Underdetermined or rank deficient: minimum-norm least squares.
            coef = Eigen::CompleteOrthogonalDecomposition<Matrix>(design).solve(y_);
            regularized_ = true;
        }
        TTCore& core = cores_[k];
        for (Eigen::Index e = 0; e < p; ++e) core(entries[e].a, entries[e].m, entries[e].b) = coef[e];
        return (design * coef - y_).squaredNorm() / static_cast<double>(n);
    }

    void move_right(int k) {
        left_orthogonalize(k);
        left_[k + 1] = contract_left(k);
    }

    void move_left(int k) {
        right_orthogonalize(k);
        right_[k] = contract_right(k);
    }

    bool regularized() const { return regularized_; }
    const std::vector<TTCore>& cores() const { return cores_; }

private:
    Matrix contract_left(int k) const {
        const TTCore& c = cores_[k];
        Matrix out = Matrix::Zero(y_.size(), c.r_right());
        for (int m = 0; m < c.n(); ++m)
            out += phi_[k].col(m).asDiagonal() * (left_[k] * c.slice(m));
        return out;
    }

    Matrix contract_right(int k) const {
        const TTCore& c = cores_[k];
        Matrix out = Matrix::Zero(y_.size(), c.r_left());
        for (int m = 0; m < c.n(); ++m)
            out += phi_[k].col(m).asDiagonal() * (right_[k + 1] * c.slice(m).transpose());
        return out;
    }

    // Block-wise QR of the left unfolding; R goes into the next core.
    void left_orthogonalize(int k) {
        TTCore& c = cores_[k];
        TTCore& next = cores_[k + 1];
        auto unf = c.left_unfolding();
        auto next_rows = next.right_unfolding();
        for (std::size_t lab = 0; lab < p_.labels[k + 1].size(); ++lab) {
            std::vector<Eigen::Index> rows;
            for (const auto& t : p_.transitions[k])
                if (t.to == static_cast<int>(lab))
                    for (int a = 0; a < p_.sizes[k][t.from]; ++a)
                        rows.push_back(p_.offsets[k][t.from] + a + Eigen::Index(c.r_left()) * t.slice);
            const int off = p_.offsets[k + 1][lab], rho = p_.sizes[k + 1][lab];
            Matrix block(rows.size(), rho);
            for (std::size_t i = 0; i < rows.size(); ++i) block.row(i) = unf.row(rows[i]).segment(off, rho);
            Eigen::HouseholderQR<Matrix> qr(block);
            const Matrix q = qr.householderQ() * Matrix::Identity(block.rows(), rho);
            const Matrix r = qr.matrixQR().topRows(rho).triangularView<Eigen::Upper>();
            for (std::size_t i = 0; i < rows.size(); ++i) unf.row(rows[i]).segment(off, rho) = q.row(i);
            next_rows.middleRows(off, rho) = r * next_rows.middleRows(off, rho);
        }
    }

    // Block-wise LQ of the right unfolding; L goes into the previous core.
    void right_orthogonalize(int k) {
        TTCore& c = cores_[k];
        TTCore& prev = cores_[k - 1];
        auto unf = c.right_unfolding();
        auto prev_cols = prev.left_unfolding();
        for (std::size_t lab = 0; lab < p_.labels[k].size(); ++lab) {
            std::vector<Eigen::Index> cols;
            for (const auto& t : p_.transitions[k])
                if (t.from == static_cast<int>(lab))
                    for (int b = 0; b < p_.sizes[k + 1][t.to]; ++b)
                        cols.push_back(t.slice + Eigen::Index(c.n()) * (p_.offsets[k + 1][t.to] + b));
            const int off = p_.offsets[k][lab], rho = p_.sizes[k][lab];
            Matrix block(rho, cols.size());
            for (std::size_t j = 0; j < cols.size(); ++j) block.col(j) = unf.col(cols[j]).segment(off, rho);
            Eigen::HouseholderQR<Matrix> qr(block.transpose());
            const Matrix q = qr.householderQ() * Matrix::Identity(block.cols(), rho);
            const Matrix r = qr.matrixQR().topRows(rho).triangularView<Eigen::Upper>();
            for (std::size_t j = 0; j < cols.size(); ++j) unf.col(cols[j]).segment(off, rho) = q.row(j).transpose();
            prev_cols.middleCols(off, rho) = prev_cols.middleCols(off, rho) * r.transpose();
        }
    }

    Vector y_;
    std::vector<BasisSpec> bases_;
    BlockPattern p_;
    int d_;
    std::vector<Matrix> phi_;
    std::vector<std::vector<Entry>> entries_;
    std::vector<TTCore> cores_;
    std::vector<Matrix> left_, right_;
    bool regularized_ = false;
};

}  // namespace

BlockSparseFit bs_als_fit(const Dataset& data, std::vector<BasisSpec> bases,
                          const DegreeProfile& profile, const BlockALSConfig& config) {
    const int d = static_cast<int>(bases.size());
    if (data.dim() != d) throw ArgumentError("bs_als_fit: data dimension differs from the basis count");
    if (data.size() == 0) throw ArgumentError("bs_als_fit: empty dataset");
    if (config.max_iters < 1) throw ArgumentError("bs_als_fit: max_iters must be >= 1");

    Stopwatch clock;
    BlockPattern pattern = block_structure(bases, profile);
    BlockSparseFit fit;
    fit.pattern = pattern;
    BlockALS als(data, bases, pattern, config.seed);

    const double scale = data.values.squaredNorm() / static_cast<double>(data.size());
    auto relative = [&](double mse) { return scale > 0.0 ? std::sqrt(mse / scale) : std::sqrt(mse); };

    double previous = std::numeric_limits<double>::infinity();
    double current = previous;
    int sweeps = 0;
    bool converged = false;
    while (sweeps < config.max_iters) {
        double mse = 0.0;
        for (int k = 0; k < d; ++k) {
            mse = als.solve(k);
            fit.micro_residuals.push_back(mse);
            if (k + 1 < d) als.move_right(k);
        }
        for (int k = d - 1; k >= 0; --k) {
            mse = als.solve(k);
            fit.micro_residuals.push_back(mse);
            if (k > 0) als.move_left(k);
        }
        ++sweeps;
        current = relative(mse);
        fit.stats.history.push_back(current);
        if (current == 0.0 || (std::isfinite(previous) && previous - current < config.stop_tol * previous)) {
            converged = true;
            break;
        }
        previous = current;
    }

    std::vector<TTCore> cores = als.cores();
    // A vanishing core means a vanishing function; report it as such.
    const bool vanishes = std::any_of(cores.begin(), cores.end(), [](const TTCore& c) {
        return std::all_of(c.data().begin(), c.data().end(), [](double v) { return v == 0.0; });
    });
    if (vanishes)
        for (auto& c : cores) std::fill(c.data().begin(), c.data().end(), 0.0);
    fit.surrogate = FunctionalTT(TensorTrain(std::move(cores)), std::move(bases));
    fit.stats.err_train_2 = current;
    fit.stats.dofs = pattern.free_parameters();
    fit.rounded_dofs = tt_dofs(tt_round(fit.surrogate.train(), 1e-12));
    fit.stats.n_train_samples = data.size();
    fit.stats.sweeps = sweeps;
    fit.stats.final_ranks = pattern.ranks();
    fit.stats.converged = converged;
    fit.stats.regularized = als.regularized();
    fit.stats.cpu_train_s = clock.seconds();
    return fit;
}

}  // namespace hdsurr
