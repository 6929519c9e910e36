#include "hdsurr/tensor_train.hpp"

#include "hdsurr/errors.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace hdsurr {

TTCore::TTCore(int r_left, int n, int r_right)
    : r_left_(r_left), n_(n), r_right_(r_right),
      data_(static_cast<std::size_t>(r_left) * n * r_right, 0.0) {
    if (r_left < 1 || n < 1 || r_right < 1)
        throw ArgumentError("TTCore: all dimensions must be >= 1");
}

Matrix TTCore::contract_mode(const double* weights) const {
    Matrix out = Matrix::Zero(r_left_, r_right_);
    for (int b = 0; b < r_right_; ++b) {
        for (int i = 0; i < n_; ++i) {
            const double w = weights[i];
            if (w == 0.0) continue;
            const double* col = data_.data() + index(0, i, b);
            for (int a = 0; a < r_left_; ++a) out(a, b) += w * col[a];
        }
    }
    return out;
}

Matrix TTCore::slice(int i) const {
    Matrix out(r_left_, r_right_);
    for (int b = 0; b < r_right_; ++b)
        for (int a = 0; a < r_left_; ++a) out(a, b) = (*this)(a, i, b);
    return out;
}

TTCore TTCore::from_left_unfolding(const Matrix& m, int r_left, int n) {
    if (m.rows() != static_cast<Eigen::Index>(r_left) * n)
        throw ArgumentError("TTCore::from_left_unfolding: row count mismatch");
    TTCore c(r_left, n, static_cast<int>(m.cols()));
    c.left_unfolding() = m;
    return c;
}

TTCore TTCore::from_right_unfolding(const Matrix& m, int n, int r_right) {
    if (m.cols() != static_cast<Eigen::Index>(n) * r_right)
        throw ArgumentError("TTCore::from_right_unfolding: column count mismatch");
    TTCore c(static_cast<int>(m.rows()), n, r_right);
    c.right_unfolding() = m;
    return c;
}

TensorTrain::TensorTrain(std::vector<TTCore> cores) : cores_(std::move(cores)) { validate(); }

std::vector<int> TensorTrain::ranks() const {
    std::vector<int> r;
    for (int k = 0; k + 1 < dim(); ++k) r.push_back(cores_[k].r_right());
    return r;
}

std::vector<int> TensorTrain::mode_sizes() const {
    std::vector<int> n;
    for (const auto& c : cores_) n.push_back(c.n());
    return n;
}

void TensorTrain::validate() const {
    if (cores_.empty()) throw ArgumentError("TensorTrain: order must be >= 1");
    if (cores_.front().r_left() != 1 || cores_.back().r_right() != 1)
        throw ArgumentError("TensorTrain: boundary ranks must be 1");
    for (std::size_t k = 0; k + 1 < cores_.size(); ++k) {
        if (cores_[k].r_right() != cores_[k + 1].r_left()) {
            std::ostringstream os;
            os << "TensorTrain: bond " << k << " mismatch (" << cores_[k].r_right() << " vs "
               << cores_[k + 1].r_left() << ")";
            throw ArgumentError(os.str());
        }
    }
}

TensorTrain TensorTrain::random(std::span<const int> mode_sizes, std::span<const int> ranks,
                                std::uint64_t seed) {
    const int d = static_cast<int>(mode_sizes.size());
    if (d < 1 || static_cast<int>(ranks.size()) != d - 1)
        throw ArgumentError("TensorTrain::random: need d mode sizes and d-1 ranks");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<TTCore> cores;
    for (int k = 0; k < d; ++k) {
        const int rl = k == 0 ? 1 : ranks[k - 1];
        const int rr = k == d - 1 ? 1 : ranks[k];
        TTCore c(rl, mode_sizes[k], rr);
        for (double& v : c.data()) v = normal(rng);
        cores.push_back(std::move(c));
    }
    return TensorTrain(std::move(cores));
}

double DenseTensor::operator()(std::span<const int> idx) const {
    std::size_t offset = 0, stride = 1;
    for (std::size_t k = 0; k < shape.size(); ++k) {
        offset += static_cast<std::size_t>(idx[k]) * stride;
        stride *= static_cast<std::size_t>(shape[k]);
    }
    return data[offset];
}

FunctionalTT::FunctionalTT(TensorTrain train, std::vector<BasisSpec> bases)
    : train_(std::move(train)), bases_(std::move(bases)) {
    if (static_cast<int>(bases_.size()) != train_.dim())
        throw ArgumentError("FunctionalTT: one basis per mode required");
    for (int k = 0; k < train_.dim(); ++k)
        if (train_.core(k).n() != bases_[k].degree_count())
            throw ArgumentError("FunctionalTT: core mode size differs from basis size");
}

double FunctionalTT::value(const Vector& x) const { return tt_eval(*this, x); }
Vector FunctionalTT::gradient(const Vector& x) const { return tt_grad(*this, x); }

namespace {

void check_point(const FunctionalTT& s, const Vector& x) {
    if (x.size() != s.dim()) {
        std::ostringstream os;
        os << "point of dimension " << x.size() << " for a surrogate of dimension " << s.dim();
        throw ArgumentError(os.str());
    }
}

}  // namespace

double tt_eval(const FunctionalTT& surrogate, const Vector& x) {
    check_point(surrogate, x);
    const auto& train = surrogate.train();
    Vector psi;
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Ones(1);
    for (int k = 0; k < train.dim(); ++k) {
        const TTCore& c = train.core(k);
        psi.resize(c.n());
        eval_basis(surrogate.bases()[k], x[k], psi.data(), nullptr);
        Eigen::RowVectorXd w = v * c.right_unfolding();  // 1 × (n·r_right)
        Eigen::RowVectorXd next = Eigen::RowVectorXd::Zero(c.r_right());
        for (int b = 0; b < c.r_right(); ++b)
            for (int i = 0; i < c.n(); ++i) next[b] += psi[i] * w[i + c.n() * b];
        v = std::move(next);
    }
    return v[0];
}

Vector tt_grad(const FunctionalTT& surrogate, const Vector& x) {
    check_point(surrogate, x);
    const auto& train = surrogate.train();
    const int d = train.dim();
    std::vector<Matrix> m(d), dm(d);
    Vector psi, dpsi;
    for (int k = 0; k < d; ++k) {
        const TTCore& c = train.core(k);
        psi.resize(c.n());
        dpsi.resize(c.n());
        eval_basis(surrogate.bases()[k], x[k], psi.data(), dpsi.data());
        m[k] = c.contract_mode(psi.data());
        dm[k] = c.contract_mode(dpsi.data());
    }
    // right[k] = M_{k+1}⋯M_{d−1} (column), left accumulated on the fly
    std::vector<Vector> right(d);
    right[d - 1] = Vector::Ones(1);
    for (int k = d - 2; k >= 0; --k) right[k] = m[k + 1] * right[k + 1];
    Vector g(d);
    Eigen::RowVectorXd left = Eigen::RowVectorXd::Ones(1);
    for (int k = 0; k < d; ++k) {
        g[k] = (left * dm[k] * right[k])(0, 0);
        left = left * m[k];
    }
    return g;
}

DenseTensor tt_to_dense(const TensorTrain& train) {
    std::size_t total = 1;
    for (int n : train.mode_sizes()) {
        total *= static_cast<std::size_t>(n);
        if (total > kDenseSizeGuard)
            throw SizeGuardError("tt_to_dense: tensor exceeds the dense size guard");
    }
    // acc: (prefix multi-index, first index fastest) × bond
    Matrix acc = Matrix::Ones(1, 1);
    for (int k = 0; k < train.dim(); ++k) {
        const TTCore& c = train.core(k);
        const Eigen::Index p = acc.rows();
        Matrix next(p * c.n(), c.r_right());
        for (int i = 0; i < c.n(); ++i) next.middleRows(p * i, p) = acc * c.slice(i);
        acc = std::move(next);
    }
    DenseTensor out;
    out.shape = train.mode_sizes();
    out.data.assign(acc.data(), acc.data() + acc.size());
    return out;
}

namespace {

void left_orthogonalize_core(TensorTrain& t, int k) {
    TTCore& c = t.core(k);
    const Matrix unf = c.left_unfolding();
    const Eigen::Index rows = unf.rows();
    const Eigen::Index keep = std::min<Eigen::Index>(rows, unf.cols());
    Eigen::HouseholderQR<Matrix> qr(unf);
    Matrix q = qr.householderQ() * Matrix::Identity(rows, keep);
    Matrix r = qr.matrixQR().topRows(keep).triangularView<Eigen::Upper>();
    const int rl = c.r_left(), n = c.n();
    t.set_core(k, TTCore::from_left_unfolding(q, rl, n));
    const TTCore& nxt = t.core(k + 1);
    Matrix merged = r * nxt.right_unfolding();
    t.set_core(k + 1, TTCore::from_right_unfolding(merged, nxt.n(), nxt.r_right()));
}

void right_orthogonalize_core(TensorTrain& t, int k) {
    TTCore& c = t.core(k);
    const Matrix unf_t = c.right_unfolding().transpose();  // (n·r_right) × r_left
    const Eigen::Index rows = unf_t.rows();
    const Eigen::Index keep = std::min<Eigen::Index>(rows, unf_t.cols());
    Eigen::HouseholderQR<Matrix> qr(unf_t);
    Matrix q = qr.householderQ() * Matrix::Identity(rows, keep);
    Matrix r = qr.matrixQR().topRows(keep).triangularView<Eigen::Upper>();
    const int n = c.n(), rr = c.r_right();
    t.set_core(k, TTCore::from_right_unfolding(q.transpose(), n, rr));
    const TTCore& prv = t.core(k - 1);
    Matrix merged = prv.left_unfolding() * r.transpose();
    t.set_core(k - 1, TTCore::from_left_unfolding(merged, prv.r_left(), prv.n()));
}

}  // namespace

TensorTrain tt_orthogonalize(const TensorTrain& train, int pivot) {
    if (pivot < 0 || pivot >= train.dim())
        throw ArgumentError("tt_orthogonalize: pivot out of range");
    TensorTrain t = train;
    for (int k = 0; k < pivot; ++k) left_orthogonalize_core(t, k);
    for (int k = t.dim() - 1; k > pivot; --k) right_orthogonalize_core(t, k);
    return t;
}

TensorTrain tt_round(const TensorTrain& train, double tolerance) {
    if (!(tolerance >= 0.0 && tolerance < 1.0))
        throw ArgumentError("tt_round: tolerance must lie in [0,1)");
    const int d = train.dim();
    TensorTrain t = tt_orthogonalize(train, 0);
    if (d == 1) return t;
    const double norm = Eigen::Map<const Vector>(t.core(0).data().data(),
                                                 static_cast<Eigen::Index>(t.core(0).size()))
                            .norm();
    const double delta = tolerance * norm / std::sqrt(static_cast<double>(d - 1));
    const std::vector<int> sizes = t.mode_sizes();
    for (int k = 0; k + 1 < d; ++k) {
        // Threshold δ/√q with q the largest possible bond rank: at most q values
        // fall below it, so the bond error stays ≤ δ, and a second rounding at
        // the same tolerance finds nothing left to drop.
        double left = 1.0, right = 1.0;
        for (int j = 0; j <= k; ++j) left *= sizes[j];
        for (int j = k + 1; j < d; ++j) right *= sizes[j];
        const double threshold = delta / std::sqrt(std::min(left, right));

        const TTCore& c = t.core(k);
        const Matrix unf = c.left_unfolding();
        Eigen::BDCSVD<Matrix> svd(unf, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Vector& s = svd.singularValues();
        const Eigen::Index full = s.size();
        const double floor =
            std::numeric_limits<double>::epsilon() * std::max(unf.rows(), unf.cols()) *
            (full > 0 ? s[0] : 0.0);
        const double cut = std::max(floor, threshold);
        Eigen::Index keep = full;
        while (keep > 1 && s[keep - 1] <= cut) --keep;
        Matrix u = svd.matrixU().leftCols(keep);
        Matrix sv = s.head(keep).asDiagonal() * svd.matrixV().leftCols(keep).transpose();
        const int rl = c.r_left(), n = c.n();
        t.set_core(k, TTCore::from_left_unfolding(u, rl, n));
        const TTCore& nxt = t.core(k + 1);
        Matrix merged = sv * nxt.right_unfolding();
        t.set_core(k + 1, TTCore::from_right_unfolding(merged, nxt.n(), nxt.r_right()));
    }
    return t;
}

long tt_dofs(const TensorTrain& train) {
    long total = 0;
    for (const auto& c : train.cores()) total += static_cast<long>(c.size());
    return total;
}

double tt_dot(const TensorTrain& a, const TensorTrain& b) {
    if (a.mode_sizes() != b.mode_sizes()) throw ArgumentError("tt_dot: mode sizes differ");
    Matrix w = Matrix::Ones(1, 1);
    for (int k = 0; k < a.dim(); ++k) {
        const TTCore& ca = a.core(k);
        const TTCore& cb = b.core(k);
        Matrix next = Matrix::Zero(ca.r_right(), cb.r_right());
        for (int i = 0; i < ca.n(); ++i) next.noalias() += ca.slice(i).transpose() * w * cb.slice(i);
        w = std::move(next);
    }
    return w(0, 0);
}

double tt_norm(const TensorTrain& train) {
    TensorTrain t = tt_orthogonalize(train, train.dim() - 1);
    const auto& data = t.core(train.dim() - 1).data();
    return Eigen::Map<const Vector>(data.data(), static_cast<Eigen::Index>(data.size())).norm();
}

TensorTrain tt_axpby(double alpha, const TensorTrain& a, double beta, const TensorTrain& b) {
    if (a.mode_sizes() != b.mode_sizes()) throw ArgumentError("tt_axpby: mode sizes differ");
    const int d = a.dim();
    if (d == 1) {
        TTCore c(1, a.core(0).n(), 1);
        for (int i = 0; i < c.n(); ++i) c(0, i, 0) = alpha * a.core(0)(0, i, 0) + beta * b.core(0)(0, i, 0);
        return TensorTrain({c});
    }
    std::vector<TTCore> cores;
    for (int k = 0; k < d; ++k) {
        const TTCore& ca = a.core(k);
        const TTCore& cb = b.core(k);
        const bool first = k == 0, last = k == d - 1;
        const int rl = first ? 1 : ca.r_left() + cb.r_left();
        const int rr = last ? 1 : ca.r_right() + cb.r_right();
        TTCore c(rl, ca.n(), rr);
        const double sa = first ? alpha : 1.0;
        const double sb = first ? beta : 1.0;
        const int a_off_l = 0, b_off_l = first ? 0 : ca.r_left();
        const int a_off_r = 0, b_off_r = last ? 0 : ca.r_right();
        for (int i = 0; i < ca.n(); ++i) {
            for (int bb = 0; bb < ca.r_right(); ++bb)
                for (int aa = 0; aa < ca.r_left(); ++aa)
                    c(a_off_l + aa, i, a_off_r + bb) = sa * ca(aa, i, bb);
            for (int bb = 0; bb < cb.r_right(); ++bb)
                for (int aa = 0; aa < cb.r_left(); ++aa)
                    c(b_off_l + aa, i, b_off_r + bb) += sb * cb(aa, i, bb);
        }
        cores.push_back(std::move(c));
    }
    return TensorTrain(std::move(cores));
}

double tt_distance(const TensorTrain& a, const TensorTrain& b) {
    return tt_norm(tt_axpby(1.0, a, -1.0, b));
}

}  // namespace hdsurr
