#include "vtn/tensor_train.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/QR>

#include "vtn/errors.hpp"

namespace vtn {

Core3::Core3(Index left_rank, Index mode_size, Index right_rank)
    : Core3(left_rank, mode_size, right_rank,
            Eigen::VectorXd::Zero(std::max<Index>(left_rank * mode_size * right_rank, 0))) {}

Core3::Core3(Index left_rank, Index mode_size, Index right_rank, Eigen::VectorXd entries)
    : left_(left_rank), mode_(mode_size), right_(right_rank), entries_(std::move(entries)) {
    if (left_ < 1 || mode_ < 1 || right_ < 1) {
        throw StructuralError("Core3: all dimensions must be >= 1");
    }
    if (entries_.size() != left_ * mode_ * right_) {
        throw StructuralError("Core3: entry count " + std::to_string(entries_.size()) +
                              " does not match shape");
    }
}

Core3 Core3::from_left_unfolding(const Eigen::MatrixXd& unfolding, Index mode_size) {
    if (mode_size < 1 || unfolding.rows() % mode_size != 0) {
        throw StructuralError("from_left_unfolding: rows not divisible by mode size");
    }
    Eigen::VectorXd entries = Eigen::Map<const Eigen::VectorXd>(unfolding.data(), unfolding.size());
    return Core3(unfolding.rows() / mode_size, mode_size, unfolding.cols(), std::move(entries));
}

Core3 Core3::from_right_unfolding(const Eigen::MatrixXd& unfolding, Index mode_size) {
    if (mode_size < 1 || unfolding.cols() % mode_size != 0) {
        throw StructuralError("from_right_unfolding: columns not divisible by mode size");
    }
    Eigen::VectorXd entries = Eigen::Map<const Eigen::VectorXd>(unfolding.data(), unfolding.size());
    return Core3(unfolding.rows(), mode_size, unfolding.cols() / mode_size, std::move(entries));
}

Eigen::MatrixXd Core3::slice(Index i) const {
    Eigen::MatrixXd out(left_, right_);
    for (Index s = 0; s < right_; ++s) {
        for (Index r = 0; r < left_; ++r) {
            out(r, s) = (*this)(r, i, s);
        }
    }
    return out;
}

Eigen::MatrixXd left_unfold(const Core3& core) {
    return Eigen::Map<const Eigen::MatrixXd>(core.entries().data(), core.left_rank() * core.mode_size(),
                                             core.right_rank());
}

Eigen::MatrixXd right_unfold(const Core3& core) {
    return Eigen::Map<const Eigen::MatrixXd>(core.entries().data(), core.left_rank(),
                                             core.mode_size() * core.right_rank());
}

Eigen::MatrixXd mode2_contract(const Core3& core, const Eigen::Ref<const Eigen::VectorXd>& v) {
    if (v.size() != core.mode_size()) {
        throw StructuralError("mode2_contract: vector length " + std::to_string(v.size()) +
                              " != mode size " + std::to_string(core.mode_size()));
    }
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(core.left_rank(), core.right_rank());
    for (Index s = 0; s < core.right_rank(); ++s) {
        for (Index i = 0; i < core.mode_size(); ++i) {
            const double vi = v[i];
            if (vi == 0.0) continue;
            for (Index r = 0; r < core.left_rank(); ++r) {
                out(r, s) += vi * core(r, i, s);
            }
        }
    }
    return out;
}

TensorTrain::TensorTrain(std::vector<Core3> cores, std::optional<std::size_t> canonical_site)
    : cores_(std::move(cores)), site_(canonical_site) {
    validate();
}

void TensorTrain::validate() const {
    if (cores_.empty()) {
        throw StructuralError("TensorTrain: at least one core required");
    }
    for (std::size_t k = 0; k + 1 < cores_.size(); ++k) {
        if (cores_[k].right_rank() != cores_[k + 1].left_rank()) {
            throw StructuralError("TensorTrain: rank mismatch between cores " + std::to_string(k) +
                                  " and " + std::to_string(k + 1));
        }
    }
    if (cores_.back().right_rank() != 1) {
        throw StructuralError("TensorTrain: last core must have right rank 1");
    }
    if (site_ && *site_ >= cores_.size()) {
        throw StructuralError("TensorTrain: canonical site out of range");
    }
    for (const auto& c : cores_) {
        if (!c.all_finite()) {
            throw NumericalError("TensorTrain: non-finite core entries");
        }
    }
}

std::vector<Index> TensorTrain::ranks() const {
    std::vector<Index> out;
    out.reserve(cores_.size() + 1);
    for (const auto& c : cores_) out.push_back(c.left_rank());
    out.push_back(cores_.back().right_rank());
    return out;
}

Index TensorTrain::full_size() const {
    constexpr Index cap = std::numeric_limits<Index>::max();
    Index total = outputs();
    for (const auto& c : cores_) {
        if (total > cap / c.mode_size()) return cap;
        total *= c.mode_size();
    }
    return total;
}

TensorTrain TensorTrain::with_core(std::size_t k, Core3 core) const {
    const Core3& old = cores_.at(k);
    if (core.left_rank() != old.left_rank() || core.mode_size() != old.mode_size() ||
        core.right_rank() != old.right_rank()) {
        throw StructuralError("with_core: replacement core has a different shape");
    }
    std::vector<Core3> cores = cores_;
    cores[k] = std::move(core);
    std::optional<std::size_t> site = (site_ && *site_ == k) ? site_ : std::nullopt;
    return TensorTrain(std::move(cores), site);
}

Eigen::VectorXd reconstruct(const TensorTrain& tt, Index guard) {
    const Index total = tt.full_size();
    if (total > guard) {
        throw SizeError("reconstruct: " + std::to_string(total) + " entries exceed guard " +
                        std::to_string(guard));
    }
    // acc is (L*I_1*...*I_k) x R_{k+1}; multiplying by the next right unfolding and
    // reinterpreting column-major appends i_{k+1} as the slowest row index.
    Eigen::MatrixXd acc = left_unfold(tt.core(0));
    for (std::size_t k = 1; k < tt.order(); ++k) {
        const Core3& c = tt.core(k);
        Eigen::MatrixXd next = acc * right_unfold(c);
        acc = Eigen::Map<const Eigen::MatrixXd>(next.data(), acc.rows() * c.mode_size(), c.right_rank());
    }
    return Eigen::Map<const Eigen::VectorXd>(acc.data(), acc.size());
}

ThinQr thin_qr(const Eigen::MatrixXd& a) {
    const Index k = std::min(a.rows(), a.cols());
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    ThinQr out;
    out.q = qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), k);
    out.r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    return out;
}

namespace {

// Moves the orthogonality centre from core k to core k+1.
void push_right(std::vector<Core3>& cores, std::size_t k) {
    const Core3& c = cores[k];
    ThinQr f = thin_qr(left_unfold(c));
    cores[k] = Core3::from_left_unfolding(f.q, c.mode_size());
    const Core3& n = cores[k + 1];
    Eigen::MatrixXd merged = f.r * right_unfold(n);
    cores[k + 1] = Core3::from_right_unfolding(merged, n.mode_size());
}

// Moves the orthogonality centre from core k to core k-1 via an LQ factorization
// of the right unfolding (computed as the QR of its transpose).
void push_left(std::vector<Core3>& cores, std::size_t k) {
    const Core3& c = cores[k];
    ThinQr f = thin_qr(right_unfold(c).transpose());
    Eigen::MatrixXd q_rows = f.q.transpose();
    Eigen::MatrixXd l = f.r.transpose();
    cores[k] = Core3::from_right_unfolding(q_rows, c.mode_size());
    const Core3& p = cores[k - 1];
    Eigen::MatrixXd merged = left_unfold(p) * l;
    cores[k - 1] = Core3::from_left_unfolding(merged, p.mode_size());
}

}  // namespace

TensorTrain shift_canonical(const TensorTrain& tt, std::size_t target) {
    if (target >= tt.order()) {
        throw StructuralError("shift_canonical: target site out of range");
    }
    if (tt.canonical_site() == target) {
        return tt;
    }
    std::vector<Core3> cores = tt.cores();
    if (auto site = tt.canonical_site()) {
        for (std::size_t k = *site; k < target; ++k) push_right(cores, k);
        for (std::size_t k = *site; k > target; --k) push_left(cores, k);
    } else {
        for (std::size_t k = 0; k < target; ++k) push_right(cores, k);
        for (std::size_t k = tt.order() - 1; k > target; --k) push_left(cores, k);
    }
    return TensorTrain(std::move(cores), target);
}

double tt_norm(const TensorTrain& tt) {
    const std::size_t site = tt.canonical_site().value_or(0);
    const TensorTrain canon = shift_canonical(tt, site);
    return canon.core(site).entries().norm();
}

double canonical_form_error(const TensorTrain& tt, std::size_t site) {
    double worst = 0.0;
    for (std::size_t k = 0; k < tt.order(); ++k) {
        if (k == site) continue;
        Eigen::MatrixXd gram;
        if (k < site) {
            Eigen::MatrixXd q = left_unfold(tt.core(k));
            gram = q.transpose() * q;
        } else {
            Eigen::MatrixXd q = right_unfold(tt.core(k));
            gram = q * q.transpose();
        }
        gram -= Eigen::MatrixXd::Identity(gram.rows(), gram.cols());
        worst = std::max(worst, gram.cwiseAbs().maxCoeff());
    }
    return worst;
}

}  // namespace vtn
