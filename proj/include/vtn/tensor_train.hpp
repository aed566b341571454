#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace vtn {

using Index = Eigen::Index;

/**
 * Third-order TT-core of shape (R_left, I, R_right).
 *
 * Entries are stored first-index-fastest: entry (r, i, s) lives at
 * r + i*R_left + s*R_left*I. With this layout the left unfolding
 * (R_left*I x R_right) and the right unfolding (R_left x I*R_right) are both
 * plain column-major reinterpretations of the storage.
 */
class Core3 {
public:
    Core3() = default;
    /// Zero-initialized core.
    Core3(Index left_rank, Index mode_size, Index right_rank);
    Core3(Index left_rank, Index mode_size, Index right_rank, Eigen::VectorXd entries);

    static Core3 from_left_unfolding(const Eigen::MatrixXd& unfolding, Index mode_size);
    static Core3 from_right_unfolding(const Eigen::MatrixXd& unfolding, Index mode_size);

    Index left_rank() const { return left_; }
    Index mode_size() const { return mode_; }
    Index right_rank() const { return right_; }
    Index size() const { return left_ * mode_ * right_; }

    double operator()(Index r, Index i, Index s) const { return entries_[offset(r, i, s)]; }
    double& operator()(Index r, Index i, Index s) { return entries_[offset(r, i, s)]; }

    const Eigen::VectorXd& entries() const { return entries_; }
    Eigen::VectorXd& entries() { return entries_; }

    /// Lateral slice (R_left x R_right) at mode index i.
    Eigen::MatrixXd slice(Index i) const;

    bool all_finite() const { return entries_.allFinite(); }

private:
    Index offset(Index r, Index i, Index s) const { return r + left_ * (i + mode_ * s); }

    Index left_{0};
    Index mode_{0};
    Index right_{0};
    Eigen::VectorXd entries_;
};

Eigen::MatrixXd left_unfold(const Core3& core);
Eigen::MatrixXd right_unfold(const Core3& core);

/// Mode-2 product with a vector: result(r, s) = sum_i v[i] * core(r, i, s).
Eigen::MatrixXd mode2_contract(const Core3& core, const Eigen::Ref<const Eigen::VectorXd>& v);

/**
 * Ordered chain of TT-cores with an optional canonical site.
 *
 * The first core's left rank is the number of outputs L, the last core's
 * right rank is 1. Values are immutable in spirit: every algorithm returns a
 * new TensorTrain.
 */
class TensorTrain {
public:
    TensorTrain() = default;
    explicit TensorTrain(std::vector<Core3> cores, std::optional<std::size_t> canonical_site = std::nullopt);

    std::size_t order() const { return cores_.size(); }
    const std::vector<Core3>& cores() const { return cores_; }
    const Core3& core(std::size_t k) const { return cores_.at(k); }
    std::optional<std::size_t> canonical_site() const { return site_; }

    /// Leading boundary rank (number of outputs).
    Index outputs() const { return cores_.front().left_rank(); }
    /// Rank chain R_1..R_{D+1}.
    std::vector<Index> ranks() const;
    /// Total reconstructed length L * I_1 * ... * I_D, saturated at max Index on overflow.
    Index full_size() const;

    /// Returns a copy with core k replaced. Shapes must match; the canonical site is kept
    /// only when k is the site itself.
    TensorTrain with_core(std::size_t k, Core3 core) const;

private:
    void validate() const;

    std::vector<Core3> cores_;
    std::optional<std::size_t> site_;
};

inline constexpr Index kDefaultReconstructGuard = 10'000'000;

/// Dense vector of all TT entries, output index fastest, then i_1, ..., i_D.
Eigen::VectorXd reconstruct(const TensorTrain& tt, Index guard = kDefaultReconstructGuard);

/// QR/LQ sweep bringing the train into site-`target` mixed canonical form.
TensorTrain shift_canonical(const TensorTrain& tt, std::size_t target);

/// 2-norm of the represented tensor.
double tt_norm(const TensorTrain& tt);

/// Largest elementwise deviation from identity over the Gram matrices that
/// site-`site` canonical form requires to be orthonormal.
double canonical_form_error(const TensorTrain& tt, std::size_t site);

/// Economy QR: a = q * r with q having orthonormal columns.
struct ThinQr {
    Eigen::MatrixXd q;
    Eigen::MatrixXd r;
};
ThinQr thin_qr(const Eigen::MatrixXd& a);

}  // namespace vtn
