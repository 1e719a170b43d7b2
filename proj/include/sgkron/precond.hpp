#pragma once

#include <sgkron/errors.hpp>
#include <sgkron/kronsys.hpp>

#include <Eigen/Dense>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace sgkron {

/// Sparse LL^T factorization with an AMD fill-reducing permutation.
class CholeskyFactor {
public:
    using Solver = Eigen::SimplicialLLT<SparseSymMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;

    explicit CholeskyFactor(const SparseSymMatrix& k) : solver_(std::make_unique<Solver>()), n_(k.rows())
    {
        detail::require(k.rows() == k.cols(), "factor_spd: matrix must be square");
        solver_->compute(k);
        if (solver_->info() != Eigen::Success)
            throw NotPositiveDefinite("factor_spd: nonpositive pivot, matrix is not positive definite");
    }

    [[nodiscard]] Eigen::Index size() const noexcept { return n_; }

    template <typename Rhs>
    [[nodiscard]] Eigen::MatrixXd solve(const Eigen::MatrixBase<Rhs>& b) const
    {
        return solver_->solve(b);
    }

    [[nodiscard]] Vector solve(const Vector& b) const { return solver_->solve(b); }

    /// Lower factor of P K P^T.
    [[nodiscard]] SparseSymMatrix matrixL() const { return solver_->matrixL(); }
    [[nodiscard]] const Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int>& permutation() const
    {
        return solver_->permutationP();
    }

private:
    std::unique_ptr<Solver> solver_;
    Eigen::Index n_;
};

inline std::shared_ptr<const CholeskyFactor> factor_spd(const SparseSymMatrix& k)
{
    return std::make_shared<const CholeskyFactor>(k);
}

/// Inverse action of a symmetric positive definite preconditioner.
class Preconditioner {
public:
    virtual ~Preconditioner() = default;

    virtual void apply_inverse(const Vector& v, Vector& z) const = 0;
    [[nodiscard]] virtual std::string label() const = 0;
    [[nodiscard]] virtual std::size_t size() const = 0;

    [[nodiscard]] Vector apply_inverse(const Vector& v) const
    {
        Vector z;
        apply_inverse(v, z);
        return z;
    }
};

namespace detail {

inline void check_length(const Preconditioner& p, const Vector& v)
{
    require(static_cast<std::size_t>(v.size()) == p.size(),
            p.label() + ": vector length " + std::to_string(v.size()) + " does not match " + std::to_string(p.size()));
}

} // namespace detail

/// P_0 = I (x) K_0: one K_0 solve per block.
class MeanBasedPreconditioner final : public Preconditioner {
public:
    MeanBasedPreconditioner(std::shared_ptr<const CholeskyFactor> k0, std::size_t ny)
        : k0_(std::move(k0)), ny_(ny), nx_(static_cast<std::size_t>(k0_->size()))
    {
    }

    using Preconditioner::apply_inverse;
    void apply_inverse(const Vector& v, Vector& z) const override
    {
        detail::check_length(*this, v);
        const auto nx = static_cast<Eigen::Index>(nx_);
        const auto ny = static_cast<Eigen::Index>(ny_);
        Eigen::Map<const Eigen::MatrixXd> blocks(v.data(), nx, ny);
        z.resize(v.size());
        Eigen::Map<Eigen::MatrixXd>(z.data(), nx, ny) = k0_->solve(blocks);
    }

    [[nodiscard]] std::string label() const override { return "P0"; }
    [[nodiscard]] std::size_t size() const override { return ny_ * nx_; }

private:
    std::shared_ptr<const CholeskyFactor> k0_;
    std::size_t ny_;
    std::size_t nx_;
};

inline std::unique_ptr<Preconditioner> build_mean_based(std::shared_ptr<const CholeskyFactor> k0, std::size_t ny)
{
    return std::make_unique<MeanBasedPreconditioner>(std::move(k0), ny);
}

/// Frobenius inner product of two sparse matrices with identical patterns or not.
inline double frobenius_dot(const SparseSymMatrix& a, const SparseSymMatrix& b)
{
    return a.cwiseProduct(b).sum();
}

/// Parametric factor G minimizing ||A - G (x) K_0||_F for A = sum_m G_m (x) K_m.
inline Eigen::MatrixXd kronecker_factor(const std::vector<KronTerm>& terms, const SparseSymMatrix& k0)
{
    detail::require(!terms.empty(), "kronecker_factor: empty term list");
    const auto ny = static_cast<Eigen::Index>(terms.front().G.dim());
    const double k0_norm2 = frobenius_dot(k0, k0);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(ny, ny);
    for (const auto& term : terms) {
        const double c = frobenius_dot(*term.K, k0) / k0_norm2;
        for (const auto& t : term.G.triplets())
            g(static_cast<Eigen::Index>(t.row), static_cast<Eigen::Index>(t.col)) += c * t.value;
    }
    return g;
}

/// P_kron = G (x) K_0 with the Frobenius-optimal G, applied as K_0^{-1} V G^{-1}.
class KroneckerPreconditioner final : public Preconditioner {
public:
    KroneckerPreconditioner(const std::vector<KronTerm>& terms, const SparseSymMatrix& k0,
                            std::shared_ptr<const CholeskyFactor> k0_factor)
        : k0_(std::move(k0_factor)), g_(kronecker_factor(terms, k0)), nx_(static_cast<std::size_t>(k0.rows()))
    {
        ny_ = static_cast<std::size_t>(g_.rows());
        g_llt_.compute(g_);
        if (g_llt_.info() != Eigen::Success)
            throw NotPositiveDefinite("build_kron: parametric factor G is not positive definite");
    }

    using Preconditioner::apply_inverse;
    void apply_inverse(const Vector& v, Vector& z) const override
    {
        detail::check_length(*this, v);
        const auto nx = static_cast<Eigen::Index>(nx_);
        const auto ny = static_cast<Eigen::Index>(ny_);
        Eigen::Map<const Eigen::MatrixXd> blocks(v.data(), nx, ny);
        Eigen::MatrixXd w = k0_->solve(blocks);
        // W G^{-1} with G symmetric: solve G X^T = W^T
        Eigen::MatrixXd wt = w.transpose();
        g_llt_.solveInPlace(wt);
        z.resize(v.size());
        Eigen::Map<Eigen::MatrixXd>(z.data(), nx, ny) = wt.transpose();
    }

    [[nodiscard]] const Eigen::MatrixXd& factor() const noexcept { return g_; }
    [[nodiscard]] std::string label() const override { return "Pkron"; }
    [[nodiscard]] std::size_t size() const override { return ny_ * nx_; }

private:
    std::shared_ptr<const CholeskyFactor> k0_;
    Eigen::MatrixXd g_;
    Eigen::LLT<Eigen::MatrixXd> g_llt_;
    std::size_t nx_;
    std::size_t ny_ = 0;
};

inline std::unique_ptr<KroneckerPreconditioner> build_kron(const std::vector<KronTerm>& terms,
                                                           const SparseSymMatrix& k0,
                                                           std::shared_ptr<const CholeskyFactor> k0_factor)
{
    return std::make_unique<KroneckerPreconditioner>(terms, k0, std::move(k0_factor));
}

/// Symmetric block Gauss-Seidel approximation (D + L) D^{-1} (D + L^T) of P = D + L + L^T,
/// with P = sum_i G_i (x) K_i and D the block diagonal part.
///
/// Diagonal blocks D_jj = sum_i [G_i]_jj K_i are factorized once per distinct coefficient
/// signature ([G_i]_jj)_i. In the affine case every signature is (1, 0, ..., 0) and the
/// supplied K_0 factor is reused.
class SbgsPreconditioner final : public Preconditioner {
public:
    SbgsPreconditioner(std::vector<KronTerm> terms, std::size_t ny, std::size_t nx, std::string label,
                       std::shared_ptr<const CholeskyFactor> k0_factor = nullptr)
        : terms_(std::move(terms)), ny_(ny), nx_(nx), label_(std::move(label))
    {
        detail::require(!terms_.empty(), "sbgs: empty term list");
        for (const auto& t : terms_) detail::require(t.G.dim() == ny_, "sbgs: Gram dimension mismatch");

        std::vector<std::size_t> diagonal_terms;
        for (std::size_t i = 0; i < terms_.size(); ++i)
            for (std::size_t j = 0; j < ny_; ++j)
                if (terms_[i].G.diagonal(j) != 0.0) {
                    diagonal_terms.push_back(i);
                    break;
                }

        std::map<std::vector<double>, std::size_t> cache;
        block_factor_.resize(ny_);
        for (std::size_t j = 0; j < ny_; ++j) {
            std::vector<double> signature;
            signature.reserve(diagonal_terms.size());
            for (auto i : diagonal_terms) signature.push_back(terms_[i].G.diagonal(j));

            auto it = cache.find(signature);
            if (it == cache.end()) {
                factors_.push_back(factor_block(signature, diagonal_terms, k0_factor));
                it = cache.emplace(std::move(signature), factors_.size() - 1).first;
            }
            block_factor_[j] = it->second;
        }
    }

    using Preconditioner::apply_inverse;
    void apply_inverse(const Vector& v, Vector& z) const override
    {
        detail::check_length(*this, v);
        const auto nx = static_cast<Eigen::Index>(nx_);
        auto seg = [nx](auto& vec, std::size_t j) { return vec.segment(static_cast<Eigen::Index>(j) * nx, nx); };

        Vector w(v.size());
        Vector acc = Vector::Zero(v.size());
        Vector tmp(nx);

        // forward sweep: (D + L) w = v
        for (std::size_t j = 0; j < ny_; ++j) {
            seg(w, j) = factors_[block_factor_[j]]->solve(Vector(seg(v, j) - seg(acc, j)));
            for (const auto& term : terms_) {
                const auto cols = term.G.row_cols(j);
                const auto vals = term.G.row_values(j);
                const auto first = static_cast<std::size_t>(std::upper_bound(cols.begin(), cols.end(), j) - cols.begin());
                if (first == cols.size()) continue;
                tmp.noalias() = (*term.K) * seg(w, j);
                for (std::size_t p = first; p < cols.size(); ++p) seg(acc, cols[p]) += vals[p] * tmp;
            }
        }

        // backward sweep: (D + L^T) z = D w, i.e. z_t = w_t - D_tt^{-1} sum_{j>t} [G]_tj K z_j
        z.resize(v.size());
        acc.setZero();
        for (std::size_t t = ny_; t-- > 0;) {
            seg(z, t) = seg(w, t);
            if (!seg(acc, t).isZero(0.0)) seg(z, t) -= factors_[block_factor_[t]]->solve(Vector(seg(acc, t)));
            for (const auto& term : terms_) {
                const auto cols = term.G.row_cols(t);
                const auto vals = term.G.row_values(t);
                const auto last = static_cast<std::size_t>(std::lower_bound(cols.begin(), cols.end(), t) - cols.begin());
                if (last == 0) continue;
                tmp.noalias() = (*term.K) * seg(z, t);
                for (std::size_t p = 0; p < last; ++p) seg(acc, cols[p]) += vals[p] * tmp;
            }
        }
    }

    [[nodiscard]] std::string label() const override { return label_; }
    [[nodiscard]] std::size_t size() const override { return ny_ * nx_; }

    /// Number of distinct diagonal-block factorizations held.
    [[nodiscard]] std::size_t distinct_factorizations() const noexcept { return factors_.size(); }
    [[nodiscard]] const std::vector<KronTerm>& terms() const noexcept { return terms_; }

private:
    std::shared_ptr<const CholeskyFactor> factor_block(const std::vector<double>& signature,
                                                       const std::vector<std::size_t>& diagonal_terms,
                                                       const std::shared_ptr<const CholeskyFactor>& k0_factor) const
    {
        std::size_t nonzero = 0;
        std::size_t only = 0;
        for (std::size_t s = 0; s < signature.size(); ++s)
            if (signature[s] != 0.0) {
                ++nonzero;
                only = s;
            }
        if (nonzero == 0) throw NotPositiveDefinite("sbgs: diagonal block is identically zero");
        if (k0_factor && nonzero == 1 && signature[only] == 1.0 && diagonal_terms[only] == 0)
            return k0_factor;

        SparseSymMatrix d(static_cast<Eigen::Index>(nx_), static_cast<Eigen::Index>(nx_));
        for (std::size_t s = 0; s < signature.size(); ++s)
            if (signature[s] != 0.0) d += signature[s] * (*terms_[diagonal_terms[s]].K);
        try {
            return factor_spd(d);
        } catch (const NotPositiveDefinite&) {
            throw NotPositiveDefinite("sbgs: diagonal block is not positive definite");
        }
    }

    std::vector<KronTerm> terms_;
    std::size_t ny_;
    std::size_t nx_;
    std::string label_;
    std::vector<std::shared_ptr<const CholeskyFactor>> factors_;
    std::vector<std::size_t> block_factor_;
};

/// P~_r for the affine expansion: terms = (I, K_0), (G_1, K_1), ..., (G_r, K_r).
inline std::unique_ptr<SbgsPreconditioner> build_sbgs_affine(std::shared_ptr<const CholeskyFactor> k0_factor,
                                                             std::vector<KronTerm> terms)
{
    detail::require(!terms.empty(), "build_sbgs_affine: the mean term is required");
    const auto ny = terms.front().G.dim();
    detail::require(terms.front().G == GramMatrix::identity(ny), "build_sbgs_affine: first term must be I (x) K_0");
    for (std::size_t m = 1; m < terms.size(); ++m)
        detail::require(terms[m].G.has_zero_diagonal(), "build_sbgs_affine: G_m must have a zero diagonal");
    const auto nx = static_cast<std::size_t>(terms.front().K->rows());
    const int r = static_cast<int>(terms.size()) - 1;
    return std::make_unique<SbgsPreconditioner>(std::move(terms), ny, nx, "P~" + std::to_string(r),
                                                std::move(k0_factor));
}

/// P~_r for the lognormal expansion from the r+1 largest-magnitude terms.
inline std::unique_ptr<SbgsPreconditioner> build_sbgs_lognormal(const std::vector<OrderedTerm>& ordered, int r,
                                                                std::shared_ptr<const CholeskyFactor> k0_factor = nullptr)
{
    detail::require(r >= 0 && static_cast<std::size_t>(r) < ordered.size(), "build_sbgs_lognormal: r out of range");
    // mean term first so a supplied K_0 factor can be matched
    std::vector<KronTerm> terms;
    for (std::size_t l = 0; l <= static_cast<std::size_t>(r); ++l)
        if (ordered[l].alpha.is_zero()) terms.push_back(ordered[l].term);
    detail::require(!terms.empty(), "build_sbgs_lognormal: the zero multi-index term must be part of the truncation");
    for (std::size_t l = 0; l <= static_cast<std::size_t>(r); ++l)
        if (!ordered[l].alpha.is_zero()) terms.push_back(ordered[l].term);
    const auto ny = terms.front().G.dim();
    const auto nx = static_cast<std::size_t>(terms.front().K->rows());
    return std::make_unique<SbgsPreconditioner>(std::move(terms), ny, nx, "P~" + std::to_string(r),
                                                std::move(k0_factor));
}

} // namespace sgkron
