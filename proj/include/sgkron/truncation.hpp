#pragma once

#include <sgkron/errors.hpp>
#include <sgkron/kronsys.hpp>
#include <sgkron/pcg.hpp>
#include <sgkron/precond.hpp>

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <vector>

namespace sgkron {

/// Largest size for which Auto picks the dense factorization.
inline constexpr std::size_t kDenseFactorLimit = 4096;

enum class TruncationBackend {
    Auto,         ///< Dense up to kDenseFactorLimit unknowns, Iterative beyond
    Dense,        ///< LL^T of the assembled matrix
    SparseDirect, ///< sparse LL^T of the assembled matrix
    Iterative,    ///< inner PCG preconditioned by the matching SBGS approximation
};

/// Exact inverse action of the truncation P_r = sum_{l<=r} G_l (x) K_l.
class TruncationPreconditioner final : public Preconditioner {
public:
    static constexpr double kInnerTol = 1e-12;

    TruncationPreconditioner(KroneckerSumOperator op, std::string label, TruncationBackend backend,
                             std::unique_ptr<Preconditioner> inner = nullptr)
        : op_(std::move(op)), label_(std::move(label))
    {
        if (backend == TruncationBackend::Auto)
            backend = op_.size() <= kDenseFactorLimit ? TruncationBackend::Dense : TruncationBackend::Iterative;
        backend_ = backend;
        switch (backend) {
        case TruncationBackend::Dense: {
            dense_ = std::make_unique<Eigen::LLT<Eigen::MatrixXd>>(assemble_dense(op_));
            if (dense_->info() != Eigen::Success)
                throw NotPositiveDefinite(label_ + ": truncation is not positive definite");
            break;
        }
        case TruncationBackend::SparseDirect: {
            try {
                sparse_ = factor_spd(assemble_sparse(op_));
            } catch (const NotPositiveDefinite&) {
                throw NotPositiveDefinite(label_ + ": truncation is not positive definite");
            }
            break;
        }
        case TruncationBackend::Iterative:
            detail::require(inner != nullptr, label_ + ": iterative backend needs an inner preconditioner");
            inner_ = std::move(inner);
            break;
        case TruncationBackend::Auto:
            break;
        }
    }

    using Preconditioner::apply_inverse;
    void apply_inverse(const Vector& v, Vector& z) const override
    {
        detail::check_length(*this, v);
        switch (backend_) {
        case TruncationBackend::Dense:
            z = dense_->solve(v);
            return;
        case TruncationBackend::SparseDirect:
            z = sparse_->solve(v);
            return;
        default:
            break;
        }
        SolverConfig cfg;
        cfg.tol = kInnerTol;
        cfg.max_iter = 2000;
        SolveResult res;
        try {
            res = pcg_solve(op_, *inner_, v, cfg);
        } catch (const Breakdown&) {
            throw NotPositiveDefinite(label_ + ": inner solve broke down, truncation is not positive definite");
        }
        if (!res.report.converged)
            throw NotPositiveDefinite(label_ + ": inner solve did not converge");
        z = std::move(res.u);
    }

    [[nodiscard]] std::string label() const override { return label_; }
    [[nodiscard]] std::size_t size() const override { return op_.size(); }
    [[nodiscard]] TruncationBackend backend() const noexcept { return backend_; }
    [[nodiscard]] const KroneckerSumOperator& op() const noexcept { return op_; }

private:
    KroneckerSumOperator op_;
    std::string label_;
    TruncationBackend backend_ = TruncationBackend::Dense;
    std::unique_ptr<Eigen::LLT<Eigen::MatrixXd>> dense_;
    std::shared_ptr<const CholeskyFactor> sparse_;
    std::unique_ptr<Preconditioner> inner_;
};

/// P_r for r >= 1 on either problem; r = 0 is the mean-based preconditioner.
inline std::unique_ptr<Preconditioner> build_truncation(const SgProblem& problem, int r,
                                                        std::shared_ptr<const CholeskyFactor> k0_factor,
                                                        TruncationBackend backend = TruncationBackend::Auto)
{
    detail::require(r >= 0, "build_truncation: r must be nonnegative");
    if (r == 0) return build_mean_based(std::move(k0_factor), problem.A.ny());
    auto op = problem.truncation(r);
    const std::string label = "P" + std::to_string(r);
    std::unique_ptr<Preconditioner> inner;
    const bool iterative = backend == TruncationBackend::Iterative ||
                           (backend == TruncationBackend::Auto && op.size() > kDenseFactorLimit);
    if (iterative) {
        if (problem.context.kind == ProblemKind::Affine)
            inner = build_sbgs_affine(k0_factor, problem.truncation_terms(r));
        else
            inner = build_sbgs_lognormal(problem.context.ordered, r, k0_factor);
    }
    return std::make_unique<TruncationPreconditioner>(std::move(op), label, backend, std::move(inner));
}

/// P~_r for either problem.
inline std::unique_ptr<Preconditioner> build_sbgs(const SgProblem& problem, int r,
                                                  std::shared_ptr<const CholeskyFactor> k0_factor)
{
    if (problem.context.kind == ProblemKind::Affine) return build_sbgs_affine(std::move(k0_factor), problem.truncation_terms(r));
    return build_sbgs_lognormal(problem.context.ordered, r, std::move(k0_factor));
}

} // namespace sgkron
