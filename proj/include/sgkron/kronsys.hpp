#pragma once

#include <sgkron/errors.hpp>
#include <sgkron/fem2d.hpp>
#include <sgkron/gram.hpp>
#include <sgkron/multiindex.hpp>
#include <sgkron/orthopoly.hpp>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sgkron {

using Vector = Eigen::VectorXd;

/// Largest operator dimension for which dense materialization is allowed.
inline constexpr std::size_t kDenseGuard = 20000;

/// One Kronecker product G (x) K.
struct KronTerm {
    GramMatrix G;
    std::shared_ptr<const SparseSymMatrix> K;
    std::string label;
};

/// A = sum_terms G (x) K acting on block vectors u = [u_1; ...; u_{N_y}], u_j of length N_x.
class KroneckerSumOperator {
public:
    KroneckerSumOperator() = default;

    KroneckerSumOperator(std::vector<KronTerm> terms, std::size_t ny, std::size_t nx)
        : terms_(std::move(terms)), ny_(ny), nx_(nx)
    {
        for (const auto& t : terms_) {
            detail::require(t.G.dim() == ny, "KroneckerSumOperator: Gram dimension mismatch in term " + t.label);
            detail::require(t.K && static_cast<std::size_t>(t.K->rows()) == nx &&
                                static_cast<std::size_t>(t.K->cols()) == nx,
                            "KroneckerSumOperator: stiffness dimension mismatch in term " + t.label);
        }
    }

    [[nodiscard]] const std::vector<KronTerm>& terms() const noexcept { return terms_; }
    [[nodiscard]] std::size_t ny() const noexcept { return ny_; }
    [[nodiscard]] std::size_t nx() const noexcept { return nx_; }
    [[nodiscard]] std::size_t size() const noexcept { return ny_ * nx_; }

    /// y = A v; for each term and source block j, K v_j is formed once and scattered.
    void apply(const Vector& v, Vector& y) const
    {
        detail::require(static_cast<std::size_t>(v.size()) == size(), "matvec: dimension mismatch");
        y.setZero(v.size());
        Vector tmp(static_cast<Eigen::Index>(nx_));
        const auto nx = static_cast<Eigen::Index>(nx_);
        for (const auto& term : terms_) {
            for (std::size_t j = 0; j < ny_; ++j) {
                // G is symmetric, so row j lists the destinations of source block j
                const auto cols = term.G.row_cols(j);
                if (cols.empty()) continue;
                const auto vals = term.G.row_values(j);
                tmp.noalias() = (*term.K) * v.segment(static_cast<Eigen::Index>(j) * nx, nx);
                for (std::size_t p = 0; p < cols.size(); ++p)
                    y.segment(static_cast<Eigen::Index>(cols[p]) * nx, nx) += vals[p] * tmp;
            }
        }
    }

    [[nodiscard]] Vector matvec(const Vector& v) const
    {
        Vector y;
        apply(v, y);
        return y;
    }

    /// Sub-operator with the first `count` terms.
    [[nodiscard]] KroneckerSumOperator leading(std::size_t count) const
    {
        detail::require(count <= terms_.size(), "leading: more terms requested than available");
        return {std::vector<KronTerm>(terms_.begin(), terms_.begin() + static_cast<std::ptrdiff_t>(count)), ny_,
                nx_};
    }

private:
    std::vector<KronTerm> terms_;
    std::size_t ny_ = 0;
    std::size_t nx_ = 0;
};

inline Vector matvec(const KroneckerSumOperator& op, const Vector& v) { return op.matvec(v); }

/// Explicit sum of Kronecker products. Test oracle and small-scale spectral work only.
inline Eigen::MatrixXd assemble_dense(const KroneckerSumOperator& op)
{
    if (op.size() > kDenseGuard)
        throw SizeGuardExceeded("assemble_dense: dimension " + std::to_string(op.size()) + " exceeds guard " +
                                std::to_string(kDenseGuard));
    const auto n = static_cast<Eigen::Index>(op.size());
    const auto nx = static_cast<Eigen::Index>(op.nx());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (const auto& term : op.terms()) {
        const Eigen::MatrixXd k = Eigen::MatrixXd(*term.K);
        for (const auto& t : term.G.triplets())
            a.block(static_cast<Eigen::Index>(t.row) * nx, static_cast<Eigen::Index>(t.col) * nx, nx, nx) += t.value * k;
    }
    return a;
}

/// Sparse assembly of the full operator; used where a direct factorization is wanted.
inline SparseSymMatrix assemble_sparse(const KroneckerSumOperator& op)
{
    std::vector<Eigen::Triplet<double>> trip;
    const auto nx = static_cast<int>(op.nx());
    for (const auto& term : op.terms()) {
        for (const auto& t : term.G.triplets()) {
            const int r0 = static_cast<int>(t.row) * nx;
            const int c0 = static_cast<int>(t.col) * nx;
            for (int c = 0; c < term.K->outerSize(); ++c)
                for (SparseSymMatrix::InnerIterator it(*term.K, c); it; ++it)
                    trip.emplace_back(r0 + static_cast<int>(it.row()), c0 + c, t.value * it.value());
        }
    }
    SparseSymMatrix a(static_cast<Eigen::Index>(op.size()), static_cast<Eigen::Index>(op.size()));
    a.setFromTriplets(trip.begin(), trip.end());
    a.makeCompressed();
    return a;
}

/// Largest number of nonzero blocks in any block row (union over the terms' Gram patterns).
inline std::size_t max_blocks_per_row(const KroneckerSumOperator& op)
{
    std::size_t best = 0;
    std::vector<char> seen(op.ny(), 0);
    for (std::size_t t = 0; t < op.ny(); ++t) {
        std::fill(seen.begin(), seen.end(), 0);
        std::size_t count = 0;
        for (const auto& term : op.terms())
            for (auto c : term.G.row_cols(t))
                if (!seen[c]) {
                    seen[c] = 1;
                    ++count;
                }
        best = std::max(best, count);
    }
    return best;
}

// ---------------------------------------------------------------------------
// Test problems

enum class ProblemKind { Affine, Lognormal };

inline std::string_view to_string(ProblemKind kind) { return kind == ProblemKind::Affine ? "affine" : "lognormal"; }

/// Ordered lognormal expansion term with its coefficient magnitude.
struct OrderedTerm {
    MultiIndex alpha;
    double sup_norm = 0.0;
    KronTerm term;
};

/// Everything needed to build preconditioners and bound constants for one problem instance.
struct ProblemContext {
    ProblemKind kind = ProblemKind::Affine;
    double sigma_tilde = 0.0;
    double alpha_bar = 0.0;
    double a0_min = 1.0;
    double a0_max = 1.0;

    // Affine: a_1..a_M, their sup-norms, and tau_r for r = 0..M.
    std::vector<CoefficientField> fields;
    std::vector<double> sup_norms;
    std::vector<double> tau;

    // Lognormal: all alpha in I_{2k}^M by descending magnitude, each with its Kronecker term.
    std::vector<OrderedTerm> ordered;
    int N = 0;
};

struct SgProblem {
    UniformMesh mesh;
    MultiIndexSet index_set;
    PolyFamily family;
    KroneckerSumOperator A;
    Vector f;
    std::shared_ptr<const SparseSymMatrix> K0;
    ProblemContext context;

    [[nodiscard]] std::size_t n_unknowns() const noexcept { return A.size(); }

    /// Leading r+1 terms of the truncation: affine m <= r, lognormal the r+1 largest terms.
    [[nodiscard]] std::vector<KronTerm> truncation_terms(int r) const
    {
        detail::require(r >= 0, "truncation_terms: r must be nonnegative");
        std::vector<KronTerm> out;
        if (context.kind == ProblemKind::Affine) {
            const auto count = std::min<std::size_t>(static_cast<std::size_t>(r) + 1, A.terms().size());
            out.assign(A.terms().begin(), A.terms().begin() + static_cast<std::ptrdiff_t>(count));
        } else {
            const auto count = std::min<std::size_t>(static_cast<std::size_t>(r) + 1, context.ordered.size());
            for (std::size_t l = 0; l < count; ++l) out.push_back(context.ordered[l].term);
        }
        return out;
    }

    [[nodiscard]] KroneckerSumOperator truncation(int r) const
    {
        return {truncation_terms(r), A.ny(), A.nx()};
    }
};

/// Right-hand side with the FE load in the block of the constant polynomial.
inline Vector build_rhs(const UniformMesh& mesh, std::size_t ny)
{
    const auto nx = static_cast<Eigen::Index>(mesh.n_interior());
    Vector f = Vector::Zero(static_cast<Eigen::Index>(ny) * nx);
    f.head(nx) = assemble_load(mesh);
    return f;
}

/// Affine problem a = 1 + sum_{m<=M} a_m y_m with Fourier-mode a_m and Legendre chaos.
/// An empty alpha_bar selects the value with alpha_bar * zeta(sigma) = 0.9999.
inline SgProblem build_affine_system(const UniformMesh& mesh, int M, int k, double sigma_tilde,
                                     std::optional<double> alpha_bar = std::nullopt)
{
    detail::require(M >= 1, "build_affine_system: M must be at least 1");
    detail::require(k >= 0, "build_affine_system: k must be nonnegative");
    const double abar = alpha_bar ? *alpha_bar : auto_alpha_bar(sigma_tilde);

    MultiIndexSet set(M, k);
    const StiffnessAssembler assembler(mesh);
    auto K0 = std::make_shared<const SparseSymMatrix>(assembler.assemble(fourier_coefficient(0, sigma_tilde, abar)));

    ProblemContext ctx;
    ctx.kind = ProblemKind::Affine;
    ctx.sigma_tilde = sigma_tilde;
    ctx.alpha_bar = abar;

    std::vector<KronTerm> terms;
    terms.push_back({GramMatrix::identity(set.size()), K0, "G0"});
    for (int m = 1; m <= M; ++m) {
        auto field = fourier_coefficient(m, sigma_tilde, abar);
        auto K = std::make_shared<const SparseSymMatrix>(assembler.assemble(field));
        terms.push_back({gram_linear(m, set, PolyFamily::LegendreUniform), std::move(K), "G" + std::to_string(m)});
        ctx.sup_norms.push_back(sup_norm(field));
        ctx.fields.push_back(std::move(field));
    }
    ctx.tau.push_back(0.0);
    for (int r = 1; r <= M; ++r)
        ctx.tau.push_back(tau_r(std::span<const CoefficientField>(ctx.fields.data(), static_cast<std::size_t>(r)),
                                ctx.a0_min));

    const auto ny = set.size();
    const auto nx = mesh.n_interior();
    KroneckerSumOperator A(std::move(terms), ny, nx);
    Vector f = build_rhs(mesh, ny);
    return {mesh, std::move(set), PolyFamily::LegendreUniform, std::move(A), std::move(f), std::move(K0),
            std::move(ctx)};
}

/// Lognormal problem a = exp(1 + sum_{m<=N} b_m y_m), Galerkin-projected onto Hermite chaos of degree k in M < N
/// variables; A = sum_{alpha in I_{2k}^M} G_alpha (x) K_alpha with identically zero G_alpha dropped.
inline SgProblem build_lognormal_system(const UniformMesh& mesh, int M, int k, int N, double sigma_tilde,
                                        double alpha_bar,
                                        HermiteNormalization normalization = HermiteNormalization::Factorial)
{
    detail::require(M >= 1, "build_lognormal_system: M must be at least 1");
    detail::require(M < N, "build_lognormal_system: M must be smaller than N");
    detail::require(k >= 0, "build_lognormal_system: k must be nonnegative");

    MultiIndexSet set(M, k);
    MultiIndexSet alphas(M, 2 * k);
    const auto expansion = fourier_lognormal_expansion(N, sigma_tilde, alpha_bar, normalization);
    const auto ordered = order_by_magnitude(alphas, expansion);

    const StiffnessAssembler assembler(mesh);
    const auto qp = assembler.quadrature_points();
    const LognormalExpansion::Samples samples(expansion, qp, M, 2 * k);

    ProblemContext ctx;
    ctx.kind = ProblemKind::Lognormal;
    ctx.sigma_tilde = sigma_tilde;
    ctx.alpha_bar = alpha_bar;
    ctx.N = N;

    std::shared_ptr<const SparseSymMatrix> K0;
    std::vector<KronTerm> terms(alphas.size());
    std::vector<char> keep(alphas.size(), 0);
    for (const auto& entry : ordered) {
        const auto pos = *alphas.position(entry.alpha);
        auto G = entry.alpha.is_zero() ? GramMatrix::identity(set.size()) : gram_general(entry.alpha, set);
        const auto values = samples.values(entry.alpha);
        auto K = std::make_shared<const SparseSymMatrix>(assembler.assemble_values(values));
        if (entry.alpha.is_zero()) K0 = K;
        KronTerm term{std::move(G), std::move(K), "alpha=" + entry.alpha.str()};
        keep[pos] = term.G.is_zero() ? 0 : 1;
        terms[pos] = term;
        ctx.ordered.push_back({entry.alpha, entry.sup_norm, std::move(term)});
    }

    // operator terms in degree-lex order of alpha
    std::vector<KronTerm> active;
    for (std::size_t i = 0; i < terms.size(); ++i)
        if (keep[i]) active.push_back(std::move(terms[i]));

    const auto ny = set.size();
    const auto nx = mesh.n_interior();
    KroneckerSumOperator A(std::move(active), ny, nx);
    Vector f = build_rhs(mesh, ny);
    return {mesh, std::move(set), PolyFamily::HermiteGaussian, std::move(A), std::move(f), std::move(K0),
            std::move(ctx)};
}

} // namespace sgkron
