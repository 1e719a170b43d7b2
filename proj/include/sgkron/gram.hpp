#pragma once

#include <sgkron/errors.hpp>
#include <sgkron/multiindex.hpp>
#include <sgkron/orthopoly.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace sgkron {

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Sparse N_y x N_y matrix over the parametric basis, compressed by rows.
///
/// Entries are kept in canonical row-major order with explicit zeros removed,
/// so two matrices built from the same data compare equal bit for bit.
class GramMatrix {
public:
    GramMatrix() = default;

    GramMatrix(std::size_t dim, std::vector<Triplet> triplets) : dim_(dim)
    {
        std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        row_ptr_.assign(dim + 1, 0);
        for (std::size_t i = 0; i < triplets.size();) {
            const auto& t = triplets[i];
            detail::require(t.row < dim && t.col < dim, "GramMatrix: triplet out of range");
            double value = 0.0;
            std::size_t j = i;
            for (; j < triplets.size() && triplets[j].row == t.row && triplets[j].col == t.col; ++j)
                value += triplets[j].value;
            if (value != 0.0) {
                cols_.push_back(t.col);
                vals_.push_back(value);
                ++row_ptr_[t.row + 1];
            }
            i = j;
        }
        for (std::size_t r = 0; r < dim; ++r) row_ptr_[r + 1] += row_ptr_[r];
    }

    static GramMatrix identity(std::size_t dim)
    {
        std::vector<Triplet> t;
        t.reserve(dim);
        for (std::size_t i = 0; i < dim; ++i) t.push_back({i, i, 1.0});
        return {dim, std::move(t)};
    }

    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::size_t nnz() const noexcept { return vals_.size(); }
    [[nodiscard]] bool is_zero() const noexcept { return vals_.empty(); }

    [[nodiscard]] std::span<const std::size_t> row_cols(std::size_t r) const
    {
        return {cols_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
    }
    [[nodiscard]] std::span<const double> row_values(std::size_t r) const
    {
        return {vals_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
    }

    [[nodiscard]] double operator()(std::size_t r, std::size_t c) const
    {
        auto cols = row_cols(r);
        auto it = std::lower_bound(cols.begin(), cols.end(), c);
        if (it == cols.end() || *it != c) return 0.0;
        return row_values(r)[static_cast<std::size_t>(it - cols.begin())];
    }

    [[nodiscard]] double diagonal(std::size_t r) const { return (*this)(r, r); }

    [[nodiscard]] bool has_zero_diagonal() const
    {
        for (std::size_t r = 0; r < dim_; ++r)
            if (diagonal(r) != 0.0) return false;
        return true;
    }

    [[nodiscard]] std::vector<Triplet> triplets() const
    {
        std::vector<Triplet> out;
        out.reserve(nnz());
        for (std::size_t r = 0; r < dim_; ++r)
            for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) out.push_back({r, cols_[p], vals_[p]});
        return out;
    }

    [[nodiscard]] Eigen::MatrixXd to_dense() const
    {
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
        for (const auto& t : triplets())
            d(static_cast<Eigen::Index>(t.row), static_cast<Eigen::Index>(t.col)) = t.value;
        return d;
    }

    friend bool operator==(const GramMatrix& a, const GramMatrix& b)
    {
        return a.dim_ == b.dim_ && a.row_ptr_ == b.row_ptr_ && a.cols_ == b.cols_ && a.vals_ == b.vals_;
    }

private:
    std::size_t dim_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> cols_;
    std::vector<double> vals_;
};

/// G_m with an explicit recurrence-coefficient source (m is one-based).
inline GramMatrix gram_linear(int m, const MultiIndexSet& set, const std::function<double(int)>& coeff)
{
    detail::require(m >= 1 && m <= set.parameters(), "gram_linear: parameter index out of range");
    const auto slot = static_cast<std::size_t>(m - 1);
    std::vector<Triplet> triplets;
    for (std::size_t j = 0; j < set.size(); ++j) {
        const auto& beta = set[j];
        if (beta.total_degree() >= set.max_degree()) continue;
        auto up = beta.entries();
        ++up[slot];
        const auto t = set.position(up);
        if (!t) continue;
        const double c = coeff(up[slot]);
        triplets.push_back({*t, j, c});
        triplets.push_back({j, *t, c});
    }
    return {set.size(), std::move(triplets)};
}

/// [G_m]_{tj} = <y_m psi_j, psi_t> via the three-term recurrence.
inline GramMatrix gram_linear(int m, const MultiIndexSet& set, PolyFamily family)
{
    return gram_linear(m, set, [family](int j) { return recurrence_c(family, j); });
}

/// [G_alpha]_{tj} = <psi_alpha psi_j, psi_t> for the Hermite basis.
inline GramMatrix gram_general(const MultiIndex& alpha, const MultiIndexSet& set)
{
    const auto M = static_cast<std::size_t>(set.parameters());
    detail::require(alpha.size() <= M, "gram_general: alpha has more entries than the index set has parameters");
    detail::require(alpha.total_degree() <= 2 * set.max_degree(), "gram_general: |alpha| exceeds 2k");

    std::vector<Triplet> triplets;
    std::vector<int> target(M, 0);
    for (std::size_t j = 0; j < set.size(); ++j) {
        const auto& beta = set[j];
        // Walk all t with |alpha_m - beta_m| <= t_m <= alpha_m + beta_m and matching parity.
        std::function<void(std::size_t, int, double)> walk = [&](std::size_t slot, int degree, double value) {
            if (slot == M) {
                if (auto t = set.position(target)) triplets.push_back({*t, j, value});
                return;
            }
            const int a = alpha[slot];
            const int b = beta[slot];
            for (int v = std::abs(a - b); v <= a + b && degree + v <= set.max_degree(); v += 2) {
                const double f = hermite_triple(a, b, v);
                if (f == 0.0) continue;
                target[slot] = v;
                walk(slot + 1, degree + v, value * f);
            }
            target[slot] = 0;
        };
        walk(0, 0, 1.0);
    }
    return {set.size(), std::move(triplets)};
}

/// Strictly lower triangle L with L + L^T = G.
inline GramMatrix split_lower(const GramMatrix& g)
{
    if (!g.has_zero_diagonal()) throw InvalidArgument("split_lower: matrix has a nonzero diagonal");
    std::vector<Triplet> lower;
    for (const auto& t : g.triplets())
        if (t.row > t.col) lower.push_back(t);
    return {g.dim(), std::move(lower)};
}

/// Strictly lower triangle without the zero-diagonal precondition.
inline GramMatrix strict_lower(const GramMatrix& g)
{
    std::vector<Triplet> lower;
    for (const auto& t : g.triplets())
        if (t.row > t.col) lower.push_back(t);
    return {g.dim(), std::move(lower)};
}

} // namespace sgkron
