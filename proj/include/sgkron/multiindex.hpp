#pragma once

#include <sgkron/errors.hpp>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace sgkron {

/// Multi-index over a fixed number of parameters, stored densely.
class MultiIndex {
public:
    MultiIndex() = default;

    explicit MultiIndex(std::vector<int> entries) : entries_(std::move(entries))
    {
        for (int e : entries_) detail::require(e >= 0, "multi-index entries must be nonnegative");
        degree_ = std::accumulate(entries_.begin(), entries_.end(), 0);
    }

    static MultiIndex zero(std::size_t length) { return MultiIndex(std::vector<int>(length, 0)); }

    /// Unit multi-index e_m (m is zero-based).
    static MultiIndex unit(std::size_t length, std::size_t m)
    {
        std::vector<int> e(length, 0);
        e.at(m) = 1;
        return MultiIndex(std::move(e));
    }

    [[nodiscard]] const std::vector<int>& entries() const noexcept { return entries_; }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] int total_degree() const noexcept { return degree_; }
    [[nodiscard]] int operator[](std::size_t m) const { return m < entries_.size() ? entries_[m] : 0; }

    [[nodiscard]] bool is_zero() const noexcept { return degree_ == 0; }

    [[nodiscard]] bool all_even() const noexcept
    {
        for (int e : entries_)
            if (e % 2 != 0) return false;
        return true;
    }

    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

    /// Degree-lex order: total degree first, then lexicographic on entries.
    friend bool degree_lex_less(const MultiIndex& a, const MultiIndex& b)
    {
        if (a.degree_ != b.degree_) return a.degree_ < b.degree_;
        return a.entries_ < b.entries_;
    }

    [[nodiscard]] std::string str() const
    {
        std::string s = "(";
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            if (i) s += ',';
            s += std::to_string(entries_[i]);
        }
        return s + ")";
    }

    friend std::ostream& operator<<(std::ostream& os, const MultiIndex& a) { return os << a.str(); }

private:
    std::vector<int> entries_;
    int degree_ = 0;
};

/// binomial(M + k, k), exact. Throws Overflow instead of wrapping.
inline std::uint64_t dimension(int M, int k)
{
    detail::require(M >= 1, "dimension: M must be at least 1");
    detail::require(k >= 0, "dimension: k must be nonnegative");
    const std::uint64_t n = static_cast<std::uint64_t>(M) + static_cast<std::uint64_t>(k);
    const std::uint64_t r = std::min<std::uint64_t>(static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(M));
    unsigned __int128 value = 1;
    for (std::uint64_t i = 0; i < r; ++i) {
        // value * (n - i) / (i + 1) stays integral at every step
        value = value * (n - i) / (i + 1);
        if (value > static_cast<unsigned __int128>(UINT64_MAX))
            throw Overflow("dimension: binomial(" + std::to_string(n) + ", " + std::to_string(k) +
                           ") exceeds 64 bits");
    }
    return static_cast<std::uint64_t>(value);
}

/// The index set I_k^M in degree-lex order, with inverse lookup.
class MultiIndexSet {
public:
    MultiIndexSet(int M, int k) : M_(M), k_(k)
    {
        detail::require(M >= 1, "build_index_set: M must be at least 1");
        detail::require(k >= 0, "build_index_set: k must be nonnegative");
        const auto n = dimension(M, k);
        detail::require(n <= 50'000'000, "build_index_set: index set too large");
        indices_.reserve(static_cast<std::size_t>(n));
        std::vector<int> current(static_cast<std::size_t>(M), 0);
        for (int d = 0; d <= k; ++d) enumerate(current, 0, d);
        for (std::size_t j = 0; j < indices_.size(); ++j) position_.emplace(indices_[j].entries(), j);
    }

    [[nodiscard]] int parameters() const noexcept { return M_; }
    [[nodiscard]] int max_degree() const noexcept { return k_; }
    [[nodiscard]] std::size_t size() const noexcept { return indices_.size(); }
    [[nodiscard]] const MultiIndex& operator[](std::size_t j) const { return indices_[j]; }
    [[nodiscard]] const std::vector<MultiIndex>& indices() const noexcept { return indices_; }

    [[nodiscard]] auto begin() const noexcept { return indices_.begin(); }
    [[nodiscard]] auto end() const noexcept { return indices_.end(); }

    /// Linear index of alpha, if present.
    [[nodiscard]] std::optional<std::size_t> position(const MultiIndex& alpha) const
    {
        return position(alpha.entries());
    }

    [[nodiscard]] std::optional<std::size_t> position(const std::vector<int>& entries) const
    {
        auto it = position_.find(entries);
        if (it == position_.end()) return std::nullopt;
        return it->second;
    }

private:
    void enumerate(std::vector<int>& current, std::size_t slot, int remaining)
    {
        if (slot + 1 == current.size()) {
            current[slot] = remaining;
            indices_.emplace_back(current);
            current[slot] = 0;
            return;
        }
        for (int v = 0; v <= remaining; ++v) {
            current[slot] = v;
            enumerate(current, slot + 1, remaining - v);
        }
        current[slot] = 0;
    }

    int M_;
    int k_;
    std::vector<MultiIndex> indices_;
    std::map<std::vector<int>, std::size_t> position_;
};

inline MultiIndexSet build_index_set(int M, int k) { return MultiIndexSet(M, k); }

/// Positions of the multi-indices whose entries are all even.
inline std::vector<std::size_t> build_even_subset(const MultiIndexSet& set)
{
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < set.size(); ++j)
        if (set[j].all_even()) out.push_back(j);
    return out;
}

} // namespace sgkron
