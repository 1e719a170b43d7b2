#pragma once

#include <sgkron/errors.hpp>

#include <cmath>
#include <string>
#include <string_view>

namespace sgkron {

/// Univariate orthonormal polynomial families used for the parametric basis.
enum class PolyFamily {
    LegendreUniform, ///< density 1/2 on [-1, 1]
    HermiteGaussian, ///< standard normal density on the real line
};

inline std::string_view to_string(PolyFamily family)
{
    return family == PolyFamily::LegendreUniform ? "legendre" : "hermite";
}

/// Coefficient c_j of the symmetric three-term recurrence
///   y P_{j-1}(y) = c_j P_j(y) + c_{j-1} P_{j-2}(y).
inline double recurrence_c(PolyFamily family, int j)
{
    detail::require(j >= 1, "recurrence_c: j must be at least 1");
    const double x = j;
    switch (family) {
    case PolyFamily::LegendreUniform: return x / std::sqrt(4.0 * x * x - 1.0);
    case PolyFamily::HermiteGaussian: return std::sqrt(x);
    }
    return 0.0;
}

/// P_j(y) by forward recurrence, P_0 = 1.
inline double evaluate(PolyFamily family, int j, double y)
{
    detail::require(j >= 0, "evaluate: degree must be nonnegative");
    double prev = 0.0;
    double cur = 1.0;
    double c_prev = 0.0;
    for (int n = 1; n <= j; ++n) {
        const double c = recurrence_c(family, n);
        const double next = (y * cur - c_prev * prev) / c;
        prev = cur;
        cur = next;
        c_prev = c;
    }
    return cur;
}

/// <P_i P_j, P_l> for orthonormal Hermite polynomials under the Gaussian measure.
inline double hermite_triple(int i, int j, int l)
{
    detail::require(i >= 0 && j >= 0 && l >= 0, "hermite_triple: degrees must be nonnegative");
    const int total = i + j + l;
    if (total % 2 != 0) return 0.0;
    const int s = total / 2;
    if (s < i || s < j || s < l) return 0.0;
    const double log_value = 0.5 * (std::lgamma(i + 1.0) + std::lgamma(j + 1.0) + std::lgamma(l + 1.0)) -
                             std::lgamma(s - i + 1.0) - std::lgamma(s - j + 1.0) - std::lgamma(s - l + 1.0);
    return std::exp(log_value);
}

} // namespace sgkron
