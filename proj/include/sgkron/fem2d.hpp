#pragma once

#include <sgkron/errors.hpp>
#include <sgkron/multiindex.hpp>

#include <Eigen/Sparse>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sgkron {

using SparseSymMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// Uniform square grid on the unit square with homogeneous Dirichlet boundary.
///
/// Interior nodes are numbered row-major: node (ix, iy), 1 <= ix, iy <= n-1,
/// has index (iy - 1) * (n - 1) + (ix - 1).
struct UniformMesh {
    int level = 0;
    int cells = 0; ///< elements per side, 2^level
    double h = 0.0;

    [[nodiscard]] int interior_per_side() const noexcept { return cells - 1; }
    [[nodiscard]] std::size_t n_interior() const noexcept
    {
        return static_cast<std::size_t>(cells - 1) * static_cast<std::size_t>(cells - 1);
    }
    [[nodiscard]] std::size_t n_elements() const noexcept
    {
        return static_cast<std::size_t>(cells) * static_cast<std::size_t>(cells);
    }
};

inline UniformMesh build_mesh(int level)
{
    detail::require(level >= 1 && level <= 10, "build_mesh: level must lie in [1, 10]");
    UniformMesh mesh;
    mesh.level = level;
    mesh.cells = 1 << level;
    mesh.h = 1.0 / mesh.cells;
    return mesh;
}

/// Scalar field on the closed unit square.
struct CoefficientField {
    std::function<double(double, double)> evaluate;
    std::string descriptor;

    double operator()(double x1, double x2) const { return evaluate(x1, x2); }
};

inline CoefficientField constant_field(double c)
{
    return {[c](double, double) { return c; }, "constant " + std::to_string(c)};
}

/// Planar Fourier frequencies (beta_1(m), beta_2(m)) of increasing total order.
inline std::pair<int, int> fourier_frequencies(int m)
{
    detail::require(m >= 0, "fourier_frequencies: m must be nonnegative");
    const int order = static_cast<int>(std::floor(-0.5 + std::sqrt(0.25 + 2.0 * m)));
    const int beta1 = m - order * (order + 1) / 2;
    return {beta1, order - beta1};
}

/// a_0 = 1, a_m = alpha_bar m^(-sigma) cos(2 pi beta_1 x1) cos(2 pi beta_2 x2).
inline CoefficientField fourier_coefficient(int m, double sigma_tilde, double alpha_bar)
{
    detail::require(m >= 0, "fourier_coefficient: m must be nonnegative");
    if (m == 0) return {[](double, double) { return 1.0; }, "fourier m=0"};
    const auto [b1, b2] = fourier_frequencies(m);
    const double amplitude = alpha_bar * std::pow(static_cast<double>(m), -sigma_tilde);
    const double w1 = 2.0 * std::numbers::pi * b1;
    const double w2 = 2.0 * std::numbers::pi * b2;
    return {[=](double x1, double x2) { return amplitude * std::cos(w1 * x1) * std::cos(w2 * x2); },
            "fourier m=" + std::to_string(m)};
}

/// Riemann zeta for s > 1: partial sum plus Euler-Maclaurin tail.
inline double zeta(double s)
{
    detail::require(s > 1.0, "zeta: series diverges for s <= 1");
    constexpr int n_terms = 2000;
    double sum = 0.0;
    for (int n = n_terms - 1; n >= 1; --n) sum += std::pow(static_cast<double>(n), -s);
    const double N = n_terms;
    // tail sum_{n >= N} n^-s; remainder after the third correction is O(N^(-s-3))
    const double tail = std::pow(N, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(N, -s) + s / 12.0 * std::pow(N, -s - 1.0) -
                        s * (s + 1.0) * (s + 2.0) / 720.0 * std::pow(N, -s - 3.0);
    return sum + tail;
}

/// The amplitude factor with alpha_bar * zeta(sigma) = 0.9999.
inline double auto_alpha_bar(double sigma_tilde)
{
    detail::require(sigma_tilde > 1.0, "auto_alpha_bar: sigma_tilde must exceed 1");
    return 0.9999 / zeta(sigma_tilde);
}

// ---------------------------------------------------------------------------
// Sampling grid for sup-norms

inline constexpr int kSupGridPoints = 257;

/// Points of the kSupGridPoints x kSupGridPoints uniform grid on [0,1]^2.
inline const std::vector<std::array<double, 2>>& sup_grid()
{
    static const std::vector<std::array<double, 2>> grid = [] {
        std::vector<std::array<double, 2>> g;
        g.reserve(static_cast<std::size_t>(kSupGridPoints) * kSupGridPoints);
        const double step = 1.0 / (kSupGridPoints - 1);
        for (int j = 0; j < kSupGridPoints; ++j)
            for (int i = 0; i < kSupGridPoints; ++i) g.push_back({i * step, j * step});
        return g;
    }();
    return grid;
}

inline double sup_norm(const CoefficientField& field)
{
    double best = 0.0;
    for (const auto& p : sup_grid()) best = std::max(best, std::abs(field(p[0], p[1])));
    return best;
}

/// tau_r = || sum_{m<=r} |a_m| ||_inf / a0_min, grid-sampled.
inline double tau_r(std::span<const CoefficientField> fields, double a0_min)
{
    detail::require(a0_min > 0.0, "tau_r: a0_min must be positive");
    if (fields.empty()) return 0.0;
    double best = 0.0;
    for (const auto& p : sup_grid()) {
        double s = 0.0;
        for (const auto& f : fields) s += std::abs(f(p[0], p[1]));
        best = std::max(best, s);
    }
    return best / a0_min;
}

/// tau_tilde_r = || a0^{-1} sum_{m<=r} |a_m| ||_inf, grid-sampled.
inline double tau_tilde_r(std::span<const CoefficientField> fields, const CoefficientField& a0)
{
    if (fields.empty()) return 0.0;
    double best = 0.0;
    for (const auto& p : sup_grid()) {
        double s = 0.0;
        for (const auto& f : fields) s += std::abs(f(p[0], p[1]));
        best = std::max(best, s / a0(p[0], p[1]));
    }
    return best;
}

// ---------------------------------------------------------------------------
// Q1 assembly

/// Q1 stiffness assembly with 3x3 Gauss quadrature on every element.
///
/// The sparsity pattern and the element-to-value scatter map are built once;
/// each assembly then only accumulates coefficient-weighted reference products
/// in a fixed element order, so results are bitwise reproducible.
class StiffnessAssembler {
public:
    static constexpr int kQuad = 9;

    explicit StiffnessAssembler(const UniformMesh& mesh) : mesh_(mesh)
    {
        const int n = mesh.cells;
        const int ni = mesh.interior_per_side();
        const auto nx = static_cast<Eigen::Index>(mesh.n_interior());

        const double g = std::sqrt(3.0 / 5.0);
        const std::array<double, 3> gp{-g, 0.0, g};
        const std::array<double, 3> gw{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
        constexpr std::array<int, 4> xi_a{-1, 1, 1, -1};
        constexpr std::array<int, 4> eta_a{-1, -1, 1, 1};

        for (int qy = 0; qy < 3; ++qy)
            for (int qx = 0; qx < 3; ++qx) {
                const int q = qy * 3 + qx;
                const double xi = gp[static_cast<std::size_t>(qx)];
                const double eta = gp[static_cast<std::size_t>(qy)];
                weights_[q] = gw[static_cast<std::size_t>(qx)] * gw[static_cast<std::size_t>(qy)];
                ref_xi_[q] = 0.5 * (1.0 + xi);
                ref_eta_[q] = 0.5 * (1.0 + eta);
                std::array<std::array<double, 2>, 4> grad{};
                for (std::size_t a = 0; a < 4; ++a) {
                    grad[a][0] = 0.25 * xi_a[a] * (1.0 + eta_a[a] * eta);
                    grad[a][1] = 0.25 * eta_a[a] * (1.0 + xi_a[a] * xi);
                }
                for (std::size_t a = 0; a < 4; ++a)
                    for (std::size_t b = 0; b < 4; ++b)
                        local_[q][a * 4 + b] = grad[a][0] * grad[b][0] + grad[a][1] * grad[b][1];
            }

        auto node = [&](int ix, int iy) -> int {
            if (ix <= 0 || iy <= 0 || ix >= n || iy >= n) return -1;
            return (iy - 1) * ni + (ix - 1);
        };

        std::vector<Eigen::Triplet<double>> pattern;
        element_nodes_.resize(mesh.n_elements());
        for (int ey = 0; ey < n; ++ey)
            for (int ex = 0; ex < n; ++ex) {
                auto& nodes = element_nodes_[static_cast<std::size_t>(ey * n + ex)];
                nodes = {node(ex, ey), node(ex + 1, ey), node(ex + 1, ey + 1), node(ex, ey + 1)};
                for (int a : nodes)
                    for (int b : nodes)
                        if (a >= 0 && b >= 0) pattern.emplace_back(a, b, 0.0);
            }
        pattern_.resize(nx, nx);
        pattern_.setFromTriplets(pattern.begin(), pattern.end());
        pattern_.makeCompressed();

        scatter_.resize(mesh.n_elements());
        for (std::size_t e = 0; e < element_nodes_.size(); ++e) {
            const auto& nodes = element_nodes_[e];
            for (std::size_t a = 0; a < 4; ++a)
                for (std::size_t b = 0; b < 4; ++b) {
                    const int r = nodes[a];
                    const int c = nodes[b];
                    scatter_[e][a * 4 + b] = (r >= 0 && c >= 0) ? slot(r, c) : -1;
                }
        }
    }

    [[nodiscard]] const UniformMesh& mesh() const noexcept { return mesh_; }

    /// Physical coordinates of all quadrature points, element-major.
    [[nodiscard]] std::vector<std::array<double, 2>> quadrature_points() const
    {
        std::vector<std::array<double, 2>> pts;
        pts.reserve(mesh_.n_elements() * kQuad);
        const int n = mesh_.cells;
        for (int ey = 0; ey < n; ++ey)
            for (int ex = 0; ex < n; ++ex)
                for (int q = 0; q < kQuad; ++q)
                    pts.push_back({(ex + ref_xi_[q]) * mesh_.h, (ey + ref_eta_[q]) * mesh_.h});
        return pts;
    }

    /// Stiffness matrix for coefficient values given at quadrature_points().
    [[nodiscard]] SparseSymMatrix assemble_values(std::span<const double> coefficient) const
    {
        detail::require(coefficient.size() == mesh_.n_elements() * kQuad,
                        "assemble_values: one coefficient value per quadrature point required");
        SparseSymMatrix k = pattern_;
        double* values = k.valuePtr();
        std::fill(values, values + k.nonZeros(), 0.0);
        for (std::size_t e = 0; e < scatter_.size(); ++e) {
            std::array<double, 16> elem{};
            for (int q = 0; q < kQuad; ++q) {
                const double wa = weights_[q] * coefficient[e * kQuad + static_cast<std::size_t>(q)];
                for (std::size_t i = 0; i < 16; ++i) elem[i] += wa * local_[q][i];
            }
            for (std::size_t i = 0; i < 16; ++i)
                if (scatter_[e][i] >= 0) values[scatter_[e][i]] += elem[i];
        }
        return k;
    }

    [[nodiscard]] SparseSymMatrix assemble(const CoefficientField& field) const
    {
        const auto pts = quadrature_points();
        std::vector<double> values(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) values[i] = field(pts[i][0], pts[i][1]);
        return assemble_values(values);
    }

private:
    [[nodiscard]] int slot(int row, int col) const
    {
        const int* outer = pattern_.outerIndexPtr();
        const int* inner = pattern_.innerIndexPtr();
        const int* first = inner + outer[col];
        const int* last = inner + outer[col + 1];
        const int* it = std::lower_bound(first, last, row);
        return static_cast<int>(it - inner);
    }

    UniformMesh mesh_;
    std::array<double, kQuad> weights_{};
    std::array<double, kQuad> ref_xi_{};
    std::array<double, kQuad> ref_eta_{};
    std::array<std::array<double, 16>, kQuad> local_{};
    std::vector<std::array<int, 4>> element_nodes_;
    std::vector<std::array<int, 16>> scatter_;
    SparseSymMatrix pattern_;
};

inline SparseSymMatrix assemble_stiffness(const UniformMesh& mesh, const CoefficientField& field)
{
    return StiffnessAssembler(mesh).assemble(field);
}

/// Load vector for f = 1: every interior hat integrates to h^2.
inline Eigen::VectorXd assemble_load(const UniformMesh& mesh)
{
    return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(mesh.n_interior()), mesh.h * mesh.h);
}

// ---------------------------------------------------------------------------
// Lognormal coefficient a = exp(b0 + sum_m b_m y_m) in the orthonormal Hermite basis

/// Normalization of the Hermite expansion coefficients.
enum class HermiteNormalization {
    Factorial,  ///< b^n / sqrt(n!), the exact projection onto orthonormal Hermite polynomials
    SqrtDegree, ///< b^n / sqrt(n), kept for comparison only
};

class LognormalExpansion {
public:
    LognormalExpansion(CoefficientField b0, std::vector<CoefficientField> b_fields,
                       HermiteNormalization normalization = HermiteNormalization::Factorial)
        : b0_(std::move(b0)), b_(std::move(b_fields)), normalization_(normalization)
    {
    }

    [[nodiscard]] std::size_t terms() const noexcept { return b_.size(); }
    [[nodiscard]] const std::vector<CoefficientField>& b_fields() const noexcept { return b_; }
    [[nodiscard]] HermiteNormalization normalization() const noexcept { return normalization_; }

    /// E[a(x, .)] = exp(b0 + 1/2 sum_m b_m^2).
    [[nodiscard]] double mean(double x1, double x2) const
    {
        double s = b0_(x1, x2);
        for (const auto& b : b_) {
            const double v = b(x1, x2);
            s += 0.5 * v * v;
        }
        return std::exp(s);
    }

    [[nodiscard]] double factor(int power, double b) const
    {
        if (power == 0) return 1.0;
        const double norm = normalization_ == HermiteNormalization::Factorial ? std::tgamma(power + 1.0)
                                                                             : static_cast<double>(power);
        return std::pow(b, power) / std::sqrt(norm);
    }

    /// a_alpha(x) = E[a(x,.)] prod_{m in supp alpha} b_m(x)^alpha_m / sqrt(alpha_m!).
    [[nodiscard]] double coefficient(const MultiIndex& alpha, double x1, double x2) const
    {
        detail::require(alpha.size() <= b_.size(), "lognormal coefficient: alpha longer than the expansion");
        double v = mean(x1, x2);
        for (std::size_t m = 0; m < alpha.size(); ++m)
            if (alpha[m] != 0) v *= factor(alpha[m], b_[m](x1, x2));
        return v;
    }

    /// Precomputed mean and per-parameter power tables on a fixed point set.
    class Samples {
    public:
        Samples(const LognormalExpansion& expansion, std::span<const std::array<double, 2>> points, int params,
                int max_power)
            : n_points_(points.size()), max_power_(max_power)
        {
            detail::require(static_cast<std::size_t>(params) <= expansion.terms(),
                            "Samples: more parameters than expansion terms");
            mean_.resize(n_points_);
            powers_.assign(static_cast<std::size_t>(params) * static_cast<std::size_t>(max_power + 1),
                           std::vector<double>(n_points_));
            for (std::size_t p = 0; p < n_points_; ++p) {
                const double x1 = points[p][0];
                const double x2 = points[p][1];
                mean_[p] = expansion.mean(x1, x2);
                for (int m = 0; m < params; ++m) {
                    const double b = expansion.b_[static_cast<std::size_t>(m)](x1, x2);
                    for (int k = 0; k <= max_power; ++k) table(m, k)[p] = expansion.factor(k, b);
                }
            }
        }

        [[nodiscard]] std::size_t size() const noexcept { return n_points_; }

        /// a_alpha at every sample point.
        [[nodiscard]] std::vector<double> values(const MultiIndex& alpha) const
        {
            std::vector<double> v = mean_;
            for (std::size_t m = 0; m < alpha.size(); ++m) {
                const int k = alpha[m];
                if (k == 0) continue;
                detail::require(k <= max_power_, "Samples: power beyond precomputed table");
                const auto& t = table(static_cast<int>(m), k);
                for (std::size_t p = 0; p < n_points_; ++p) v[p] *= t[p];
            }
            return v;
        }

        [[nodiscard]] double sup_abs(const MultiIndex& alpha) const
        {
            const auto v = values(alpha);
            double best = 0.0;
            for (double x : v) best = std::max(best, std::abs(x));
            return best;
        }

    private:
        [[nodiscard]] std::vector<double>& table(int m, int k)
        {
            return powers_[static_cast<std::size_t>(m) * static_cast<std::size_t>(max_power_ + 1) +
                           static_cast<std::size_t>(k)];
        }
        [[nodiscard]] const std::vector<double>& table(int m, int k) const
        {
            return powers_[static_cast<std::size_t>(m) * static_cast<std::size_t>(max_power_ + 1) +
                           static_cast<std::size_t>(k)];
        }

        std::size_t n_points_;
        int max_power_;
        std::vector<double> mean_;
        std::vector<std::vector<double>> powers_;
    };

private:
    CoefficientField b0_;
    std::vector<CoefficientField> b_;
    HermiteNormalization normalization_;
};

inline CoefficientField lognormal_expansion_coeff(const MultiIndex& alpha, const std::vector<CoefficientField>& b_fields,
                                                  const CoefficientField& b0,
                                                  HermiteNormalization normalization = HermiteNormalization::Factorial)
{
    auto expansion = std::make_shared<LognormalExpansion>(b0, b_fields, normalization);
    return {[expansion, alpha](double x1, double x2) { return expansion->coefficient(alpha, x1, x2); },
            "lognormal alpha=" + alpha.str()};
}

/// b_0 = 1 and b_m the Fourier modes, m = 1..N.
inline LognormalExpansion fourier_lognormal_expansion(int N, double sigma_tilde, double alpha_bar,
                                                      HermiteNormalization normalization = HermiteNormalization::Factorial)
{
    std::vector<CoefficientField> b;
    b.reserve(static_cast<std::size_t>(N));
    for (int m = 1; m <= N; ++m) b.push_back(fourier_coefficient(m, sigma_tilde, alpha_bar));
    return {fourier_coefficient(0, sigma_tilde, alpha_bar), std::move(b), normalization};
}

struct MagnitudeEntry {
    MultiIndex alpha;
    double sup_norm;
};

/// Multi-indices of `alphas` by strictly descending ||a_alpha||_inf, ties in degree-lex order.
inline std::vector<MagnitudeEntry> order_by_magnitude(const MultiIndexSet& alphas, const LognormalExpansion& expansion)
{
    const LognormalExpansion::Samples samples(expansion, sup_grid(), alphas.parameters(), alphas.max_degree());
    std::vector<MagnitudeEntry> out;
    out.reserve(alphas.size());
    for (const auto& alpha : alphas) out.push_back({alpha, samples.sup_abs(alpha)});
    // alphas is already degree-lex ordered, so a stable sort on magnitude breaks ties correctly
    std::stable_sort(out.begin(), out.end(),
                     [](const MagnitudeEntry& a, const MagnitudeEntry& b) { return a.sup_norm > b.sup_norm; });
    return out;
}

} // namespace sgkron
