#pragma once

#include <sgkron/errors.hpp>
#include <sgkron/fem2d.hpp>
#include <sgkron/gram.hpp>
#include <sgkron/kronsys.hpp>
#include <sgkron/multiindex.hpp>
#include <sgkron/orthopoly.hpp>
#include <sgkron/pcg.hpp>
#include <sgkron/precond.hpp>
#include <sgkron/quadrature.hpp>
#include <sgkron/spectral.hpp>
#include <sgkron/truncation.hpp>

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace sgkron {

struct PropertyResult {
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct VerifyOptions {
    /// Relative perturbation applied to every recurrence coefficient; nonzero only for
    /// checking that the suite notices a corrupted constant.
    double recurrence_perturbation = 0.0;
    std::uint64_t seed = 20240607;
};

namespace detail {

using Coeff = std::function<double(int)>;

inline Coeff recurrence_source(PolyFamily family, const VerifyOptions& opt)
{
    const double scale = 1.0 + opt.recurrence_perturbation;
    return [family, scale](int j) { return scale * recurrence_c(family, j); };
}

inline double classical_orthonormal(PolyFamily family, int n, double y)
{
    return family == PolyFamily::LegendreUniform ? legendre_orthonormal_classical(n, y)
                                                 : hermite_orthonormal_classical(n, y);
}

inline GaussRule rule_for(PolyFamily family, int n)
{
    return family == PolyFamily::LegendreUniform ? gauss_legendre(n) : gauss_hermite(n);
}

inline std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

/// <psi_t, w psi_j> by tensor quadrature, where w(y) = prod_m weight_m(y_m).
inline double tensor_inner(PolyFamily family, const MultiIndex& t, const MultiIndex& j,
                           const std::function<double(std::size_t, double)>& weight, int points)
{
    const auto rule = rule_for(family, points);
    double value = 1.0;
    for (std::size_t m = 0; m < t.size(); ++m) {
        double s = 0.0;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double y = rule.nodes[q];
            s += rule.weights[q] * classical_orthonormal(family, t[m], y) * classical_orthonormal(family, j[m], y) *
                 weight(m, y);
        }
        value *= s;
    }
    return value;
}

inline PropertyResult index_set_property()
{
    PropertyResult r{"index_set_dimension_and_order", true, "", 0};
    for (int M = 1; M <= 8; ++M)
        for (int k = 0; k <= 6; ++k) {
            const MultiIndexSet set(M, k);
            if (set.size() != dimension(M, k)) {
                r.pass = false;
                r.detail = "size mismatch at M=" + std::to_string(M) + " k=" + std::to_string(k);
                return r;
            }
            for (std::size_t i = 1; i < set.size(); ++i)
                if (!degree_lex_less(set[i - 1], set[i])) {
                    r.pass = false;
                    r.detail = "order violated at M=" + std::to_string(M) + " k=" + std::to_string(k);
                    return r;
                }
        }
    return r;
}

inline PropertyResult orthonormality_property()
{
    PropertyResult r{"polynomial_orthonormality", true, "", 0};
    double worst = 0.0;
    for (auto family : {PolyFamily::LegendreUniform, PolyFamily::HermiteGaussian}) {
        const auto rule = rule_for(family, 12);
        for (int i = 0; i <= 10; ++i)
            for (int j = 0; j <= 10; ++j) {
                double s = 0.0;
                for (std::size_t q = 0; q < rule.nodes.size(); ++q)
                    s += rule.weights[q] * evaluate(family, i, rule.nodes[q]) * evaluate(family, j, rule.nodes[q]);
                worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
            }
    }
    r.pass = worst <= 1e-12;
    r.detail = "max deviation " + fmt(worst);
    return r;
}

inline PropertyResult gram_linear_property(const VerifyOptions& opt)
{
    PropertyResult r{"gram_linear_vs_quadrature", true, "", 0};
    double worst = 0.0;
    for (auto family : {PolyFamily::LegendreUniform, PolyFamily::HermiteGaussian}) {
        const MultiIndexSet set(3, 4);
        for (int m = 1; m <= 3; ++m) {
            const auto G = gram_linear(m, set, recurrence_source(family, opt));
            for (std::size_t t = 0; t < set.size(); ++t)
                for (std::size_t j = 0; j < set.size(); ++j) {
                    const auto w = [m](std::size_t slot, double y) {
                        return slot == static_cast<std::size_t>(m - 1) ? y : 1.0;
                    };
                    const double ref = tensor_inner(family, set[t], set[j], w, 8);
                    worst = std::max(worst, std::abs(G(t, j) - ref));
                }
        }
    }
    r.pass = worst <= 1e-12;
    r.detail = "max deviation " + fmt(worst);
    return r;
}

inline PropertyResult gram_general_property()
{
    PropertyResult r{"gram_general_vs_quadrature", true, "", 0};
    double worst = 0.0;
    const MultiIndexSet set(2, 3);
    const MultiIndexSet alphas(2, 6);
    for (const auto& alpha : alphas) {
        const auto G = gram_general(alpha, set);
        for (std::size_t t = 0; t < set.size(); ++t)
            for (std::size_t j = 0; j < set.size(); ++j) {
                const auto w = [&alpha](std::size_t slot, double y) {
                    return hermite_orthonormal_classical(alpha[slot], y);
                };
                const double ref = tensor_inner(PolyFamily::HermiteGaussian, set[t], set[j], w, 10);
                worst = std::max(worst, std::abs(G(t, j) - ref));
            }
    }
    r.pass = worst <= 1e-12;
    r.detail = "max deviation " + fmt(worst);
    return r;
}

inline PropertyResult gram_structure_property(const VerifyOptions& opt)
{
    PropertyResult r{"gram_structure", true, "", 0};
    for (int M = 1; M <= 8; ++M)
        for (int k = 1; k <= 6; ++k) {
            const MultiIndexSet set(M, k);
            for (int m = 1; m <= M; ++m) {
                const auto G = gram_linear(m, set, recurrence_source(PolyFamily::LegendreUniform, opt));
                if (!G.has_zero_diagonal()) {
                    r.pass = false;
                    r.detail = "nonzero diagonal";
                    return r;
                }
                const auto L = split_lower(G);
                std::vector<int> col_count(set.size(), 0);
                for (std::size_t t = 0; t < set.size(); ++t) {
                    if (G.row_cols(t).size() > 2 || L.row_cols(t).size() > 1) {
                        r.pass = false;
                        r.detail = "row count exceeded at M=" + std::to_string(M) + " k=" + std::to_string(k);
                        return r;
                    }
                    for (auto c : L.row_cols(t)) ++col_count[c];
                }
                for (int c : col_count)
                    if (c > 1) {
                        r.pass = false;
                        r.detail = "column count of L exceeded";
                        return r;
                    }
            }
        }
    return r;
}

inline PropertyResult stencil_property()
{
    PropertyResult r{"q1_stencil", true, "", 0};
    const auto mesh = build_mesh(3);
    const auto K = assemble_stiffness(mesh, constant_field(1.0));
    const Eigen::MatrixXd D(K);
    const int n = mesh.interior_per_side();
    const int c = (n / 2) * n + n / 2;
    double worst = std::abs(D(c, c) - 8.0 / 3.0);
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
            if (dx || dy) worst = std::max(worst, std::abs(D(c, c + dy * n + dx) + 1.0 / 3.0));
    worst = std::max(worst, (D - D.transpose()).cwiseAbs().maxCoeff());
    r.pass = worst <= 1e-13;
    r.detail = "max deviation " + fmt(worst);
    return r;
}

inline PropertyResult matvec_property(const VerifyOptions& opt)
{
    PropertyResult r{"kron_matvec_vs_dense", true, "", 0};
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> normal;
    const auto problem = build_affine_system(build_mesh(3), 3, 2, 2.0);
    const auto lognormal = build_lognormal_system(build_mesh(2), 2, 2, 20, 2.0, 0.547);
    double worst = 0.0;
    for (const auto* p : {&problem, &lognormal}) {
        const Eigen::MatrixXd A = assemble_dense(p->A);
        for (int s = 0; s < 10; ++s) {
            Vector v(static_cast<Eigen::Index>(p->n_unknowns()));
            for (auto& x : v) x = normal(rng);
            const Vector ref = A * v;
            worst = std::max(worst, (p->A.matvec(v) - ref).norm() / ref.norm());
        }
    }
    r.pass = worst <= 1e-12;
    r.detail = "max relative error " + fmt(worst);
    return r;
}

inline PropertyResult sbgs_property(const VerifyOptions& opt)
{
    PropertyResult r{"sbgs_identity_and_application", true, "", 0};
    std::mt19937_64 rng(opt.seed + 1);
    std::normal_distribution<double> normal;
    const auto problem = build_affine_system(build_mesh(2), 3, 2, 2.0);
    const auto nx = static_cast<Eigen::Index>(problem.A.nx());
    const auto k0 = factor_spd(*problem.K0);
    double worst_identity = 0.0;
    double worst_apply = 0.0;
    for (int rr = 1; rr <= 3; ++rr) {
        const Eigen::MatrixXd P = assemble_dense(problem.truncation(rr));
        const Eigen::MatrixXd Pt = dense_sbgs(P, nx);
        const auto split = block_split(P, nx);
        const Eigen::MatrixXd other = P + split.L * split.D.llt().solve(split.L.transpose());
        worst_identity = std::max(worst_identity, (Pt - other).norm() / Pt.norm());
        const auto S = build_sbgs(problem, rr, k0);
        Vector v(P.rows());
        for (auto& x : v) x = normal(rng);
        const Vector z = S->apply_inverse(v);
        worst_apply = std::max(worst_apply, (Pt * z - v).norm() / v.norm());
    }
    r.pass = worst_identity <= 1e-10 && worst_apply <= 1e-10;
    r.detail = "identity " + fmt(worst_identity) + ", application " + fmt(worst_apply);
    return r;
}

inline PropertyResult pcg_property()
{
    PropertyResult r{"pcg_residual_consistency", true, "", 0};
    const auto problem = build_affine_system(build_mesh(3), 3, 2, 2.0);
    const auto k0 = factor_spd(*problem.K0);
    const auto P0 = build_mean_based(k0, problem.A.ny());
    const auto res = pcg_solve(problem.A, *P0, problem.f);
    const double true_rel = (problem.f - problem.A.matvec(res.u)).norm() / problem.f.norm();
    const double gap = std::abs(true_rel - res.report.final_relres()) / std::max(res.report.final_relres(), 1e-300);
    const auto exact = build_truncation(problem, 3, k0);
    const auto one = pcg_solve(problem.A, *exact, problem.f);
    r.pass = res.report.converged && true_rel <= 1e-6 * (1 + 1e-8) && one.report.iterations == 1;
    r.detail = "true relres " + fmt(true_rel) + ", recursive gap " + fmt(gap) + ", exact-P iterations " +
               std::to_string(one.report.iterations);
    return r;
}

inline PropertyResult spectral_property()
{
    PropertyResult r{"spectral_inclusions", true, "", 0};
    int checked = 0;
    for (double sigma : {4.0, 2.0}) {
        const auto problem = build_affine_system(build_mesh(2), 3, 2, sigma);
        double prev_dev = std::numeric_limits<double>::infinity();
        for (int rr = 0; rr <= 3; ++rr) {
            const auto rep = verify_inclusions(problem, rr);
            for (const auto& c : rep.claims) {
                ++checked;
                if (c.applicable && !c.pass) {
                    r.pass = false;
                    r.detail = c.name + " fails at sigma=" + std::to_string(sigma) + " r=" + std::to_string(rr);
                    return r;
                }
            }
            const double dev = max_deviation(problem, rr);
            if (dev > prev_dev + 1e-10) {
                r.pass = false;
                r.detail = "spectral deviation increased at r=" + std::to_string(rr);
                return r;
            }
            prev_dev = dev;
        }
    }
    r.detail = std::to_string(checked) + " claims";
    return r;
}

inline PropertyResult lognormal_spd_property()
{
    PropertyResult r{"lognormal_sbgs_spd", true, "", 0};
    const auto problem = build_lognormal_system(build_mesh(2), 2, 3, 20, 2.0, 0.547);
    const auto nx = static_cast<Eigen::Index>(problem.A.nx());
    bool found_indefinite = false;
    for (int rr = 1; rr <= 6; ++rr) {
        const Eigen::MatrixXd P = assemble_dense(problem.truncation(rr));
        if (!is_positive_definite(P)) found_indefinite = true;
        if (!is_positive_definite(dense_sbgs(P, nx))) {
            r.pass = false;
            r.detail = "SBGS matrix indefinite at r=" + std::to_string(rr);
            return r;
        }
    }
    r.pass = found_indefinite;
    r.detail = found_indefinite ? "SBGS SPD, including an indefinite truncation" : "no indefinite truncation found";
    return r;
}

inline PropertyResult lognormal_coefficient_property()
{
    PropertyResult r{"lognormal_coefficient_vs_quadrature", true, "", 0};
    const double b0 = 0.3;
    const double c = 0.7;
    const auto rule = gauss_hermite(40);
    double worst = 0.0;
    for (int n = 0; n <= 6; ++n) {
        const auto field = lognormal_expansion_coeff(MultiIndex({n}), {constant_field(c)}, constant_field(b0));
        double ref = 0.0;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q)
            ref += rule.weights[q] * std::exp(b0 + c * rule.nodes[q]) *
                   hermite_orthonormal_classical(n, rule.nodes[q]);
        worst = std::max(worst, std::abs(field(0.3, 0.6) - ref));
    }
    r.pass = worst <= 1e-10;
    r.detail = "max deviation " + fmt(worst);
    return r;
}

inline PropertyResult kron_factor_property()
{
    PropertyResult r{"kron_factor_least_squares", true, "", 0};
    const auto problem = build_affine_system(build_mesh(2), 2, 2, 2.0);
    const auto G = kronecker_factor(problem.A.terms(), *problem.K0);
    // normal equations of min ||A - G (x) K0||_F entry by entry: G_tj = <A_tj, K0>_F / <K0, K0>_F
    const Eigen::MatrixXd A = assemble_dense(problem.A);
    const Eigen::MatrixXd K0(*problem.K0);
    const auto nx = K0.rows();
    double worst = 0.0;
    for (Eigen::Index t = 0; t < G.rows(); ++t)
        for (Eigen::Index j = 0; j < G.cols(); ++j) {
            const double ref = A.block(t * nx, j * nx, nx, nx).cwiseProduct(K0).sum() / K0.squaredNorm();
            worst = std::max(worst, std::abs(G(t, j) - ref));
        }
    r.pass = worst <= 1e-10;
    r.detail = "max deviation " + fmt(worst);
    return r;
}

inline PropertyResult determinism_property()
{
    PropertyResult r{"determinism", true, "", 0};
    auto run = [] {
        const auto problem = build_affine_system(build_mesh(3), 3, 2, 4.0);
        const auto k0 = factor_spd(*problem.K0);
        const auto S = build_sbgs(problem, 2, k0);
        return pcg_solve(problem.A, *S, problem.f).u;
    };
    const Vector a = run();
    const Vector b = run();
    r.pass = a == b;
    r.detail = r.pass ? "bitwise identical" : "solutions differ";
    return r;
}

} // namespace detail

/// Small-scale invariant suite behind the `verify` command.
inline std::vector<PropertyResult> run_property_suite(const VerifyOptions& opt = {},
                                                     const std::function<void(const PropertyResult&)>& on_result = {})
{
    using Check = std::function<PropertyResult()>;
    const std::vector<std::pair<std::string, Check>> checks{
        {"index_set_dimension_and_order", [] { return detail::index_set_property(); }},
        {"polynomial_orthonormality", [] { return detail::orthonormality_property(); }},
        {"gram_linear_vs_quadrature", [&] { return detail::gram_linear_property(opt); }},
        {"gram_general_vs_quadrature", [] { return detail::gram_general_property(); }},
        {"gram_structure", [&] { return detail::gram_structure_property(opt); }},
        {"q1_stencil", [] { return detail::stencil_property(); }},
        {"kron_matvec_vs_dense", [&] { return detail::matvec_property(opt); }},
        {"kron_factor_least_squares", [] { return detail::kron_factor_property(); }},
        {"sbgs_identity_and_application", [&] { return detail::sbgs_property(opt); }},
        {"pcg_residual_consistency", [] { return detail::pcg_property(); }},
        {"spectral_inclusions", [] { return detail::spectral_property(); }},
        {"lognormal_sbgs_spd", [] { return detail::lognormal_spd_property(); }},
        {"lognormal_coefficient_vs_quadrature", [] { return detail::lognormal_coefficient_property(); }},
        {"determinism", [] { return detail::determinism_property(); }},
    };
    std::vector<PropertyResult> out;
    for (const auto& [name, check] : checks) {
        const auto t0 = std::chrono::steady_clock::now();
        PropertyResult res;
        try {
            res = check();
        } catch (const std::exception& e) {
            res.name = name;
            res.pass = false;
            res.detail = std::string("exception: ") + e.what();
        }
        res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (on_result) on_result(res);
        out.push_back(std::move(res));
    }
    return out;
}

} // namespace sgkron
