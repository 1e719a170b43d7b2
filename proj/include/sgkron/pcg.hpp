#pragma once

#include <sgkron/errors.hpp>
#include <sgkron/kronsys.hpp>
#include <sgkron/precond.hpp>

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

namespace sgkron {

enum class StoppingNorm {
    Euclidean,      ///< ||r_k||_2 / ||f||_2
    Preconditioned, ///< sqrt(r_k^T z_k / r_0^T z_0)
};

struct SolverConfig {
    double tol = 1e-6;
    int max_iter = 1000;
    StoppingNorm norm = StoppingNorm::Euclidean;
};

struct SolveReport {
    int iterations = 0;
    std::vector<double> residual_history; ///< relative residual, entry 0 is the initial one
    bool converged = false;
    double setup_seconds = 0.0;
    double solve_seconds = 0.0;
    std::vector<double> alphas; ///< CG step lengths, kept for Lanczos estimates
    std::vector<double> betas;

    [[nodiscard]] double final_relres() const { return residual_history.empty() ? 0.0 : residual_history.back(); }
};

struct SolveResult {
    Vector u;
    SolveReport report;
};

/// Preconditioned conjugate gradients from a zero initial guess.
///
/// `Op` needs `apply(const Vector&, Vector&)` and `size()`. Throws Breakdown when p^T A p or
/// r^T z fails to be positive beyond round-off, which signals an indefinite operator or
/// preconditioner.
template <typename Op>
SolveResult pcg_solve(const Op& A, const Preconditioner& P, const Vector& f, const SolverConfig& config = {})
{
    detail::require(static_cast<std::size_t>(f.size()) == A.size(), "pcg_solve: right-hand side length mismatch");
    detail::require(P.size() == A.size(), "pcg_solve: preconditioner size mismatch");
    detail::require(config.tol > 0.0, "pcg_solve: tolerance must be positive");
    detail::require(config.max_iter >= 1, "pcg_solve: max_iter must be positive");

    const auto start = std::chrono::steady_clock::now();
    SolveResult out;
    auto& rep = out.report;
    out.u = Vector::Zero(f.size());

    const double f_norm = f.norm();
    if (f_norm == 0.0) {
        rep.residual_history.push_back(0.0);
        rep.converged = true;
        return out;
    }

    Vector r = f;
    Vector z;
    P.apply_inverse(r, z);
    double rz = r.dot(z);
    if (!(rz > 1e-14 * r.norm() * z.norm())) throw Breakdown("pcg: r^T P^{-1} r is not positive");
    const double rz0 = rz;

    auto relres = [&](const Vector& res, double rz_now) {
        return config.norm == StoppingNorm::Euclidean ? res.norm() / f_norm : std::sqrt(rz_now / rz0);
    };

    rep.residual_history.push_back(relres(r, rz));
    Vector p = z;
    Vector Ap(f.size());
    for (int it = 0; it < config.max_iter; ++it) {
        A.apply(p, Ap);
        const double pAp = p.dot(Ap);
        if (!(pAp > 1e-14 * p.norm() * Ap.norm())) throw Breakdown("pcg: p^T A p is not positive");
        const double alpha = rz / pAp;
        out.u.noalias() += alpha * p;
        r.noalias() -= alpha * Ap;
        rep.alphas.push_back(alpha);
        ++rep.iterations;

        P.apply_inverse(r, z);
        const double rz_next = r.dot(z);
        const double rn = relres(r, std::max(rz_next, 0.0));
        rep.residual_history.push_back(rn);
        if (rn <= config.tol) {
            rep.converged = true;
            break;
        }
        if (!(rz_next > 1e-14 * r.norm() * z.norm())) throw Breakdown("pcg: r^T P^{-1} r is not positive");
        const double beta = rz_next / rz;
        rep.betas.push_back(beta);
        rz = rz_next;
        p = z + beta * p;
    }
    rep.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

/// Tridiagonal Lanczos matrix recovered from the CG coefficients.
inline Eigen::MatrixXd lanczos_matrix(const SolveReport& report)
{
    const auto n = static_cast<Eigen::Index>(report.alphas.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double a = report.alphas[static_cast<std::size_t>(j)];
        T(j, j) = 1.0 / a;
        if (j > 0) {
            const double b = report.betas[static_cast<std::size_t>(j - 1)];
            const double a_prev = report.alphas[static_cast<std::size_t>(j - 1)];
            T(j, j) += b / a_prev;
            T(j - 1, j) = T(j, j - 1) = std::sqrt(b) / a_prev;
        }
    }
    return T;
}

/// Extreme Ritz values of P^{-1} A from a completed solve.
inline std::pair<double, double> ritz_range(const SolveReport& report)
{
    if (report.alphas.empty()) throw Unavailable("ritz_range: the solve performed no iterations");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(lanczos_matrix(report), Eigen::EigenvaluesOnly);
    return {eig.eigenvalues().minCoeff(), eig.eigenvalues().maxCoeff()};
}

/// Lanczos estimate of cond(P^{-1} A).
inline double estimate_condition(const SolveReport& report)
{
    const auto [lo, hi] = ritz_range(report);
    return hi / lo;
}

} // namespace sgkron
