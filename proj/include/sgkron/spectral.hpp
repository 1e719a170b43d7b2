#pragma once

#include <sgkron/errors.hpp>
#include <sgkron/kronsys.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sgkron {

/// Largest dense dimension accepted by the spectral checks.
inline constexpr std::size_t kSpectralGuard = 2000;

struct BoundSet {
    int r = 0;
    double a0_min = 1.0;
    double a0_max = 1.0;
    double tau = 0.0;
    double tau_r = 0.0;
    double theta_r = 0.0;
    double Theta_r = 0.0;
    double delta_r = 0.0;

    // bounds from the pointwise-relative constants, when supplied
    std::optional<double> tau_tilde;
    std::optional<double> tau_tilde_r;
    std::optional<double> theta_tilde_r;
    std::optional<double> Theta_tilde_r;

    [[nodiscard]] double sbgs_lower() const { return theta_r / (1.0 + delta_r); }
};

/// Closed-form constants. `sum_sup_r` is sum_{m<=r} ||a_m||_inf.
inline BoundSet compute_bounds(int r, double a0_min, double a0_max, double tau, double tau_r, double sum_sup_r,
                               std::optional<std::pair<double, double>> tilde = std::nullopt)
{
    detail::require(r >= 0, "compute_bounds: r must be nonnegative");
    detail::require(a0_min > 0.0 && a0_max >= a0_min, "compute_bounds: need 0 < a0_min <= a0_max");
    detail::require(tau < 1.0, "compute_bounds: tau must be below 1");
    detail::require(tau_r >= 0.0 && tau_r <= tau + 1e-14, "compute_bounds: need 0 <= tau_r <= tau");
    detail::require(sum_sup_r >= 0.0, "compute_bounds: sup-norm sum must be nonnegative");

    BoundSet b;
    b.r = r;
    b.a0_min = a0_min;
    b.a0_max = a0_max;
    b.tau = tau;
    b.tau_r = tau_r;
    b.theta_r = (1.0 - tau) * a0_min / (a0_max + a0_min * tau_r);
    b.Theta_r = (a0_max + a0_min * tau) / ((1.0 - tau_r) * a0_min);
    const double s = sum_sup_r / a0_min;
    b.delta_r = s * s / (1.0 - tau_r);
    if (tilde) {
        const auto [tt, ttr] = *tilde;
        detail::require(tt < 1.0 && ttr >= 0.0 && ttr <= tt + 1e-14, "compute_bounds: need 0 <= tau~_r <= tau~ < 1");
        b.tau_tilde = tt;
        b.tau_tilde_r = ttr;
        b.theta_tilde_r = (1.0 - tt) / (1.0 + ttr);
        b.Theta_tilde_r = (1.0 + tt) / (1.0 - ttr);
    }
    return b;
}

/// Bound constants of an affine problem for truncation level r (r may exceed M).
inline BoundSet compute_bounds(const SgProblem& problem, int r)
{
    const auto& ctx = problem.context;
    detail::require(ctx.kind == ProblemKind::Affine, "compute_bounds: bound constants are defined for the affine problem");
    const int M = static_cast<int>(ctx.fields.size());
    const int rr = std::min(r, M);
    double sum = 0.0;
    for (int m = 0; m < rr; ++m) sum += ctx.sup_norms[static_cast<std::size_t>(m)];
    const double tau = ctx.tau[static_cast<std::size_t>(M)];
    const double tau_r = ctx.tau[static_cast<std::size_t>(rr)];
    // a_0 = 1, so the relative constants coincide with the absolute ones
    return compute_bounds(r, ctx.a0_min, ctx.a0_max, tau, tau_r, sum, std::make_pair(tau, tau_r));
}

/// Extreme eigenvalues of B^{-1} A via B = L L^T and the symmetric matrix L^{-1} A L^{-T}.
inline std::pair<double, double> eig_range(const Eigen::MatrixXd& B, const Eigen::MatrixXd& A)
{
    detail::require(A.rows() == A.cols() && B.rows() == B.cols() && A.rows() == B.rows(),
                    "eig_range: square matrices of equal size required");
    detail::require(static_cast<std::size_t>(A.rows()) <= kSpectralGuard, "eig_range: dimension exceeds guard");
    Eigen::LLT<Eigen::MatrixXd> llt(B);
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite("eig_range: B is not positive definite");
    Eigen::MatrixXd C = llt.matrixL().solve(A);
    C = llt.matrixL().solve(C.transpose()).transpose();
    C = 0.5 * (C + C.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C, Eigen::EigenvaluesOnly);
    return {eig.eigenvalues()(0), eig.eigenvalues()(eig.eigenvalues().size() - 1)};
}

inline bool is_positive_definite(const Eigen::MatrixXd& a)
{
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    return llt.info() == Eigen::Success;
}

/// Block split P = D + L + L^T of a dense block matrix with blocks of size nx.
struct BlockSplit {
    Eigen::MatrixXd D;
    Eigen::MatrixXd L;
};

inline BlockSplit block_split(const Eigen::MatrixXd& P, Eigen::Index nx)
{
    detail::require(nx > 0 && P.rows() % nx == 0, "block_split: block size does not divide the dimension");
    const Eigen::Index nb = P.rows() / nx;
    BlockSplit s{Eigen::MatrixXd::Zero(P.rows(), P.cols()), Eigen::MatrixXd::Zero(P.rows(), P.cols())};
    for (Eigen::Index t = 0; t < nb; ++t) {
        s.D.block(t * nx, t * nx, nx, nx) = P.block(t * nx, t * nx, nx, nx);
        for (Eigen::Index j = 0; j < t; ++j) s.L.block(t * nx, j * nx, nx, nx) = P.block(t * nx, j * nx, nx, nx);
    }
    return s;
}

/// Dense (D + L) D^{-1} (D + L^T).
inline Eigen::MatrixXd dense_sbgs(const Eigen::MatrixXd& P, Eigen::Index nx)
{
    const auto s = block_split(P, nx);
    Eigen::LLT<Eigen::MatrixXd> llt(s.D);
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite("dense_sbgs: block diagonal is not positive definite");
    const Eigen::MatrixXd DL = s.D + s.L;
    return DL * llt.solve(DL.transpose());
}

/// S~ = L_D^{-1} S L_D^{-T} with D = L_D L_D^T.
inline Eigen::MatrixXd scaled_lower(const Eigen::MatrixXd& P, Eigen::Index nx)
{
    const auto s = block_split(P, nx);
    Eigen::LLT<Eigen::MatrixXd> llt(s.D);
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite("scaled_lower: block diagonal is not positive definite");
    Eigen::MatrixXd C = llt.matrixL().solve(s.L);
    return llt.matrixL().solve(C.transpose()).transpose();
}

struct InclusionClaim {
    std::string name;
    double bound_lo = 0.0;
    double bound_hi = 0.0;
    double observed_lo = 0.0;
    double observed_hi = 0.0;
    bool applicable = true;
    bool pass = true;
    std::string note;

    /// Distance from the observed interval to the nearest bound edge (negative on failure).
    [[nodiscard]] double margin() const { return std::min(observed_lo - bound_lo, bound_hi - observed_hi); }
};

struct InclusionReport {
    int r = 0;
    std::optional<BoundSet> bounds;
    std::vector<InclusionClaim> claims;

    [[nodiscard]] bool all_pass() const
    {
        for (const auto& c : claims)
            if (c.applicable && !c.pass) return false;
        return true;
    }
};

namespace detail {

inline InclusionClaim interval_claim(std::string name, double lo, double hi, std::pair<double, double> obs,
                                     double slack)
{
    InclusionClaim c;
    c.name = std::move(name);
    c.bound_lo = lo;
    c.bound_hi = hi;
    c.observed_lo = obs.first;
    c.observed_hi = obs.second;
    c.pass = obs.first >= lo - slack && obs.second <= hi + slack;
    return c;
}

inline InclusionClaim not_applicable(std::string name, std::string note)
{
    InclusionClaim c;
    c.name = std::move(name);
    c.applicable = false;
    c.pass = true;
    c.note = std::move(note);
    return c;
}

} // namespace detail

/// Dense verification of the spectral inclusions for truncation level r.
///
/// Affine problems check six claims against the closed-form bounds. Lognormal problems have
/// no such constants; there the SBGS matrix is checked for positive definiteness and, when
/// P_r itself is positive definite, the lower edge of the P_r^{-1} P~_r spectrum.
inline InclusionReport verify_inclusions(const SgProblem& problem, int r, double slack = 1e-8)
{
    detail::require(r >= 0, "verify_inclusions: r must be nonnegative");
    if (problem.n_unknowns() > kSpectralGuard)
        throw SizeGuardExceeded("verify_inclusions: " + std::to_string(problem.n_unknowns()) +
                                " unknowns exceed the dense limit " + std::to_string(kSpectralGuard) +
                                "; use a coarser mesh or smaller M, k");

    const auto nx = static_cast<Eigen::Index>(problem.A.nx());
    const Eigen::MatrixXd A = assemble_dense(problem.A);
    const Eigen::MatrixXd P = assemble_dense(problem.truncation(r));
    const Eigen::MatrixXd P0 = assemble_dense(problem.truncation(0));

    InclusionReport rep;
    rep.r = r;

    if (problem.context.kind == ProblemKind::Lognormal) {
        InclusionClaim spd;
        spd.name = "sbgs_spd";
        Eigen::MatrixXd Pt;
        try {
            Pt = dense_sbgs(P, nx);
            spd.pass = is_positive_definite(Pt);
        } catch (const NotPositiveDefinite&) {
            spd.pass = false;
            spd.note = "block diagonal not positive definite";
        }
        if (spd.pass) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Pt, Eigen::EigenvaluesOnly);
            spd.observed_lo = eig.eigenvalues()(0);
            spd.observed_hi = eig.eigenvalues()(eig.eigenvalues().size() - 1);
        }
        spd.bound_lo = 0.0;
        spd.bound_hi = std::numeric_limits<double>::infinity();

        const bool trunc_pd = is_positive_definite(P);
        if (trunc_pd && spd.pass) {
            auto obs = eig_range(P, Pt);
            rep.claims.push_back(detail::interval_claim("Lambda(P_r^-1 P~_r)", 1.0,
                                                        std::numeric_limits<double>::infinity(), obs, slack));
            rep.claims.push_back(detail::interval_claim("Lambda(P_r^-1 A)", 0.0,
                                                        std::numeric_limits<double>::infinity(), eig_range(P, A), 0.0));
        } else {
            rep.claims.push_back(detail::not_applicable("Lambda(P_r^-1 P~_r)", "P_r is not positive definite"));
            rep.claims.push_back(detail::not_applicable("Lambda(P_r^-1 A)", "P_r is not positive definite"));
        }
        rep.claims.push_back(std::move(spd));
        return rep;
    }

    const auto b = compute_bounds(problem, r);
    rep.bounds = b;
    const Eigen::MatrixXd Pt = dense_sbgs(P, nx);

    rep.claims.push_back(detail::interval_claim("Lambda(P_r^-1 A)", b.theta_r, b.Theta_r, eig_range(P, A), slack));
    rep.claims.push_back(
        detail::interval_claim("Lambda(P_0^-1 P_r)", 1.0 - b.tau_r, 1.0 + b.tau_r, eig_range(P0, P), slack));
    rep.claims.push_back(detail::interval_claim("Lambda(P_r^-1 P~_r)", 1.0, 1.0 + b.delta_r, eig_range(P, Pt), slack));
    rep.claims.push_back(detail::interval_claim("Lambda(P~_r^-1 A)", b.sbgs_lower(), b.Theta_r, eig_range(Pt, A), slack));

    const Eigen::MatrixXd St = scaled_lower(P, nx);
    const Eigen::MatrixXd sym = Eigen::MatrixXd::Identity(St.rows(), St.cols()) + St + St.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
    const double lam_min = eig.eigenvalues()(0);
    rep.claims.push_back(detail::interval_claim("lambda_min(I+S~+S~^T)", 1.0 - b.tau_r,
                                                std::numeric_limits<double>::infinity(), {lam_min, lam_min}, slack));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(St);
    const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    double sum = 0.0;
    for (int m = 0; m < std::min<int>(r, static_cast<int>(problem.context.sup_norms.size())); ++m)
        sum += problem.context.sup_norms[static_cast<std::size_t>(m)];
    rep.claims.push_back(
        detail::interval_claim("sigma_max(S~)", 0.0, sum / b.a0_min, {smax, smax}, slack));
    return rep;
}

/// max |lambda - 1| over the spectrum of P_r^{-1} A.
inline double max_deviation(const SgProblem& problem, int r)
{
    const auto [lo, hi] = eig_range(assemble_dense(problem.truncation(r)), assemble_dense(problem.A));
    return std::max(std::abs(lo - 1.0), std::abs(hi - 1.0));
}

} // namespace sgkron
