#pragma once

#include <sgkron/errors.hpp>
#include <sgkron/kronsys.hpp>
#include <sgkron/pcg.hpp>
#include <sgkron/precond.hpp>
#include <sgkron/truncation.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace sgkron {

struct PrecondSpec {
    enum class Kind { Mean, Kron, TruncExact, Sbgs };
    Kind kind = Kind::Mean;
    int r = 0;

    [[nodiscard]] std::string label() const
    {
        switch (kind) {
        case Kind::Mean: return "P0";
        case Kind::Kron: return "Pkron";
        case Kind::TruncExact: return "P" + std::to_string(r);
        case Kind::Sbgs: return "P~" + std::to_string(r);
        }
        return "?";
    }

    friend bool operator==(const PrecondSpec&, const PrecondSpec&) = default;
};

/// "mean", "kron", "trunc_exact:<r>", "sbgs:<r>".
inline PrecondSpec parse_precond(const std::string& text)
{
    if (text == "mean") return {PrecondSpec::Kind::Mean, 0};
    if (text == "kron") return {PrecondSpec::Kind::Kron, 0};
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
        const auto head = text.substr(0, colon);
        const auto tail = text.substr(colon + 1);
        std::size_t used = 0;
        int r = -1;
        try {
            r = std::stoi(tail, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == tail.size() && !tail.empty()) {
            if (r < 0) throw InvalidArgument("preconditioner '" + text + "': r must be nonnegative");
            if (head == "trunc_exact") return {PrecondSpec::Kind::TruncExact, r};
            if (head == "sbgs") return {PrecondSpec::Kind::Sbgs, r};
        }
    }
    throw InvalidArgument("unknown preconditioner '" + text + "' (expected mean, kron, trunc_exact:<r> or sbgs:<r>)");
}

struct Decay {
    std::string name; ///< "fast", "slow" or "sigma=<value>"
    double sigma_tilde = 4.0;
};

inline Decay decay_fast() { return {"fast", 4.0}; }
inline Decay decay_slow() { return {"slow", 2.0}; }

/// A grid of runs: every combination of decay, mesh level, M and k, each with every preconditioner.
struct ExperimentConfig {
    ProblemKind problem = ProblemKind::Affine;
    std::vector<Decay> decays{decay_fast()};
    std::optional<double> alpha_bar; ///< empty: alpha_bar * zeta(sigma) = 0.9999
    std::vector<int> mesh_levels{4};
    std::vector<int> Ms{8};
    std::vector<int> ks{1};
    int N = 20;
    std::vector<PrecondSpec> preconditioners;
    double tol = 1e-6;
    int max_iter = 1000;
    StoppingNorm residual_norm = StoppingNorm::Euclidean;
    std::uint64_t seed = 0;
    std::string output;
    bool timing = true;
};

/// Domain checks shared by file configs and presets.
inline void validate(const ExperimentConfig& c)
{
    detail::require(!c.preconditioners.empty(), "preconditioners: list must not be empty");
    detail::require(!c.decays.empty() && !c.mesh_levels.empty() && !c.Ms.empty() && !c.ks.empty(),
                    "decay, mesh_level, M and k must each have at least one value");
    for (const auto& d : c.decays) detail::require(d.sigma_tilde > 1.0, "decay: sigma_tilde must exceed 1");
    for (int L : c.mesh_levels) detail::require(L >= 1 && L <= 10, "mesh_level: must lie in [1, 10]");
    for (int M : c.Ms) detail::require(M >= 1, "M: must be at least 1");
    for (int k : c.ks) detail::require(k >= 0 && k <= 12, "k: must lie in [0, 12]");
    if (c.alpha_bar) detail::require(*c.alpha_bar > 0.0, "alpha_bar: must be positive");
    detail::require(c.tol > 0.0 && c.tol < 1.0, "tol: must lie in (0, 1)");
    detail::require(c.max_iter >= 1, "max_iter: must be positive");
    if (c.problem == ProblemKind::Lognormal) {
        detail::require(c.N >= 1, "N: must be at least 1");
        for (int M : c.Ms) detail::require(M < c.N, "M: lognormal problems need M < N");
    }
}

/// The parameter grids of the published iteration-count tables.
inline ExperimentConfig preset(const std::string& name)
{
    ExperimentConfig c;
    auto range = [](int lo, int hi) {
        std::vector<int> v;
        for (int i = lo; i <= hi; ++i) v.push_back(i);
        return v;
    };
    using K = PrecondSpec::Kind;
    if (name == "table2") {
        c.decays = {decay_fast(), decay_slow()};
        c.mesh_levels = {4};
        c.Ms = {8};
        c.ks = range(1, 4);
        c.preconditioners.push_back({K::Mean, 0});
        for (int r = 1; r <= 6; ++r) c.preconditioners.push_back({K::TruncExact, r});
    } else if (name == "table3") {
        c.decays = {decay_fast(), decay_slow()};
        c.mesh_levels = {4};
        c.Ms = {8};
        c.ks = range(1, 6);
        c.preconditioners = {{K::Kron, 0}, {K::Mean, 0}};
        for (int r = 1; r <= 6; ++r) c.preconditioners.push_back({K::Sbgs, r});
    } else if (name == "table4") {
        c.decays = {decay_fast(), decay_slow()};
        c.mesh_levels = range(3, 7);
        c.Ms = {4, 8};
        c.ks = {3};
        c.preconditioners = {{K::Mean, 0}, {K::Sbgs, 1}, {K::Sbgs, 2}};
    } else if (name == "table6") {
        c.problem = ProblemKind::Lognormal;
        c.decays = {decay_slow()};
        c.alpha_bar = 0.547;
        c.mesh_levels = {4};
        c.Ms = {6};
        c.N = 20;
        c.ks = range(1, 6);
        c.preconditioners = {{K::Kron, 0}, {K::Mean, 0}};
        for (int r = 1; r <= 6; ++r) c.preconditioners.push_back({K::Sbgs, r});
    } else {
        throw InvalidArgument("unknown preset '" + name + "' (expected table2, table3, table4 or table6)");
    }
    return c;
}

inline const std::vector<std::string>& preset_names()
{
    static const std::vector<std::string> names{"table2", "table3", "table4", "table6"};
    return names;
}

struct ResultRow {
    std::string problem;
    std::string decay;
    double h = 0.0;
    int M = 0;
    int k = 0;
    std::string precond;
    std::optional<int> r;
    int iterations = 0;
    bool converged = false;
    double final_relres = 0.0;
    double setup_seconds = 0.0;
    double solve_seconds = 0.0;
    std::size_t n_unknowns = 0;
    std::string error; ///< set when the preconditioner could not be built or applied
};

inline constexpr const char* kCsvHeader =
    "problem,decay,h,M,k,precond,r,iterations,converged,final_relres,setup_s,solve_s,n_unknowns";

inline std::string format_row(const ResultRow& row, bool timing = true)
{
    char buf[512];
    auto seconds = [&](double s) {
        if (!timing) return std::string("na");
        char t[32];
        std::snprintf(t, sizeof t, "%.2f", s);
        return std::string(t);
    };
    const std::string label = row.error.empty() ? row.precond : row.precond + "[" + row.error + "]";
    const std::string relres = [&] {
        if (!row.error.empty()) return std::string("nan");
        char t[32];
        std::snprintf(t, sizeof t, "%.3e", row.final_relres);
        return std::string(t);
    }();
    std::snprintf(buf, sizeof buf, "%s,%s,%g,%d,%d,%s,%s,%d,%s,%s,%s,%s,%zu", row.problem.c_str(), row.decay.c_str(),
                  row.h, row.M, row.k, label.c_str(), row.r ? std::to_string(*row.r).c_str() : "",
                  row.iterations, row.converged ? "true" : "false", relres.c_str(),
                  seconds(row.setup_seconds).c_str(), seconds(row.solve_seconds).c_str(), row.n_unknowns);
    return buf;
}

inline SgProblem build_problem(const ExperimentConfig& c, const Decay& decay, int level, int M, int k)
{
    const auto mesh = build_mesh(level);
    if (c.problem == ProblemKind::Affine) return build_affine_system(mesh, M, k, decay.sigma_tilde, c.alpha_bar);
    const double abar = c.alpha_bar ? *c.alpha_bar : auto_alpha_bar(decay.sigma_tilde);
    return build_lognormal_system(mesh, M, k, c.N, decay.sigma_tilde, abar);
}

/// Build the requested preconditioner for a problem; r = 0 variants reduce to P_0.
inline std::unique_ptr<Preconditioner> build_preconditioner(const SgProblem& problem, const PrecondSpec& spec,
                                                            std::shared_ptr<const CholeskyFactor> k0_factor)
{
    switch (spec.kind) {
    case PrecondSpec::Kind::Mean: return build_mean_based(std::move(k0_factor), problem.A.ny());
    case PrecondSpec::Kind::Kron: return build_kron(problem.A.terms(), *problem.K0, std::move(k0_factor));
    case PrecondSpec::Kind::TruncExact: return build_truncation(problem, spec.r, std::move(k0_factor));
    case PrecondSpec::Kind::Sbgs: return build_sbgs(problem, spec.r, std::move(k0_factor));
    }
    throw InvalidArgument("unknown preconditioner kind");
}

/// Execute every cell in declared order; `on_row` sees each row as soon as it is finished.
inline std::vector<ResultRow> run_experiment(const ExperimentConfig& c,
                                             const std::function<void(const ResultRow&)>& on_row = {})
{
    validate(c);
    SolverConfig solver;
    solver.tol = c.tol;
    solver.max_iter = c.max_iter;
    solver.norm = c.residual_norm;

    std::vector<ResultRow> rows;
    for (const auto& decay : c.decays)
        for (int level : c.mesh_levels)
            for (int M : c.Ms)
                for (int k : c.ks) {
                    const auto problem = build_problem(c, decay, level, M, k);
                    const auto k0_factor = factor_spd(*problem.K0);
                    for (const auto& spec : c.preconditioners) {
                        ResultRow row;
                        row.problem = std::string(to_string(c.problem));
                        row.decay = decay.name;
                        row.h = problem.mesh.h;
                        row.M = M;
                        row.k = k;
                        row.precond = spec.label();
                        if (spec.kind != PrecondSpec::Kind::Kron) row.r = spec.r;
                        row.n_unknowns = problem.n_unknowns();
                        try {
                            const auto t0 = std::chrono::steady_clock::now();
                            const auto P = build_preconditioner(problem, spec, k0_factor);
                            row.setup_seconds =
                                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                            const auto result = pcg_solve(problem.A, *P, problem.f, solver);
                            row.iterations = result.report.iterations;
                            row.converged = result.report.converged;
                            row.final_relres = result.report.final_relres();
                            row.solve_seconds = result.report.solve_seconds;
                        } catch (const NotPositiveDefinite&) {
                            row.error = "notpd";
                        } catch (const Breakdown&) {
                            row.error = "breakdown";
                        }
                        if (on_row) on_row(row);
                        rows.push_back(std::move(row));
                    }
                }
    return rows;
}

inline void write_csv(std::ostream& os, const std::vector<ResultRow>& rows, bool timing = true)
{
    os << kCsvHeader << '\n';
    for (const auto& row : rows) os << format_row(row, timing) << '\n';
}

} // namespace sgkron
