// sgkron: benchmark runs, spectral checks and the invariant suite from the command line.

#include <sgkron/config.hpp>
#include <sgkron/experiment.hpp>
#include <sgkron/spectral.hpp>
#include <sgkron/verify.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNotConverged = 2;
constexpr int kExitPropertyFailure = 3;

int cmd_run(const std::string& config_path, const std::string& preset_name, std::string out_path, bool no_timing)
{
    sgkron::ExperimentConfig config;
    try {
        if (!preset_name.empty() && !config_path.empty()) {
            std::cerr << "error: give either a config file or --preset, not both\n";
            return kExitUsage;
        }
        if (preset_name.empty() && config_path.empty()) {
            std::cerr << "error: run needs a config file or --preset\n";
            return kExitUsage;
        }
        config = preset_name.empty() ? sgkron::load_config(config_path) : sgkron::preset(preset_name);
    } catch (const sgkron::InvalidArgument& e) {
        std::cerr << "error: " << (config_path.empty() ? "" : config_path + ": ") << e.what() << '\n';
        return kExitUsage;
    }
    if (out_path.empty()) out_path = config.output;
    const bool timing = config.timing && !no_timing;

    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) {
            std::cerr << "error: cannot write '" << out_path << "'\n";
            return kExitUsage;
        }
    }
    std::ostream& out = out_path.empty() ? std::cout : file;
    out << sgkron::kCsvHeader << '\n';

    bool all_converged = true;
    try {
        sgkron::run_experiment(config, [&](const sgkron::ResultRow& row) {
            out << sgkron::format_row(row, timing) << '\n';
            out.flush();
            if (row.error.empty() && !row.converged) all_converged = false;
            if (!out_path.empty())
                std::cerr << row.problem << ' ' << row.decay << " h=" << row.h << " M=" << row.M << " k=" << row.k
                          << ' ' << row.precond << ": "
                          << (row.error.empty() ? std::to_string(row.iterations) : row.error) << '\n';
        });
    } catch (const sgkron::InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return all_converged ? kExitOk : kExitNotConverged;
}

int cmd_spectrum(const std::string& config_path, const std::string& out_path)
{
    sgkron::ExperimentConfig config;
    try {
        config = sgkron::load_config(config_path);
    } catch (const sgkron::InvalidArgument& e) {
        std::cerr << "error: " << config_path << ": " << e.what() << '\n';
        return kExitUsage;
    }

    std::set<int> levels;
    for (const auto& p : config.preconditioners)
        if (p.kind != sgkron::PrecondSpec::Kind::Kron) levels.insert(p.r);

    std::ostringstream csv;
    csv << "problem,decay,h,M,k,r,claim,bound_lo,bound_hi,observed_lo,observed_hi,margin,status\n";
    bool all_pass = true;
    try {
        for (const auto& decay : config.decays)
            for (int level : config.mesh_levels)
                for (int M : config.Ms)
                    for (int k : config.ks) {
                        const auto problem = sgkron::build_problem(config, decay, level, M, k);
                        for (int r : levels) {
                            const auto rep = sgkron::verify_inclusions(problem, r);
                            for (const auto& c : rep.claims) {
                                const std::string status = !c.applicable ? "n/a" : (c.pass ? "pass" : "FAIL");
                                if (c.applicable && !c.pass) all_pass = false;
                                char line[512];
                                std::snprintf(line, sizeof line,
                                              "%-9s %-5s h=%-7g M=%d k=%d r=%d  %-24s bound [%.6g, %.6g]  observed "
                                              "[%.6g, %.6g]  margin %.3g  %s",
                                              std::string(sgkron::to_string(config.problem)).c_str(),
                                              decay.name.c_str(), problem.mesh.h, M, k, r, c.name.c_str(),
                                              c.bound_lo, c.bound_hi, c.observed_lo, c.observed_hi,
                                              c.applicable ? c.margin() : 0.0, status.c_str());
                                std::cout << line << (c.note.empty() ? "" : "  (" + c.note + ")") << '\n';
                                csv << sgkron::to_string(config.problem) << ',' << decay.name << ','
                                    << problem.mesh.h << ',' << M << ',' << k << ',' << r << ',' << c.name << ','
                                    << c.bound_lo << ',' << c.bound_hi << ',' << c.observed_lo << ','
                                    << c.observed_hi << ',' << (c.applicable ? c.margin() : 0.0) << ',' << status
                                    << '\n';
                            }
                        }
                    }
    } catch (const sgkron::SizeGuardExceeded& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const sgkron::InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    if (!out_path.empty()) {
        std::ofstream file(out_path);
        if (!file) {
            std::cerr << "error: cannot write '" << out_path << "'\n";
            return kExitUsage;
        }
        file << csv.str();
    }
    return all_pass ? kExitOk : kExitPropertyFailure;
}

int cmd_verify(const std::string& fault)
{
    sgkron::VerifyOptions opt;
    if (fault == "recurrence")
        opt.recurrence_perturbation = 1e-3;
    else if (!fault.empty()) {
        std::cerr << "error: unknown fault '" << fault << "' (expected recurrence)\n";
        return kExitUsage;
    }
    const auto start = std::chrono::steady_clock::now();
    std::string first_failure;
    sgkron::run_property_suite(opt, [&](const sgkron::PropertyResult& r) {
        char line[256];
        std::snprintf(line, sizeof line, "%-4s %-38s %6.2fs  ", r.pass ? "ok" : "FAIL", r.name.c_str(), r.seconds);
        std::cout << line << r.detail << '\n';
        if (!r.pass && first_failure.empty()) first_failure = r.name;
    });
    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("total %.2fs\n", total);
    if (total > 300.0) std::cout << "warning: suite exceeded its 5 minute budget\n";
    if (!first_failure.empty()) {
        std::cerr << "property failed: " << first_failure << '\n';
        return kExitPropertyFailure;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Stochastic Galerkin FEM preconditioner benchmarks"};
    app.require_subcommand(1);

    std::string config_path;
    std::string preset_name;
    std::string out_path;
    bool no_timing = false;
    auto* run = app.add_subcommand("run", "Run a benchmark grid and write CSV");
    run->add_option("config", config_path, "JSON experiment configuration");
    run->add_option("--preset", preset_name, "Built-in grid: table2, table3, table4 or table6");
    run->add_option("--out", out_path, "CSV output path (default: config 'output' or stdout)");
    run->add_flag("--no-timing", no_timing, "Write 'na' in the timing columns");

    std::string spectrum_config;
    std::string spectrum_out;
    auto* spectrum = app.add_subcommand("spectrum", "Check spectral inclusions by dense eigensolves");
    spectrum->add_option("config", spectrum_config, "JSON experiment configuration")->required();
    spectrum->add_option("--out", spectrum_out, "CSV report path");

    std::string fault;
    auto* verify = app.add_subcommand("verify", "Run the invariant suite");
    verify->add_option("--inject-fault", fault, "Corrupt a constant to confirm the suite notices (recurrence)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*run) return cmd_run(config_path, preset_name, out_path, no_timing);
        if (*spectrum) return cmd_spectrum(spectrum_config, spectrum_out);
        if (*verify) return cmd_verify(fault);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
