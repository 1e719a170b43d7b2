#include <sgkron/config.hpp>
#include <sgkron/experiment.hpp>

#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#ifndef SGKRON_CLI_PATH
#error "SGKRON_CLI_PATH must point at the sgkron executable"
#endif

using namespace sgkron;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir()
    {
        path_ = fs::temp_directory_path() / ("sgkron-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter_++));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    [[nodiscard]] fs::path file(const std::string& name, const std::string& content = {}) const
    {
        const auto p = path_ / name;
        if (!content.empty()) std::ofstream(p) << content;
        return p;
    }

private:
    fs::path path_;
    static inline int counter_ = 0;
};

struct Run {
    int code;
    std::string out;
};

Run cli(const std::string& args, const TempDir& dir)
{
    const auto out = dir.file("stdout.txt");
    const std::string cmd = std::string(SGKRON_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(out);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

} // namespace

TEST(Config, ParsesAFullConfig)
{
    const auto c = parse_config(R"({
  "problem": "affine",
  "decay": ["fast", "slow"],
  "alpha_bar": "auto",
  "mesh_level": [3, 4],
  "M": 8,
  "k": [1, 2],
  "preconditioners": ["mean", "kron", "trunc_exact:2", "sbgs:3"],
  "tol": 1e-8,
  "max_iter": 50,
  "residual_norm": "preconditioned",
  "seed": 3,
  "timing": false
})");
    EXPECT_EQ(c.problem, ProblemKind::Affine);
    ASSERT_EQ(c.decays.size(), 2u);
    EXPECT_EQ(c.decays[1].sigma_tilde, 2.0);
    EXPECT_FALSE(c.alpha_bar.has_value());
    EXPECT_EQ(c.mesh_levels, (std::vector<int>{3, 4}));
    EXPECT_EQ(c.Ms, std::vector<int>{8});
    EXPECT_EQ(c.preconditioners.size(), 4u);
    EXPECT_EQ(c.preconditioners[2], (PrecondSpec{PrecondSpec::Kind::TruncExact, 2}));
    EXPECT_EQ(c.preconditioners[3].label(), "P~3");
    EXPECT_EQ(c.tol, 1e-8);
    EXPECT_EQ(c.max_iter, 50);
    EXPECT_EQ(c.residual_norm, StoppingNorm::Preconditioned);
    EXPECT_FALSE(c.timing);
}

TEST(Config, LognormalDefaults)
{
    const auto c = parse_config(R"({"problem": "lognormal", "M": 6, "k": 1, "preconditioners": ["sbgs:1"]})");
    ASSERT_EQ(c.decays.size(), 1u);
    EXPECT_EQ(c.decays[0].sigma_tilde, 2.0);
    ASSERT_TRUE(c.alpha_bar.has_value());
    EXPECT_EQ(*c.alpha_bar, 0.547);
    EXPECT_EQ(c.N, 20);
}

TEST(Config, ErrorsCarryTheLine)
{
    auto line_of = [](const std::string& text) {
        try {
            (void)parse_config(text);
        } catch (const ConfigError& e) {
            return e.line();
        }
        return -1;
    };
    EXPECT_EQ(line_of("{\n  \"problem\": \"affine\",\n  \"bogus\": 1,\n  \"preconditioners\": [\"mean\"]\n}"), 3);
    EXPECT_EQ(line_of("{\n  \"problem\": \"affine\",\n  \"preconditioners\": []\n}"), 3);
    EXPECT_EQ(line_of("{\n  \"problem\": \"affine\",\n  \"k\": -1,\n  \"preconditioners\": [\"mean\"]\n}"), 3);
    EXPECT_EQ(line_of("{\n  \"problem\": \"affine\",\n  \"preconditioners\": [\"gmres\"]\n}"), 3);
    EXPECT_EQ(line_of("{\n  \"problem\": \"affine\",\n  \"decay\": \"medium\",\n  \"preconditioners\": [\"mean\"]\n}"), 3);
    EXPECT_EQ(line_of("{\n  \"problem\": \"affine\",\n\n  \"M\": 4,,\n}"), 4);
}

TEST(Config, RejectsBadPreconditionerNames)
{
    EXPECT_THROW((void)parse_precond("sbgs:"), InvalidArgument);
    EXPECT_THROW((void)parse_precond("sbgs:-1"), InvalidArgument);
    EXPECT_THROW((void)parse_precond("trunc_exact:1x"), InvalidArgument);
    EXPECT_EQ(parse_precond("kron").label(), "Pkron");
}

TEST(Config, PresetGrids)
{
    auto rows = [](const ExperimentConfig& c) {
        return c.decays.size() * c.mesh_levels.size() * c.Ms.size() * c.ks.size() * c.preconditioners.size();
    };
    EXPECT_EQ(rows(preset("table2")), 56u);
    EXPECT_EQ(rows(preset("table3")), 96u);
    EXPECT_EQ(rows(preset("table4")), 60u);
    EXPECT_EQ(rows(preset("table6")), 48u);
    EXPECT_THROW((void)preset("table9"), InvalidArgument);
}

TEST(Experiment, FirstRowOfTheTruncationTable)
{
    const auto c = parse_config(R"({"problem": "affine", "decay": "fast", "mesh_level": 4, "M": 8, "k": 1,
                                    "preconditioners": ["mean", "trunc_exact:1", "trunc_exact:2"]})");
    const auto rows = run_experiment(c);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].iterations, 13);
    EXPECT_EQ(rows[1].iterations, 4);
    EXPECT_EQ(rows[2].iterations, 3);
    for (const auto& r : rows) EXPECT_TRUE(r.converged);
}

TEST(Experiment, IterationCountsDoNotDependOnM)
{
    const auto c = parse_config(R"({"problem": "affine", "decay": ["fast", "slow"], "mesh_level": [3, 4],
                                    "M": [4, 8], "k": 3, "preconditioners": ["mean", "sbgs:1", "sbgs:2"]})");
    const auto rows = run_experiment(c);
    ASSERT_EQ(rows.size(), 24u);
    // rows run decay, level, M, k, preconditioner; M=4 and M=8 blocks are adjacent
    for (std::size_t base = 0; base < rows.size(); base += 6)
        for (std::size_t p = 0; p < 3; ++p) EXPECT_LE(std::abs(rows[base + p].iterations - rows[base + 3 + p].iterations), 1);
}

TEST(Experiment, RowFormatting)
{
    ResultRow row;
    row.problem = "affine";
    row.decay = "fast";
    row.h = 0.0625;
    row.M = 8;
    row.k = 2;
    row.precond = "P~1";
    row.r = 1;
    row.iterations = 8;
    row.converged = true;
    row.final_relres = 5.5e-7;
    row.setup_seconds = 0.1234;
    row.n_unknowns = 10125;
    EXPECT_EQ(format_row(row, false), "affine,fast,0.0625,8,2,P~1,1,8,true,5.500e-07,na,na,10125");
    EXPECT_EQ(format_row(row, true), "affine,fast,0.0625,8,2,P~1,1,8,true,5.500e-07,0.12,0.00,10125");
    row.error = "notpd";
    row.converged = false;
    row.r.reset();
    EXPECT_EQ(format_row(row, false), "affine,fast,0.0625,8,2,P~1[notpd],,8,false,nan,na,na,10125");
}

TEST(Cli, RunIsDeterministicWithoutTiming)
{
    TempDir dir;
    const auto cfg = dir.file("c.json", R"({"problem": "affine", "decay": ["fast", "slow"], "mesh_level": 3, "M": 4,
        "k": [1, 2], "preconditioners": ["kron", "mean", "trunc_exact:1", "sbgs:2"]})");
    const auto a = dir.file("a.csv");
    const auto b = dir.file("b.csv");
    EXPECT_EQ(cli("run " + cfg.string() + " --no-timing --out " + a.string(), dir).code, 0);
    EXPECT_EQ(cli("run " + cfg.string() + " --no-timing --out " + b.string(), dir).code, 0);
    const auto first = slurp(a);
    EXPECT_EQ(first, slurp(b));
    EXPECT_EQ(count_lines(first), 1 + 16);
    EXPECT_EQ(first.substr(0, first.find('\n')), kCsvHeader);
}

TEST(Cli, InvalidConfigExitsWithUsageError)
{
    TempDir dir;
    const auto empty = dir.file("e.json", "{\n  \"problem\": \"affine\",\n  \"preconditioners\": []\n}\n");
    const auto r = cli("run " + empty.string(), dir);
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("line 3"), std::string::npos) << r.out;
    EXPECT_EQ(cli("run " + dir.file("missing.json").string(), dir).code, 1);
    EXPECT_EQ(cli("run --preset nope", dir).code, 1);
    EXPECT_EQ(cli("frobnicate", dir).code, 1);
}

TEST(Cli, NonConvergenceExitsWithTwo)
{
    TempDir dir;
    const auto cfg = dir.file("c.json", R"({"problem": "affine", "mesh_level": 3, "M": 4, "k": 2, "max_iter": 2,
        "preconditioners": ["mean"]})");
    EXPECT_EQ(cli("run " + cfg.string(), dir).code, 2);
}

TEST(Cli, IndefiniteTruncationBecomesAnErrorRow)
{
    TempDir dir;
    const auto cfg = dir.file("c.json", R"({"problem": "lognormal", "mesh_level": 2, "M": 2, "k": 3,
        "preconditioners": ["trunc_exact:1", "trunc_exact:2", "trunc_exact:3", "trunc_exact:4", "sbgs:1", "sbgs:2"],
        "timing": false})");
    const auto out = dir.file("o.csv");
    EXPECT_EQ(cli("run " + cfg.string() + " --out " + out.string(), dir).code, 0);
    const auto csv = slurp(out);
    EXPECT_NE(csv.find("[notpd]"), std::string::npos) << csv;
    EXPECT_EQ(csv.find("P~1[notpd]"), std::string::npos);
    EXPECT_EQ(csv.find("P~2[notpd]"), std::string::npos);
}

TEST(Cli, SpectrumOnTinyAffineProblem)
{
    TempDir dir;
    const auto cfg = dir.file("s.json", R"({"problem": "affine", "decay": "slow", "mesh_level": 2, "M": 3, "k": 2,
        "preconditioners": ["mean", "sbgs:1", "sbgs:2", "sbgs:3"]})");
    const auto csv = dir.file("s.csv");
    const auto r = cli("spectrum " + cfg.string() + " --out " + csv.string(), dir);
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(count_lines(r.out), 24);
    EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
    EXPECT_EQ(count_lines(slurp(csv)), 25);
}

TEST(Cli, SpectrumMarksIndefiniteLognormalTruncations)
{
    TempDir dir;
    const auto cfg = dir.file("s.json", R"({"problem": "lognormal", "mesh_level": 2, "M": 2, "k": 3,
        "preconditioners": ["sbgs:1", "sbgs:2", "sbgs:3", "sbgs:4", "sbgs:5", "sbgs:6"]})");
    const auto r = cli("spectrum " + cfg.string(), dir);
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("n/a"), std::string::npos);
    EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST(Cli, SpectrumSizeGuard)
{
    TempDir dir;
    const auto cfg = dir.file("s.json", R"({"problem": "affine", "mesh_level": 5, "M": 4, "k": 2, "preconditioners": ["mean"]})");
    const auto r = cli("spectrum " + cfg.string(), dir);
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("dense limit"), std::string::npos);
}

TEST(Cli, VerifySuite)
{
    TempDir dir;
    const auto ok = cli("verify", dir);
    EXPECT_EQ(ok.code, 0) << ok.out;
    const auto bad = cli("verify --inject-fault recurrence", dir);
    EXPECT_EQ(bad.code, 3);
    EXPECT_NE(bad.out.find("property failed: gram_linear_vs_quadrature"), std::string::npos) << bad.out;
}
