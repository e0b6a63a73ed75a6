#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "bracket/cli.hpp"

using namespace bracket;
namespace fs = std::filesystem;
constexpr double pi = std::numbers::pi;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "bracketsim");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("bracket_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

std::size_t argmax_w(const std::vector<std::vector<std::string>>& rows) {
    std::size_t best = 1;
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (std::stod(rows[i][2]) > std::stod(rows[best][2])) best = i;
    return best;
}

}  // namespace

TEST(Wigner, MaximaOffOriginForBracket) {
    const auto dir = scratch_dir("wigner");
    const auto r = invoke({"wigner", "--b", "2", "--gamma", "pi/2", "--extent", "4", "--n", "81", "--out",
                           (dir / "w").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = read_csv(dir / "w.csv");
    ASSERT_EQ(rows.size(), 1u + 81u * 81u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"x", "y", "w"}));
    const auto& best = rows[argmax_w(rows)];
    EXPECT_GT(std::hypot(std::stod(best[0]), std::stod(best[1])), 1.0);
    EXPECT_TRUE(fs::exists(dir / "w.json"));
    EXPECT_NE(r.out.find("w.csv"), std::string::npos);
}

TEST(Wigner, VacuumPeaksAtOrigin) {
    const auto dir = scratch_dir("vacuum");
    ASSERT_EQ(invoke({"wigner", "--b", "0", "--n", "41", "--out", (dir / "v").string()}).code, 0);
    const auto rows = read_csv(dir / "v.csv");
    const auto& best = rows[argmax_w(rows)];
    EXPECT_DOUBLE_EQ(std::stod(best[0]), 0.0);
    EXPECT_DOUBLE_EQ(std::stod(best[1]), 0.0);
    EXPECT_NEAR(std::stod(best[2]), 2 / pi, 1e-11);
}

TEST(Wigner, RejectsBadInput) {
    const auto dir = scratch_dir("wigner_bad");
    EXPECT_EQ(invoke({"wigner", "--n", "1", "--out", (dir / "x").string()}).code, 2);
    EXPECT_EQ(invoke({"wigner", "--gamma", "4", "--out", (dir / "x").string()}).code, 2);
    EXPECT_EQ(invoke({"wigner", "--gamma", "half", "--out", (dir / "x").string()}).code, 2);
    EXPECT_FALSE(fs::exists(dir / "x.csv"));
}

TEST(Curves, OneFilePerGammaAndFlatAtPi) {
    const auto dir = scratch_dir("curves");
    const auto r = invoke({"curves", "--gammas", "pi/2,pi", "--eta", "1", "--nphi", "33", "--out",
                           (dir / "c").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto half = read_csv(dir / "c_gamma1p57079632679.csv");
    const auto full = read_csv(dir / "c_gamma3p14159265359.csv");
    ASSERT_EQ(half.size(), 34u);
    EXPECT_EQ(half[0], (std::vector<std::string>{"phi", "fano", "gamma_corr"}));
    EXPECT_NEAR(std::stod(half[1][2]), 0.76598550361351770, 1e-11);
    EXPECT_NEAR(std::stod(half[1][1]), 4.2732395447351627, 1e-10);
    EXPECT_NEAR(std::stod(half.back()[0]), 2 * pi, 1e-11);
    for (std::size_t i = 2; i < full.size(); ++i) {
        EXPECT_NEAR(std::stod(full[i][1]), std::stod(full[1][1]), 1e-10);
        EXPECT_NEAR(std::stod(full[i][2]), std::stod(full[1][2]), 1e-10);
    }
}

TEST(Curves, RejectsBadInput) {
    const auto dir = scratch_dir("curves_bad");
    EXPECT_EQ(invoke({"curves", "--gammas", "", "--out", (dir / "c").string()}).code, 2);
    EXPECT_EQ(invoke({"curves", "--gammas", "1,5", "--out", (dir / "c").string()}).code, 2);
    EXPECT_EQ(invoke({"curves", "--tau", "0", "--out", (dir / "c").string()}).code, 2);
    EXPECT_TRUE(fs::is_empty(dir));
}

TEST(Sweep, ByteIdenticalReruns) {
    const auto dir = scratch_dir("sweep");
    std::ofstream(dir / "cfg.json") << R"({"steps": 24, "shots_per_step": 50, "noise": 0.05})";
    const std::string cfg = (dir / "cfg.json").string();
    ASSERT_EQ(invoke({"sweep", "--config", cfg, "--seed", "9", "--workers", "1", "--out", (dir / "a").string()}).code,
              0);
    ASSERT_EQ(invoke({"sweep", "--config", cfg, "--seed", "9", "--workers", "4", "--out", (dir / "b").string()}).code,
              0);
    ASSERT_EQ(invoke({"sweep", "--config", cfg, "--seed", "10", "--out", (dir / "c").string()}).code, 0);
    EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
    EXPECT_EQ(slurp(dir / "a.json"), slurp(dir / "b.json"));
    EXPECT_NE(slurp(dir / "a.csv"), slurp(dir / "c.csv"));
    const auto side = io::read_json(dir / "a.json");
    EXPECT_EQ(side["seed"], 9);
    EXPECT_EQ(side["config"]["steps"], 24);
    EXPECT_EQ(read_csv(dir / "a.csv").size(), 1u + 24u * 50u);
}

TEST(Sweep, DefaultConfigShape) {
    const auto dir = scratch_dir("sweep_default");
    std::ofstream(dir / "cfg.json") << R"({"shots_per_step": 2})";
    ASSERT_EQ(invoke({"sweep", "--config", (dir / "cfg.json").string(), "--out", (dir / "d").string()}).code, 0);
    const auto ds = io::read_sweep_csv(dir / "d.csv");
    EXPECT_EQ(ds.steps(), 320u);
    EXPECT_EQ(ds.config.b, 2.0);
}

TEST(Sweep, ErrorsMapToExitCodes) {
    const auto dir = scratch_dir("sweep_err");
    std::ofstream(dir / "bad.json") << R"({"stepz": 3})";
    std::ofstream(dir / "broken.json") << "{";
    std::ofstream(dir / "file") << "x";
    EXPECT_EQ(invoke({"sweep", "--config", (dir / "bad.json").string(), "--out", (dir / "s").string()}).code, 2);
    EXPECT_EQ(invoke({"sweep", "--config", (dir / "broken.json").string(), "--out", (dir / "s").string()}).code, 2);
    EXPECT_EQ(invoke({"sweep", "--config", (dir / "missing.json").string(), "--out", (dir / "s").string()}).code, 3);
    std::ofstream(dir / "small.json") << R"({"steps": 4, "shots_per_step": 2})";
    EXPECT_EQ(invoke({"sweep", "--config", (dir / "small.json").string(), "--out", (dir / "file" / "s").string()}).code,
              3);
}

TEST(Retrieve, WritesPhasesEnsemblesAndHistograms) {
    const auto dir = scratch_dir("retrieve");
    std::ofstream(dir / "cfg.json") << R"({"shots_per_step": 3000})";
    ASSERT_EQ(invoke({"sweep", "--config", (dir / "cfg.json").string(), "--out", (dir / "s").string()}).code, 0);
    const auto r = invoke({"retrieve", "--dataset", (dir / "s.csv").string(), "--centers", "0,pi/2", "--gammas",
                           "pi/2", "--out", (dir / "r").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto phases = read_csv(dir / "r_phases.csv");
    ASSERT_EQ(phases.size(), 321u);
    EXPECT_EQ(phases[0], (std::vector<std::string>{"step", "mean", "normalized", "phase"}));
    const auto truth = io::read_sweep_csv(dir / "s.csv").step_phase;
    double worst = 0;
    for (std::size_t j = 0; j < truth.size(); ++j)
        worst = std::max(worst, std::abs(std::remainder(std::stod(phases[j + 1][3]) - truth[j], 2 * pi)));
    EXPECT_LT(worst, 0.5);
    const auto ens = read_csv(dir / "r_ensembles.csv");
    ASSERT_EQ(ens.size(), 3u);
    EXPECT_EQ(ens[0].size(), 11u);
    EXPECT_GT(std::stod(ens[1][3]), std::stod(ens[2][3]));
    for (const char* f : {"r_c0_g1p57079632679_arm1_measured.csv", "r_c0_g1p57079632679_arm1_analytic.csv",
                          "r_c1p57079632679_g1p57079632679_arm2_measured.csv", "r_phases.json"}) {
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    }
    const auto side = io::read_json(dir / "r_phases.json");
    EXPECT_TRUE(side["config"].contains("fit"));
}

TEST(Retrieve, EmptyWindowAndMissingDataset) {
    const auto dir = scratch_dir("retrieve_err");
    std::ofstream(dir / "cfg.json")
        << R"({"steps": 40, "shots_per_step": 200, "profile": {"kind": "linear", "start": 0.2, "stop": 1.2}})";
    ASSERT_EQ(invoke({"sweep", "--config", (dir / "cfg.json").string(), "--out", (dir / "s").string()}).code, 0);
    const auto r = invoke({"retrieve", "--dataset", (dir / "s.csv").string(), "--analytic-fit", "--centers", "2.5",
                           "--gammas", "0.1", "--out", (dir / "r").string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("2.45"), std::string::npos) << r.err;
    EXPECT_EQ(invoke({"retrieve", "--dataset", (dir / "nope.csv").string()}).code, 3);
    EXPECT_EQ(invoke({"retrieve"}).code, 2);
}

TEST(Discriminate, ClosedFormRow) {
    const auto dir = scratch_dir("discrim");
    const auto r = invoke({"discriminate", "--bs", "0,1", "--gammas", "0,pi/2", "--out", (dir / "d").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = read_csv(dir / "d.csv");
    ASSERT_EQ(rows.size(), 5u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"b", "gamma", "dephase", "p_error"}));
    EXPECT_EQ(rows[1][3], "0.5");
    EXPECT_EQ(rows[2][3], "0.5");
    EXPECT_EQ(rows[3], (std::vector<std::string>{"1", "0", "0", "0.00915781944437"}));
    EXPECT_NEAR(std::stod(rows[4][3]), 0.095584907560622094, 1e-12);
    EXPECT_EQ(invoke({"discriminate", "--bs", "-1", "--out", (dir / "e").string()}).code, 2);
    EXPECT_EQ(invoke({"discriminate", "--threshold", "0", "--out", (dir / "e").string()}).code, 2);
    EXPECT_FALSE(fs::exists(dir / "e.csv"));
}

TEST(Discriminate, OutDirEnvironment) {
    const auto dir = scratch_dir("envdir");
    ::setenv(cli::kOutDirEnv, dir.c_str(), 1);
    const auto r = invoke({"discriminate", "--bs", "1", "--gammas", "0"});
    ::unsetenv(cli::kOutDirEnv);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir / "discrim.csv"));
    EXPECT_TRUE(fs::exists(dir / "discrim.json"));
}

TEST(Parsing, UnknownFlagsAndHelp) {
    EXPECT_EQ(invoke({"wigner", "--bogus", "1"}).code, 2);
    EXPECT_EQ(invoke({}).code, 2);
    EXPECT_EQ(invoke({"nonsense"}).code, 2);
    const auto h = invoke({"discriminate", "--help"});
    EXPECT_EQ(h.code, 0);
    for (const char* flag : {"--bs", "--gammas", "--dephases", "--beta", "--threshold", "--eta", "--out"}) {
        EXPECT_NE(h.out.find(flag), std::string::npos) << flag;
    }
    EXPECT_EQ(invoke({"--version"}).code, 0);
}

TEST(Binary, ExitCodesFromShell) {
    const char* bin = std::getenv("BRACKETSIM_BIN");
    if (!bin) GTEST_SKIP() << "BRACKETSIM_BIN not set";
    const auto dir = scratch_dir("binary");
    const std::string quiet = " >/dev/null 2>&1";
    auto status = [&](const std::string& args) {
        const int s = std::system((std::string(bin) + " " + args + quiet).c_str());
        return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    EXPECT_EQ(status("discriminate --bs 1 --gammas 0 --out " + (dir / "d").string()), 0);
    EXPECT_EQ(status("discriminate --bs -1 --out " + (dir / "d").string()), 2);
    EXPECT_EQ(status("wigner --frobnicate"), 2);
    EXPECT_EQ(status("retrieve --dataset " + (dir / "missing.csv").string()), 3);
    EXPECT_EQ(status("--help"), 0);
}
