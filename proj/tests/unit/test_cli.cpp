#include "robinp/cli.hpp"
#include "robinp/io.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

using namespace robinp;

namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() / ("robinp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
        ::unsetenv("ROBINP_OUTPUT_DIR");
    }

    fs::path write_config(const std::string& name, const std::string& text) {
        const auto path = dir / name;
        std::ofstream(path) << text;
        return path;
    }

    int run(std::vector<std::string> args) {
        args.insert(args.begin(), "robinp");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        out.str("");
        err.str("");
        return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    }

    std::string last_log_line(const fs::path& out_dir) {
        std::ifstream in(out_dir / "run.log");
        std::string line, last;
        while (std::getline(in, line)) last = line;
        return last;
    }

    fs::path dir;
    std::ostringstream out, err;
};

const char* kRobin = "mesh.kind = interval\nmesh.n = 64\nproblem.p = 2\nproblem.beta = 1\nreaction.name = example\n";

}  // namespace

TEST_F(Cli, EigenOnNeumannConfig) {
    const auto cfg = write_config("n.cfg", "mesh.kind = interval\nmesh.n = 32\nproblem.p = 2\nreaction.name = zero\n");
    const auto o = dir / "out";
    EXPECT_EQ(run({"eigen", "--config", cfg.string(), "--output", o.string()}), 0) << err.str();
    EXPECT_NE(out.str().find("lambda1 = 0\n"), std::string::npos) << out.str();
    EXPECT_TRUE(fs::exists(o / "u1.csv"));
    EXPECT_NE(last_log_line(o).find("phase=eigen:done"), std::string::npos);
    EXPECT_NE(last_log_line(o).find("verdict=ok"), std::string::npos);
}

TEST_F(Cli, ContinueWritesTraceAndFinalField) {
    const auto cfg = write_config("r.cfg", std::string(kRobin) + "schedule.steps = 6\n");
    const auto o = dir / "out";
    ASSERT_EQ(run({"continue", "-c", cfg.string(), "-o", o.string()}), 0) << err.str();
    EXPECT_TRUE(fs::exists(o / "trace.csv"));
    EXPECT_TRUE(fs::exists(o / "u_final.csv"));
    const auto mesh = build_interval_mesh(0.0, 1.0, 64);
    EXPECT_GT(read_field_csv(o / "u_final.csv", mesh).min(), 0.0);
    EXPECT_NE(out.str().find("status = completed"), std::string::npos);
    EXPECT_NE(last_log_line(o).find("phase=continue:done"), std::string::npos);
}

TEST_F(Cli, ContinueCollapseExitsOne) {
    const auto cfg = write_config("z.cfg", "mesh.n = 32\nproblem.beta = 1\nreaction.name = zero\n");
    const auto o = dir / "out";
    EXPECT_EQ(run({"continue", "-c", cfg.string(), "-o", o.string()}), 1);
    EXPECT_NE(err.str().find("collapse-detected"), std::string::npos);
    EXPECT_NE(last_log_line(o).find("verdict=failure"), std::string::npos);
}

TEST_F(Cli, SolveAuxAndPicone) {
    const auto cfg = write_config("r.cfg", kRobin);
    const auto o = dir / "out";
    ASSERT_EQ(run({"solve-aux", "-c", cfg.string(), "-o", o.string(), "--epsilon", "0.5"}), 0) << err.str();
    ASSERT_EQ(run({"eigen", "-c", cfg.string(), "-o", o.string()}), 0);
    ASSERT_EQ(run({"picone", "-c", cfg.string(), "-o", o.string(), "--u1", (o / "u1.csv").string(), "--u",
                   (o / "u.csv").string()}),
              0)
        << err.str();
    EXPECT_NE(out.str().find("nonnegative = true"), std::string::npos);
    EXPECT_TRUE(fs::exists(o / "picone_density.csv"));
}

TEST_F(Cli, PiconeRejectsNonPositiveField) {
    const auto cfg = write_config("r.cfg", kRobin);
    const auto o = dir / "out";
    ASSERT_EQ(run({"eigen", "-c", cfg.string(), "-o", o.string()}), 0);
    const auto mesh = build_interval_mesh(0.0, 1.0, 64);
    write_field_csv(dir / "zero.csv", DiscreteField(mesh));
    EXPECT_EQ(run({"picone", "-c", cfg.string(), "-o", o.string(), "--u1", (o / "u1.csv").string(), "--u",
                   (dir / "zero.csv").string()}),
              1);
}

TEST_F(Cli, CheckF) {
    const auto cfg = write_config("r.cfg", kRobin);
    EXPECT_EQ(run({"check-f", "-c", cfg.string(), "-o", (dir / "a").string()}), 0) << err.str();
    EXPECT_NE(out.str().find("H(f)(iii) PASS"), std::string::npos);
    const auto zero = write_config("z.cfg", "mesh.n = 16\nproblem.beta = 1\nreaction.name = zero\n");
    EXPECT_EQ(run({"check-f", "-c", zero.string(), "-o", (dir / "b").string()}), 1);
    EXPECT_NE(out.str().find("H(f)(iii) FAIL"), std::string::npos);
    EXPECT_NE(out.str().find("witness"), std::string::npos);
}

TEST_F(Cli, UsageErrors) {
    EXPECT_EQ(run({"frobnicate"}), 2);
    EXPECT_NE(err.str().find("Usage"), std::string::npos);
    EXPECT_EQ(run({}), 2);
    EXPECT_EQ(run({"eigen"}), 2);
    EXPECT_EQ(run({"eigen", "--config", (dir / "missing.cfg").string()}), 2);
    const auto bad = write_config("bad.cfg", "problem.p = 1\n");
    EXPECT_EQ(run({"eigen", "--config", bad.string(), "-o", (dir / "o").string()}), 2);
    EXPECT_NE(err.str().find("p must exceed 1"), std::string::npos);
    EXPECT_EQ(run({"--help"}), 0);
}

TEST_F(Cli, OutputDirectoryPrecedence) {
    const auto cfg = write_config("n.cfg", "mesh.n = 8\noutput.directory = from_config\n");
    ::setenv("ROBINP_OUTPUT_DIR", (dir / "from_env").c_str(), 1);
    EXPECT_EQ(run({"eigen", "-c", cfg.string()}), 0);
    EXPECT_TRUE(fs::exists(dir / "from_env" / "u1.csv"));
    EXPECT_EQ(run({"eigen", "-c", cfg.string(), "-o", (dir / "from_flag").string()}), 0);
    EXPECT_TRUE(fs::exists(dir / "from_flag" / "u1.csv"));
    ::unsetenv("ROBINP_OUTPUT_DIR");
    EXPECT_EQ(run({"eigen", "-c", cfg.string()}), 0);
    EXPECT_TRUE(fs::exists(dir / "from_config" / "u1.csv"));
}

TEST_F(Cli, DeterministicTrace) {
    const auto cfg = write_config("r.cfg", std::string(kRobin) + "schedule.steps = 5\n");
    ASSERT_EQ(run({"continue", "-c", cfg.string(), "-o", (dir / "a").string()}), 0);
    ASSERT_EQ(run({"continue", "-c", cfg.string(), "-o", (dir / "b").string()}), 0);
    const auto slurp = [](const fs::path& p) {
        std::ifstream in(p);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    EXPECT_EQ(slurp(dir / "a" / "trace.csv"), slurp(dir / "b" / "trace.csv"));
    EXPECT_EQ(slurp(dir / "a" / "u_final.csv"), slurp(dir / "b" / "u_final.csv"));
}
