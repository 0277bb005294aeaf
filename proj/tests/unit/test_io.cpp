#include "robinp/errors.hpp"
#include "robinp/io.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace robinp;

namespace {

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "robinp_io_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST(ParseConfig, MinimalConfigFillsDefaults) {
    const auto c = parse_config("mesh.kind = interval\nmesh.n = 64\nproblem.p = 2\nreaction.name = zero\n");
    EXPECT_EQ(c.mesh.kind, "interval");
    EXPECT_EQ(c.mesh.n, 64u);
    EXPECT_EQ(c.problem.p, 2.0);
    EXPECT_EQ(c.reaction.name, "zero");
    EXPECT_EQ(c.solver.newton_tol, 1e-10);
    EXPECT_EQ(c.solver.relaxation, 0.7);
    EXPECT_EQ(c.schedule.steps, 21);
    EXPECT_EQ(c.schedule.ratio, 0.5);
    EXPECT_TRUE(c.schedule.polish);
    EXPECT_EQ(c.problem.e, 1.0);
}

TEST(ParseConfig, CommentsAndWhitespace) {
    const auto c = parse_config("# header\n\n  mesh.kind=rectangle   # trailing\nmesh.nx = 3\r\nmesh.ny=4\n");
    EXPECT_EQ(c.mesh.kind, "rectangle");
    EXPECT_EQ(c.mesh.nx, 3u);
    EXPECT_EQ(c.mesh.ny, 4u);
}

TEST(ParseConfig, ValidationErrors) {
    try {
        (void)parse_config("problem.p = 1\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.kind(), ConfigError::Kind::Validation);
        EXPECT_EQ(e.field(), "problem.p");
        EXPECT_NE(std::string(e.what()).find("p must exceed 1"), std::string::npos);
    }
    try {
        (void)parse_config("schedule.ratio = 1.5\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.kind(), ConfigError::Kind::Validation);
        EXPECT_EQ(e.field(), "schedule.ratio");
    }
    EXPECT_THROW((void)parse_config("mesh.kind = sphere\n"), ConfigError);
    EXPECT_THROW((void)parse_config("problem.beta_file = /nonexistent/beta.csv\n"), ConfigError);
    EXPECT_THROW((void)parse_config("reaction.name = example\nreaction.q = 3\n"), ConfigError);
}

TEST(ParseConfig, ParseErrorsCarryLineNumbers) {
    const auto expect_line = [](const std::string& text, std::size_t line) {
        try {
            (void)parse_config(text);
            FAIL() << text;
        } catch (const ConfigError& e) {
            EXPECT_EQ(e.kind(), ConfigError::Kind::Parse);
            EXPECT_EQ(e.line(), line);
        }
    };
    expect_line("mesh.n = 4\nsolver.newton_tolerance = 1e-9\n", 2);
    expect_line("\n\nmesh.n four\n", 3);
    expect_line("mesh.n = 4.5\n", 1);
    expect_line("mesh.n = 4\nmesh.n = 5\n", 2);
    expect_line("schedule.polish = maybe\n", 1);
}

TEST(ParseConfig, BuildsObjects) {
    const auto c = parse_config(
        "mesh.kind = rectangle\nmesh.lx = 2\nmesh.nx = 4\nmesh.ny = 2\nproblem.p = 3\nproblem.beta = 0.5\n"
        "reaction.name = example\nreaction.r = 4\nreaction.q = 2\nschedule.steps = 3\nschedule.ratio = 0.25\n");
    const auto mesh = c.build_mesh();
    EXPECT_EQ(mesh->num_nodes(), 15u);
    const auto spec = c.build_problem(mesh);
    EXPECT_EQ(spec.p, 3.0);
    EXPECT_EQ(spec.beta[0], 0.5);
    const auto f = c.build_reaction();
    EXPECT_NEAR(evaluate(f, {0, 0}, 0.5, {0, 0}), 3.0 * 0.25, 1e-15);
    EXPECT_EQ(c.build_schedule().values, (std::vector<double>{1.0, 0.25, 0.0625}));
    EXPECT_EQ(c.build_e(mesh).min(), 1.0);
}

TEST(ParseConfig, PerNodeFilesResolveRelativeToConfig) {
    const auto dir = scratch("cfgdir");
    std::filesystem::create_directories(dir);
    const auto mesh = build_interval_mesh(0.0, 1.0, 3);
    write_field_csv(dir / "beta.csv", DiscreteField(mesh, {2.0, 0.0, 0.0, 3.0}));
    {
        std::ofstream os(dir / "run.cfg");
        os << "mesh.n = 3\nproblem.beta_file = beta.csv\n";
    }
    const auto c = load_config(dir / "run.cfg");
    const auto spec = c.build_problem(c.build_mesh());
    EXPECT_EQ(spec.beta.front(), 2.0);
    EXPECT_EQ(spec.beta.back(), 3.0);
}

TEST(FieldCsv, RoundTripIsBitwise) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> d(-1e3, 1e3);
    for (const auto& mesh : {build_interval_mesh(0.0, 1.0, 17), build_rectangle_mesh(1.0, 2.0, 3, 5)}) {
        std::vector<double> v(mesh->num_nodes());
        for (double& x : v) x = d(rng) * std::pow(10.0, static_cast<int>(d(rng)) % 40);
        v[0] = 0.1;
        v[1] = -0.0;
        const DiscreteField f(mesh, v);
        std::stringstream ss;
        write_field_csv(ss, f);
        const auto back = read_field_csv(ss, mesh);
        ASSERT_EQ(back.size(), v.size());
        EXPECT_EQ(std::memcmp(back.values().data(), v.data(), v.size() * sizeof(double)), 0);
    }
}

TEST(FieldCsv, HeaderMatchesDimension) {
    std::stringstream s1, s2;
    write_field_csv(s1, DiscreteField::constant(build_interval_mesh(0.0, 1.0, 1), 1.0));
    write_field_csv(s2, DiscreteField::constant(build_rectangle_mesh(1.0, 1.0, 1, 1), 1.0));
    EXPECT_EQ(s1.str().substr(0, 12), "node_id,x,u\n");
    EXPECT_EQ(s2.str().substr(0, 14), "node_id,x,y,u\n");
}

TEST(FieldCsv, Errors) {
    const auto mesh = build_interval_mesh(0.0, 1.0, 4);
    std::stringstream empty;
    EXPECT_THROW((void)read_field_csv(empty, mesh), IoError);
    std::stringstream short_file("node_id,x,u\n0,0,1\n1,0.25,1\n");
    try {
        (void)read_field_csv(short_file, mesh);
        FAIL();
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("mismatch"), std::string::npos);
    }
    std::stringstream bad_number("node_id,x,u\n0,0,abc\n");
    EXPECT_THROW((void)read_field_csv(bad_number, mesh), IoError);
    try {
        (void)read_field_csv(std::filesystem::path("/nonexistent/u.csv"), mesh);
        FAIL();
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("/nonexistent/u.csv"), std::string::npos);
    }
}

TEST(TraceCsv, Format) {
    ContinuationTrace trace;
    ContinuationRecord r;
    r.step = 0;
    r.epsilon = 1.0;
    r.residual = 1e-11;
    r.min_u = 0.5;
    r.max_u = 2.0;
    r.max_grad = 3.0;
    r.picone_integral = 0.125;
    trace.records.push_back(r);
    std::stringstream ss;
    write_trace_csv(ss, trace);
    EXPECT_EQ(ss.str(),
              "step,epsilon,residual,min_u,max_u,max_grad,picone_integral,collapse_flag\n"
              "0,1,9.9999999999999994e-12,0.5,2,3,0.125,HEALTHY\n");
}

TEST(RunLog, OneParseableRecordPerLine) {
    RunLog::Fields f;
    f.phase = "continue";
    f.epsilon = 0.5;
    f.residual = 1e-11;
    f.message = "two\nlines \"quoted\"";
    const auto line = RunLog::format(f, "2024-01-01T00:00:00Z");
    EXPECT_EQ(line.find('\n'), std::string::npos);
    EXPECT_EQ(line.rfind("timestamp=2024-01-01T00:00:00Z phase=continue epsilon=0.5", 0), 0u);
    EXPECT_EQ(line.find("min_u"), std::string::npos);

    const auto path = scratch("run.log");
    std::filesystem::remove(path);
    {
        RunLog log(path);
        log.record(f);
        f.phase = "done";
        log.record(f);
    }
    std::ifstream in(path);
    std::string a, b, extra;
    ASSERT_TRUE(std::getline(in, a));
    ASSERT_TRUE(std::getline(in, b));
    EXPECT_FALSE(std::getline(in, extra));
    EXPECT_NE(b.find("phase=done"), std::string::npos);
}

TEST(FormatDouble, RoundTrips) {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17}) EXPECT_EQ(std::stod(format_double(v)), v);
    EXPECT_EQ(format_double(std::nan("")), "nan");
}
