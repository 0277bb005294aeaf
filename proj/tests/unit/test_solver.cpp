#include "oracles.hpp"
#include "robinp/errors.hpp"
#include "robinp/solver.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace robinp;

namespace {

AuxiliaryProblem aux_for(const MeshPtr& m, double p, double beta, ReactionSpec f, double eps) {
    return {make_problem(m, p, beta), std::move(f), eps, DiscreteField::constant(m, 1.0)};
}

double max_nodal_error(const DiscreteField& u, double scale) {
    double err = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        err = std::max(err, std::abs(u[i] - scale * oracle::aux_closed_form(u.mesh().node(i)[0])));
    }
    return err;
}

}  // namespace

TEST(SolveAuxiliary, ClosedForm) {
    for (std::size_t n : {16, 64, 256}) {
        const auto m = build_interval_mesh(0.0, 1.0, n);
        const auto sol = solve_auxiliary(aux_for(m, 2.0, 1.0, zero_reaction(), 1.0), DiscreteField::constant(m, 1.0));
        const double h = 1.0 / static_cast<double>(n);
        EXPECT_LE(max_nodal_error(sol.u, 1.0), h * h);
        EXPECT_LE(sol.residual_norm, 1e-10);
        EXPECT_TRUE(sol.interior_positive);
    }
}

TEST(SolveAuxiliary, LinearInEpsilon) {
    const auto m = build_interval_mesh(0.0, 1.0, 64);
    const auto sol = solve_auxiliary(aux_for(m, 2.0, 1.0, zero_reaction(), 0.5), DiscreteField::constant(m, 1.0));
    EXPECT_LE(max_nodal_error(sol.u, 0.5), 1e-4);
}

// Non-constant forcing: the lumped discrete solution is no longer nodally exact,
// so the O(h^2) rate is actually exercised.
TEST(SolveAuxiliary, ManufacturedRateWithVaryingForcing) {
    const double pi = 3.14159265358979323846;
    std::vector<double> errors;
    for (std::size_t n : {32, 64, 128, 256}) {
        const auto m = build_interval_mesh(0.0, 1.0, n);
        auto aux = aux_for(m, 2.0, 1.0, zero_reaction(), 1.0);
        aux.e = DiscreteField::interpolate(m, [&](const Point& z) { return pi * pi * std::cos(pi * z[0]) + 10.0; });
        const auto exact = [&](double x) {
            // u = cos(pi x) - 5x^2 + a x + b; -u'(0) + u(0) = -a + 1 + b = 0,
            // u'(1) + u(1) = (-10 + a) + (-6 + a + b) = 0.
            const double a = 17.0 / 3.0, b = a - 1.0;
            return std::cos(pi * x) - 5.0 * x * x + a * x + b;
        };
        const auto sol = solve_auxiliary(aux, DiscreteField::constant(m, 1.0));
        double err = 0;
        for (std::size_t i = 0; i < sol.u.size(); ++i) err = std::max(err, std::abs(sol.u[i] - exact(m->node(i)[0])));
        errors.push_back(err);
    }
    for (double r : oracle::observed_rates(errors)) EXPECT_NEAR(r, 2.0, 0.15);
}

TEST(SolveAuxiliary, ExampleReactionIsPositive) {
    const auto m = build_interval_mesh(0.0, 1.0, 128);
    const auto aux = aux_for(m, 2.0, 1.0, example_reaction({}), 1.0);
    const auto sol = solve_auxiliary(aux, DiscreteField::constant(m, 1.0));
    EXPECT_GT(sol.min_value, 0.0);
    EXPECT_EQ(sol.negative_part_norm, 0.0);
    EXPECT_TRUE(sol.interior_positive);
    // Independent substitution with the unfrozen gradient.
    const auto r = v_residual(aux, sol.u, element_gradients(sol.u));
    for (double v : r) EXPECT_LE(std::abs(v), 10 * 1e-10);
    const auto diag = check_solution(aux.problem, aux.reaction, sol.u, 1.0);
    EXPECT_LE(diag.residual(), 1e-9);
}

TEST(SolveAuxiliary, ExampleReactionAcrossExponents) {
    for (double p : {1.5, 3.0}) {
        ExampleReactionParams prm;
        prm.p = p;
        prm.q = 1.0 + 0.5 * (p - 1.0);
        prm.r = p + 1.0;
        prm.eta = 4.0;
        prm.theta = 0.5;
        const auto m = build_interval_mesh(0.0, 1.0, 64);
        const auto sol = solve_auxiliary(aux_for(m, p, 1.0, example_reaction(prm), 1.0), DiscreteField::constant(m, 1.0));
        EXPECT_GT(sol.min_value, 0.0) << p;
        EXPECT_LE(sol.residual_norm, 1e-10) << p;
    }
}

TEST(SolveAuxiliary, RectangleExample) {
    const auto m = build_rectangle_mesh(1.0, 1.0, 10, 10);
    const auto sol = solve_auxiliary(aux_for(m, 2.0, 1.0, example_reaction({}), 0.5), DiscreteField::constant(m, 1.0));
    EXPECT_GT(sol.min_value, 0.0);
}

TEST(SolveAuxiliary, LinearReactionNeedsOnePicardIteration) {
    const auto m = build_interval_mesh(0.0, 1.0, 64);
    const auto sol = solve_auxiliary(aux_for(m, 2.0, 1.0, linear_reaction(0.5, 2.0), 1.0), DiscreteField::constant(m, 1.0));
    EXPECT_EQ(sol.picard_iters, 1);
}

TEST(SolveAuxiliary, ResolveFromSolutionTakesNoNewtonSteps) {
    const auto m = build_interval_mesh(0.0, 1.0, 64);
    const auto aux = aux_for(m, 2.0, 1.0, example_reaction({}), 0.25);
    const auto sol = solve_auxiliary(aux, DiscreteField::constant(m, 1.0));
    const auto again = solve_auxiliary(aux, sol.u);
    EXPECT_EQ(again.newton_iters_total, 0);
    EXPECT_EQ(again.u.values()[3], sol.u.values()[3]);
}

TEST(SolveAuxiliary, RejectsZeroEpsilonButLimitAcceptsIt) {
    const auto m = build_interval_mesh(0.0, 1.0, 16);
    const auto aux = aux_for(m, 2.0, 1.0, zero_reaction(), 0.0);
    EXPECT_THROW((void)solve_auxiliary(aux, DiscreteField::constant(m, 1.0)), InvalidArgument);
    const auto sol = solve_limit(aux, DiscreteField::constant(m, 1.0));
    EXPECT_LE(sol.u.max_abs(), 1e-10);
}

TEST(SolveAuxiliary, FailureCarriesLastIterate) {
    const auto m = build_interval_mesh(0.0, 1.0, 16);
    SolverOptions opts;
    opts.picard_max_iter = 1;
    opts.newton_max_iter = 1;
    opts.ptc_max_iter = 1;
    const auto aux = aux_for(m, 3.0, 1.0, example_reaction({.eta = 4.0, .theta = 1.0, .q = 2.0, .tau = 1.001, .r = 4.0, .p = 3.0}), 1.0);
    try {
        (void)solve_auxiliary(aux, DiscreteField::constant(m, 1.0), opts);
        FAIL();
    } catch (const SolverError& e) {
        EXPECT_EQ(e.last_iterate().size(), m->num_nodes());
        EXPECT_STRNE(to_string(e.kind()), "unknown");
    }
}

TEST(SolverOptions, Validation) {
    SolverOptions o;
    o.relaxation = 0.0;
    EXPECT_THROW(o.validate(), InvalidArgument);
    o = {};
    o.newton_tol = -1;
    EXPECT_THROW(o.validate(), InvalidArgument);
    o = {};
    o.armijo_factor = 1.0;
    EXPECT_THROW(o.validate(), InvalidArgument);
}

TEST(CheckSolution, Examples) {
    const auto m = build_interval_mesh(0.0, 1.0, 32);
    const auto spec = make_problem(m, 2.0, 1.0);
    const auto zero = DiscreteField(m);
    EXPECT_EQ(check_solution(spec, zero_reaction(), zero, 0.0).residual(), 0.0);
    const auto d = check_solution(spec, zero_reaction(), zero, 1.0);
    EXPECT_NEAR(d.interior_residual, 1.0 / 32.0, 1e-15);
    EXPECT_NEAR(d.boundary_residual, 0.5 / 32.0, 1e-15);

    const auto exact = DiscreteField::interpolate(m, [](const Point& z) { return oracle::aux_closed_form(z[0]); });
    EXPECT_LE(check_solution(spec, zero_reaction(), exact, 1.0).interior_residual, 1.0 / (32.0 * 32.0));
}

TEST(EpsilonSchedule, Geometric) {
    const auto s = EpsilonSchedule::geometric();
    ASSERT_EQ(s.values.size(), 21u);
    EXPECT_EQ(s.values.front(), 1.0);
    EXPECT_EQ(s.values.back(), std::ldexp(1.0, -20));
    EXPECT_THROW((void)EpsilonSchedule::geometric(1.0, 1.5, 3), InvalidArgument);
    EXPECT_THROW((EpsilonSchedule{{0.5, 0.5}}.validate()), InvalidArgument);
    EXPECT_THROW((EpsilonSchedule{{2.0}}.validate()), InvalidArgument);
}

TEST(Continuation, SingleStepMatchesSolveAuxiliary) {
    const auto m = build_interval_mesh(0.0, 1.0, 64);
    const auto spec = make_problem(m, 2.0, 1.0);
    const auto e = DiscreteField::constant(m, 1.0);
    ContinuationOptions opts;
    opts.polish = true;
    const auto trace = continuation_run(spec, example_reaction({}), e, EpsilonSchedule{{1.0}}, opts);
    ASSERT_EQ(trace.records.size(), 2u);
    EXPECT_EQ(trace.status, ContinuationStatus::Completed);
    const auto direct = solve_auxiliary({spec, example_reaction({}), 1.0, e}, DiscreteField::constant(m, 1.0));
    EXPECT_EQ(trace.records[0].max_u, direct.max_value);
    EXPECT_EQ(trace.records[1].epsilon, 0.0);
}

TEST(Continuation, ExampleTraceIsHealthy) {
    const auto m = build_interval_mesh(0.0, 1.0, 128);
    const auto spec = make_problem(m, 2.0, 1.0);
    std::vector<double> seen;
    ContinuationOptions opts;
    opts.on_record = [&](const ContinuationRecord& r) { seen.push_back(r.epsilon); };
    const auto trace = continuation_run(spec, example_reaction({}), DiscreteField::constant(m, 1.0),
                                        EpsilonSchedule::geometric(1.0, 0.5, 12), opts);
    ASSERT_EQ(trace.status, ContinuationStatus::Completed) << trace.message;
    ASSERT_EQ(trace.records.size(), 13u);
    EXPECT_EQ(seen.size(), 13u);
    double bound = 0;
    for (std::size_t k = 0; k < trace.records.size(); ++k) {
        const auto& r = trace.records[k];
        if (k > 0) EXPECT_LT(r.epsilon, trace.records[k - 1].epsilon);
        EXPECT_GT(r.min_u, 0.0);
        EXPECT_EQ(r.collapse_flag, CollapseVerdict::Healthy);
        EXPECT_GT(r.xi_star, 0.0);
        EXPECT_GE(r.picone_integral, -1e-12);
        bound = std::max(bound, r.c1_proxy());
    }
    EXPECT_EQ(trace.c1_bound, bound);
    EXPECT_LE(trace.original_residual, 1e-8);
    ASSERT_TRUE(trace.final.has_value());
}

TEST(Continuation, ZeroReactionCollapses) {
    const auto m = build_interval_mesh(0.0, 1.0, 64);
    const auto spec = make_problem(m, 2.0, 1.0);
    const auto trace = continuation_run(spec, zero_reaction(), DiscreteField::constant(m, 1.0), EpsilonSchedule::geometric());
    EXPECT_EQ(trace.status, ContinuationStatus::CollapseDetected);
    EXPECT_LT(trace.records.size(), 21u);
    EXPECT_LT(trace.records.back().xi_star, 0.0);
    EXPECT_EQ(trace.records.back().collapse_flag, CollapseVerdict::CollapseSuspected);
}

TEST(Continuation, SolverFailureIsReported) {
    const auto m = build_interval_mesh(0.0, 1.0, 16);
    ContinuationOptions opts;
    opts.solver.picard_max_iter = 1;
    opts.solver.newton_max_iter = 1;
    opts.solver.ptc_max_iter = 1;
    ExampleReactionParams prm{.eta = 4.0, .theta = 1.0, .q = 2.0, .tau = 1.001, .r = 4.0, .p = 3.0};
    const auto trace = continuation_run(make_problem(m, 3.0, 1.0), example_reaction(prm),
                                        DiscreteField::constant(m, 1.0), EpsilonSchedule::geometric(), opts);
    EXPECT_EQ(trace.status, ContinuationStatus::SolverFailed);
    EXPECT_FALSE(trace.message.empty());
    EXPECT_STREQ(to_string(trace.status), "solver-failed");
}
