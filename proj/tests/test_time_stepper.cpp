#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <gtest/gtest.h>

#include "ihdg/errors.hpp"
#include "ihdg/study.hpp"
#include "ihdg/time_stepper.hpp"
#include "test_support.hpp"

using namespace ihdg;

namespace {

const double pi = std::numbers::pi;

double l2_norm_u(const FieldState& s)
{
    // orthonormal modal coefficients
    return s.u.norm();
}

TimeConfig time_config(double T, const std::string& dt)
{
    TimeConfig c;
    c.final_time = T;
    c.dt = DtPolicy::parse(dt);
    return c;
}

} // namespace

TEST(Nonlinearity, DerivativeMatchesCentralDifferences)
{
    const Nonlinearity F = Nonlinearity::chaffee_infante();
    const double eps = 1e-6;
    for (double u = -2.0; u <= 2.0; u += 0.05) {
        const double fd = (F.value(u + eps) - F.value(u - eps)) / (2 * eps);
        EXPECT_NEAR(F.derivative(u), fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
    EXPECT_DOUBLE_EQ(F.value(2.0), 6.0);
    EXPECT_TRUE(Nonlinearity::zero().is_zero());
    EXPECT_EQ(Nonlinearity::from_name("chaffee_infante").name, F.name);
    EXPECT_THROW((void)Nonlinearity::from_name("cubic"), InvalidArgument);
}

TEST(DtPolicy, ParseAndResolve)
{
    EXPECT_DOUBLE_EQ(DtPolicy::parse("h").resolve(0.25), 0.25);
    EXPECT_DOUBLE_EQ(DtPolicy::parse("h2").resolve(0.25), 0.0625);
    EXPECT_DOUBLE_EQ(DtPolicy::parse("fixed:0.01").resolve(0.25), 0.01);
    EXPECT_EQ(DtPolicy::parse("fixed:0.5").str(), "fixed:0.5");
    EXPECT_THROW((void)DtPolicy::parse("fixed:-1"), InvalidArgument);
    EXPECT_THROW((void)DtPolicy::parse("fixed:abc"), InvalidArgument);
    EXPECT_THROW((void)DtPolicy::parse("h3"), InvalidArgument);
    EXPECT_EQ(parse_initial_condition("elliptic"), InitialCondition::elliptic_projection);
    EXPECT_THROW((void)parse_initial_condition("nodal"), InvalidArgument);
}

TEST(InitialState, ZeroAndPolynomialData)
{
    const HdgDiscretization d(build_uniform_square(4), DegreeConfig(Variant::B, 1));
    const FieldState z = initial_state(d, [](const Point2&) { return 0.0; }, InitialCondition::l2_projection);
    EXPECT_EQ(state_scale(z), 0.0);

    // the Chaffee-Infante solution vanishes at t = 0
    const ManufacturedProblem ci = ManufacturedProblem::chaffee_infante();
    const FieldState c = initial_state(d, [&](const Point2& x) { return ci.u(x, 0.0); },
                                       InitialCondition::l2_projection);
    EXPECT_EQ(state_scale(c), 0.0);

    auto p = [](const Point2& x) { return 1.0 + x.x() - 2.0 * x.y(); };
    const FieldState s = initial_state(d, p, InitialCondition::l2_projection);
    for (int e = 0; e < d.num_elements(); ++e)
        for (const Point2& x : {Point2(0.1, 0.1), Point2(0.5, 0.5)}) {
            const Point2 y = d.projector(e).geometry().map(x);
            EXPECT_NEAR(d.projector(e).evaluate(s.u.segment(e * d.scalar_dim(), d.scalar_dim()), y), p(y), 1e-12);
        }

    EXPECT_THROW((void)initial_state(d, p, InitialCondition::elliptic_projection), ConfigError);
}

TEST(Stepper, ZeroDataStaysZero)
{
    const HdgDiscretization d(build_uniform_square(4), DegreeConfig(Variant::A, 1));
    CrankNicolsonStepper stepper(d, Nonlinearity::chaffee_infante(), 0.1);
    FieldState s = d.zero_state();
    for (int n = 0; n < 5; ++n) {
        const StepReport r = stepper.step(s, [](const Point2&, double) { return 0.0; });
        EXPECT_EQ(state_scale(s), 0.0);
        EXPECT_LE(r.iterations, 2);
    }
    EXPECT_NEAR(s.t, 0.5, 1e-15);
    EXPECT_EQ(stepper.factorizations(), 1);
}

TEST(Stepper, ExactForLinearInTimeSolutions)
{
    // u = (1 + t) xy(1 - x - y) on the reference triangle; u(t) lies in P^{k+1} for k >= 2
    auto bubble = [](const Point2& x) { return x.x() * x.y() * (1 - x.x() - x.y()); };
    EvolutionProblem prob;
    prob.initial_value = bubble;
    prob.source = [&](const Point2& x, double t) { return bubble(x) + (1 + t) * 2 * (x.x() + x.y()); };
    for (Variant v : {Variant::A, Variant::B, Variant::C}) {
        const HdgDiscretization d(support::triangle_domain(2), DegreeConfig(v, 2));
        TimeConfig tc = time_config(0.3, "fixed:0.1");
        const Trajectory tr = integrate(d, tc, prob);
        const FieldState& s = tr.final_state();
        ASSERT_NEAR(s.t, 0.3, 1e-15);
        for (int e = 0; e < d.num_elements(); ++e) {
            const Eigen::VectorXd exact = d.projector(e).project_element(
                [&](const Point2& x) { return 1.3 * bubble(x); }, d.config().scalar_degree());
            EXPECT_LT((s.u.segment(e * d.scalar_dim(), d.scalar_dim()) - exact).cwiseAbs().maxCoeff(), 1e-10)
                << d.config().name();
        }
    }
}

TEST(Stepper, DiffusionIsDissipative)
{
    const HdgDiscretization d(build_uniform_square(4), DegreeConfig(Variant::B, 1));
    auto u0 = [](const Point2& x) { return std::sin(pi * x.x()) * std::sin(2 * pi * x.y()) + x.x() * (1 - x.x()); };
    // -lap of the second term is 2; of the first, 5 pi^2 times itself
    auto mlap = [](const Point2& x) { return 5 * pi * pi * std::sin(pi * x.x()) * std::sin(2 * pi * x.y()) + 2.0; };
    FieldState s = initial_state(d, u0, InitialCondition::elliptic_projection, mlap);
    CrankNicolsonStepper stepper(d, Nonlinearity::zero(), 0.05);
    double prev = l2_norm_u(s);
    for (int n = 0; n < 20; ++n) {
        stepper.step(s, [](const Point2&, double) { return 0.0; });
        const double now = l2_norm_u(s);
        EXPECT_LE(now, prev * (1 + 1e-14)) << "step " << n;
        prev = now;
    }
    EXPECT_LT(prev, 0.5 * l2_norm_u(initial_state(d, u0, InitialCondition::elliptic_projection, mlap)));
}

TEST(Stepper, PostprocessedFieldStaysConsistent)
{
    const HdgDiscretization d(build_uniform_square(4), DegreeConfig(Variant::C, 2));
    const ManufacturedProblem p = ManufacturedProblem::chaffee_infante();
    CrankNicolsonStepper stepper(d, p.nonlinearity, 0.1);
    FieldState s = d.zero_state();
    for (int n = 0; n < 4; ++n) {
        const StepReport r = stepper.step(s, p.evolution().source);
        FieldState regen = s;
        d.update_postprocessed(regen);
        EXPECT_LT((regen.ustar - s.ustar).cwiseAbs().maxCoeff(), 1e-13);
        EXPECT_LT(r.flux_residual, 1e-9 * std::max(r.scale, 1e-300));
    }
}

TEST(Integrate, FinalTimeZeroReturnsInitialState)
{
    const HdgDiscretization d(build_uniform_square(2), DegreeConfig(Variant::A, 0));
    const ManufacturedProblem p = ManufacturedProblem::chaffee_infante();
    const Trajectory tr = integrate(d, time_config(0.0, "h"), p.evolution());
    EXPECT_EQ(tr.num_steps, 0);
    ASSERT_EQ(tr.snapshots.size(), 1u);
    EXPECT_EQ(tr.final_state().t, 0.0);
}

TEST(Integrate, ChaffeeInfanteLowestOrderErrorMagnitude)
{
    const HdgDiscretization d(build_uniform_square(8), DegreeConfig(Variant::A, 0));
    const ManufacturedProblem p = ManufacturedProblem::chaffee_infante();
    const Trajectory tr = integrate(d, time_config(1.0, "h"), p.evolution());
    EXPECT_EQ(tr.factorizations, 1);
    EXPECT_LE(tr.max_flux_residual_ratio, 1e-9);
    const ErrorNorms e = error_norms(d, tr.final_state(), p);
    const double reference = 2.47e-2; // reference error at n = 8
    EXPECT_LT(e.u, 3 * reference);
    EXPECT_GT(e.u, reference / 3);
    int worst = 0;
    for (const StepReport& r : tr.steps)
        worst = std::max(worst, r.iterations);
    EXPECT_LE(worst, 15);
}

TEST(Integrate, PicardIterationCountsOnHighOrderSetup)
{
    const HdgDiscretization d(build_uniform_square(8), DegreeConfig(Variant::C, 2));
    const ManufacturedProblem p = ManufacturedProblem::chaffee_infante();
    const Trajectory tr = integrate(d, time_config(1.0, "h2"), p.evolution());
    EXPECT_EQ(tr.num_steps, 32);
    EXPECT_EQ(tr.factorizations, 1);
    for (const StepReport& r : tr.steps)
        EXPECT_LE(r.iterations, 15);
}

TEST(Integrate, NewtonAgreesWithPicard)
{
    const HdgDiscretization d(build_uniform_square(4), DegreeConfig(Variant::A, 1));
    const ManufacturedProblem p = ManufacturedProblem::chaffee_infante();
    TimeConfig tc = time_config(1.0, "h");
    const Trajectory picard = integrate(d, tc, p.evolution());
    tc.newton = true;
    const Trajectory newton = integrate(d, tc, p.evolution());
    EXPECT_LT(support::max_abs_diff(picard.final_state(), newton.final_state()), 1e-9);
    EXPECT_GT(newton.factorizations, 1);
    EXPECT_LE(newton.picard_total, picard.picard_total);
}

TEST(Integrate, TemporalOrderIsTwo)
{
    const ManufacturedProblem p = ManufacturedProblem::custom(1.0, 0.3, 1, 1, Nonlinearity::zero());
    const HdgDiscretization d(build_uniform_square(8), DegreeConfig(Variant::B, 1));
    // consistent (elliptic) initial data: the L2 initial state violates the
    // algebraic equations and leaves a slowly damped transient in CN
    std::vector<Eigen::VectorXd> u;
    for (const char* dt : {"fixed:0.1", "fixed:0.05", "fixed:0.025"}) {
        TimeConfig tc = time_config(1.0, dt);
        tc.initial_condition = InitialCondition::elliptic_projection;
        u.push_back(integrate(d, tc, p.evolution()).final_state().u);
    }
    const double order = std::log2((u[0] - u[1]).norm() / (u[1] - u[2]).norm());
    EXPECT_NEAR(order, 2.0, 0.1);
}

TEST(Integrate, StepCountRounding)
{
    const HdgDiscretization d(build_uniform_square(2), DegreeConfig(Variant::A, 0));
    const ManufacturedProblem p = ManufacturedProblem::linear_poly();
    const Trajectory tr = integrate(d, time_config(1.0, "fixed:0.3"), p.evolution());
    EXPECT_EQ(tr.num_steps, 3);
    EXPECT_DOUBLE_EQ(tr.final_state().t, 1.0);
    const Trajectory small = integrate(d, time_config(0.01, "fixed:0.3"), p.evolution());
    EXPECT_EQ(small.num_steps, 1);
    EXPECT_DOUBLE_EQ(small.final_state().t, 0.01);
}

TEST(Integrate, ErrorPaths)
{
    const HdgDiscretization d(build_uniform_square(4), DegreeConfig(Variant::A, 0));
    const ManufacturedProblem p = ManufacturedProblem::chaffee_infante();
    TimeConfig tc = time_config(1.0, "h");
    tc.max_iterations = 1;
    try {
        (void)integrate(d, tc, p.evolution());
        FAIL() << "expected ConvergenceError";
    } catch (const ConvergenceError& e) {
        EXPECT_GT(e.last_increment(), 0.0);
    }

    EvolutionProblem bad = p.evolution();
    bad.nonlinearity.value = [](double) { return std::numeric_limits<double>::quiet_NaN(); };
    bad.nonlinearity.name = "nan";
    EXPECT_THROW((void)integrate(d, time_config(1.0, "h"), bad), EvaluationError);

    EXPECT_THROW(CrankNicolsonStepper(d, Nonlinearity::zero(), 0.0), InvalidArgument);
    EXPECT_THROW(CrankNicolsonStepper(d, Nonlinearity::zero(), 0.1, 1e-10, 0), InvalidArgument);
}
