// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "ihdg/study.hpp"
#include "test_support.hpp"

using namespace ihdg;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void report(int id, const char* name, const Outcome& o)
{
    std::printf("%s AC%02d %-34s %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
}

std::string fmt(const char* f, double a)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

bool within_factor(double got, double ref, double factor)
{
    return got <= factor * ref && got >= ref / factor;
}

// Shared bookkeeping for criteria 8 and 10.
struct Ledger {
    int integrate_calls = 0;
    int bad_factorization_counts = 0;
    int linear_solves = 0;
    double worst_flux_ratio = 0.0;

    void add_trajectory(int factorizations, double flux_ratio)
    {
        ++integrate_calls;
        bad_factorization_counts += factorizations == 1 ? 0 : 1;
        worst_flux_ratio = std::max(worst_flux_ratio, flux_ratio);
    }
    void add_solve(double residual, double scale)
    {
        ++linear_solves;
        worst_flux_ratio = std::max(worst_flux_ratio, residual / std::max(scale, 1e-300));
    }
} ledger;

SweepResult chaffee_sweep(Variant v, int k, const char* dt)
{
    SweepConfig c;
    c.degree = DegreeConfig(v, k);
    c.levels = {2, 4, 8, 16, 32};
    c.time.final_time = 1.0;
    c.time.dt = DtPolicy::parse(dt);
    c.problem = ManufacturedProblem::chaffee_infante();
    SweepResult r = run_sweep(c);
    for (const auto& lv : r.levels)
        if (lv.ok)
            ledger.add_trajectory(lv.factorizations, lv.max_flux_residual_ratio);
        else
            ledger.add_trajectory(-1, 0.0);
    return r;
}

bool rate_ok(const std::optional<double>& r, double target, double tol)
{
    return r && std::abs(*r - target) <= tol;
}

std::string level_summary(const LevelResult& lv)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, "e=(%.2e,%.2e,%.2e) rate=(%.2f,%.2f,%.2f)", lv.errors.q, lv.errors.u,
                  lv.errors.ustar, lv.rate_q.value_or(NAN), lv.rate_u.value_or(NAN), lv.rate_ustar.value_or(NAN));
    return buf;
}

std::vector<DegreeConfig> all_configs(int kmax)
{
    std::vector<DegreeConfig> out;
    for (Variant v : {Variant::A, Variant::B, Variant::C})
        for (int k = 0; k <= kmax; ++k)
            if (!(v == Variant::C && k == 0))
                out.emplace_back(v, k);
    return out;
}

Outcome chaffee_a_k0()
{
    const SweepResult r = chaffee_sweep(Variant::A, 0, "h");
    if (!r.all_ok())
        return {false, "sweep failed: " + r.levels.back().message};
    const auto& f = r.levels.back();
    const bool rates = rate_ok(f.rate_q, 0.98, 0.15) && rate_ok(f.rate_u, 2.00, 0.15)
                       && rate_ok(f.rate_ustar, 2.00, 0.15);
    const bool mags = within_factor(f.errors.q, 8.12e-2, 3) && within_factor(f.errors.u, 1.56e-3, 3)
                      && within_factor(f.errors.ustar, 1.56e-3, 3);
    return {rates && mags, level_summary(f)};
}

Outcome chaffee_a_k1()
{
    const SweepResult r = chaffee_sweep(Variant::A, 1, "h2");
    if (!r.all_ok())
        return {false, "sweep failed: " + r.levels.back().message};
    const auto& f = r.levels.back();
    const bool rates = rate_ok(f.rate_q, 2.00, 0.15) && rate_ok(f.rate_u, 3.00, 0.15)
                       && rate_ok(f.rate_ustar, 3.00, 0.15);
    const bool fast = f.walltime_s < 600.0;
    return {rates && fast, level_summary(f) + fmt(" n=32 wall=%.1fs", f.walltime_s)};
}

Outcome superconvergence_b_k0()
{
    const SweepResult r = chaffee_sweep(Variant::B, 0, "h");
    if (!r.all_ok())
        return {false, "sweep failed"};
    const auto& f = r.levels.back();
    return {rate_ok(f.rate_ustar, 2.00, 0.15) && rate_ok(f.rate_u, 1.00, 0.15), level_summary(f)};
}

Outcome dichotomy_c()
{
    const SweepResult r1 = chaffee_sweep(Variant::C, 1, "h");
    const SweepResult r2 = chaffee_sweep(Variant::C, 2, "h2");
    if (!r1.all_ok() || !r2.all_ok())
        return {false, "sweep failed"};
    const auto& f1 = r1.levels.back();
    const auto& f2 = r2.levels.back();
    const bool ok = rate_ok(f1.rate_ustar, 2.00, 0.15) && rate_ok(f2.rate_ustar, 4.00, 0.15)
                    && within_factor(f2.errors.ustar, 2.47e-7, 3);
    return {ok, "k=1 " + fmt("u* rate %.2f", f1.rate_ustar.value_or(NAN)) + "; k=2 "
                    + fmt("u* rate %.2f", f2.rate_ustar.value_or(NAN)) + fmt(" err %.2e", f2.errors.ustar)};
}

Outcome condensation_oracle()
{
    double worst = 0.0;
    int cases = 0;
    for (const DegreeConfig& cfg : all_configs(2))
        for (int n : {1, 2, 3, 4})
            for (double sigma : {0.0, 2.0}) {
                const HdgDiscretization d(build_uniform_square(n), cfg);
                // steady load plus random data in every block of the local system
                std::vector<Eigen::VectorXd> rhs = d.scalar_loads(
                    [](const Point2& x) { return std::exp(x.x()) * std::cos(2 * x.y()); });
                for (auto& b : rhs)
                    b += 0.1 * support::random_vector(b.size());
                const CondensedSystem sys(d, sigma);
                const FieldState a = sys.solve(rhs);
                const FieldState b = support::monolithic_solve(d, sigma, rhs);
                worst = std::max(worst, support::max_abs_diff(a, b) / state_scale(b));
                const auto res = system_residual(d, a, sigma, rhs);
                ledger.add_solve(res.trace, state_scale(a));
                ++cases;
            }
    return {worst <= 1e-10, std::to_string(cases) + fmt(" solves, max rel diff %.1e", worst)};
}

Outcome postprocessing_identities()
{
    const Mesh m = support::single_triangle();
    double worst_pp2 = 0.0, worst_repro = 0.0;
    for (const DegreeConfig& cfg : all_configs(3)) {
        const ReferenceElements ref(cfg);
        const ElementProjector P(m, 0, ref);
        for (int i = 0; i < 50; ++i) {
            const Eigen::VectorXd u = support::random_vector(P.scalar_dim());
            const Eigen::VectorXd uhat = support::random_vector(P.trace_dim());
            const Eigen::VectorXd w = P.postprocess(u, uhat);
            worst_pp2 = std::max(worst_pp2, (w.head(P.scalar_dim()) - u).cwiseAbs().maxCoeff());
            const support::RandomPolynomial p(cfg.k + 1);
            worst_repro = std::max(worst_repro,
                                   (P.pi_star(p) - P.project_element(p, cfg.k + 1)).cwiseAbs().maxCoeff());
        }
    }
    return {worst_pp2 <= 1e-11 && worst_repro <= 1e-11,
            fmt("pp2 %.1e", worst_pp2) + fmt(", reproduction %.1e", worst_repro)};
}

Outcome projection_contraction()
{
    const Mesh m = support::single_triangle();
    int violations = 0, total = 0;
    double tightest = 0.0;
    for (const DegreeConfig& cfg : all_configs(3)) {
        const ReferenceElements ref(cfg);
        const ElementProjector P(m, 0, ref);
        const ElementGeometry& g = P.geometry();
        const QuadratureRule q = tri_quadrature(2 * cfg.k + 4);
        for (int i = 0; i < 100; ++i) {
            const support::RandomPolynomial w(cfg.k + 1);
            const Eigen::VectorXd pw = P.project_element(w, cfg.scalar_degree());
            double nw = 0.0, npw = 0.0;
            for (std::size_t j = 0; j < q.size(); ++j) {
                const Point2 x = g.map(q.points[j]);
                const double wt = q.weights[j] * g.det;
                nw += wt * w(x) * w(x);
                npw += wt * std::pow(P.evaluate(pw, x), 2);
            }
            ++total;
            const double ratio = std::sqrt(npw / nw);
            violations += ratio <= 1.0 + 1e-12 ? 0 : 1;
            tightest = std::max(tightest, ratio);
        }
    }
    return {violations == 0, std::to_string(total) + " samples, max |Pi w|/|w| = " + fmt("%.6f", tightest)};
}

Outcome temporal_order()
{
    const ManufacturedProblem p = ManufacturedProblem::custom(1.0, 0.3, 1, 1, Nonlinearity::zero());
    std::string detail;
    bool ok = true;
    for (Variant v : {Variant::A, Variant::B, Variant::C}) {
        const HdgDiscretization d(build_uniform_square(8), DegreeConfig(v, 2));
        std::vector<Eigen::VectorXd> u;
        for (const char* dt : {"fixed:0.1", "fixed:0.05", "fixed:0.025"}) {
            TimeConfig tc;
            tc.final_time = 1.0;
            tc.dt = DtPolicy::parse(dt);
            tc.initial_condition = InitialCondition::elliptic_projection;
            const Trajectory tr = integrate(d, tc, p.evolution());
            ledger.add_trajectory(tr.factorizations, tr.max_flux_residual_ratio);
            u.push_back(tr.final_state().u);
        }
        const double order = std::log2((u[0] - u[1]).norm() / (u[1] - u[2]).norm());
        ok = ok && std::abs(order - 2.0) <= 0.2;
        detail += std::string(detail.empty() ? "" : ", ") + variant_letter(v) + fmt(" %.3f", order);
    }
    return {ok, "order " + detail};
}

Outcome elliptic_solves()
{
    // steady solves feed criterion 10
    auto mlap = [](const Point2& x) { return std::sin(3 * x.x()) + x.y(); };
    for (const DegreeConfig& cfg : all_configs(3)) {
        const HdgDiscretization d(build_uniform_square(8), cfg);
        const FieldState s = solve_elliptic_projection(d, mlap);
        ledger.add_solve(check_flux_continuity(d, s), state_scale(s));
    }
    return {};
}

} // namespace

int main()
{
    const auto start = std::chrono::steady_clock::now();
    report(1, "chaffee-infante-A-k0", chaffee_a_k0());
    report(2, "chaffee-infante-A-k1-dt-h2", chaffee_a_k1());
    report(3, "superconvergence-B-k0", superconvergence_b_k0());
    report(4, "variant-C-rate-dichotomy", dichotomy_c());
    report(5, "condensation-vs-monolithic", condensation_oracle());
    report(6, "postprocessing-identities", postprocessing_identities());
    report(7, "projection-contraction", projection_contraction());
    const Outcome order = temporal_order();
    (void)elliptic_solves();
    report(8, "assemble-once",
           {ledger.bad_factorization_counts == 0,
            std::to_string(ledger.integrate_calls) + " integrate calls, "
                + std::to_string(ledger.bad_factorization_counts) + " with factorizations != 1"});
    report(9, "crank-nicolson-temporal-order", order);
    report(10, "flux-continuity-residual",
           {ledger.worst_flux_ratio <= 1e-9,
            fmt("max residual/scale %.1e over ", ledger.worst_flux_ratio) + std::to_string(ledger.linear_solves)
                + " solves and " + std::to_string(ledger.integrate_calls) + " trajectories"});
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s: %d of 10 criteria failed (%.1f s)\n", failures ? "FAILED" : "OK", failures, wall);
    return failures ? 1 : 0;
}
