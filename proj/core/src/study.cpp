#include "ihdg/study.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <numbers>
#include <ostream>

#include "ihdg/errors.hpp"
#include "ihdg/parallel.hpp"

namespace ihdg {

namespace {
constexpr double pi = std::numbers::pi;
}

EvolutionProblem ManufacturedProblem::evolution() const
{
    auto self = std::make_shared<const ManufacturedProblem>(*this);
    EvolutionProblem p;
    p.source = [self](const Point2& x, double t) { return self->source(x, t); };
    p.initial_value = [self](const Point2& x) { return self->u(x, 0.0); };
    p.initial_minus_laplacian = [self](const Point2& x) { return -self->laplacian_u(x, 0.0); };
    p.nonlinearity = nonlinearity;
    return p;
}

ManufacturedProblem ManufacturedProblem::custom(double omega, double phase, int mx, int my,
                                                Nonlinearity nonlinearity)
{
    ManufacturedProblem p;
    p.name = "custom";
    const double ax = mx * pi;
    const double ay = my * pi;
    p.u = [=](const Point2& x, double t) { return std::sin(omega * t + phase) * std::sin(ax * x.x()) * std::sin(ay * x.y()); };
    p.u_t = [=](const Point2& x, double t) {
        return omega * std::cos(omega * t + phase) * std::sin(ax * x.x()) * std::sin(ay * x.y());
    };
    p.grad_u = [=](const Point2& x, double t) {
        const double s = std::sin(omega * t + phase);
        return Point2(s * ax * std::cos(ax * x.x()) * std::sin(ay * x.y()),
                      s * ay * std::sin(ax * x.x()) * std::cos(ay * x.y()));
    };
    p.laplacian_u = [=](const Point2& x, double t) {
        return -(ax * ax + ay * ay) * std::sin(omega * t + phase) * std::sin(ax * x.x()) * std::sin(ay * x.y());
    };
    p.nonlinearity = std::move(nonlinearity);
    return p;
}

ManufacturedProblem ManufacturedProblem::chaffee_infante()
{
    auto p = custom(1.0, 0.0, 1, 1, Nonlinearity::chaffee_infante());
    p.name = "chaffee_infante";
    return p;
}

ManufacturedProblem ManufacturedProblem::linear_poly()
{
    ManufacturedProblem p;
    p.name = "linear_poly";
    p.u = [](const Point2& x, double t) { return (1.0 + t) * x.x() * (1.0 - x.x()) * x.y() * (1.0 - x.y()); };
    p.u_t = [](const Point2& x, double) { return x.x() * (1.0 - x.x()) * x.y() * (1.0 - x.y()); };
    p.grad_u = [](const Point2& x, double t) {
        return Point2((1.0 + t) * (1.0 - 2.0 * x.x()) * x.y() * (1.0 - x.y()),
                      (1.0 + t) * x.x() * (1.0 - x.x()) * (1.0 - 2.0 * x.y()));
    };
    p.laplacian_u = [](const Point2& x, double t) {
        return -2.0 * (1.0 + t) * (x.y() * (1.0 - x.y()) + x.x() * (1.0 - x.x()));
    };
    p.nonlinearity = Nonlinearity::zero();
    return p;
}

ManufacturedProblem ManufacturedProblem::from_name(const std::string& name)
{
    if (name == "chaffee_infante")
        return chaffee_infante();
    if (name == "linear_poly")
        return linear_poly();
    if (name == "custom")
        return custom(1.0, 0.0, 1, 1, Nonlinearity::zero());
    throw InvalidArgument("unknown problem '" + name + "' (expected chaffee_infante, linear_poly or custom)");
}

// ---------------------------------------------------------------------------

ErrorNorms error_norms(const HdgDiscretization& disc, const FieldState& state, const ManufacturedProblem& problem)
{
    const auto& ref = disc.reference();
    const auto& rule = ref.error_rule();
    const auto& table = ref.error_values();
    const int nk = ref.flux_dim();
    const int nl = disc.scalar_dim();
    const int nk1 = disc.post_dim();
    const int nq = disc.flux_dim();
    const double t = state.t;

    double eq = 0.0;
    double eu = 0.0;
    double es = 0.0;
    for (int e = 0; e < disc.num_elements(); ++e) {
        const auto& geom = disc.projector(e).geometry();
        const double scale = 1.0 / std::sqrt(geom.det);
        const auto qx = state.q.segment(static_cast<Eigen::Index>(e) * nq, nk);
        const auto qy = state.q.segment(static_cast<Eigen::Index>(e) * nq + nk, nk);
        const auto ue = state.u.segment(static_cast<Eigen::Index>(e) * nl, nl);
        const auto se = state.ustar.segment(static_cast<Eigen::Index>(e) * nk1, nk1);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const auto phi = table.row(static_cast<Eigen::Index>(q));
            const Point2 x = geom.map(rule.points[q]);
            const double w = rule.weights[q] * geom.det;
            const Point2 qex = problem.flux(x, t);
            const double uex = problem.u(x, t);
            const double dqx = qex.x() - scale * phi.head(nk).dot(qx);
            const double dqy = qex.y() - scale * phi.head(nk).dot(qy);
            const double du = uex - scale * phi.head(nl).dot(ue);
            const double ds = uex - scale * phi.head(nk1).dot(se);
            eq += w * (dqx * dqx + dqy * dqy);
            eu += w * du * du;
            es += w * ds * ds;
        }
    }
    return {std::sqrt(eq), std::sqrt(eu), std::sqrt(es)};
}

double eoc(double e0, double e1, double h0, double h1)
{
    return std::log(e0 / e1) / std::log(h0 / h1);
}

bool SweepResult::all_ok() const
{
    for (const auto& l : levels)
        if (!l.ok)
            return false;
    return true;
}

SweepResult run_sweep(const SweepConfig& config)
{
    SweepResult result;
    result.config = config.degree;
    result.levels.resize(config.levels.size());

    const auto run_level = [&](std::size_t i) {
        LevelResult& lv = result.levels[i];
        lv.n = config.levels[i];
        const auto start = std::chrono::steady_clock::now();
        try {
            Mesh mesh = config.base_mesh ? subdivide(*config.base_mesh, lv.n) : build_uniform_square(lv.n);
            lv.h = mesh.h();
            const HdgDiscretization disc(std::move(mesh), config.degree);
            TimeConfig tc = config.time;
            const EvolutionProblem evo = config.problem.evolution();
            const Trajectory traj = integrate(disc, tc, evo, config.snapshot_times);
            lv.dt = traj.dt;
            lv.errors = error_norms(disc, traj.final_state(), config.problem);
            lv.factorizations = traj.factorizations;
            lv.picard_total = traj.picard_total;
            for (const auto& s : traj.steps)
                lv.max_picard = std::max(lv.max_picard, s.iterations);
            lv.max_flux_residual_ratio = traj.max_flux_residual_ratio;
            for (std::size_t s = 1; s + 1 < traj.snapshots.size(); ++s)
                lv.snapshots.emplace_back(traj.snapshots[s].t,
                                          error_norms(disc, traj.snapshots[s], config.problem));
        } catch (const std::exception& ex) {
            lv.ok = false;
            lv.message = ex.what();
        }
        lv.walltime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };
    parallel_for(config.levels.size(), run_level, config.max_workers);

    // rates after the deterministic join, in level order
    const LevelResult* prev = nullptr;
    for (auto& lv : result.levels) {
        if (!lv.ok)
            continue;
        if (prev) {
            lv.rate_q = eoc(prev->errors.q, lv.errors.q, prev->h, lv.h);
            lv.rate_u = eoc(prev->errors.u, lv.errors.u, prev->h, lv.h);
            lv.rate_ustar = eoc(prev->errors.ustar, lv.errors.ustar, prev->h, lv.h);
        }
        prev = &lv;
    }
    return result;
}

// ---------------------------------------------------------------------------

namespace {

std::string sci(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5e", v);
    return buf;
}

std::string opt(const std::optional<double>& v)
{
    return v ? sci(*v) : std::string();
}

} // namespace

void emit_csv(std::ostream& out, const SweepResult& result)
{
    out << csv_header << '\n';
    const char variant = variant_letter(result.config.variant);
    for (const auto& lv : result.levels) {
        out << variant << ',' << result.config.k << ',' << lv.n << ',' << sci(lv.h) << ',';
        if (lv.ok) {
            out << sci(lv.dt) << ',' << sci(lv.errors.q) << ',' << opt(lv.rate_q) << ',' << sci(lv.errors.u) << ','
                << opt(lv.rate_u) << ',' << sci(lv.errors.ustar) << ',' << opt(lv.rate_ustar) << ',';
        } else {
            out << ",,,,,,,";
        }
        out << sci(lv.walltime_s) << ',' << lv.factorizations << ',' << lv.picard_total << '\n';
    }
}

void emit_csv(const std::string& path, const SweepResult& result)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open '" + path + "' for writing");
    emit_csv(out, result);
    if (!out)
        throw IoError("write to '" + path + "' failed");
}

void emit_plot_data(std::ostream& out, const SweepResult& result)
{
    out << "# " << result.config.name() << "\n# n h err_q err_u err_ustar\n";
    for (const auto& lv : result.levels)
        if (lv.ok)
            out << lv.n << ' ' << sci(lv.h) << ' ' << sci(lv.errors.q) << ' ' << sci(lv.errors.u) << ' '
                << sci(lv.errors.ustar) << '\n';
}

void emit_plot_data(const std::string& path, const SweepResult& result)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open '" + path + "' for writing");
    emit_plot_data(out, result);
}

void print_table(std::ostream& out, const SweepResult& result)
{
    out << result.config.name() << '\n';
    out << std::setw(6) << "n" << std::setw(12) << "h/sqrt2" << std::setw(12) << "|q-qh|" << std::setw(7) << "rate"
        << std::setw(12) << "|u-uh|" << std::setw(7) << "rate" << std::setw(12) << "|u-uh*|" << std::setw(7) << "rate"
        << std::setw(9) << "picard" << std::setw(10) << "time[s]" << '\n';
    char buf[256];
    for (const auto& lv : result.levels) {
        if (!lv.ok) {
            out << std::setw(6) << lv.n << "  FAILED: " << lv.message << '\n';
            continue;
        }
        const auto r = [](const std::optional<double>& v) {
            char b[16];
            if (v)
                std::snprintf(b, sizeof b, "%6.2f", *v);
            else
                std::snprintf(b, sizeof b, "%6s", "-");
            return std::string(b);
        };
        std::snprintf(buf, sizeof buf, "%6d %11.4e %11.3e %s %11.3e %s %11.3e %s %8d %9.2f\n", lv.n,
                      lv.h / std::numbers::sqrt2, lv.errors.q, r(lv.rate_q).c_str(), lv.errors.u,
                      r(lv.rate_u).c_str(), lv.errors.ustar, r(lv.rate_ustar).c_str(), lv.picard_total,
                      lv.walltime_s);
        out << buf;
    }
}

} // namespace ihdg
