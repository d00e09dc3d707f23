#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ihdg/time_stepper.hpp"

namespace ihdg {

/// Exact solution of du/dt - lap u + F(u) = f on the unit square with u = 0
/// on the boundary; f is derived from the other fields.
struct ManufacturedProblem {
    std::string name;
    std::function<double(const Point2&, double)> u;
    std::function<double(const Point2&, double)> u_t;
    std::function<Point2(const Point2&, double)> grad_u;
    std::function<double(const Point2&, double)> laplacian_u;
    Nonlinearity nonlinearity = Nonlinearity::zero();
    double final_time = 1.0;

    [[nodiscard]] double source(const Point2& x, double t) const
    {
        return u_t(x, t) - laplacian_u(x, t) + nonlinearity.value(u(x, t));
    }
    /// q = -grad u
    [[nodiscard]] Point2 flux(const Point2& x, double t) const { return -grad_u(x, t); }

    [[nodiscard]] EvolutionProblem evolution() const;

    /// u = sin(t) sin(pi x) sin(pi y), F(u) = u^3 - u.
    [[nodiscard]] static ManufacturedProblem chaffee_infante();
    /// u = (1 + t) x(1-x) y(1-y), F = 0.
    [[nodiscard]] static ManufacturedProblem linear_poly();
    /// u = sin(omega t + phase) sin(mx pi x) sin(my pi y) with a chosen F.
    [[nodiscard]] static ManufacturedProblem custom(double omega, double phase, int mx, int my,
                                                    Nonlinearity nonlinearity);
    [[nodiscard]] static ManufacturedProblem from_name(const std::string& name);
};

struct ErrorNorms {
    double q = 0.0;
    double u = 0.0;
    double ustar = 0.0;
};

/// L2 errors of q_h, u_h, u_h* against the exact solution at state.t.
[[nodiscard]] ErrorNorms error_norms(const HdgDiscretization& disc, const FieldState& state,
                                     const ManufacturedProblem& problem);

/// Experimental order between two levels: log(e0/e1) / log(h0/h1).
[[nodiscard]] double eoc(double e0, double e1, double h0, double h1);

struct LevelResult {
    int n = 0;
    double h = 0.0;
    double dt = 0.0;
    ErrorNorms errors;
    std::optional<double> rate_q;
    std::optional<double> rate_u;
    std::optional<double> rate_ustar;
    double walltime_s = 0.0;
    int factorizations = 0;
    int picard_total = 0;
    int max_picard = 0;
    double max_flux_residual_ratio = 0.0;
    bool ok = true;
    std::string message;
    /// errors at intermediate output times (t, norms)
    std::vector<std::pair<double, ErrorNorms>> snapshots;
};

struct SweepResult {
    DegreeConfig config;
    std::vector<LevelResult> levels;

    [[nodiscard]] bool all_ok() const;
};

struct SweepConfig {
    DegreeConfig degree;
    std::vector<int> levels;
    TimeConfig time;
    ManufacturedProblem problem = ManufacturedProblem::chaffee_infante();
    /// When set, level n subdivides this mesh n times per edge; otherwise the unit square is used.
    std::optional<Mesh> base_mesh;
    std::vector<double> snapshot_times;
    unsigned max_workers = 0; ///< 0: worker_count()
};

/// Integrates the problem on every level. Failures are recorded per level and
/// the sweep continues; rates are computed between consecutive successful levels.
[[nodiscard]] SweepResult run_sweep(const SweepConfig& config);

inline constexpr const char* csv_header
    = "variant,k,n,h,dt,err_q,rate_q,err_u,rate_u,err_ustar,rate_ustar,walltime_s,factorizations,picard_total";

void emit_csv(std::ostream& out, const SweepResult& result);
/// Throws IoError when the file cannot be written.
void emit_csv(const std::string& path, const SweepResult& result);
/// Whitespace-separated columns for gnuplot: n h err_q err_u err_ustar.
void emit_plot_data(std::ostream& out, const SweepResult& result);
void emit_plot_data(const std::string& path, const SweepResult& result);

/// Human-readable table in the layout of a convergence history.
void print_table(std::ostream& out, const SweepResult& result);

} // namespace ihdg
