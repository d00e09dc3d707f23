#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ihdg/hdg_assembly.hpp"

namespace ihdg {

/// Reaction term F(u) with its derivative.
struct Nonlinearity {
    std::function<double(double)> value;
    std::function<double(double)> derivative;
    std::string name;

    /// F(u) = u^3 - u.
    [[nodiscard]] static Nonlinearity chaffee_infante();
    /// F(u) = 0.
    [[nodiscard]] static Nonlinearity zero();
    [[nodiscard]] static Nonlinearity from_name(const std::string& name);

    [[nodiscard]] bool is_zero() const noexcept { return name == "zero"; }
};

enum class InitialCondition { l2_projection, elliptic_projection };

[[nodiscard]] InitialCondition parse_initial_condition(const std::string& s);

/// Time step rule: dt = h, dt = h^2 (h the largest element diameter) or a fixed value.
struct DtPolicy {
    enum class Kind { h, h_squared, fixed };
    Kind kind = Kind::h;
    double value = 0.0;

    /// "h", "h2", "fixed:VAL".
    [[nodiscard]] static DtPolicy parse(const std::string& s);
    [[nodiscard]] double resolve(double h) const;
    [[nodiscard]] std::string str() const;
};

struct TimeConfig {
    double final_time = 1.0;
    DtPolicy dt;
    double tolerance = 1e-10; ///< sup-norm of the nonlinear increment
    int max_iterations = 50;
    InitialCondition initial_condition = InitialCondition::l2_projection;
    bool newton = false;
};

/// Data of du/dt - lap u + F(u) = f, u = 0 on the boundary.
struct EvolutionProblem {
    std::function<double(const Point2&, double)> source;
    ScalarField initial_value;
    /// -lap u(., 0); only needed for the elliptic-projection initial condition.
    ScalarField initial_minus_laplacian;
    Nonlinearity nonlinearity = Nonlinearity::zero();
};

/// u_h(0) = Pi^o_l u0, uhat_h(0) = Pi^partial_k u0 and q_h(0) from the local
/// flux equation; or the steady HDG approximation with data -lap u0.
[[nodiscard]] FieldState initial_state(const HdgDiscretization& disc, const ScalarField& u0, InitialCondition mode,
                                       const ScalarField& minus_laplacian_u0 = {});

struct StepReport {
    double t = 0.0;
    int iterations = 0;
    double increment = 0.0;
    double flux_residual = 0.0;
    double scale = 0.0;
};

/// Crank-Nicolson stepper with the interpolated reaction term I_h F(u_h*).
///
/// In Picard mode (default) the condensed matrix with sigma = 2/dt is built and
/// factorized once in the constructor; every inner iteration only evaluates F
/// at the Lagrange nodes of u_h* and re-solves. Newton mode rebuilds the
/// condensed Jacobian at every iteration.
class CrankNicolsonStepper {
public:
    CrankNicolsonStepper(const HdgDiscretization& disc, Nonlinearity nonlinearity, double dt,
                         double tolerance = 1e-10, int max_iterations = 50, bool newton = false);
    ~CrankNicolsonStepper();

    [[nodiscard]] double dt() const noexcept { return dt_; }
    [[nodiscard]] int factorizations() const noexcept;

    /// Advances state from t to t + dt in place. Throws ConvergenceError or EvaluationError.
    StepReport step(FieldState& state, const std::function<double(const Point2&, double)>& source);

    /// Nodal values of u_h* on every element, concatenated.
    [[nodiscard]] Eigen::VectorXd nodal_values(const FieldState& state) const;

private:
    [[nodiscard]] std::vector<Eigen::VectorXd> reaction(const FieldState& state) const;
    [[nodiscard]] std::vector<Eigen::VectorXd> loads(const std::function<double(const Point2&, double)>& f,
                                                     double t) const;
    StepReport step_picard(FieldState& state, const std::vector<Eigen::VectorXd>& base);
    StepReport step_newton(FieldState& state, const std::vector<Eigen::VectorXd>& base);

    const HdgDiscretization* disc_;
    Nonlinearity F_;
    double dt_;
    double sigma_;
    double tolerance_;
    int max_iterations_;
    bool newton_;
    std::unique_ptr<CondensedSystem> system_;
    int newton_factorizations_ = 0;
    // (nl x quadrature points) weights for source loads, and the physical points
    std::vector<Eigen::MatrixXd> load_weights_;
    std::vector<std::vector<Point2>> load_points_;
};

struct Trajectory {
    std::vector<FieldState> snapshots; ///< initial state, requested output times, final state
    std::vector<StepReport> steps;
    int num_steps = 0;
    double dt = 0.0;
    int factorizations = 0;
    int picard_total = 0;
    double max_flux_residual_ratio = 0.0; ///< max over steps of residual / max(scale, 1e-300)

    [[nodiscard]] const FieldState& final_state() const { return snapshots.back(); }
};

/// Uniform grid with N = max(1, round(T/dt)) steps of size T/N, so the final
/// time is hit exactly with a single step size.
[[nodiscard]] Trajectory integrate(const HdgDiscretization& disc, const TimeConfig& config,
                                   const EvolutionProblem& problem, std::span<const double> output_times = {});

} // namespace ihdg
