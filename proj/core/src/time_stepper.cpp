#include "ihdg/time_stepper.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>

#include "ihdg/errors.hpp"

namespace ihdg {

Nonlinearity Nonlinearity::chaffee_infante()
{
    return {[](double u) { return u * u * u - u; }, [](double u) { return 3.0 * u * u - 1.0; }, "chaffee_infante"};
}

Nonlinearity Nonlinearity::zero()
{
    return {[](double) { return 0.0; }, [](double) { return 0.0; }, "zero"};
}

Nonlinearity Nonlinearity::from_name(const std::string& name)
{
    if (name == "chaffee_infante")
        return chaffee_infante();
    if (name == "zero" || name == "linear")
        return zero();
    throw InvalidArgument("unknown nonlinearity '" + name + "' (expected chaffee_infante or zero)");
}

InitialCondition parse_initial_condition(const std::string& s)
{
    if (s == "l2" || s == "l2_projection")
        return InitialCondition::l2_projection;
    if (s == "elliptic" || s == "elliptic_projection")
        return InitialCondition::elliptic_projection;
    throw InvalidArgument("unknown initial condition '" + s + "' (expected l2 or elliptic)");
}

DtPolicy DtPolicy::parse(const std::string& s)
{
    if (s == "h")
        return {Kind::h, 0.0};
    if (s == "h2")
        return {Kind::h_squared, 0.0};
    if (s.rfind("fixed:", 0) == 0) {
        double v = 0.0;
        try {
            std::size_t pos = 0;
            v = std::stod(s.substr(6), &pos);
            if (pos != s.size() - 6)
                throw InvalidArgument("");
        } catch (const std::exception&) {
            throw InvalidArgument("bad time step '" + s + "'");
        }
        if (!(v > 0.0))
            throw InvalidArgument("time step must be positive, got '" + s + "'");
        return {Kind::fixed, v};
    }
    throw InvalidArgument("unknown dt policy '" + s + "' (expected h, h2 or fixed:VAL)");
}

double DtPolicy::resolve(double h) const
{
    switch (kind) {
    case Kind::h:
        return h;
    case Kind::h_squared:
        return h * h;
    case Kind::fixed:
        return value;
    }
    return value;
}

std::string DtPolicy::str() const
{
    switch (kind) {
    case Kind::h:
        return "h";
    case Kind::h_squared:
        return "h2";
    case Kind::fixed: {
        std::ostringstream os;
        os << "fixed:" << value;
        return os.str();
    }
    }
    return "?";
}

// ---------------------------------------------------------------------------

FieldState initial_state(const HdgDiscretization& disc, const ScalarField& u0, InitialCondition mode,
                         const ScalarField& minus_laplacian_u0)
{
    if (mode == InitialCondition::elliptic_projection) {
        if (!minus_laplacian_u0)
            throw ConfigError("elliptic-projection initial condition needs -lap u0");
        return solve_elliptic_projection(disc, minus_laplacian_u0);
    }

    FieldState s = disc.zero_state();
    const Mesh& mesh = disc.mesh();
    const int k = disc.config().k;
    const int nf = disc.face_dim();
    const int nq = disc.flux_dim();
    const int nl = disc.scalar_dim();
    for (int f = 0; f < mesh.num_faces(); ++f) {
        const int g = disc.interior_index(f);
        if (g >= 0)
            s.uhat.segment(static_cast<Eigen::Index>(g) * nf, nf) = project_face(mesh, f, u0, k);
    }
    for (int e = 0; e < disc.num_elements(); ++e) {
        const Eigen::VectorXd ue = disc.projector(e).project_element(u0, disc.config().scalar_degree());
        s.u.segment(static_cast<Eigen::Index>(e) * nl, nl) = ue;
        const auto& op = disc.operators(e);
        const Eigen::VectorXd rhs = -(op.flux_scalar * ue + op.flux_trace * disc.local_trace(s.uhat, e));
        s.q.segment(static_cast<Eigen::Index>(e) * nq, nq) = op.flux_mass.llt().solve(rhs);
    }
    disc.update_postprocessed(s);
    return s;
}

// ---------------------------------------------------------------------------

CrankNicolsonStepper::CrankNicolsonStepper(const HdgDiscretization& disc, Nonlinearity nonlinearity, double dt,
                                           double tolerance, int max_iterations, bool newton)
    : disc_(&disc)
    , F_(std::move(nonlinearity))
    , dt_(dt)
    , sigma_(2.0 / dt)
    , tolerance_(tolerance)
    , max_iterations_(max_iterations)
    , newton_(newton)
{
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw InvalidArgument("time step must be positive and finite");
    if (max_iterations < 1)
        throw InvalidArgument("max_iterations must be >= 1");
    if (!newton_)
        system_ = std::make_unique<CondensedSystem>(disc, sigma_);

    const auto& ref = disc.reference();
    const auto& rule = ref.error_rule();
    const int nl = disc.scalar_dim();
    load_weights_.resize(static_cast<std::size_t>(disc.num_elements()));
    load_points_.resize(static_cast<std::size_t>(disc.num_elements()));
    for (int e = 0; e < disc.num_elements(); ++e) {
        const auto& geom = disc.projector(e).geometry();
        auto& W = load_weights_[static_cast<std::size_t>(e)];
        auto& P = load_points_[static_cast<std::size_t>(e)];
        W.resize(nl, static_cast<Eigen::Index>(rule.size()));
        P.resize(rule.size());
        const double s = std::sqrt(geom.det);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            W.col(static_cast<Eigen::Index>(q))
                = (rule.weights[q] * s) * ref.error_values().row(static_cast<Eigen::Index>(q)).head(nl).transpose();
            P[q] = geom.map(rule.points[q]);
        }
    }
}

CrankNicolsonStepper::~CrankNicolsonStepper() = default;

int CrankNicolsonStepper::factorizations() const noexcept
{
    return (system_ ? system_->factorizations() : 0) + newton_factorizations_;
}

Eigen::VectorXd CrankNicolsonStepper::nodal_values(const FieldState& state) const
{
    const HdgDiscretization& disc = *disc_;
    const int nk1 = disc.post_dim();
    Eigen::VectorXd out(static_cast<Eigen::Index>(disc.num_elements()) * nk1);
    for (int e = 0; e < disc.num_elements(); ++e)
        out.segment(static_cast<Eigen::Index>(e) * nk1, nk1)
            = disc.projector(e).nodal_map() * state.ustar.segment(static_cast<Eigen::Index>(e) * nk1, nk1);
    return out;
}

std::vector<Eigen::VectorXd> CrankNicolsonStepper::reaction(const FieldState& state) const
{
    const HdgDiscretization& disc = *disc_;
    const int nk1 = disc.post_dim();
    std::vector<Eigen::VectorXd> out(static_cast<std::size_t>(disc.num_elements()));
    for (int e = 0; e < disc.num_elements(); ++e) {
        Eigen::VectorXd nodal
            = disc.projector(e).nodal_map() * state.ustar.segment(static_cast<Eigen::Index>(e) * nk1, nk1);
        for (Eigen::Index n = 0; n < nodal.size(); ++n) {
            nodal(n) = F_.value(nodal(n));
            if (!std::isfinite(nodal(n)))
                throw EvaluationError("non-finite nonlinearity value on element " + std::to_string(e));
        }
        out[static_cast<std::size_t>(e)] = disc.operators(e).interpolation_coupling * nodal;
    }
    return out;
}

std::vector<Eigen::VectorXd> CrankNicolsonStepper::loads(const std::function<double(const Point2&, double)>& f,
                                                         double t) const
{
    const HdgDiscretization& disc = *disc_;
    std::vector<Eigen::VectorXd> out(static_cast<std::size_t>(disc.num_elements()));
    for (int e = 0; e < disc.num_elements(); ++e) {
        const auto& pts = load_points_[static_cast<std::size_t>(e)];
        Eigen::VectorXd fv(static_cast<Eigen::Index>(pts.size()));
        for (std::size_t q = 0; q < pts.size(); ++q) {
            fv(static_cast<Eigen::Index>(q)) = f(pts[q], t);
            if (!std::isfinite(fv(static_cast<Eigen::Index>(q))))
                throw EvaluationError("non-finite source value on element " + std::to_string(e));
        }
        out[static_cast<std::size_t>(e)] = load_weights_[static_cast<std::size_t>(e)] * fv;
    }
    return out;
}

StepReport CrankNicolsonStepper::step(FieldState& state, const std::function<double(const Point2&, double)>& source)
{
    const HdgDiscretization& disc = *disc_;
    const int nq = disc.flux_dim();
    const int nl = disc.scalar_dim();
    const double t0 = state.t;
    const double t1 = t0 + dt_;

    // sigma M u^n - a(x^n) - B_F F(u*^n) + (f^n + f^{n+1}, v) in the scalar rows
    const auto f0 = loads(source, t0);
    const auto f1 = loads(source, t1);
    const auto r0 = reaction(state);
    std::vector<Eigen::VectorXd> base(static_cast<std::size_t>(disc.num_elements()));
    for (int e = 0; e < disc.num_elements(); ++e) {
        const auto ue = static_cast<std::size_t>(e);
        const auto& op = disc.operators(e);
        const Eigen::VectorXd x = disc.local_vector(state, e);
        base[ue] = Eigen::VectorXd::Zero(disc.local_dim());
        base[ue].segment(nq, nl) = sigma_ * (op.scalar_mass * x.segment(nq, nl)) - op.divergence * x.head(nq)
            - op.stabilization.topRows(nl) * x.tail(x.size() - nq) - r0[ue] + f0[ue] + f1[ue];
    }

    StepReport report = newton_ ? step_newton(state, base) : step_picard(state, base);
    state.t = t1;
    report.t = t1;
    report.flux_residual = check_flux_continuity(disc, state);
    report.scale = state_scale(state);
    return report;
}

StepReport CrankNicolsonStepper::step_picard(FieldState& state, const std::vector<Eigen::VectorXd>& base)
{
    const HdgDiscretization& disc = *disc_;
    const int nq = disc.flux_dim();
    const int nl = disc.scalar_dim();
    StepReport report;
    FieldState iterate = state;
    std::vector<Eigen::VectorXd> rhs = base;
    for (int it = 1; it <= max_iterations_; ++it) {
        if (!F_.is_zero()) {
            const auto r = reaction(iterate);
            for (std::size_t e = 0; e < rhs.size(); ++e)
                rhs[e].segment(nq, nl) = base[e].segment(nq, nl) - r[e];
        }
        FieldState next = system_->solve(rhs);
        double inc = (next.u - iterate.u).lpNorm<Eigen::Infinity>();
        if (next.uhat.size() > 0)
            inc = std::max(inc, (next.uhat - iterate.uhat).lpNorm<Eigen::Infinity>());
        iterate = std::move(next);
        report.iterations = it;
        report.increment = inc;
        // a linear step is solved exactly by the first solve
        if (F_.is_zero() || inc <= tolerance_) {
            iterate.t = state.t;
            state = std::move(iterate);
            return report;
        }
    }
    throw ConvergenceError("Picard iteration did not converge in " + std::to_string(max_iterations_)
                               + " iterations at t = " + std::to_string(state.t + dt_)
                               + " (last increment " + std::to_string(report.increment) + ")",
                           report.increment);
}

StepReport CrankNicolsonStepper::step_newton(FieldState& state, const std::vector<Eigen::VectorXd>& base)
{
    const HdgDiscretization& disc = *disc_;
    const int nq = disc.flux_dim();
    const int nl = disc.scalar_dim();
    const int ne = disc.num_elements();
    const int nk1 = disc.post_dim();
    StepReport report;
    FieldState iterate = state;
    for (int it = 1; it <= max_iterations_; ++it) {
        const auto r = reaction(iterate);
        std::vector<Eigen::VectorXd> neg_residual(static_cast<std::size_t>(ne));
        std::vector<Eigen::MatrixXd> jac(static_cast<std::size_t>(ne));
        for (int e = 0; e < ne; ++e) {
            const auto ue = static_cast<std::size_t>(e);
            const auto& op = disc.operators(e);
            const Eigen::VectorXd x = disc.local_vector(iterate, e);
            Eigen::VectorXd res = op.local_matrix(sigma_) * x - base[ue];
            res.segment(nq, nl) += r[ue];
            neg_residual[ue] = -res;
            Eigen::VectorXd dF
                = disc.projector(e).nodal_map() * iterate.ustar.segment(static_cast<Eigen::Index>(e) * nk1, nk1);
            for (Eigen::Index n = 0; n < dF.size(); ++n)
                dF(n) = F_.derivative(dF(n));
            jac[ue] = op.interpolation_coupling * dF.asDiagonal() * op.nodal_postprocess;
        }
        const CondensedSystem system(disc, sigma_, jac);
        newton_factorizations_ += system.factorizations();
        const FieldState delta = system.solve(neg_residual);
        iterate.q += delta.q;
        iterate.u += delta.u;
        iterate.uhat += delta.uhat;
        disc.update_postprocessed(iterate);
        double inc = delta.u.lpNorm<Eigen::Infinity>();
        if (delta.uhat.size() > 0)
            inc = std::max(inc, delta.uhat.lpNorm<Eigen::Infinity>());
        report.iterations = it;
        report.increment = inc;
        if (inc <= tolerance_) {
            state = std::move(iterate);
            return report;
        }
    }
    throw ConvergenceError("Newton iteration did not converge in " + std::to_string(max_iterations_)
                               + " iterations at t = " + std::to_string(state.t + dt_)
                               + " (last increment " + std::to_string(report.increment) + ")",
                           report.increment);
}

// ---------------------------------------------------------------------------

Trajectory integrate(const HdgDiscretization& disc, const TimeConfig& config, const EvolutionProblem& problem,
                     std::span<const double> output_times)
{
    if (!problem.initial_value)
        throw ConfigError("integrate: missing initial value");
    if (!problem.source)
        throw ConfigError("integrate: missing source term");
    if (config.final_time < 0.0)
        throw InvalidArgument("integrate: negative final time");

    Trajectory traj;
    FieldState state = initial_state(disc, problem.initial_value, config.initial_condition,
                                     problem.initial_minus_laplacian);
    traj.snapshots.push_back(state);
    if (config.final_time == 0.0)
        return traj;

    const double dt_request = config.dt.resolve(disc.mesh().h());
    if (!(dt_request > 0.0))
        throw InvalidArgument("integrate: time step must be positive");
    traj.num_steps = std::max(1, static_cast<int>(std::llround(config.final_time / dt_request)));
    traj.dt = config.final_time / traj.num_steps;

    CrankNicolsonStepper stepper(disc, problem.nonlinearity, traj.dt, config.tolerance, config.max_iterations,
                                 config.newton);
    std::vector<double> pending(output_times.begin(), output_times.end());
    std::sort(pending.begin(), pending.end());
    std::size_t next_output = 0;
    while (next_output < pending.size() && pending[next_output] <= 0.0)
        ++next_output;

    traj.steps.reserve(static_cast<std::size_t>(traj.num_steps));
    for (int n = 1; n <= traj.num_steps; ++n) {
        StepReport rep = stepper.step(state, problem.source);
        // exact grid time, free of accumulated round-off
        state.t = n == traj.num_steps ? config.final_time : n * traj.dt;
        rep.t = state.t;
        traj.picard_total += rep.iterations;
        traj.max_flux_residual_ratio
            = std::max(traj.max_flux_residual_ratio, rep.flux_residual / std::max(rep.scale, 1e-300));
        traj.steps.push_back(rep);
        bool recorded = false;
        while (next_output < pending.size() && state.t >= pending[next_output] - 1e-12 * config.final_time) {
            if (!recorded && n != traj.num_steps) {
                traj.snapshots.push_back(state);
                recorded = true;
            }
            ++next_output;
        }
    }
    traj.snapshots.push_back(state);
    traj.factorizations = stepper.factorizations();
    return traj;
}

} // namespace ihdg
