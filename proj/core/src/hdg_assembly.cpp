#include "ihdg/hdg_assembly.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>
#include <Eigen/SparseLU>

#include "ihdg/errors.hpp"
#include "ihdg/parallel.hpp"

namespace ihdg {

Eigen::MatrixXd ElementOperators::local_matrix(double sigma) const
{
    const int nq = flux_dim();
    const int nl = scalar_dim();
    const int nh = trace_dim();
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nq + nl + nh, nq + nl + nh);
    K.block(0, 0, nq, nq) = flux_mass;
    K.block(0, nq, nq, nl) = flux_scalar;
    K.block(0, nq + nl, nq, nh) = flux_trace;
    K.block(nq, 0, nl, nq) = divergence;
    K.block(nq + nl, 0, nh, nq) = normal_flux;
    K.block(nq, nq, nl + nh, nl + nh) = stabilization;
    K.block(nq, nq, nl, nl) += sigma * scalar_mass;
    return K;
}

ElementOperators assemble_element(const ElementProjector& projector, const ReferenceElements& ref)
{
    const auto& geom = projector.geometry();
    const int nk = ref.flux_dim();
    const int nl = ref.scalar_dim();
    const int nk1 = ref.post_dim();
    const int nf = ref.face_dim();
    const int nh = 3 * nf;

    const double scale = 1.0 / std::sqrt(geom.det);
    const Eigen::Matrix2d& G = geom.inverse_jacobian;
    const auto& rule = ref.assembly_rule();
    const auto nq = static_cast<Eigen::Index>(rule.size());
    Eigen::VectorXd w(nq);
    for (Eigen::Index q = 0; q < nq; ++q)
        w(q) = rule.weights[static_cast<std::size_t>(q)] * geom.det;
    const Eigen::MatrixXd phi = ref.values() * scale;
    const std::array<Eigen::MatrixXd, 2> dphi{
        (ref.gradients()[0] * G(0, 0) + ref.gradients()[1] * G(1, 0)) * scale,
        (ref.gradients()[0] * G(0, 1) + ref.gradients()[1] * G(1, 1)) * scale};

    ElementOperators op;
    op.tau = 1.0 / geom.diameter;

    const Eigen::MatrixXd mass_k = phi.leftCols(nk).transpose() * w.asDiagonal() * phi.leftCols(nk);
    op.flux_mass = Eigen::MatrixXd::Zero(2 * nk, 2 * nk);
    op.flux_mass.topLeftCorner(nk, nk) = mass_k;
    op.flux_mass.bottomRightCorner(nk, nk) = mass_k;

    op.flux_scalar.resize(2 * nk, nl);
    for (int d = 0; d < 2; ++d)
        op.flux_scalar.middleRows(d * nk, nk)
            = -(dphi[static_cast<std::size_t>(d)].leftCols(nk).transpose() * w.asDiagonal() * phi.leftCols(nl));

    op.flux_trace = Eigen::MatrixXd::Zero(2 * nk, nh);
    const auto& frule = ref.face_rule();
    for (int i = 0; i < 3; ++i) {
        const Point2& n = geom.outward_normals[static_cast<std::size_t>(i)];
        const double len = geom.face_lengths[static_cast<std::size_t>(i)];
        for (std::size_t q = 0; q < frule.size(); ++q) {
            const double s = frule.points[q];
            const double wq = frule.weights[q] * len;
            const Eigen::VectorXd psi = projector.face_basis_values(i, s);
            const Eigen::VectorXd v = projector.basis_values(geom.face_point(i, s)).head(nk);
            for (int d = 0; d < 2; ++d)
                op.flux_trace.block(d * nk, i * nf, nk, nf).noalias() += (wq * n(d)) * v * psi.transpose();
        }
    }

    op.divergence = -op.flux_scalar.transpose();
    op.normal_flux = -op.flux_trace.transpose();

    Eigen::MatrixXd trace_blk(nh, nk1);
    for (int i = 0; i < 3; ++i)
        trace_blk.middleRows(i * nf, nf) = projector.trace_matrix(i);
    op.trace_jump = trace_blk * projector.postprocess_matrix();
    op.trace_jump.rightCols(nh) -= Eigen::MatrixXd::Identity(nh, nh);
    // the face basis is orthonormal, so the face mass is the identity
    op.stabilization = op.tau * op.trace_jump.transpose() * op.trace_jump;

    op.scalar_mass = phi.leftCols(nl).transpose() * w.asDiagonal() * phi.leftCols(nl);
    const Eigen::MatrixXd mass_l_post = phi.leftCols(nl).transpose() * w.asDiagonal() * phi;
    op.interpolation_coupling = mass_l_post * projector.nodal_inverse();
    op.nodal_postprocess = projector.nodal_map() * projector.postprocess_matrix();
    return op;
}

// ---------------------------------------------------------------------------

HdgDiscretization::HdgDiscretization(Mesh mesh, DegreeConfig config)
    : mesh_(std::move(mesh))
    , ref_(std::make_unique<ReferenceElements>(config))
{
    const int ne = mesh_.num_elements();
    if (ne == 0)
        throw MeshError("HdgDiscretization: empty mesh");
    (void)classify_faces(mesh_);

    interior_index_.assign(static_cast<std::size_t>(mesh_.num_faces()), -1);
    for (int f = 0; f < mesh_.num_faces(); ++f)
        if (!mesh_.face(f).is_boundary())
            interior_index_[static_cast<std::size_t>(f)] = num_interior_++;

    projectors_.reserve(static_cast<std::size_t>(ne));
    for (int e = 0; e < ne; ++e)
        projectors_.emplace_back(mesh_, e, *ref_);
    operators_.resize(static_cast<std::size_t>(ne));
    parallel_for(static_cast<std::size_t>(ne), [this](std::size_t e) {
        operators_[e] = assemble_element(projectors_[e], *ref_);
    });
}

FieldState HdgDiscretization::zero_state() const
{
    FieldState s;
    const int ne = num_elements();
    s.q = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ne) * flux_dim());
    s.u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ne) * scalar_dim());
    s.uhat = Eigen::VectorXd::Zero(num_trace_dofs());
    s.ustar = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ne) * post_dim());
    return s;
}

Eigen::VectorXd HdgDiscretization::local_trace(const Eigen::VectorXd& uhat, int e) const
{
    const int nf = face_dim();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(3 * nf);
    const auto& faces = mesh_.element_faces(e);
    for (int i = 0; i < 3; ++i) {
        const int g = interior_index(faces[static_cast<std::size_t>(i)]);
        if (g >= 0)
            out.segment(i * nf, nf) = uhat.segment(static_cast<Eigen::Index>(g) * nf, nf);
    }
    return out;
}

Eigen::VectorXd HdgDiscretization::local_vector(const FieldState& state, int e) const
{
    const int nq = flux_dim();
    const int nl = scalar_dim();
    Eigen::VectorXd x(local_dim());
    x.head(nq) = state.q.segment(static_cast<Eigen::Index>(e) * nq, nq);
    x.segment(nq, nl) = state.u.segment(static_cast<Eigen::Index>(e) * nl, nl);
    x.tail(trace_dim()) = local_trace(state.uhat, e);
    return x;
}

void HdgDiscretization::update_postprocessed(FieldState& state) const
{
    const int nl = scalar_dim();
    const int nk1 = post_dim();
    state.ustar.resize(static_cast<Eigen::Index>(num_elements()) * nk1);
    for (int e = 0; e < num_elements(); ++e)
        state.ustar.segment(static_cast<Eigen::Index>(e) * nk1, nk1) = projector(e).postprocess(
            state.u.segment(static_cast<Eigen::Index>(e) * nl, nl), local_trace(state.uhat, e));
}

Eigen::VectorXd HdgDiscretization::scalar_load(int e, const ScalarField& f) const
{
    const auto& p = projector(e);
    const auto& rule = ref_->error_rule();
    const auto& table = ref_->error_values();
    const int nl = scalar_dim();
    const double det = p.geometry().det;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(nl);
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const double fx = f(p.geometry().map(rule.points[q]));
        if (!std::isfinite(fx))
            throw EvaluationError("non-finite source value on element " + std::to_string(e));
        b.noalias() += (rule.weights[q] * fx) * table.row(static_cast<Eigen::Index>(q)).head(nl).transpose();
    }
    return b * std::sqrt(det);
}

std::vector<Eigen::VectorXd> HdgDiscretization::scalar_loads(const ScalarField& f) const
{
    std::vector<Eigen::VectorXd> rhs(static_cast<std::size_t>(num_elements()), Eigen::VectorXd::Zero(local_dim()));
    for (int e = 0; e < num_elements(); ++e)
        rhs[static_cast<std::size_t>(e)].segment(flux_dim(), scalar_dim()) = scalar_load(e, f);
    return rhs;
}

// ---------------------------------------------------------------------------

struct CondensedSystem::Factorization {
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
};

CondensedSystem::CondensedSystem(const HdgDiscretization& disc, double sigma,
                                 std::span<const Eigen::MatrixXd> reaction_jacobians)
    : disc_(&disc)
    , sigma_(sigma)
{
    const int ne = disc.num_elements();
    const int ny = disc.flux_dim() + disc.scalar_dim();
    const int nh = disc.trace_dim();
    const int nf = disc.face_dim();
    if (!reaction_jacobians.empty() && static_cast<int>(reaction_jacobians.size()) != ne)
        throw InvalidArgument("CondensedSystem: one reaction Jacobian per element expected");

    inner_inverse_.resize(static_cast<std::size_t>(ne));
    inner_to_trace_.resize(static_cast<std::size_t>(ne));
    trace_from_inner_.resize(static_cast<std::size_t>(ne));
    std::vector<Eigen::MatrixXd> condensed(static_cast<std::size_t>(ne));

    parallel_for(static_cast<std::size_t>(ne), [&](std::size_t e) {
        Eigen::MatrixXd K = disc.operators(static_cast<int>(e)).local_matrix(sigma);
        if (!reaction_jacobians.empty())
            K.block(disc.flux_dim(), disc.flux_dim(), disc.scalar_dim(), disc.scalar_dim() + nh)
                += reaction_jacobians[e];
        Eigen::FullPivLU<Eigen::MatrixXd> lu(K.topLeftCorner(ny, ny));
        if (!lu.isInvertible())
            throw ConfigError("local (q, u) block is singular on element " + std::to_string(e)
                              + " for " + disc.config().name());
        inner_inverse_[e] = lu.inverse();
        inner_to_trace_[e] = inner_inverse_[e] * K.topRightCorner(ny, nh);
        trace_from_inner_[e] = K.bottomLeftCorner(nh, ny) * inner_inverse_[e];
        condensed[e] = K.bottomRightCorner(nh, nh) - K.bottomLeftCorner(nh, ny) * inner_to_trace_[e];
    });

    // element-ordered accumulation keeps the assembled values reproducible
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(ne) * static_cast<std::size_t>(nh * nh));
    for (int e = 0; e < ne; ++e) {
        const auto& faces = disc.mesh().element_faces(e);
        const auto& Kc = condensed[static_cast<std::size_t>(e)];
        for (int i = 0; i < 3; ++i) {
            const int gi = disc.interior_index(faces[static_cast<std::size_t>(i)]);
            if (gi < 0)
                continue;
            for (int j = 0; j < 3; ++j) {
                const int gj = disc.interior_index(faces[static_cast<std::size_t>(j)]);
                if (gj < 0)
                    continue;
                for (int a = 0; a < nf; ++a)
                    for (int b = 0; b < nf; ++b)
                        triplets.emplace_back(gi * nf + a, gj * nf + b, Kc(i * nf + a, j * nf + b));
            }
        }
    }
    const int n = disc.num_trace_dofs();
    matrix_.resize(n, n);
    matrix_.setFromTriplets(triplets.begin(), triplets.end());
    matrix_.makeCompressed();

    lu_ = std::make_unique<Factorization>();
    if (n > 0) {
        lu_->lu.analyzePattern(matrix_);
        lu_->lu.factorize(matrix_);
        if (lu_->lu.info() != Eigen::Success)
            throw LinearAlgebraError("sparse LU of the condensed matrix failed (" + std::to_string(n)
                                     + " unknowns): " + lu_->lu.lastErrorMessage());
    }
    ++factorizations_;
}

CondensedSystem::~CondensedSystem() = default;
CondensedSystem::CondensedSystem(CondensedSystem&&) noexcept = default;
CondensedSystem& CondensedSystem::operator=(CondensedSystem&&) noexcept = default;

Eigen::VectorXd CondensedSystem::condensed_rhs(std::span<const Eigen::VectorXd> local_rhs) const
{
    const HdgDiscretization& disc = *disc_;
    const int ne = disc.num_elements();
    const int ny = disc.flux_dim() + disc.scalar_dim();
    const int nh = disc.trace_dim();
    const int nf = disc.face_dim();
    if (static_cast<int>(local_rhs.size()) != ne)
        throw InvalidArgument("CondensedSystem: one local right-hand side per element expected");

    Eigen::VectorXd b = Eigen::VectorXd::Zero(disc.num_trace_dofs());
    for (int e = 0; e < ne; ++e) {
        const auto& g = local_rhs[static_cast<std::size_t>(e)];
        const Eigen::VectorXd bh = g.tail(nh) - trace_from_inner_[static_cast<std::size_t>(e)] * g.head(ny);
        const auto& faces = disc.mesh().element_faces(e);
        for (int i = 0; i < 3; ++i) {
            const int gi = disc.interior_index(faces[static_cast<std::size_t>(i)]);
            if (gi >= 0)
                b.segment(static_cast<Eigen::Index>(gi) * nf, nf) += bh.segment(i * nf, nf);
        }
    }
    return b;
}

FieldState CondensedSystem::solve(std::span<const Eigen::VectorXd> local_rhs) const
{
    const HdgDiscretization& disc = *disc_;
    const int ne = disc.num_elements();
    const int nq = disc.flux_dim();
    const int nl = disc.scalar_dim();
    const int ny = nq + nl;

    FieldState state = disc.zero_state();
    const Eigen::VectorXd b = condensed_rhs(local_rhs);
    if (b.size() > 0) {
        state.uhat = lu_->lu.solve(b);
        if (lu_->lu.info() != Eigen::Success || !state.uhat.allFinite())
            throw LinearAlgebraError("condensed solve failed");
    }
    for (int e = 0; e < ne; ++e) {
        const auto ue = static_cast<std::size_t>(e);
        const Eigen::VectorXd trace = disc.local_trace(state.uhat, e);
        const Eigen::VectorXd y = inner_inverse_[ue] * local_rhs[ue].head(ny) - inner_to_trace_[ue] * trace;
        state.q.segment(static_cast<Eigen::Index>(e) * nq, nq) = y.head(nq);
        state.u.segment(static_cast<Eigen::Index>(e) * nl, nl) = y.tail(nl);
    }
    disc.update_postprocessed(state);
    return state;
}

CondensedSystem condense(const HdgDiscretization& disc, double sigma)
{
    return CondensedSystem(disc, sigma);
}

FieldState solve_elliptic_projection(const HdgDiscretization& disc, const ScalarField& minus_laplacian)
{
    if (!minus_laplacian)
        throw ConfigError("elliptic projection needs -laplacian(u)");
    const CondensedSystem system(disc, 0.0);
    return system.solve(disc.scalar_loads(minus_laplacian));
}

double check_flux_continuity(const HdgDiscretization& disc, const FieldState& state)
{
    const int nq = disc.flux_dim();
    const int nl = disc.scalar_dim();
    const int nf = disc.face_dim();
    Eigen::VectorXd r = Eigen::VectorXd::Zero(disc.num_trace_dofs());
    for (int e = 0; e < disc.num_elements(); ++e) {
        const auto& op = disc.operators(e);
        const Eigen::VectorXd x = disc.local_vector(state, e);
        const Eigen::VectorXd re
            = op.normal_flux * x.head(nq) + op.stabilization.bottomRows(disc.trace_dim()) * x.tail(nl + disc.trace_dim());
        const auto& faces = disc.mesh().element_faces(e);
        for (int i = 0; i < 3; ++i) {
            const int gi = disc.interior_index(faces[static_cast<std::size_t>(i)]);
            if (gi >= 0)
                r.segment(static_cast<Eigen::Index>(gi) * nf, nf) += re.segment(i * nf, nf);
        }
    }
    return r.size() == 0 ? 0.0 : r.lpNorm<Eigen::Infinity>();
}

SystemResidual system_residual(const HdgDiscretization& disc, const FieldState& state, double sigma,
                               std::span<const Eigen::VectorXd> local_rhs)
{
    const int nq = disc.flux_dim();
    const int nl = disc.scalar_dim();
    const int nf = disc.face_dim();
    SystemResidual res;
    Eigen::VectorXd r = Eigen::VectorXd::Zero(disc.num_trace_dofs());
    for (int e = 0; e < disc.num_elements(); ++e) {
        const Eigen::VectorXd x = disc.local_vector(state, e);
        Eigen::VectorXd re = disc.operators(e).local_matrix(sigma) * x;
        if (!local_rhs.empty())
            re -= local_rhs[static_cast<std::size_t>(e)];
        res.flux = std::max(res.flux, re.head(nq).lpNorm<Eigen::Infinity>());
        res.scalar = std::max(res.scalar, re.segment(nq, nl).lpNorm<Eigen::Infinity>());
        const auto& faces = disc.mesh().element_faces(e);
        for (int i = 0; i < 3; ++i) {
            const int gi = disc.interior_index(faces[static_cast<std::size_t>(i)]);
            if (gi >= 0)
                r.segment(static_cast<Eigen::Index>(gi) * nf, nf) += re.segment(nq + nl + i * nf, nf);
        }
    }
    res.trace = r.size() == 0 ? 0.0 : r.lpNorm<Eigen::Infinity>();
    return res;
}

double state_scale(const FieldState& state)
{
    double s = 0.0;
    if (state.q.size() > 0)
        s = std::max(s, state.q.lpNorm<Eigen::Infinity>());
    if (state.u.size() > 0)
        s = std::max(s, state.u.lpNorm<Eigen::Infinity>());
    if (state.uhat.size() > 0)
        s = std::max(s, state.uhat.lpNorm<Eigen::Infinity>());
    return s;
}

} // namespace ihdg
