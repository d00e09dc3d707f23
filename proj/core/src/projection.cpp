#include "ihdg/projection.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>

#include "ihdg/errors.hpp"

namespace ihdg {

ReferenceElements::ReferenceElements(DegreeConfig config)
    : config_(config)
    , modal_(config.k + 1)
    , lagrange_(config.k + 1)
    , edge_(config.k)
    , assembly_rule_(tri_quadrature(2 * (config.k + 1) + 1))
    , face_rule_(edge_quadrature(2 * (config.k + 1) + 1))
    , error_rule_(tri_quadrature(std::min(2 * (config.k + 1) + 10, max_quadrature_exactness)))
    , error_face_rule_(edge_quadrature(std::min(2 * (config.k + 1) + 10, max_quadrature_exactness)))
{
    const std::span<const Point2> pts(assembly_rule_.points);
    values_ = modal_.eval(pts);
    gradients_ = modal_.eval_grad(pts);
    for (auto& h : hessians_)
        h.resize(static_cast<Eigen::Index>(pts.size()), modal_.size());
    for (std::size_t q = 0; q < pts.size(); ++q) {
        const auto hq = modal_.eval_hessian(pts[q]);
        for (int c = 0; c < 3; ++c)
            hessians_[static_cast<std::size_t>(c)].row(static_cast<Eigen::Index>(q)) = hq.row(c);
    }
    error_values_ = modal_.eval(std::span<const Point2>(error_rule_.points));
}

ElementGeometry::ElementGeometry(const Mesh& mesh, int element)
{
    const auto& t = mesh.triangle(element);
    for (int i = 0; i < 3; ++i)
        vertices[static_cast<std::size_t>(i)] = mesh.vertex(t[static_cast<std::size_t>(i)]);
    jacobian.col(0) = vertices[1] - vertices[0];
    jacobian.col(1) = vertices[2] - vertices[0];
    det = jacobian.determinant();
    if (det < 2e-14)
        throw MeshError("element " + std::to_string(element) + " is degenerate or clockwise");
    inverse_jacobian = jacobian.inverse();
    area = 0.5 * det;
    diameter = mesh.diameter(element);
    faces = mesh.element_faces(element);
    for (int i = 0; i < 3; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const Face& f = mesh.face(faces[ui]);
        face_endpoints[ui] = {mesh.vertex(f.vertices[0]), mesh.vertex(f.vertices[1])};
        const Point2 d = vertices[(ui + 1) % 3] - vertices[ui];
        face_lengths[ui] = d.norm();
        outward_normals[ui] = Point2(d.y(), -d.x()) / face_lengths[ui];
    }
}

ElementProjector::ElementProjector(const Mesh& mesh, int element, const ReferenceElements& ref)
    : ref_(&ref)
    , geom_(mesh, element)
    , nl_(ref.scalar_dim())
    , nk1_(ref.post_dim())
    , nf_(ref.face_dim())
{
    const double scale = 1.0 / std::sqrt(geom_.det);
    const Eigen::Matrix2d G = geom_.inverse_jacobian;
    const Eigen::Matrix2d GGt = G * G.transpose();
    const auto& rule = ref.assembly_rule();
    const auto nq = static_cast<Eigen::Index>(rule.size());

    // physical tables at the assembly points
    const Eigen::MatrixXd phi = ref.values() * scale;
    Eigen::MatrixXd dphi_x = (ref.gradients()[0] * G(0, 0) + ref.gradients()[1] * G(1, 0)) * scale;
    Eigen::MatrixXd dphi_y = (ref.gradients()[0] * G(0, 1) + ref.gradients()[1] * G(1, 1)) * scale;
    Eigen::MatrixXd lap = (ref.hessians()[0] * GGt(0, 0) + 2.0 * ref.hessians()[1] * GGt(0, 1)
                           + ref.hessians()[2] * GGt(1, 1))
        * scale;
    Eigen::VectorXd w(nq);
    for (Eigen::Index q = 0; q < nq; ++q)
        w(q) = rule.weights[static_cast<std::size_t>(q)] * geom_.det;

    const Eigen::MatrixXd mass = phi.transpose() * w.asDiagonal() * phi;
    const Eigen::MatrixXd stiff = dphi_x.transpose() * w.asDiagonal() * dphi_x
        + dphi_y.transpose() * w.asDiagonal() * dphi_y;

    // Trace projections and boundary terms <uhat, n . grad z> of the postprocessing.
    const auto& frule = ref.face_rule();
    Eigen::MatrixXd boundary_term = Eigen::MatrixXd::Zero(nk1_, 3 * nf_);
    for (int i = 0; i < 3; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        trace_[ui] = Eigen::MatrixXd::Zero(nf_, nk1_);
        const Point2& n = geom_.outward_normals[ui];
        const double len = geom_.face_lengths[ui];
        for (std::size_t q = 0; q < frule.size(); ++q) {
            const double s = frule.points[q];
            const double wq = frule.weights[q] * len;
            const Point2 x = geom_.face_point(i, s);
            const Eigen::VectorXd psi = face_basis_values(i, s);
            const Eigen::VectorXd v = basis_values(x);
            const Eigen::VectorXd dn = (n.transpose() * basis_gradients(x)).transpose();
            trace_[ui].noalias() += wq * psi * v.transpose();
            boundary_term.middleCols(i * nf_, nf_).noalias() += wq * dn * psi.transpose();
        }
    }

    // Stacked local system: rows < nl are the moment conditions against P^l,
    // the remaining rows are the energy conditions against the modal functions
    // of degree l+1..k+1, which span the L2-orthogonal complement of P^l in P^{k+1}.
    Eigen::MatrixXd A(nk1_, nk1_);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nk1_, nl_ + 3 * nf_);
    A.topRows(nl_) = mass.topRows(nl_);
    rhs.topLeftCorner(nl_, nl_) = mass.topLeftCorner(nl_, nl_);
    if (nk1_ > nl_) {
        const int nperp = nk1_ - nl_;
        A.bottomRows(nperp) = stiff.bottomRows(nperp);
        // -(u, lap z)
        rhs.block(nl_, 0, nperp, nl_)
            = -(lap.rightCols(nperp).transpose() * w.asDiagonal() * phi.leftCols(nl_));
        rhs.block(nl_, nl_, nperp, 3 * nf_) = boundary_term.bottomRows(nperp);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible())
        throw LinearAlgebraError("postprocessing system is singular on element " + std::to_string(element));
    post_ = lu.solve(rhs);

    nodes_.reserve(ref.lagrange().nodes().size());
    for (const auto& xi : ref.lagrange().nodes())
        nodes_.push_back(geom_.map(xi));
    nodal_ = ref.lagrange().vandermonde() * scale;
    nodal_inverse_ = ref.lagrange().modal_coefficients() / scale;
}

Eigen::VectorXd ElementProjector::basis_values(const Point2& x) const
{
    return ref_->modal().eval(geom_.pull_back(x)) / std::sqrt(geom_.det);
}

Eigen::Matrix<double, 2, Eigen::Dynamic> ElementProjector::basis_gradients(const Point2& x) const
{
    return geom_.inverse_jacobian.transpose() * ref_->modal().eval_grad(geom_.pull_back(x)) / std::sqrt(geom_.det);
}

double ElementProjector::evaluate(const Eigen::Ref<const Eigen::VectorXd>& coeffs, const Point2& x) const
{
    return basis_values(x).head(coeffs.size()).dot(coeffs);
}

Eigen::VectorXd ElementProjector::face_basis_values(int local_face, double s) const
{
    return ref_->edge().eval(s) / std::sqrt(geom_.face_lengths[static_cast<std::size_t>(local_face)]);
}

Eigen::VectorXd ElementProjector::project_element(const ScalarField& f, int m) const
{
    if (m < 0 || m > ref_->config().k + 1)
        throw InvalidArgument("project_element: degree " + std::to_string(m) + " outside [0, k+1]");
    const int n = poly_dim(m);
    const auto& rule = ref_->error_rule();
    const auto& table = ref_->error_values();
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const double fx = f(geom_.map(rule.points[q]));
        c.noalias() += (rule.weights[q] * fx) * table.row(static_cast<Eigen::Index>(q)).head(n).transpose();
    }
    // w * det * f * phi_hat / sqrt(det)
    return c * std::sqrt(geom_.det);
}

Eigen::VectorXd ElementProjector::project_face(int local_face, const ScalarField& g) const
{
    const auto& rule = ref_->error_face_rule();
    const double len = geom_.face_lengths[static_cast<std::size_t>(local_face)];
    Eigen::VectorXd c = Eigen::VectorXd::Zero(nf_);
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const double s = rule.points[q];
        c.noalias() += (rule.weights[q] * len * g(geom_.face_point(local_face, s))) * face_basis_values(local_face, s);
    }
    return c;
}

Eigen::VectorXd ElementProjector::postprocess(const Eigen::Ref<const Eigen::VectorXd>& u,
                                              const Eigen::Ref<const Eigen::VectorXd>& uhat) const
{
    if (u.size() != nl_ || uhat.size() != 3 * nf_)
        throw InvalidArgument("postprocess: coefficient sizes do not match the element spaces");
    return post_.leftCols(nl_) * u + post_.rightCols(3 * nf_) * uhat;
}

Eigen::VectorXd ElementProjector::pi_star(const ScalarField& f) const
{
    const Eigen::VectorXd u = project_element(f, ref_->config().scalar_degree());
    Eigen::VectorXd uhat(3 * nf_);
    for (int i = 0; i < 3; ++i)
        uhat.segment(i * nf_, nf_) = project_face(i, f);
    return postprocess(u, uhat);
}

Eigen::VectorXd ElementProjector::interpolate(const ScalarField& g) const
{
    Eigen::VectorXd values(static_cast<Eigen::Index>(nodes_.size()));
    for (std::size_t n = 0; n < nodes_.size(); ++n) {
        values(static_cast<Eigen::Index>(n)) = g(nodes_[n]);
        if (!std::isfinite(values(static_cast<Eigen::Index>(n))))
            throw EvaluationError("interpolate: non-finite value at a Lagrange node");
    }
    return interpolate_nodal(values);
}

Eigen::VectorXd ElementProjector::interpolate_nodal(const Eigen::Ref<const Eigen::VectorXd>& nodal_values) const
{
    return nodal_inverse_ * nodal_values;
}

Eigen::VectorXd project_face(const Mesh& mesh, int face, const ScalarField& g, int k)
{
    const Face& f = mesh.face(face);
    const Point2 a = mesh.vertex(f.vertices[0]);
    const Point2 b = mesh.vertex(f.vertices[1]);
    const double len = (b - a).norm();
    const EdgeBasis basis(k);
    const auto rule = edge_quadrature(std::min(2 * (k + 1) + 10, max_quadrature_exactness));
    Eigen::VectorXd c = Eigen::VectorXd::Zero(k + 1);
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const double s = rule.points[q];
        c.noalias() += (rule.weights[q] * len * g(a + s * (b - a))) * basis.eval(s) / std::sqrt(len);
    }
    return c;
}

} // namespace ihdg
