#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ihdg/config.hpp"
#include "ihdg/mesh.hpp"
#include "ihdg/ref_elements.hpp"

namespace ihdg {

using ScalarField = std::function<double(const Point2&)>;

/// Reference bases and quadrature rules shared by every element of one method.
class ReferenceElements {
public:
    explicit ReferenceElements(DegreeConfig config);

    [[nodiscard]] const DegreeConfig& config() const noexcept { return config_; }
    [[nodiscard]] int k() const noexcept { return config_.k; }

    [[nodiscard]] int flux_dim() const noexcept { return poly_dim(config_.k); }
    [[nodiscard]] int scalar_dim() const noexcept { return poly_dim(config_.scalar_degree()); }
    [[nodiscard]] int post_dim() const noexcept { return poly_dim(config_.k + 1); }
    [[nodiscard]] int face_dim() const noexcept { return config_.k + 1; }

    /// Modal basis of P^{k+1}; its leading blocks are the bases of P^k and P^l.
    [[nodiscard]] const ModalBasis& modal() const noexcept { return modal_; }
    [[nodiscard]] const LagrangeBasis& lagrange() const noexcept { return lagrange_; }
    [[nodiscard]] const EdgeBasis& edge() const noexcept { return edge_; }

    /// Exactness 2(k+1)+1, used for operator assembly.
    [[nodiscard]] const QuadratureRule& assembly_rule() const noexcept { return assembly_rule_; }
    [[nodiscard]] const EdgeQuadrature& face_rule() const noexcept { return face_rule_; }
    /// Exactness min(2(k+1)+10, 20), used for load vectors, projections of data and error norms.
    [[nodiscard]] const QuadratureRule& error_rule() const noexcept { return error_rule_; }
    [[nodiscard]] const EdgeQuadrature& error_face_rule() const noexcept { return error_face_rule_; }

    // modal tables at assembly_rule points, (points x basis)
    [[nodiscard]] const Eigen::MatrixXd& values() const noexcept { return values_; }
    [[nodiscard]] const GradientTable& gradients() const noexcept { return gradients_; }
    [[nodiscard]] const std::array<Eigen::MatrixXd, 3>& hessians() const noexcept { return hessians_; }
    // modal values at error_rule points
    [[nodiscard]] const Eigen::MatrixXd& error_values() const noexcept { return error_values_; }

private:
    DegreeConfig config_;
    ModalBasis modal_;
    LagrangeBasis lagrange_;
    EdgeBasis edge_;
    QuadratureRule assembly_rule_;
    EdgeQuadrature face_rule_;
    QuadratureRule error_rule_;
    EdgeQuadrature error_face_rule_;
    Eigen::MatrixXd values_;
    GradientTable gradients_;
    std::array<Eigen::MatrixXd, 3> hessians_;
    Eigen::MatrixXd error_values_;
};

/// Affine geometry of one triangle: x = v0 + J xi.
struct ElementGeometry {
    std::array<Point2, 3> vertices;
    Eigen::Matrix2d jacobian;
    Eigen::Matrix2d inverse_jacobian;
    double det = 0.0;
    double area = 0.0;
    double diameter = 0.0;
    std::array<int, 3> faces{};
    /// Endpoints of each local face in the orientation of the global face.
    std::array<std::array<Point2, 2>, 3> face_endpoints;
    std::array<Point2, 3> outward_normals;
    std::array<double, 3> face_lengths{};

    ElementGeometry(const Mesh& mesh, int element);

    [[nodiscard]] Point2 map(const Point2& xi) const { return vertices[0] + jacobian * xi; }
    [[nodiscard]] Point2 pull_back(const Point2& x) const { return inverse_jacobian * (x - vertices[0]); }
    [[nodiscard]] Point2 face_point(int local_face, double s) const
    {
        const auto& e = face_endpoints[static_cast<std::size_t>(local_face)];
        return e[0] + s * (e[1] - e[0]);
    }
};

/// Projections, interpolation and the local postprocessing on one element.
///
/// Element functions are expanded in the L2(K)-orthonormal modal basis
/// phi_j = phi_hat_j o F^{-1} / sqrt(det J) of P^{k+1}(K). Because the basis is
/// hierarchical, Pi^o_m of a coefficient vector is its leading poly_dim(m) block.
/// Trace functions on a face use the orthonormal Legendre basis in the global
/// face parametrisation, so neighbouring elements share coefficients.
class ElementProjector {
public:
    ElementProjector(const Mesh& mesh, int element, const ReferenceElements& ref);

    [[nodiscard]] const ElementGeometry& geometry() const noexcept { return geom_; }
    [[nodiscard]] int scalar_dim() const noexcept { return nl_; }
    [[nodiscard]] int post_dim() const noexcept { return nk1_; }
    [[nodiscard]] int face_dim() const noexcept { return nf_; }
    [[nodiscard]] int trace_dim() const noexcept { return 3 * nf_; }

    /// Physical modal basis values / gradients at a physical point.
    [[nodiscard]] Eigen::VectorXd basis_values(const Point2& x) const;
    [[nodiscard]] Eigen::Matrix<double, 2, Eigen::Dynamic> basis_gradients(const Point2& x) const;
    /// Evaluates a modal expansion (any leading block of P^{k+1}) at x.
    [[nodiscard]] double evaluate(const Eigen::Ref<const Eigen::VectorXd>& coeffs, const Point2& x) const;
    /// Face basis values at parameter s of local face i (scaled to be orthonormal on the face).
    [[nodiscard]] Eigen::VectorXd face_basis_values(int local_face, double s) const;

    /// L2 projection onto P^m(K), m <= k+1.
    [[nodiscard]] Eigen::VectorXd project_element(const ScalarField& f, int m) const;
    /// L2 projection onto P^k of local face i.
    [[nodiscard]] Eigen::VectorXd project_face(int local_face, const ScalarField& g) const;

    /// Pi^partial_k of the trace of a P^{k+1} function on local face i: (face_dim x post_dim).
    [[nodiscard]] const Eigen::MatrixXd& trace_matrix(int local_face) const
    {
        return trace_[static_cast<std::size_t>(local_face)];
    }

    /// Linear map (u_h, uhat_h on the three faces) -> u_h* in P^{k+1}(K).
    [[nodiscard]] const Eigen::MatrixXd& postprocess_matrix() const noexcept { return post_; }
    [[nodiscard]] Eigen::VectorXd postprocess(const Eigen::Ref<const Eigen::VectorXd>& u,
                                              const Eigen::Ref<const Eigen::VectorXd>& uhat) const;

    /// Pi*_{k+1} f = postprocess(Pi^o_l f, Pi^partial_k f).
    [[nodiscard]] Eigen::VectorXd pi_star(const ScalarField& f) const;

    /// Lagrange nodes of Z_h mapped to K.
    [[nodiscard]] const std::vector<Point2>& nodes() const noexcept { return nodes_; }
    /// N(n, j) = phi_j(x_n): modal coefficients in P^{k+1} -> nodal values.
    [[nodiscard]] const Eigen::MatrixXd& nodal_map() const noexcept { return nodal_; }
    /// Inverse of nodal_map(): column n holds the modal coefficients of the n-th Lagrange function.
    [[nodiscard]] const Eigen::MatrixXd& nodal_inverse() const noexcept { return nodal_inverse_; }
    /// Modal coefficients of I_h g.
    [[nodiscard]] Eigen::VectorXd interpolate(const ScalarField& g) const;
    /// Modal coefficients of the interpolant with given nodal values.
    [[nodiscard]] Eigen::VectorXd interpolate_nodal(const Eigen::Ref<const Eigen::VectorXd>& nodal_values) const;

private:
    const ReferenceElements* ref_;
    ElementGeometry geom_;
    int nl_;
    int nk1_;
    int nf_;
    std::array<Eigen::MatrixXd, 3> trace_;
    Eigen::MatrixXd post_;
    std::vector<Point2> nodes_;
    Eigen::MatrixXd nodal_;
    Eigen::MatrixXd nodal_inverse_;
};

/// L2 projection onto P^k(e) of global face f, in the face's own orientation.
[[nodiscard]] Eigen::VectorXd project_face(const Mesh& mesh, int face, const ScalarField& g, int k);

} // namespace ihdg
