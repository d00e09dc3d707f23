#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ihdg/mesh.hpp"

namespace ihdg {

/// Dimension of P^m in two variables.
[[nodiscard]] constexpr int poly_dim(int m) noexcept { return m < 0 ? 0 : (m + 1) * (m + 2) / 2; }

/// Quadrature on the reference triangle {(0,0),(1,0),(0,1)}; weights sum to 1/2.
struct QuadratureRule {
    std::vector<Point2> points;
    std::vector<double> weights;
    int exactness = 0;

    [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
};

/// Quadrature on [0,1].
struct EdgeQuadrature {
    std::vector<double> points;
    std::vector<double> weights;
    int exactness = 0;

    [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
};

inline constexpr int max_quadrature_exactness = 20;

/// Collapsed (Duffy) Gauss-Legendre product rule exact for total degree <= exactness.
/// Throws UnsupportedDegree outside [0, 20].
[[nodiscard]] QuadratureRule tri_quadrature(int exactness);
[[nodiscard]] EdgeQuadrature edge_quadrature(int exactness);

/// Gauss-Legendre rule with n points on [0,1].
[[nodiscard]] EdgeQuadrature gauss_legendre(int n);

/// Gradients of a basis at a set of points: one (points x basis) matrix per direction.
using GradientTable = std::array<Eigen::MatrixXd, 2>;

/// Hierarchical L2-orthonormal basis of P^degree on the reference triangle.
///
/// Built by Gram-Schmidt on monomials of (x - 1/3, y - 1/3) in total-degree
/// order, so the first poly_dim(m) functions span P^m for every m <= degree.
class ModalBasis {
public:
    explicit ModalBasis(int degree);

    [[nodiscard]] int degree() const noexcept { return degree_; }
    [[nodiscard]] int size() const noexcept { return static_cast<int>(coeffs_.rows()); }

    [[nodiscard]] Eigen::VectorXd eval(const Point2& xi) const;
    /// Row 0: d/dx, row 1: d/dy.
    [[nodiscard]] Eigen::Matrix<double, 2, Eigen::Dynamic> eval_grad(const Point2& xi) const;
    /// Rows: d2/dx2, d2/dxdy, d2/dy2.
    [[nodiscard]] Eigen::Matrix<double, 3, Eigen::Dynamic> eval_hessian(const Point2& xi) const;

    /// Values at points: (points x basis).
    [[nodiscard]] Eigen::MatrixXd eval(std::span<const Point2> points) const;
    [[nodiscard]] GradientTable eval_grad(std::span<const Point2> points) const;

    /// Monomial coefficients (basis x monomials) in the centred variables.
    [[nodiscard]] const Eigen::MatrixXd& monomial_coefficients() const noexcept { return coeffs_; }

private:
    int degree_;
    std::vector<std::array<int, 2>> exponents_;
    Eigen::MatrixXd coeffs_;
};

/// Principal lattice {(i/m, j/m) : i, j >= 0, i + j <= m}; degree 0 gives the centroid.
[[nodiscard]] std::vector<Point2> lagrange_nodes(int degree);

/// Nodal basis of P^degree on the principal lattice, stored through the modal basis.
class LagrangeBasis {
public:
    explicit LagrangeBasis(int degree);

    [[nodiscard]] int degree() const noexcept { return modal_.degree(); }
    [[nodiscard]] int size() const noexcept { return modal_.size(); }
    [[nodiscard]] const std::vector<Point2>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] const ModalBasis& modal() const noexcept { return modal_; }

    /// Column n holds the modal coefficients of the n-th nodal function.
    [[nodiscard]] const Eigen::MatrixXd& modal_coefficients() const noexcept { return to_modal_; }
    /// Modal Vandermonde matrix V(n, j) = phi_j(node_n).
    [[nodiscard]] const Eigen::MatrixXd& vandermonde() const noexcept { return vandermonde_; }

    [[nodiscard]] Eigen::VectorXd eval(const Point2& xi) const;
    [[nodiscard]] Eigen::MatrixXd eval(std::span<const Point2> points) const;
    [[nodiscard]] GradientTable eval_grad(std::span<const Point2> points) const;

private:
    ModalBasis modal_;
    std::vector<Point2> nodes_;
    Eigen::MatrixXd vandermonde_;
    Eigen::MatrixXd to_modal_;
};

/// Orthonormal Legendre basis sqrt(2m+1) P_m(2s-1) on [0,1].
class EdgeBasis {
public:
    explicit EdgeBasis(int degree);

    [[nodiscard]] int degree() const noexcept { return degree_; }
    [[nodiscard]] int size() const noexcept { return degree_ + 1; }

    [[nodiscard]] Eigen::VectorXd eval(double s) const;
    [[nodiscard]] Eigen::VectorXd eval_derivative(double s) const;
    /// (points x basis)
    [[nodiscard]] Eigen::MatrixXd eval(std::span<const double> points) const;

private:
    int degree_;
};

} // namespace ihdg
