#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "ihdg/config.hpp"
#include "ihdg/mesh.hpp"
#include "ihdg/projection.hpp"

namespace ihdg {

/// Coefficients of (q_h, u_h, uhat_h) and the derived u_h* at one time level.
///
/// q is element-major with the x-components (P^k) first, then y; u and ustar
/// are element-major modal coefficients; uhat holds k+1 Legendre coefficients
/// per interior face, in interior-face order.
struct FieldState {
    Eigen::VectorXd q;
    Eigen::VectorXd u;
    Eigen::VectorXd uhat;
    Eigen::VectorXd ustar;
    double t = 0.0;
};

/// Per-element blocks of the reformulated (trace-flux-free) HDG system.
///
/// Local unknowns are ordered (q, u, uhat_K) with uhat_K the traces on the
/// three local faces (zero rows/columns are kept for boundary faces):
///
///   [ A_qq  A_qu          A_qh ] [q]
///   [ A_vq  S_uu + s M    S_uh ] [u]
///   [ A_hq  S_hu          S_hh ] [uhat]
///
/// where S is the stabilization <h_K^{-1}(Pi u* - uhat), Pi v* - vhat>_{dK}
/// and s the mass coefficient (0 steady, 2/dt for Crank-Nicolson).
struct ElementOperators {
    Eigen::MatrixXd flux_mass;        ///< (q, r)
    Eigen::MatrixXd flux_scalar;      ///< -(u, div r)
    Eigen::MatrixXd flux_trace;       ///< <uhat, r.n>
    Eigen::MatrixXd divergence;       ///< (div q, v)
    Eigen::MatrixXd normal_flux;      ///< -<q.n, vhat>
    Eigen::MatrixXd stabilization;    ///< over (u, uhat_K)
    Eigen::MatrixXd trace_jump;       ///< (u, uhat_K) -> Pi^partial_k u* - uhat per face
    Eigen::MatrixXd scalar_mass;      ///< (u, v)
    Eigen::MatrixXd interpolation_coupling; ///< B_F(i, n) = (v_i, L_n), L_n Lagrange basis of Z_h
    Eigen::MatrixXd nodal_postprocess;      ///< (u, uhat_K) -> u* at the Lagrange nodes
    double tau = 0.0;

    [[nodiscard]] int flux_dim() const noexcept { return static_cast<int>(flux_mass.rows()); }
    [[nodiscard]] int scalar_dim() const noexcept { return static_cast<int>(scalar_mass.rows()); }
    [[nodiscard]] int trace_dim() const noexcept { return static_cast<int>(flux_trace.cols()); }
    [[nodiscard]] int local_dim() const noexcept { return flux_dim() + scalar_dim() + trace_dim(); }

    /// Full local matrix with mass coefficient sigma.
    [[nodiscard]] Eigen::MatrixXd local_matrix(double sigma) const;
};

[[nodiscard]] ElementOperators assemble_element(const ElementProjector& projector, const ReferenceElements& ref);

/// Mesh, spaces and all per-element operators of one method.
class HdgDiscretization {
public:
    HdgDiscretization(Mesh mesh, DegreeConfig config);

    HdgDiscretization(const HdgDiscretization&) = delete;
    HdgDiscretization& operator=(const HdgDiscretization&) = delete;

    [[nodiscard]] const Mesh& mesh() const noexcept { return mesh_; }
    [[nodiscard]] const DegreeConfig& config() const noexcept { return ref_->config(); }
    [[nodiscard]] const ReferenceElements& reference() const noexcept { return *ref_; }
    [[nodiscard]] const ElementProjector& projector(int e) const { return projectors_[static_cast<std::size_t>(e)]; }
    [[nodiscard]] const ElementOperators& operators(int e) const { return operators_[static_cast<std::size_t>(e)]; }

    [[nodiscard]] int num_elements() const noexcept { return mesh_.num_elements(); }
    [[nodiscard]] int flux_dim() const noexcept { return 2 * ref_->flux_dim(); }
    [[nodiscard]] int scalar_dim() const noexcept { return ref_->scalar_dim(); }
    [[nodiscard]] int post_dim() const noexcept { return ref_->post_dim(); }
    [[nodiscard]] int face_dim() const noexcept { return ref_->face_dim(); }
    [[nodiscard]] int trace_dim() const noexcept { return 3 * ref_->face_dim(); }
    [[nodiscard]] int local_dim() const noexcept { return flux_dim() + scalar_dim() + trace_dim(); }

    /// Interior-face index of a face, -1 on the boundary.
    [[nodiscard]] int interior_index(int face) const { return interior_index_[static_cast<std::size_t>(face)]; }
    [[nodiscard]] int num_interior_faces() const noexcept { return num_interior_; }
    [[nodiscard]] int num_trace_dofs() const noexcept { return num_interior_ * face_dim(); }

    [[nodiscard]] FieldState zero_state() const;
    /// Traces of the three local faces of e, zero on boundary faces.
    [[nodiscard]] Eigen::VectorXd local_trace(const Eigen::VectorXd& uhat, int e) const;
    /// (q, u, uhat_K) of element e.
    [[nodiscard]] Eigen::VectorXd local_vector(const FieldState& state, int e) const;
    /// Recomputes state.ustar from (u, uhat).
    void update_postprocessed(FieldState& state) const;
    /// (f, v) for the W_h basis of e (over-integrated).
    [[nodiscard]] Eigen::VectorXd scalar_load(int e, const ScalarField& f) const;
    /// Per-element local right-hand sides with (f, v) in the scalar rows.
    [[nodiscard]] std::vector<Eigen::VectorXd> scalar_loads(const ScalarField& f) const;

private:
    Mesh mesh_;
    std::unique_ptr<ReferenceElements> ref_;
    std::vector<ElementProjector> projectors_;
    std::vector<ElementOperators> operators_;
    std::vector<int> interior_index_;
    int num_interior_ = 0;
};

/// Statically condensed system on the interior-face unknowns.
///
/// (q, u) are eliminated element by element; the global matrix is assembled in
/// element order and factorized once by a sparse LU with COLAMD ordering.
class CondensedSystem {
public:
    /// reaction_jacobians[e], when given, is an (nl x (nl + 3(k+1))) block added
    /// to the scalar rows / (u, uhat_K) columns of element e.
    CondensedSystem(const HdgDiscretization& disc, double sigma,
                    std::span<const Eigen::MatrixXd> reaction_jacobians = {});
    ~CondensedSystem();
    CondensedSystem(CondensedSystem&&) noexcept;
    CondensedSystem& operator=(CondensedSystem&&) noexcept;

    [[nodiscard]] const Eigen::SparseMatrix<double>& matrix() const noexcept { return matrix_; }
    [[nodiscard]] int size() const noexcept { return static_cast<int>(matrix_.rows()); }
    [[nodiscard]] double sigma() const noexcept { return sigma_; }
    [[nodiscard]] int factorizations() const noexcept { return factorizations_; }

    /// Condensed right-hand side for the given per-element local right-hand sides.
    [[nodiscard]] Eigen::VectorXd condensed_rhs(std::span<const Eigen::VectorXd> local_rhs) const;
    /// Solves and recovers (q, u, uhat); ustar is filled as well.
    [[nodiscard]] FieldState solve(std::span<const Eigen::VectorXd> local_rhs) const;

private:
    struct Factorization;

    const HdgDiscretization* disc_;
    double sigma_;
    int factorizations_ = 0;
    // per element: inverse of the (q,u) block, A_yy^{-1} A_yh and A_hy A_yy^{-1}
    std::vector<Eigen::MatrixXd> inner_inverse_;
    std::vector<Eigen::MatrixXd> inner_to_trace_;
    std::vector<Eigen::MatrixXd> trace_from_inner_;
    Eigen::SparseMatrix<double> matrix_;
    std::unique_ptr<Factorization> lu_;
};

/// Condensed operator with mass coefficient sigma (0 steady, 2/dt Crank-Nicolson).
[[nodiscard]] CondensedSystem condense(const HdgDiscretization& disc, double sigma);

/// Steady HDG approximation of (-grad u, u, u|faces) with data -lap u.
[[nodiscard]] FieldState solve_elliptic_projection(const HdgDiscretization& disc, const ScalarField& minus_laplacian);

/// Max over interior trace unknowns of the assembled trace-equation residual
/// sum_K [ -<q.n, vhat> + <h_K^{-1}(Pi u* - uhat), Pi v* - vhat> ] with v = 0.
[[nodiscard]] double check_flux_continuity(const HdgDiscretization& disc, const FieldState& state);

struct SystemResidual {
    double flux = 0.0;   ///< first equation, max abs over elements
    double scalar = 0.0; ///< second equation tested with v, max abs
    double trace = 0.0;  ///< second equation tested with vhat, assembled, max abs
};

/// Residual of the full (uncondensed) system K(sigma) x - rhs.
[[nodiscard]] SystemResidual system_residual(const HdgDiscretization& disc, const FieldState& state, double sigma,
                                             std::span<const Eigen::VectorXd> local_rhs);

/// Max abs coefficient of (q, u, uhat); used to scale residual tolerances.
[[nodiscard]] double state_scale(const FieldState& state);

} // namespace ihdg
