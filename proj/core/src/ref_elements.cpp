#include "ihdg/ref_elements.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/LU>

#include "ihdg/errors.hpp"

namespace ihdg {

namespace {

constexpr double centre = 1.0 / 3.0;

/// Legendre P_0..P_n and derivatives at x in [-1,1].
void legendre(int n, double x, Eigen::VectorXd& p, Eigen::VectorXd* dp = nullptr)
{
    p.resize(n + 1);
    p(0) = 1.0;
    if (n >= 1)
        p(1) = x;
    for (int m = 2; m <= n; ++m)
        p(m) = ((2.0 * m - 1.0) * x * p(m - 1) - (m - 1.0) * p(m - 2)) / m;
    if (dp) {
        dp->resize(n + 1);
        (*dp)(0) = 0.0;
        // P'_m = m P_{m-1} + x P'_{m-1}
        for (int m = 1; m <= n; ++m)
            (*dp)(m) = m * p(m - 1) + x * (*dp)(m - 1);
    }
}

double int_pow(double x, int e)
{
    double r = 1.0;
    for (int i = 0; i < e; ++i)
        r *= x;
    return r;
}

} // namespace

EdgeQuadrature gauss_legendre(int n)
{
    if (n < 1)
        throw InvalidArgument("gauss_legendre: need at least one point");
    EdgeQuadrature rule;
    rule.points.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    rule.exactness = 2 * n - 1;
    Eigen::VectorXd p;
    Eigen::VectorXd dp;
    for (int i = 0; i < n; ++i) {
        // Chebyshev initial guess, Newton on P_n
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            legendre(n, x, p, &dp);
            const double dx = p(n) / dp(n);
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        legendre(n, x, p, &dp);
        const double w = 2.0 / ((1.0 - x * x) * dp(n) * dp(n));
        // map [-1,1] -> [0,1], ascending order
        rule.points[static_cast<std::size_t>(n - 1 - i)] = 0.5 * (x + 1.0);
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = 0.5 * w;
    }
    return rule;
}

EdgeQuadrature edge_quadrature(int exactness)
{
    if (exactness < 0 || exactness > max_quadrature_exactness)
        throw UnsupportedDegree("edge quadrature exactness " + std::to_string(exactness) + " not in [0, 20]");
    auto rule = gauss_legendre(exactness / 2 + 1);
    rule.exactness = exactness;
    return rule;
}

QuadratureRule tri_quadrature(int exactness)
{
    if (exactness < 0 || exactness > max_quadrature_exactness)
        throw UnsupportedDegree("triangle quadrature exactness " + std::to_string(exactness)
                                + " not in [0, 20]");
    // x = a (1 - b), y = b, dx dy = (1 - b) da db. A degree-d integrand has
    // degree d in a and d + 1 in b.
    const int n = (exactness + 2) / 2 + ((exactness + 2) % 2);
    const auto gl = gauss_legendre(std::max(1, n));
    QuadratureRule rule;
    rule.exactness = exactness;
    rule.points.reserve(gl.size() * gl.size());
    rule.weights.reserve(gl.size() * gl.size());
    for (std::size_t j = 0; j < gl.size(); ++j) {
        const double b = gl.points[j];
        for (std::size_t i = 0; i < gl.size(); ++i) {
            const double a = gl.points[i];
            rule.points.emplace_back(a * (1.0 - b), b);
            rule.weights.push_back(gl.weights[i] * gl.weights[j] * (1.0 - b));
        }
    }
    return rule;
}

// ---------------------------------------------------------------------------

ModalBasis::ModalBasis(int degree)
    : degree_(degree)
{
    if (degree < 0 || 2 * degree > max_quadrature_exactness)
        throw UnsupportedDegree("modal basis degree " + std::to_string(degree) + " not in [0, 10]");

    for (int d = 0; d <= degree; ++d)
        for (int j = 0; j <= d; ++j)
            exponents_.push_back({d - j, j});
    const int n = static_cast<int>(exponents_.size());

    const auto rule = tri_quadrature(2 * degree);
    const int nq = static_cast<int>(rule.size());
    Eigen::MatrixXd mono(nq, n);
    for (int q = 0; q < nq; ++q) {
        const double X = rule.points[static_cast<std::size_t>(q)].x() - centre;
        const double Y = rule.points[static_cast<std::size_t>(q)].y() - centre;
        for (int a = 0; a < n; ++a)
            mono(q, a) = int_pow(X, exponents_[static_cast<std::size_t>(a)][0])
                * int_pow(Y, exponents_[static_cast<std::size_t>(a)][1]);
    }
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(rule.weights.data(), nq);

    // Modified Gram-Schmidt with one re-orthogonalisation pass.
    coeffs_ = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd values(nq, n);
    for (int a = 0; a < n; ++a) {
        Eigen::VectorXd c = Eigen::VectorXd::Unit(n, a);
        Eigen::VectorXd v = mono.col(a);
        for (int pass = 0; pass < 2; ++pass) {
            for (int b = 0; b < a; ++b) {
                const double proj = (values.col(b).array() * v.array() * w.array()).sum();
                v -= proj * values.col(b);
                c -= proj * coeffs_.row(b).transpose();
            }
        }
        const double nrm = std::sqrt((v.array().square() * w.array()).sum());
        coeffs_.row(a) = c.transpose() / nrm;
        values.col(a) = v / nrm;
    }
}

Eigen::VectorXd ModalBasis::eval(const Point2& xi) const
{
    const double X = xi.x() - centre;
    const double Y = xi.y() - centre;
    Eigen::VectorXd m(static_cast<Eigen::Index>(exponents_.size()));
    for (std::size_t a = 0; a < exponents_.size(); ++a)
        m(static_cast<Eigen::Index>(a)) = int_pow(X, exponents_[a][0]) * int_pow(Y, exponents_[a][1]);
    return coeffs_ * m;
}

Eigen::Matrix<double, 2, Eigen::Dynamic> ModalBasis::eval_grad(const Point2& xi) const
{
    const double X = xi.x() - centre;
    const double Y = xi.y() - centre;
    const auto n = static_cast<Eigen::Index>(exponents_.size());
    Eigen::Matrix<double, Eigen::Dynamic, 2> dm(n, 2);
    for (Eigen::Index a = 0; a < n; ++a) {
        const int i = exponents_[static_cast<std::size_t>(a)][0];
        const int j = exponents_[static_cast<std::size_t>(a)][1];
        dm(a, 0) = i == 0 ? 0.0 : i * int_pow(X, i - 1) * int_pow(Y, j);
        dm(a, 1) = j == 0 ? 0.0 : j * int_pow(X, i) * int_pow(Y, j - 1);
    }
    return (coeffs_ * dm).transpose();
}

Eigen::Matrix<double, 3, Eigen::Dynamic> ModalBasis::eval_hessian(const Point2& xi) const
{
    const double X = xi.x() - centre;
    const double Y = xi.y() - centre;
    const auto n = static_cast<Eigen::Index>(exponents_.size());
    Eigen::Matrix<double, Eigen::Dynamic, 3> hm(n, 3);
    for (Eigen::Index a = 0; a < n; ++a) {
        const int i = exponents_[static_cast<std::size_t>(a)][0];
        const int j = exponents_[static_cast<std::size_t>(a)][1];
        hm(a, 0) = i < 2 ? 0.0 : i * (i - 1) * int_pow(X, i - 2) * int_pow(Y, j);
        hm(a, 1) = (i < 1 || j < 1) ? 0.0 : i * j * int_pow(X, i - 1) * int_pow(Y, j - 1);
        hm(a, 2) = j < 2 ? 0.0 : j * (j - 1) * int_pow(X, i) * int_pow(Y, j - 2);
    }
    return (coeffs_ * hm).transpose();
}

Eigen::MatrixXd ModalBasis::eval(std::span<const Point2> points) const
{
    Eigen::MatrixXd out(static_cast<Eigen::Index>(points.size()), size());
    for (std::size_t q = 0; q < points.size(); ++q)
        out.row(static_cast<Eigen::Index>(q)) = eval(points[q]).transpose();
    return out;
}

GradientTable ModalBasis::eval_grad(std::span<const Point2> points) const
{
    GradientTable out{Eigen::MatrixXd(static_cast<Eigen::Index>(points.size()), size()),
                      Eigen::MatrixXd(static_cast<Eigen::Index>(points.size()), size())};
    for (std::size_t q = 0; q < points.size(); ++q) {
        const auto g = eval_grad(points[q]);
        out[0].row(static_cast<Eigen::Index>(q)) = g.row(0);
        out[1].row(static_cast<Eigen::Index>(q)) = g.row(1);
    }
    return out;
}

// ---------------------------------------------------------------------------

std::vector<Point2> lagrange_nodes(int degree)
{
    if (degree < 0)
        throw InvalidArgument("lagrange_nodes: negative degree");
    if (degree == 0)
        return {Point2(centre, centre)};
    std::vector<Point2> nodes;
    nodes.reserve(static_cast<std::size_t>(poly_dim(degree)));
    for (int j = 0; j <= degree; ++j)
        for (int i = 0; i + j <= degree; ++i)
            nodes.emplace_back(static_cast<double>(i) / degree, static_cast<double>(j) / degree);
    return nodes;
}

LagrangeBasis::LagrangeBasis(int degree)
    : modal_(degree)
    , nodes_(lagrange_nodes(degree))
{
    vandermonde_ = modal_.eval(std::span<const Point2>(nodes_));
    Eigen::FullPivLU<Eigen::MatrixXd> lu(vandermonde_);
    if (!lu.isInvertible())
        throw Error("Lagrange nodes are not unisolvent for degree " + std::to_string(degree));
    to_modal_ = lu.inverse();
}

Eigen::VectorXd LagrangeBasis::eval(const Point2& xi) const
{
    return to_modal_.transpose() * modal_.eval(xi);
}

Eigen::MatrixXd LagrangeBasis::eval(std::span<const Point2> points) const
{
    return modal_.eval(points) * to_modal_;
}

GradientTable LagrangeBasis::eval_grad(std::span<const Point2> points) const
{
    auto g = modal_.eval_grad(points);
    return {g[0] * to_modal_, g[1] * to_modal_};
}

// ---------------------------------------------------------------------------

EdgeBasis::EdgeBasis(int degree)
    : degree_(degree)
{
    if (degree < 0)
        throw UnsupportedDegree("edge basis degree must be >= 0");
}

Eigen::VectorXd EdgeBasis::eval(double s) const
{
    Eigen::VectorXd p;
    legendre(degree_, 2.0 * s - 1.0, p);
    for (int m = 0; m <= degree_; ++m)
        p(m) *= std::sqrt(2.0 * m + 1.0);
    return p;
}

Eigen::VectorXd EdgeBasis::eval_derivative(double s) const
{
    Eigen::VectorXd p;
    Eigen::VectorXd dp;
    legendre(degree_, 2.0 * s - 1.0, p, &dp);
    for (int m = 0; m <= degree_; ++m)
        dp(m) *= 2.0 * std::sqrt(2.0 * m + 1.0);
    return dp;
}

Eigen::MatrixXd EdgeBasis::eval(std::span<const double> points) const
{
    Eigen::MatrixXd out(static_cast<Eigen::Index>(points.size()), size());
    for (std::size_t q = 0; q < points.size(); ++q)
        out.row(static_cast<Eigen::Index>(q)) = eval(points[q]).transpose();
    return out;
}

} // namespace ihdg
