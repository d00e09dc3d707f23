#include <cmath>

#include <gtest/gtest.h>

#include "ihdg/errors.hpp"
#include "ihdg/ref_elements.hpp"
#include "test_support.hpp"

using namespace ihdg;

namespace {

double factorial(int n)
{
    return std::tgamma(n + 1.0);
}

// int_T x^a y^b over the reference triangle
double monomial_integral(int a, int b)
{
    return factorial(a) * factorial(b) / factorial(a + b + 2);
}

double integrate(const QuadratureRule& q, const std::function<double(const Point2&)>& f)
{
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i)
        s += q.weights[i] * f(q.points[i]);
    return s;
}

// Composite edge-midpoint rule on a uniform 4^L split of the reference
// triangle; errors expand in even powers of the subtriangle size.
double composite_midpoint(const std::function<double(const Point2&)>& f, int n)
{
    const double h = 1.0 / n;
    const double area = 0.5 * h * h;
    double s = 0.0;
    auto tri = [&](Point2 a, Point2 b, Point2 c) {
        s += area / 3.0 * (f(0.5 * (a + b)) + f(0.5 * (b + c)) + f(0.5 * (c + a)));
    };
    for (int i = 0; i < n; ++i)
        for (int j = 0; i + j < n; ++j) {
            const Point2 p(i * h, j * h);
            tri(p, p + Point2(h, 0), p + Point2(0, h));
            if (i + j + 1 < n)
                tri(p + Point2(h, 0), p + Point2(h, h), p + Point2(0, h));
        }
    return s;
}

} // namespace

TEST(Quadrature, WeightsAndLowOrderMoments)
{
    const QuadratureRule q = tri_quadrature(2);
    EXPECT_NEAR(integrate(q, [](const Point2&) { return 1.0; }), 0.5, 1e-15);
    EXPECT_NEAR(integrate(q, [](const Point2& x) { return x.x(); }), 1.0 / 6.0, 1e-15);
    EXPECT_NEAR(integrate(q, [](const Point2& x) { return x.x() * x.x(); }), 1.0 / 12.0, 1e-15);
}

TEST(Quadrature, ExactForAllMonomialsUpToExactness)
{
    for (int e = 0; e <= max_quadrature_exactness; ++e) {
        const QuadratureRule q = tri_quadrature(e);
        EXPECT_GE(q.exactness, e);
        for (double w : q.weights)
            EXPECT_GT(w, 0.0);
        for (const Point2& p : q.points) {
            EXPECT_GE(p.x(), 0.0);
            EXPECT_GE(p.y(), 0.0);
            EXPECT_LE(p.x() + p.y(), 1.0);
        }
        for (int a = 0; a <= e; ++a)
            for (int b = 0; a + b <= e; ++b) {
                const double exact = monomial_integral(a, b);
                const double got
                    = integrate(q, [&](const Point2& x) { return std::pow(x.x(), a) * std::pow(x.y(), b); });
                EXPECT_NEAR(got, exact, 1e-12 * exact) << "e=" << e << " a=" << a << " b=" << b;
            }
    }
}

TEST(Quadrature, AgainstSubdivisionOracle)
{
    auto f = [](const Point2& x) { return std::pow(x.x(), 4) * std::pow(x.y(), 6); };
    const double i1 = composite_midpoint(f, 32);
    const double i2 = composite_midpoint(f, 64);
    const double i3 = composite_midpoint(f, 128);
    const double r1 = (4.0 * i2 - i1) / 3.0;
    const double r2 = (4.0 * i3 - i2) / 3.0;
    const double oracle = (16.0 * r2 - r1) / 15.0;
    EXPECT_NEAR(oracle, monomial_integral(4, 6), 1e-10);
    EXPECT_NEAR(integrate(tri_quadrature(10), f), oracle, 1e-10);
}

TEST(Quadrature, RejectsUnsupportedExactness)
{
    EXPECT_THROW((void)tri_quadrature(21), UnsupportedDegree);
    EXPECT_THROW((void)tri_quadrature(-1), UnsupportedDegree);
    EXPECT_THROW((void)edge_quadrature(21), UnsupportedDegree);
}

TEST(Quadrature, EdgeRuleExactness)
{
    for (int e = 0; e <= max_quadrature_exactness; ++e) {
        const EdgeQuadrature q = edge_quadrature(e);
        for (int a = 0; a <= e; ++a) {
            double s = 0.0;
            for (std::size_t i = 0; i < q.size(); ++i)
                s += q.weights[i] * std::pow(q.points[i], a);
            EXPECT_NEAR(s, 1.0 / (a + 1), 1e-14);
        }
    }
}

TEST(ModalBasis, OrthonormalAndHierarchical)
{
    for (int d = 0; d <= 5; ++d) {
        const ModalBasis b(d);
        ASSERT_EQ(b.size(), poly_dim(d));
        const QuadratureRule q = tri_quadrature(2 * d);
        const Eigen::MatrixXd V = b.eval(q.points);
        Eigen::MatrixXd G = Eigen::MatrixXd::Zero(b.size(), b.size());
        for (std::size_t i = 0; i < q.size(); ++i)
            G += q.weights[i] * V.row(static_cast<Eigen::Index>(i)).transpose() * V.row(static_cast<Eigen::Index>(i));
        EXPECT_LT((G - Eigen::MatrixXd::Identity(b.size(), b.size())).cwiseAbs().maxCoeff(), 1e-12) << d;
        // the leading block of a higher-degree basis is the lower-degree basis
        if (d > 0) {
            const ModalBasis lower(d - 1);
            const Point2 x(0.21, 0.37);
            EXPECT_LT((b.eval(x).head(lower.size()) - lower.eval(x)).cwiseAbs().maxCoeff(), 1e-12);
        }
    }
}

TEST(ModalBasis, PhysicalMassMatrixIsScaledIdentity)
{
    const Mesh m = support::single_triangle();
    const auto& t = m.triangle(0);
    const Point2 a = m.vertex(t[0]);
    Eigen::Matrix2d J;
    J.col(0) = m.vertex(t[1]) - a;
    J.col(1) = m.vertex(t[2]) - a;
    const double det = J.determinant();
    const ModalBasis b(3);
    const QuadratureRule q = tri_quadrature(6);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(b.size(), b.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        // phi(x) = phi_hat(F^{-1} x); integrate over the physical element
        const Point2 x = a + J * q.points[i];
        const Eigen::VectorXd v = b.eval(J.inverse() * (x - a));
        G += q.weights[i] * det * v * v.transpose();
    }
    EXPECT_LT((G - 2.0 * m.area(0) * Eigen::MatrixXd::Identity(b.size(), b.size())).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ModalBasis, GradientMatchesFiniteDifferences)
{
    const ModalBasis b(4);
    const double eps = 1e-6;
    for (const Point2& x : {Point2(0.2, 0.3), Point2(0.6, 0.1), Point2(0.05, 0.9)}) {
        const auto g = b.eval_grad(x);
        const Eigen::VectorXd dx = (b.eval(x + Point2(eps, 0)) - b.eval(x - Point2(eps, 0))) / (2 * eps);
        const Eigen::VectorXd dy = (b.eval(x + Point2(0, eps)) - b.eval(x - Point2(0, eps))) / (2 * eps);
        EXPECT_LT((g.row(0).transpose() - dx).cwiseAbs().maxCoeff(), 1e-6);
        EXPECT_LT((g.row(1).transpose() - dy).cwiseAbs().maxCoeff(), 1e-6);
        const auto H = b.eval_hessian(x);
        const auto gx = b.eval_grad(x + Point2(eps, 0)), gmx = b.eval_grad(x - Point2(eps, 0));
        const auto gy = b.eval_grad(x + Point2(0, eps)), gmy = b.eval_grad(x - Point2(0, eps));
        EXPECT_LT((H.row(0) - (gx.row(0) - gmx.row(0)) / (2 * eps)).cwiseAbs().maxCoeff(), 1e-5);
        EXPECT_LT((H.row(1) - (gx.row(1) - gmx.row(1)) / (2 * eps)).cwiseAbs().maxCoeff(), 1e-5);
        EXPECT_LT((H.row(2) - (gy.row(1) - gmy.row(1)) / (2 * eps)).cwiseAbs().maxCoeff(), 1e-5);
    }
    // constants have zero gradient
    EXPECT_LT(b.eval_grad(Point2(0.3, 0.3)).col(0).norm(), 1e-15);
}

TEST(ModalBasis, ReproducesRandomPolynomials)
{
    const ModalBasis b(3);
    const QuadratureRule q = tri_quadrature(6);
    for (int trial = 0; trial < 10; ++trial) {
        const support::RandomPolynomial p(3);
        Eigen::VectorXd c = Eigen::VectorXd::Zero(b.size());
        for (std::size_t i = 0; i < q.size(); ++i)
            c += q.weights[i] * p(q.points[i]) * b.eval(q.points[i]);
        for (int s = 0; s < 20; ++s) {
            const double x = support::uniform(0, 1);
            const Point2 pt(x, support::uniform(0, 1 - x));
            EXPECT_NEAR(b.eval(pt).dot(c), p(pt), 1e-12);
        }
    }
}

TEST(ModalBasis, TraceOnEdgeIsUnivariatePolynomial)
{
    // the restriction of a P^m function to an edge is a polynomial of degree m in s
    const int m = 3;
    const ModalBasis b(m);
    const Point2 a(1.0, 0.0), c(0.0, 1.0);
    Eigen::MatrixXd V(m + 1, m + 1);
    Eigen::MatrixXd F(m + 1, b.size());
    for (int i = 0; i <= m; ++i) {
        const double s = static_cast<double>(i) / m;
        for (int j = 0; j <= m; ++j)
            V(i, j) = std::pow(s, j);
        F.row(i) = b.eval(a + s * (c - a)).transpose();
    }
    const Eigen::MatrixXd coef = V.lu().solve(F);
    for (double s : {0.13, 0.5, 0.77}) {
        Eigen::RowVectorXd mono(m + 1);
        for (int j = 0; j <= m; ++j)
            mono(j) = std::pow(s, j);
        EXPECT_LT((mono * coef - b.eval(a + s * (c - a)).transpose()).cwiseAbs().maxCoeff(), 1e-11);
    }
}

TEST(LagrangeBasis, NodesAndKroneckerProperty)
{
    EXPECT_EQ(lagrange_nodes(0).size(), 1u);
    EXPECT_NEAR((lagrange_nodes(0)[0] - Point2(1.0 / 3, 1.0 / 3)).norm(), 0.0, 1e-15);
    const auto n1 = lagrange_nodes(1);
    ASSERT_EQ(n1.size(), 3u);
    const auto n2 = lagrange_nodes(2);
    ASSERT_EQ(n2.size(), 6u);
    int midpoints = 0;
    for (const Point2& p : n2)
        for (const Point2& q : {Point2(0.5, 0), Point2(0.5, 0.5), Point2(0, 0.5)})
            midpoints += (p - q).norm() < 1e-15 ? 1 : 0;
    EXPECT_EQ(midpoints, 3);
    EXPECT_EQ(lagrange_nodes(3).size(), 10u);
    for (int d = 0; d <= 4; ++d) {
        const LagrangeBasis L(d);
        const Eigen::MatrixXd E = L.eval(L.nodes());
        EXPECT_LT((E - Eigen::MatrixXd::Identity(L.size(), L.size())).cwiseAbs().maxCoeff(), 1e-12) << d;
        EXPECT_GT(std::abs(L.vandermonde().determinant()), 1e-12);
    }
}

TEST(LagrangeBasis, InterpolatesCubicsExactly)
{
    const LagrangeBasis L(3);
    auto f = [](const Point2& x) { return x.x() * x.x() * x.x() - 2 * x.x() * x.y() + 0.5 * x.y(); };
    Eigen::VectorXd nodal(L.size());
    for (int i = 0; i < L.size(); ++i)
        nodal(i) = f(L.nodes()[static_cast<std::size_t>(i)]);
    for (const Point2& p : {Point2(0.1, 0.2), Point2(0.45, 0.45), Point2(0.7, 0.05)})
        EXPECT_NEAR(L.eval(p).dot(nodal), f(p), 1e-12);
}

TEST(LagrangeBasis, GradientsMatchFiniteDifferences)
{
    const LagrangeBasis L(3);
    const std::vector<Point2> pts{{0.2, 0.3}};
    const auto g = L.eval_grad(pts);
    const double eps = 1e-6;
    const Eigen::VectorXd dx = (L.eval(pts[0] + Point2(eps, 0)) - L.eval(pts[0] - Point2(eps, 0))) / (2 * eps);
    EXPECT_LT((g[0].row(0).transpose() - dx).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(EdgeBasis, OrthonormalOnUnitInterval)
{
    for (int d = 0; d <= 4; ++d) {
        const EdgeBasis b(d);
        const EdgeQuadrature q = edge_quadrature(2 * d);
        Eigen::MatrixXd G = Eigen::MatrixXd::Zero(b.size(), b.size());
        for (std::size_t i = 0; i < q.size(); ++i) {
            const Eigen::VectorXd v = b.eval(q.points[i]);
            G += q.weights[i] * v * v.transpose();
        }
        EXPECT_LT((G - Eigen::MatrixXd::Identity(b.size(), b.size())).cwiseAbs().maxCoeff(), 1e-13);
        const double eps = 1e-6;
        const Eigen::VectorXd fd = (b.eval(0.3 + eps) - b.eval(0.3 - eps)) / (2 * eps);
        EXPECT_LT((b.eval_derivative(0.3) - fd).cwiseAbs().maxCoeff(), 1e-6);
    }
}
