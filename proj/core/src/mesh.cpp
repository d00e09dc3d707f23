#include "ihdg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <utility>

#include "ihdg/errors.hpp"

namespace ihdg {

namespace {

double signed_area(const Point2& a, const Point2& b, const Point2& c)
{
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

} // namespace

Mesh Mesh::from_triangles(std::vector<Point2> vertices, std::vector<std::array<int, 3>> triangles)
{
    Mesh m;
    m.vertices_ = std::move(vertices);
    m.triangles_ = std::move(triangles);

    const int nv = m.num_vertices();
    const int nt = m.num_elements();
    m.element_faces_.resize(static_cast<std::size_t>(nt));
    m.element_face_signs_.resize(static_cast<std::size_t>(nt));
    m.diameters_.resize(static_cast<std::size_t>(nt));
    m.areas_.resize(static_cast<std::size_t>(nt));

    // ordered map keeps face numbering deterministic
    std::map<std::pair<int, int>, int> edge_to_face;
    for (int e = 0; e < nt; ++e) {
        const auto& t = m.triangle(e);
        for (int v : t)
            if (v < 0 || v >= nv)
                throw MeshError("triangle " + std::to_string(e) + " references vertex " + std::to_string(v)
                                + " out of range");
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
            throw MeshError("triangle " + std::to_string(e) + " repeats a vertex");

        const double area = signed_area(m.vertex(t[0]), m.vertex(t[1]), m.vertex(t[2]));
        if (area < 1e-14)
            throw MeshError("triangle " + std::to_string(e)
                            + (area < 0 ? " is clockwise" : " is degenerate (area < 1e-14)"));
        m.areas_[static_cast<std::size_t>(e)] = area;

        double diam = 0.0;
        for (int i = 0; i < 3; ++i) {
            const int a = t[static_cast<std::size_t>(i)];
            const int b = t[static_cast<std::size_t>((i + 1) % 3)];
            diam = std::max(diam, (m.vertex(a) - m.vertex(b)).norm());

            const auto key = std::minmax(a, b);
            auto it = edge_to_face.find(key);
            if (it == edge_to_face.end()) {
                const int f = m.num_faces();
                m.faces_.push_back(Face{{a, b}, e, -1});
                edge_to_face.emplace(key, f);
                m.element_faces_[static_cast<std::size_t>(e)][static_cast<std::size_t>(i)] = f;
                m.element_face_signs_[static_cast<std::size_t>(e)][static_cast<std::size_t>(i)] = 1;
            } else {
                Face& face = m.faces_[static_cast<std::size_t>(it->second)];
                if (face.right >= 0)
                    throw MeshError("edge (" + std::to_string(a) + "," + std::to_string(b)
                                    + ") is shared by more than two triangles");
                if (face.vertices[0] != b || face.vertices[1] != a)
                    throw MeshError("inconsistent orientation across edge (" + std::to_string(a) + ","
                                    + std::to_string(b) + ")");
                face.right = e;
                m.element_faces_[static_cast<std::size_t>(e)][static_cast<std::size_t>(i)] = it->second;
                m.element_face_signs_[static_cast<std::size_t>(e)][static_cast<std::size_t>(i)] = -1;
            }
        }
        m.diameters_[static_cast<std::size_t>(e)] = diam;
        m.h_ = std::max(m.h_, diam);
    }
    return m;
}

double Mesh::face_length(int f) const
{
    const auto& fc = face(f);
    return (vertex(fc.vertices[1]) - vertex(fc.vertices[0])).norm();
}

Point2 Mesh::face_normal(int f) const
{
    const auto& fc = face(f);
    const Point2 d = vertex(fc.vertices[1]) - vertex(fc.vertices[0]);
    return Point2(d.y(), -d.x()) / d.norm();
}

Mesh build_uniform_square(int n)
{
    if (n < 1)
        throw InvalidArgument("build_uniform_square: n must be >= 1, got " + std::to_string(n));

    std::vector<Point2> vertices;
    vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            vertices.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);

    const auto id = [n](int i, int j) { return j * (n + 1) + i; };
    std::vector<std::array<int, 3>> triangles;
    triangles.reserve(static_cast<std::size_t>(2 * n * n));
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return Mesh::from_triangles(std::move(vertices), std::move(triangles));
}

Mesh subdivide(const Mesh& mesh, int n)
{
    if (n < 1)
        throw InvalidArgument("subdivide: n must be >= 1, got " + std::to_string(n));
    if (n == 1)
        return mesh;

    // Lattice points are keyed by their integer barycentric weights on the
    // parent vertices, so points on shared edges are merged exactly.
    using Key = std::array<std::pair<int, int>, 3>;
    std::map<Key, int> point_id;
    std::vector<Point2> vertices;
    std::vector<std::array<int, 3>> triangles;
    triangles.reserve(static_cast<std::size_t>(mesh.num_elements() * n * n));

    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto& t = mesh.triangle(e);
        const auto lattice = [&](int i, int j) {
            std::array<std::pair<int, int>, 3> w{{{t[0], n - i - j}, {t[1], i}, {t[2], j}}};
            Key key{};
            int c = 0;
            for (const auto& p : w)
                key[static_cast<std::size_t>(c++)] = p.second == 0 ? std::pair{-1, 0} : p;
            std::sort(key.begin(), key.end());
            auto [it, inserted] = point_id.try_emplace(key, static_cast<int>(vertices.size()));
            if (inserted) {
                const Point2& a = mesh.vertex(t[0]);
                const Point2& b = mesh.vertex(t[1]);
                const Point2& c2 = mesh.vertex(t[2]);
                vertices.push_back(a + (b - a) * (static_cast<double>(i) / n) + (c2 - a) * (static_cast<double>(j) / n));
            }
            return it->second;
        };
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i + j < n; ++i) {
                triangles.push_back({lattice(i, j), lattice(i + 1, j), lattice(i, j + 1)});
                if (i + j + 1 < n)
                    triangles.push_back({lattice(i + 1, j), lattice(i + 1, j + 1), lattice(i, j + 1)});
            }
        }
    }
    return Mesh::from_triangles(std::move(vertices), std::move(triangles));
}

FacePartition classify_faces(const Mesh& mesh)
{
    FacePartition part;
    for (int f = 0; f < mesh.num_faces(); ++f) {
        const Face& face = mesh.face(f);
        if (face.left < 0)
            throw MeshError("face " + std::to_string(f) + " has no incident element");
        (face.is_boundary() ? part.boundary : part.interior).push_back(f);
    }
    return part;
}

Mesh read_mesh(std::istream& in)
{
    long nv = 0;
    long nt = 0;
    if (!(in >> nv >> nt) || nv < 3 || nt < 1)
        throw IoError("mesh file: bad header, expected \"NV NT\"");
    std::vector<Point2> vertices(static_cast<std::size_t>(nv));
    for (auto& p : vertices)
        if (!(in >> p.x() >> p.y()))
            throw IoError("mesh file: truncated vertex list");
    std::vector<std::array<int, 3>> triangles(static_cast<std::size_t>(nt));
    for (auto& t : triangles)
        if (!(in >> t[0] >> t[1] >> t[2]))
            throw IoError("mesh file: truncated triangle list");
    return Mesh::from_triangles(std::move(vertices), std::move(triangles));
}

Mesh read_mesh_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open mesh file '" + path + "'");
    return read_mesh(in);
}

void write_mesh(std::ostream& out, const Mesh& mesh)
{
    out << mesh.num_vertices() << ' ' << mesh.num_elements() << '\n';
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (const auto& p : mesh.vertices())
        out << p.x() << ' ' << p.y() << '\n';
    for (const auto& t : mesh.triangles())
        out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

} // namespace ihdg
