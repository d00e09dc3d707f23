#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ihdg {

using Point2 = Eigen::Vector2d;

/// An edge of the triangulation. Vertices are stored in the counterclockwise
/// order of the left element, so the face normal (see Mesh::face_normal) points
/// from left to right, and outward on the boundary.
struct Face {
    std::array<int, 2> vertices{};
    int left = -1;
    int right = -1; ///< -1 on the boundary

    [[nodiscard]] bool is_boundary() const noexcept { return right < 0; }
};

struct FacePartition {
    std::vector<int> interior;
    std::vector<int> boundary;
};

/// Conforming triangulation of a polygonal domain. Immutable once built.
class Mesh {
public:
    Mesh() = default;

    /// Builds faces and connectivity from raw vertex/triangle lists.
    /// Throws MeshError on clockwise/degenerate triangles, out-of-range
    /// indices or edges shared by more than two triangles.
    static Mesh from_triangles(std::vector<Point2> vertices, std::vector<std::array<int, 3>> triangles);

    [[nodiscard]] int num_vertices() const noexcept { return static_cast<int>(vertices_.size()); }
    [[nodiscard]] int num_elements() const noexcept { return static_cast<int>(triangles_.size()); }
    [[nodiscard]] int num_faces() const noexcept { return static_cast<int>(faces_.size()); }

    [[nodiscard]] const std::vector<Point2>& vertices() const noexcept { return vertices_; }
    [[nodiscard]] const std::vector<std::array<int, 3>>& triangles() const noexcept { return triangles_; }
    [[nodiscard]] const std::vector<Face>& faces() const noexcept { return faces_; }

    [[nodiscard]] const Point2& vertex(int i) const { return vertices_[static_cast<std::size_t>(i)]; }
    [[nodiscard]] const std::array<int, 3>& triangle(int e) const { return triangles_[static_cast<std::size_t>(e)]; }
    [[nodiscard]] const Face& face(int f) const { return faces_[static_cast<std::size_t>(f)]; }

    /// Local face i of element e joins triangle vertices i and (i+1)%3.
    [[nodiscard]] const std::array<int, 3>& element_faces(int e) const
    {
        return element_faces_[static_cast<std::size_t>(e)];
    }
    /// +1 when e is the left element of its local face i, -1 otherwise.
    [[nodiscard]] const std::array<int, 3>& element_face_signs(int e) const
    {
        return element_face_signs_[static_cast<std::size_t>(e)];
    }

    [[nodiscard]] double diameter(int e) const { return diameters_[static_cast<std::size_t>(e)]; }
    [[nodiscard]] double area(int e) const { return areas_[static_cast<std::size_t>(e)]; }
    [[nodiscard]] double h() const noexcept { return h_; }

    [[nodiscard]] double face_length(int f) const;
    /// Unit normal pointing from the left element to the right one.
    [[nodiscard]] Point2 face_normal(int f) const;

private:
    std::vector<Point2> vertices_;
    std::vector<std::array<int, 3>> triangles_;
    std::vector<Face> faces_;
    std::vector<std::array<int, 3>> element_faces_;
    std::vector<std::array<int, 3>> element_face_signs_;
    std::vector<double> diameters_;
    std::vector<double> areas_;
    double h_ = 0.0;
};

/// Unit square, n x n cells, each cut along the lower-left to upper-right diagonal.
[[nodiscard]] Mesh build_uniform_square(int n);

/// Splits every triangle into n^2 congruent subtriangles (principal lattice).
[[nodiscard]] Mesh subdivide(const Mesh& mesh, int n);

/// Throws MeshError if a face has no incident element.
[[nodiscard]] FacePartition classify_faces(const Mesh& mesh);

/// Plain-text mesh format: "NV NT", NV lines "x y", NT lines "i j k".
[[nodiscard]] Mesh read_mesh(std::istream& in);
[[nodiscard]] Mesh read_mesh_file(const std::string& path);
void write_mesh(std::ostream& out, const Mesh& mesh);

} // namespace ihdg
