#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

namespace whitefem {

/// Coordinates of a point. 1D meshes only use the first component.
using Point = std::array<double, 2>;

/// Node indices of an element: a segment (first two entries) in 1D, a
/// counterclockwise triangle in 2D. Unused entries are -1.
using Element = std::array<int, 3>;

/// A boundary facet: a single node in 1D, an edge in 2D (unused entry -1),
/// tagged with the side it lies on.
struct BoundaryFacet {
    std::array<int, 2> nodes{-1, -1};
    int side = 0;
};

/// Side tags used by the built-in generators.
namespace side {
inline constexpr int left_end = 0;
inline constexpr int right_end = 1;
inline constexpr int bottom = 0;
inline constexpr int right = 1;
inline constexpr int top = 2;
inline constexpr int left = 3;
}  // namespace side

/// Barycentric location of a point inside a mesh element.
struct ElementLocation {
    std::size_t element = 0;
    std::array<double, 3> weights{0.0, 0.0, 0.0};
};

/// Simplicial mesh of an interval or a 2D polygon.
///
/// Immutable after construction. The constructor checks the topological
/// invariants (index ranges, orientation, exact boundary coverage) and
/// computes h as the maximum element diameter.
class Mesh {
public:
    Mesh(int dim, std::vector<Point> nodes, std::vector<Element> elements,
         std::vector<BoundaryFacet> facets);

    int dim() const noexcept { return dim_; }
    std::size_t num_nodes() const noexcept { return nodes_.size(); }
    std::size_t num_elements() const noexcept { return elements_.size(); }
    std::size_t num_facets() const noexcept { return facets_.size(); }

    const std::vector<Point>& nodes() const noexcept { return nodes_; }
    const std::vector<Element>& elements() const noexcept { return elements_; }
    const std::vector<BoundaryFacet>& facets() const noexcept { return facets_; }
    const Point& node(std::size_t i) const { return nodes_.at(i); }

    /// Maximum element diameter.
    double h() const noexcept { return h_; }

    /// Length (1D) or signed area (2D) of an element.
    double element_measure(std::size_t e) const;
    double element_diameter(std::size_t e) const;
    double facet_measure(std::size_t f) const;

    /// Total measure of the domain and of its boundary (counting measure in 1D).
    double measure() const;
    double boundary_measure() const;

    /// Sorted, unique indices of nodes lying on a boundary facet.
    const std::vector<int>& boundary_nodes() const noexcept { return boundary_nodes_; }
    bool is_boundary_node(std::size_t i) const { return is_boundary_.at(i) != 0; }

    /// Element containing the point (closed elements, relative tolerance 1e-12).
    std::optional<ElementLocation> locate(const Point& p) const;

    /// Index of the element owning each boundary facet.
    const std::vector<std::size_t>& facet_owners() const noexcept { return facet_owner_; }

private:
    int dim_;
    std::vector<Point> nodes_;
    std::vector<Element> elements_;
    std::vector<BoundaryFacet> facets_;
    std::vector<int> boundary_nodes_;
    std::vector<char> is_boundary_;
    std::vector<std::size_t> facet_owner_;
    double h_ = 0.0;
};

/// Nodes of a 2D facet ordered counterclockwise with respect to its owning
/// element, so that (dy, -dx) is the outward normal scaled by the length.
std::array<int, 2> oriented_facet(const Mesh& mesh, std::size_t f);

/// Outward normal (+1 or -1) at a 1D boundary point.
double outward_normal_1d(const Mesh& mesh, std::size_t f);

/// n equispaced elements on [a, b]. Facets: left end (side 0), right end (side 1).
Mesh build_interval_mesh(double a, double b, int n);

/// Uniform grid on (0,lx)x(0,ly), each cell split along its lower-left to
/// upper-right diagonal. Facets are tagged bottom/right/top/left (0..3).
Mesh build_rectangle_mesh(double lx, double ly, int nx, int ny);

/// Split every segment in two, every triangle into four congruent children.
/// Existing nodes keep their indices; midpoints are appended.
Mesh refine_uniform(const Mesh& mesh);

}  // namespace whitefem
