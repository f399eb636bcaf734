#include "whitefem/mesh.hpp"

#include "whitefem/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>

namespace whitefem {

namespace {

std::uint64_t edge_key(int a, int b) {
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (hi << 32) | lo;
}

double distance(const Point& p, const Point& q) { return std::hypot(p[0] - q[0], p[1] - q[1]); }

double signed_area(const Point& a, const Point& b, const Point& c) {
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

struct EdgeUse {
    int count = 0;
    std::size_t owner = 0;
};

}  // namespace

Mesh::Mesh(int dim, std::vector<Point> nodes, std::vector<Element> elements,
           std::vector<BoundaryFacet> facets)
    : dim_(dim), nodes_(std::move(nodes)), elements_(std::move(elements)), facets_(std::move(facets)) {
    if (dim_ != 1 && dim_ != 2) throw InvalidArgument("mesh dimension must be 1 or 2");
    if (nodes_.empty() || elements_.empty()) throw InvalidArgument("mesh has no nodes or no elements");

    const int n = static_cast<int>(nodes_.size());
    const int per_element = dim_ + 1;
    auto check_index = [n](int idx, const std::string& what) {
        if (idx < 0 || idx >= n) throw InvalidArgument(what + " references missing node " + std::to_string(idx));
    };

    for (std::size_t e = 0; e < elements_.size(); ++e) {
        const auto& el = elements_[e];
        for (int k = 0; k < per_element; ++k) check_index(el[k], "element " + std::to_string(e));
        if (dim_ == 1 && el[2] != -1) throw InvalidArgument("1D element " + std::to_string(e) + " has a third node");
        if (element_measure(e) <= 0.0)
            throw InvalidArgument("element " + std::to_string(e) + " has nonpositive measure");
    }

    // Topological boundary: facets of exactly one element.
    std::unordered_map<std::uint64_t, EdgeUse> uses;
    for (std::size_t e = 0; e < elements_.size(); ++e) {
        const auto& el = elements_[e];
        if (dim_ == 1) {
            for (int k = 0; k < 2; ++k) {
                auto& u = uses[static_cast<std::uint64_t>(el[k])];
                ++u.count;
                u.owner = e;
            }
        } else {
            for (int k = 0; k < 3; ++k) {
                auto& u = uses[edge_key(el[k], el[(k + 1) % 3])];
                ++u.count;
                u.owner = e;
            }
        }
    }
    std::size_t boundary_count = 0;
    for (const auto& [key, u] : uses) {
        if (u.count > 2) throw InvalidArgument("non-manifold facet shared by more than two elements");
        if (u.count == 1) ++boundary_count;
    }
    if (boundary_count != facets_.size())
        throw InvalidArgument("boundary facets do not cover the topological boundary (" +
                              std::to_string(facets_.size()) + " given, " + std::to_string(boundary_count) +
                              " expected)");

    is_boundary_.assign(nodes_.size(), 0);
    facet_owner_.resize(facets_.size());
    std::unordered_map<std::uint64_t, int> seen;
    for (std::size_t f = 0; f < facets_.size(); ++f) {
        const auto& fc = facets_[f];
        check_index(fc.nodes[0], "facet " + std::to_string(f));
        std::uint64_t key = 0;
        if (dim_ == 1) {
            if (fc.nodes[1] != -1) throw InvalidArgument("1D facet " + std::to_string(f) + " has two nodes");
            key = static_cast<std::uint64_t>(fc.nodes[0]);
        } else {
            check_index(fc.nodes[1], "facet " + std::to_string(f));
            key = edge_key(fc.nodes[0], fc.nodes[1]);
        }
        auto it = uses.find(key);
        if (it == uses.end() || it->second.count != 1)
            throw InvalidArgument("facet " + std::to_string(f) + " is not on the topological boundary");
        if (seen[key]++ > 0) throw InvalidArgument("facet " + std::to_string(f) + " is duplicated");
        facet_owner_[f] = it->second.owner;
        for (int k = 0; k < dim_; ++k) is_boundary_[static_cast<std::size_t>(fc.nodes[k])] = 1;
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (is_boundary_[i]) boundary_nodes_.push_back(static_cast<int>(i));

    for (std::size_t e = 0; e < elements_.size(); ++e) h_ = std::max(h_, element_diameter(e));
}

double Mesh::element_measure(std::size_t e) const {
    const auto& el = elements_.at(e);
    if (dim_ == 1) return std::abs(nodes_[el[1]][0] - nodes_[el[0]][0]);
    return signed_area(nodes_[el[0]], nodes_[el[1]], nodes_[el[2]]);
}

double Mesh::element_diameter(std::size_t e) const {
    const auto& el = elements_.at(e);
    if (dim_ == 1) return std::abs(nodes_[el[1]][0] - nodes_[el[0]][0]);
    return std::max({distance(nodes_[el[0]], nodes_[el[1]]), distance(nodes_[el[1]], nodes_[el[2]]),
                     distance(nodes_[el[2]], nodes_[el[0]])});
}

double Mesh::facet_measure(std::size_t f) const {
    const auto& fc = facets_.at(f);
    if (dim_ == 1) return 1.0;
    return distance(nodes_[fc.nodes[0]], nodes_[fc.nodes[1]]);
}

double Mesh::measure() const {
    double total = 0.0;
    for (std::size_t e = 0; e < elements_.size(); ++e) total += element_measure(e);
    return total;
}

double Mesh::boundary_measure() const {
    double total = 0.0;
    for (std::size_t f = 0; f < facets_.size(); ++f) total += facet_measure(f);
    return total;
}

std::optional<ElementLocation> Mesh::locate(const Point& p) const {
    constexpr double tol = 1e-12;
    for (std::size_t e = 0; e < elements_.size(); ++e) {
        const auto& el = elements_[e];
        if (dim_ == 1) {
            const double x0 = nodes_[el[0]][0];
            const double x1 = nodes_[el[1]][0];
            const double t = (p[0] - x0) / (x1 - x0);
            if (t >= -tol && t <= 1.0 + tol) {
                const double tc = std::clamp(t, 0.0, 1.0);
                return ElementLocation{e, {1.0 - tc, tc, 0.0}};
            }
        } else {
            const auto& a = nodes_[el[0]];
            const auto& b = nodes_[el[1]];
            const auto& c = nodes_[el[2]];
            const double area = signed_area(a, b, c);
            const double w0 = signed_area(p, b, c) / area;
            const double w1 = signed_area(a, p, c) / area;
            const double w2 = signed_area(a, b, p) / area;
            if (w0 >= -tol && w1 >= -tol && w2 >= -tol) return ElementLocation{e, {w0, w1, w2}};
        }
    }
    return std::nullopt;
}

Mesh build_interval_mesh(double a, double b, int n) {
    if (!(a < b)) throw InvalidArgument("interval mesh requires a < b");
    if (n < 1) throw InvalidArgument("interval mesh requires n >= 1");
    std::vector<Point> nodes(static_cast<std::size_t>(n) + 1);
    const double len = b - a;
    for (int i = 0; i <= n; ++i) nodes[i] = {i == n ? b : a + len * i / n, 0.0};
    std::vector<Element> elements(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) elements[i] = {i, i + 1, -1};
    std::vector<BoundaryFacet> facets{{{0, -1}, side::left_end}, {{n, -1}, side::right_end}};
    return Mesh(1, std::move(nodes), std::move(elements), std::move(facets));
}

Mesh build_rectangle_mesh(double lx, double ly, int nx, int ny) {
    if (!(lx > 0.0) || !(ly > 0.0)) throw InvalidArgument("rectangle sides must be positive");
    if (nx < 1 || ny < 1) throw InvalidArgument("rectangle subdivisions must be positive");
    const int stride = nx + 1;
    auto id = [stride](int i, int j) { return j * stride + i; };

    std::vector<Point> nodes;
    nodes.reserve(static_cast<std::size_t>(stride) * (ny + 1));
    for (int j = 0; j <= ny; ++j) {
        const double y = j == ny ? ly : ly * j / ny;
        for (int i = 0; i <= nx; ++i) nodes.push_back({i == nx ? lx : lx * i / nx, y});
    }

    std::vector<Element> elements;
    elements.reserve(2 * static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int v00 = id(i, j), v10 = id(i + 1, j), v01 = id(i, j + 1), v11 = id(i + 1, j + 1);
            elements.push_back({v00, v10, v11});
            elements.push_back({v00, v11, v01});
        }
    }

    // Counterclockwise loop starting at the origin.
    std::vector<BoundaryFacet> facets;
    facets.reserve(2 * static_cast<std::size_t>(nx + ny));
    for (int i = 0; i < nx; ++i) facets.push_back({{id(i, 0), id(i + 1, 0)}, side::bottom});
    for (int j = 0; j < ny; ++j) facets.push_back({{id(nx, j), id(nx, j + 1)}, side::right});
    for (int i = nx; i > 0; --i) facets.push_back({{id(i, ny), id(i - 1, ny)}, side::top});
    for (int j = ny; j > 0; --j) facets.push_back({{id(0, j), id(0, j - 1)}, side::left});

    return Mesh(2, std::move(nodes), std::move(elements), std::move(facets));
}

Mesh refine_uniform(const Mesh& mesh) {
    std::vector<Point> nodes = mesh.nodes();
    std::unordered_map<std::uint64_t, int> midpoint;
    auto mid = [&](int a, int b) {
        auto [it, inserted] = midpoint.try_emplace(edge_key(a, b), static_cast<int>(nodes.size()));
        if (inserted) {
            const auto& p = nodes[a];
            const auto& q = nodes[b];
            nodes.push_back({0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])});
        }
        return it->second;
    };

    std::vector<Element> elements;
    std::vector<BoundaryFacet> facets;
    if (mesh.dim() == 1) {
        elements.reserve(2 * mesh.num_elements());
        for (const auto& el : mesh.elements()) {
            const int m = mid(el[0], el[1]);
            elements.push_back({el[0], m, -1});
            elements.push_back({m, el[1], -1});
        }
        facets = mesh.facets();
    } else {
        elements.reserve(4 * mesh.num_elements());
        for (const auto& el : mesh.elements()) {
            const int a = el[0], b = el[1], c = el[2];
            const int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
            elements.push_back({a, ab, ca});
            elements.push_back({ab, b, bc});
            elements.push_back({ca, bc, c});
            elements.push_back({ab, bc, ca});
        }
        facets.reserve(2 * mesh.num_facets());
        for (const auto& f : mesh.facets()) {
            const int m = mid(f.nodes[0], f.nodes[1]);
            facets.push_back({{f.nodes[0], m}, f.side});
            facets.push_back({{m, f.nodes[1]}, f.side});
        }
    }
    return Mesh(mesh.dim(), std::move(nodes), std::move(elements), std::move(facets));
}

std::array<int, 2> oriented_facet(const Mesh& mesh, std::size_t f) {
    if (mesh.dim() != 2) throw InvalidArgument("oriented_facet needs a 2D mesh");
    const auto& fc = mesh.facets().at(f);
    const auto& el = mesh.elements()[mesh.facet_owners()[f]];
    for (int k = 0; k < 3; ++k)
        if (el[k] == fc.nodes[0] && el[(k + 1) % 3] == fc.nodes[1]) return fc.nodes;
    return {fc.nodes[1], fc.nodes[0]};
}

double outward_normal_1d(const Mesh& mesh, std::size_t f) {
    if (mesh.dim() != 1) throw InvalidArgument("outward_normal_1d needs a 1D mesh");
    const int node = mesh.facets().at(f).nodes[0];
    const auto& el = mesh.elements()[mesh.facet_owners()[f]];
    const int other = el[0] == node ? el[1] : el[0];
    return mesh.nodes()[node][0] > mesh.nodes()[other][0] ? 1.0 : -1.0;
}

}  // namespace whitefem
