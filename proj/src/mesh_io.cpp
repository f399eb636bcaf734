#include "whitefem/mesh_io.hpp"

#include "whitefem/error.hpp"

#include <fmt/format.h>

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace whitefem {

namespace {

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    std::vector<std::string> next(std::size_t expected) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            std::istringstream tokens(line);
            std::vector<std::string> out;
            for (std::string t; tokens >> t;) out.push_back(t);
            if (out.size() != expected)
                throw InvalidArgument(fmt::format("mesh file line {}: expected {} values, got {}", line_no_,
                                                  expected, out.size()));
            return out;
        }
        throw InvalidArgument(fmt::format("mesh file truncated after line {}", line_no_));
    }

    double to_double(const std::string& s) const {
        errno = 0;
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0' || errno == ERANGE)
            throw InvalidArgument(fmt::format("mesh file line {}: '{}' is not a number", line_no_, s));
        return v;
    }

    long to_int(const std::string& s) const {
        errno = 0;
        char* end = nullptr;
        const long v = std::strtol(s.c_str(), &end, 10);
        if (end == s.c_str() || *end != '\0' || errno == ERANGE)
            throw InvalidArgument(fmt::format("mesh file line {}: '{}' is not an integer", line_no_, s));
        return v;
    }

private:
    std::istream& in_;
    std::size_t line_no_ = 0;
};

}  // namespace

void write_mesh(std::ostream& out, const Mesh& mesh) {
    const int dim = mesh.dim();
    out << fmt::format("{} {} {} {}\n", dim, mesh.num_nodes(), mesh.num_elements(), mesh.num_facets());
    for (const auto& p : mesh.nodes()) {
        if (dim == 1)
            out << fmt::format("{:.17g}\n", p[0]);
        else
            out << fmt::format("{:.17g} {:.17g}\n", p[0], p[1]);
    }
    for (const auto& el : mesh.elements()) {
        if (dim == 1)
            out << fmt::format("{} {}\n", el[0], el[1]);
        else
            out << fmt::format("{} {} {}\n", el[0], el[1], el[2]);
    }
    for (const auto& f : mesh.facets()) {
        if (dim == 1)
            out << fmt::format("{} {}\n", f.nodes[0], f.side);
        else
            out << fmt::format("{} {} {}\n", f.nodes[0], f.nodes[1], f.side);
    }
}

Mesh read_mesh(std::istream& in) {
    LineReader reader(in);
    const auto header = reader.next(4);
    const long dim = reader.to_int(header[0]);
    const long n_nodes = reader.to_int(header[1]);
    const long n_elements = reader.to_int(header[2]);
    const long n_facets = reader.to_int(header[3]);
    if (dim != 1 && dim != 2) throw InvalidArgument("mesh file: dim must be 1 or 2");
    if (n_nodes <= 0 || n_elements <= 0 || n_facets < 0) throw InvalidArgument("mesh file: bad counts in header");

    std::vector<Point> nodes(static_cast<std::size_t>(n_nodes), Point{0.0, 0.0});
    for (auto& p : nodes) {
        const auto t = reader.next(static_cast<std::size_t>(dim));
        for (long k = 0; k < dim; ++k) p[k] = reader.to_double(t[k]);
    }
    std::vector<Element> elements(static_cast<std::size_t>(n_elements), Element{-1, -1, -1});
    for (auto& el : elements) {
        const auto t = reader.next(static_cast<std::size_t>(dim + 1));
        for (long k = 0; k <= dim; ++k) el[k] = static_cast<int>(reader.to_int(t[k]));
    }
    std::vector<BoundaryFacet> facets(static_cast<std::size_t>(n_facets));
    for (auto& f : facets) {
        const auto t = reader.next(static_cast<std::size_t>(dim + 1));
        for (long k = 0; k < dim; ++k) f.nodes[k] = static_cast<int>(reader.to_int(t[k]));
        f.side = static_cast<int>(reader.to_int(t[dim]));
    }
    return Mesh(static_cast<int>(dim), std::move(nodes), std::move(elements), std::move(facets));
}

Mesh load_mesh_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open mesh file " + path);
    return read_mesh(in);
}

void save_mesh_file(const std::string& path, const Mesh& mesh) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write mesh file " + path);
    write_mesh(out, mesh);
}

}  // namespace whitefem
