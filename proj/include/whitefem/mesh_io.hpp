#pragma once

#include "whitefem/mesh.hpp"

#include <iosfwd>
#include <string>

namespace whitefem {

// Plain-text mesh format:
//
//   dim n_nodes n_elements n_facets
//   <n_nodes lines>     coordinates (dim values)
//   <n_elements lines>  0-based node indices (dim+1 values)
//   <n_facets lines>    facet node indices (dim values) followed by the side id
//
// Coordinates are written with 17 significant digits, so a write/read cycle
// reproduces every double exactly.

void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in);

Mesh load_mesh_file(const std::string& path);
void save_mesh_file(const std::string& path, const Mesh& mesh);

}  // namespace whitefem
