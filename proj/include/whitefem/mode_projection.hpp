#pragma once

#include "whitefem/linear_solver.hpp"
#include "whitefem/mesh.hpp"
#include "whitefem/spectral.hpp"

#include <cstddef>

namespace whitefem {

/// Exact pairings of eigenfunctions with the nodal basis of a mesh that
/// covers the basis domain.
///
/// The volume pairing uses -Δe = μe and the divergence theorem, which turns
/// (e, φ_i) into edge integrals of exponentials with closed forms. No
/// quadrature is involved. Both referenced objects must outlive the projector.
class ModeProjector {
public:
    ModeProjector(const EigenBasis& basis, const Mesh& mesh);

    /// b_i = (e_k, φ_i)_{L²(D)}.
    Vector load(std::size_t k) const;
    /// g_i = ∫_{∂D} e_k φ_i dσ.
    Vector boundary_load(std::size_t k) const;
    /// e_k at the nodes.
    Vector interpolant(std::size_t k) const;

    const EigenBasis& basis() const noexcept { return basis_; }
    const Mesh& mesh() const noexcept { return mesh_; }

private:
    const EigenBasis& basis_;
    const Mesh& mesh_;
    Vector hat_integrals_;
    Vector boundary_hat_integrals_;
};

}  // namespace whitefem
