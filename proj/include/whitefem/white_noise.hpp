#pragma once

#include "whitefem/fem.hpp"
#include "whitefem/linear_solver.hpp"
#include "whitefem/rng.hpp"
#include "whitefem/spectral.hpp"

#include <cstdint>
#include <memory>

namespace whitefem {

/// Cholesky factor M = L Lᵀ of a mass matrix in the natural node ordering.
class MassFactor {
public:
    explicit MassFactor(const SparseMatrix& mass);

    std::size_t size() const noexcept { return size_; }
    /// L z.
    Vector apply(const Vector& z) const;
    /// Lᵀ v.
    Vector apply_transpose(const Vector& v) const;
    const SparseMatrix& lower() const noexcept { return lower_; }

private:
    std::size_t size_ = 0;
    SparseMatrix lower_;
};

/// White noise tested against the nodal basis: b_i = Ẇ(φ_i).
struct LoadSample {
    MeshPtr mesh;
    Vector b;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
};

/// b = L z with z drawn from the stream (advances it by the node count).
LoadSample sample_load_vector(const MeshPtr& mesh, const MassFactor& factor, GaussianStream& stream);

/// n load samples as rows; sample p uses stream (seed, base_stream + p).
DenseMatrix sample_load_batch(const MassFactor& factor, std::size_t n, std::uint64_t seed, std::uint64_t base_stream,
                              const ExecutionPolicy& policy = {});

/// Coefficients ξ_1..ξ_m of the truncated expansion of white noise.
SpectralField sample_spectral_truncation(const std::shared_ptr<const EigenBasis>& basis, std::size_t m,
                                         GaussianStream& stream);

/// Ẇ(v) = vᵀ b for v in V_h.
double white_noise_functional(const FemFunction& phi, const LoadSample& sample);
/// Σ c_k ξ_k over the common truncation.
double white_noise_functional(const SpectralField& phi, const SpectralField& sample);

}  // namespace whitefem
