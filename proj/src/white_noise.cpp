#include "whitefem/white_noise.hpp"

#include "whitefem/error.hpp"

#include <fmt/format.h>

namespace whitefem {

MassFactor::MassFactor(const SparseMatrix& mass) : size_(static_cast<std::size_t>(mass.rows())) {
    if (mass.rows() != mass.cols()) throw InvalidArgument("mass matrix is not square");
    Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::NaturalOrdering<int>> llt(mass);
    if (llt.info() != Eigen::Success)
        throw NumericalError("mass matrix Cholesky failed: matrix is not symmetric positive definite");
    lower_ = llt.matrixL();
    lower_.makeCompressed();
}

Vector MassFactor::apply(const Vector& z) const {
    if (static_cast<std::size_t>(z.size()) != size_) throw InvalidArgument("MassFactor::apply: length mismatch");
    return lower_ * z;
}

Vector MassFactor::apply_transpose(const Vector& v) const {
    if (static_cast<std::size_t>(v.size()) != size_) throw InvalidArgument("MassFactor::apply_transpose: length mismatch");
    return lower_.transpose() * v;
}

LoadSample sample_load_vector(const MeshPtr& mesh, const MassFactor& factor, GaussianStream& stream) {
    if (factor.size() != mesh->num_nodes()) throw InvalidArgument("mass factor does not match the mesh");
    LoadSample s{mesh, Vector(), stream.seed(), stream.stream_id()};
    Vector z(static_cast<Eigen::Index>(mesh->num_nodes()));
    stream.fill_normal(z.begin(), z.end());
    s.b = factor.apply(z);
    return s;
}

DenseMatrix sample_load_batch(const MassFactor& factor, std::size_t n, std::uint64_t seed, std::uint64_t base_stream,
                              const ExecutionPolicy& policy) {
    const auto nodes = static_cast<Eigen::Index>(factor.size());
    DenseMatrix out(static_cast<Eigen::Index>(n), nodes);
    parallel_for(policy, n, [&](std::size_t p) {
        GaussianStream stream(seed, base_stream + p);
        Vector z(nodes);
        stream.fill_normal(z.begin(), z.end());
        out.row(static_cast<Eigen::Index>(p)) = factor.apply(z).transpose();
    });
    return out;
}

SpectralField sample_spectral_truncation(const std::shared_ptr<const EigenBasis>& basis, std::size_t m,
                                         GaussianStream& stream) {
    if (m > basis->size())
        throw InvalidArgument(fmt::format("truncation {} exceeds the basis size {}", m, basis->size()));
    Vector xi(static_cast<Eigen::Index>(m));
    stream.fill_normal(xi.begin(), xi.end());
    return SpectralField(basis, std::move(xi));
}

double white_noise_functional(const FemFunction& phi, const LoadSample& sample) {
    if (phi.mesh_ptr() != sample.mesh) throw InvalidArgument("white_noise_functional: different meshes");
    return phi.coefficients().dot(sample.b);
}

double white_noise_functional(const SpectralField& phi, const SpectralField& sample) {
    if (phi.basis_ptr() != sample.basis_ptr()) throw InvalidArgument("white_noise_functional: different bases");
    const Eigen::Index m = std::min(phi.coefficients().size(), sample.coefficients().size());
    return phi.coefficients().head(m).dot(sample.coefficients().head(m));
}

}  // namespace whitefem
