#include "cdlab/mesh.hpp"

#include <stdexcept>

namespace cdlab {

Mesh1D::Mesh1D(double extent, int n_cells) : extent_(extent), n_cells_(n_cells) {
    if (extent <= 0.0) throw std::invalid_argument("Mesh1D: extent must be > 0");
    if (n_cells < 1) throw std::invalid_argument("Mesh1D: need at least one cell");
    step_ = extent / n_cells;
    vertices_.resize(n_cells + 1);
    for (int k = 0; k <= n_cells; ++k) vertices_[k] = extent * k / n_cells;
    vertices_.front() = 0.0;
    vertices_.back() = extent;
}

Mesh1D uniform_partition(double extent, int n) { return Mesh1D(extent, n); }

TensorMesh2D::TensorMesh2D(Mesh1D flow, Mesh1D transverse)
    : flow_(std::move(flow)), transverse_(std::move(transverse)) {}

BoundaryKind TensorMesh2D::classify(int i, int j) const {
    if (is_interior(i, j)) return BoundaryKind::interior;
    if (i == 0) return BoundaryKind::inflow;
    if (i == flow_.n_cells()) return BoundaryKind::outflow;
    return BoundaryKind::lateral;
}

int TensorMesh2D::interior_dof(int i, int j) const {
    if (!is_interior(i, j)) return -1;
    return (j - 1) * flow_.n_interior() + (i - 1);
}

TensorMesh2D tensor_mesh(const Mesh1D& flow, const Mesh1D& transverse) {
    return TensorMesh2D(flow, transverse);
}

}  // namespace cdlab
