#ifndef CDLAB_MESH_HPP
#define CDLAB_MESH_HPP

#include <vector>

namespace cdlab {

/// Uniform partition of [0, extent].  Immutable after construction.
class Mesh1D {
public:
    Mesh1D() : Mesh1D(1.0, 1) {}
    Mesh1D(double extent, int n_cells);

    double extent() const { return extent_; }
    int n_cells() const { return n_cells_; }
    int n_vertices() const { return n_cells_ + 1; }
    double step() const { return step_; }
    double vertex(int k) const { return vertices_[k]; }
    const std::vector<double>& vertices() const { return vertices_; }
    int n_interior() const { return n_cells_ - 1; }

private:
    double extent_;
    int n_cells_;
    double step_;
    std::vector<double> vertices_;
};

Mesh1D uniform_partition(double extent, int n);

enum class BoundaryKind { interior, inflow, outflow, lateral };

/// Tensor product of a flow-direction mesh (step tau) and a transverse
/// mesh (step sigma).  Vertex numbering is lexicographic with the flow
/// index fastest (transverse-major).
class TensorMesh2D {
public:
    TensorMesh2D(Mesh1D flow, Mesh1D transverse);

    const Mesh1D& flow() const { return flow_; }
    const Mesh1D& transverse() const { return transverse_; }

    int n_cells() const { return flow_.n_cells() * transverse_.n_cells(); }
    int n_vertices() const { return flow_.n_vertices() * transverse_.n_vertices(); }
    int n_interior() const { return flow_.n_interior() * transverse_.n_interior(); }

    int vertex_index(int i, int j) const { return j * flow_.n_vertices() + i; }
    std::pair<int, int> vertex_ij(int g) const {
        return {g % flow_.n_vertices(), g / flow_.n_vertices()};
    }
    std::pair<double, double> vertex_xy(int i, int j) const {
        return {flow_.vertex(i), transverse_.vertex(j)};
    }

    bool is_interior(int i, int j) const {
        return i > 0 && i < flow_.n_cells() && j > 0 && j < transverse_.n_cells();
    }
    BoundaryKind classify(int i, int j) const;

    /// interior dof numbering (lexicographic over interior vertices,
    /// flow index fastest); -1 for boundary vertices.
    int interior_dof(int i, int j) const;

private:
    Mesh1D flow_;
    Mesh1D transverse_;
};

TensorMesh2D tensor_mesh(const Mesh1D& flow, const Mesh1D& transverse);

}  // namespace cdlab

#endif
