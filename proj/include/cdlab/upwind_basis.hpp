#ifndef CDLAB_UPWIND_BASIS_HPP
#define CDLAB_UPWIND_BASIS_HPP

#include <Eigen/Dense>
#include <vector>

#include "cdlab/functions.hpp"
#include "cdlab/mesh.hpp"

namespace cdlab {

/// Exact test basis function at an interior vertex of a tensor mesh:
/// upwinded exponential hat in the flow direction times a P1 hat in the
/// transverse direction.  Supported on the four adjacent cells.
struct ExactTestBasis2D {
    TensorMesh2D mesh;
    int vi, vj;  // vertex indices
    double alpha, beta;
    UpwindFunction flow_hat;  // on the two flow cells [t_{i-1}, t_{i+1}]

    double eval(double x, double y) const;
    double dx(double x, double y) const;
    double dy(double x, double y) const;
    /// integral over the support; closed form (tau * sigma).
    double integral() const;
};

ExactTestBasis2D exact_test_basis_2d(const TensorMesh2D& mesh, int vi, int vj, double alpha,
                                     double beta);

/// Interior stations of the flow-direction subdivision of one cell:
/// level L places the points where the upwinded shape crosses k/2^L,
/// k = 1..2^L-1.  Level 1 follows the declared rule exactly (median
/// crossing clamped to [0.1, 0.9] of the cell).
std::vector<double> flow_stations(double peclet, int level);

/// One added point per cell of every dimension and the induced
/// simplicial refinement of a rectangle cell: tensor stations with
/// alternating diagonals, which at level 1 reproduces the 8-triangle
/// star around the added center point.
struct SubgridGeometry {
    std::vector<double> xs;  // flow stations including the cell ends
    std::vector<double> ys;  // transverse stations including the ends
    struct Tri {
        int a, b, c;
    };
    std::vector<Tri> tris;

    int nx() const { return static_cast<int>(xs.size()); }
    int ny() const { return static_cast<int>(ys.size()); }
    int node(int ix, int iy) const { return iy * nx() + ix; }
    int n_nodes() const { return nx() * ny(); }
    std::pair<double, double> node_xy(int id) const {
        return {xs[id % nx()], ys[id / nx()]};
    }
};

SubgridGeometry subgrid_geometry(double x0, double tau, double y0, double sigma,
                                 double peclet, int level);

/// P1 function on the subgrid of one parent cell.
struct SubgridBasis {
    int cell_i = 0, cell_j = 0;  // parent cell indices
    SubgridGeometry geo;
    Eigen::VectorXd values;

    double eval(double x, double y) const;
    std::pair<double, double> grad(double x, double y) const;
};

/// values at the interior stations of a 1D weighted-Dirichlet subgrid
/// solve of (exp(beta x/alpha) v')' = 0 with endpoint data g0, g1.
std::vector<double> edge_subgrid_solve(const std::vector<double>& stations, double x0,
                                       double tau, double g0, double g1, double alpha,
                                       double beta);

/// Recursive extension of 0/1 vertex data over one rectangle cell:
/// edges solved first (1D subgrids), then the face interior by the
/// symmetrized weighted P1 form.  corner in {0,1}^2 selects which
/// corner carries the value 1.
SubgridBasis approx_cell_basis(double x0, double tau, double y0, double sigma, int corner_ix,
                               int corner_iy, double alpha, double beta, int level = 1);

/// The four per-cell pieces of the approximate test basis at an
/// interior vertex (cells in the order (i-1,j-1), (i,j-1), (i-1,j), (i,j)).
std::vector<SubgridBasis> approx_upwind_basis(const TensorMesh2D& mesh, int vi, int vj,
                                              double alpha, double beta, int level = 1);

/// relative alpha-norm distance between the exact and approximate basis
/// function over the 4-cell patch, by layer-resolving quadrature.
double basis_relative_error(const ExactTestBasis2D& exact,
                            const std::vector<SubgridBasis>& approx, double alpha);

}  // namespace cdlab

#endif
