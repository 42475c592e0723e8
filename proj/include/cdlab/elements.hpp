#ifndef CDLAB_ELEMENTS_HPP
#define CDLAB_ELEMENTS_HPP

#include <Eigen/Dense>
#include <functional>

#include "cdlab/special.hpp"

namespace cdlab {

/// Closed-form 2x2 element matrices on one flow cell of length tau.
/// Index convention: (i, j) = (trial shape, test shape) with 0 = left
/// node, 1 = right node.  Trial shapes are affine; test shapes are the
/// upwinded exponentials.  The *_gal matrices are the affine-affine
/// (Galerkin) counterparts.
struct LocalMatrices {
    Eigen::Matrix2d conv;       // integral of phi_i' (alpha psi_j' + beta psi_j)
    Eigen::Matrix2d mass;       // integral of phi_i psi_j
    Eigen::Matrix2d stiff;      // integral of phi_i' psi_j'
    Eigen::Matrix2d conv_gal;
    Eigen::Matrix2d mass_gal;
    Eigen::Matrix2d stiff_gal;
    double peclet;
};

LocalMatrices element_matrices(double alpha, double beta, double gamma, double tau);

/// mass-type matrix with a variable reaction coefficient:
/// integral over the cell [t0, t0+tau] of gamma(t) phi_i(t) psi_j(t) dt
/// by order-4 Gauss against the exact shapes.  upwind_test = false gives
/// the affine-affine version.
Eigen::Matrix2d weighted_mass(double alpha, double beta, double tau, double t0,
                              const std::function<double(double)>& gamma, bool upwind_test);

/// loads integral of f * psi over the cell, exact for constant f,
/// order-6 Gauss for callables.  Returns (left shape, right shape).
Eigen::Vector2d load_constant(double f, double alpha, double beta, double tau,
                              bool upwind_test);
Eigen::Vector2d load_callable(const std::function<double(double)>& f, double alpha,
                              double beta, double tau, double t0, bool upwind_test);

/// P1 mass and stiffness on a cell of length h (transverse building blocks).
Eigen::Matrix2d p1_mass(double h);
Eigen::Matrix2d p1_stiffness(double h);

}  // namespace cdlab

#endif
