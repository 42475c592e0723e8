#ifndef CDLAB_FUNCTIONS_HPP
#define CDLAB_FUNCTIONS_HPP

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "cdlab/mesh.hpp"
#include "cdlab/special.hpp"

namespace cdlab {

/// Continuous piecewise affine function on a Mesh1D, one value per vertex.
/// With vanishes_at_ends set, both endpoint values must be zero and the
/// function is understood as extended by zero outside the interval.
struct PiecewiseAffine {
    Mesh1D mesh;
    Eigen::VectorXd values;
    bool vanishes_at_ends = false;

    PiecewiseAffine(Mesh1D m, Eigen::VectorXd v, bool zero_ends = false);

    double eval(double t) const;
    double slope(int cell) const;
    double l2_sq() const;
    double deriv_l2_sq() const;
    double linf() const;
};

/// tau-piecewise constant function, one value per cell, zero outside.
struct PiecewiseConstant {
    Mesh1D mesh;
    Eigen::VectorXd values;

    PiecewiseConstant(Mesh1D m, Eigen::VectorXd v);

    double eval(double t) const;
    double l2_sq() const;
};

/// Continuous function which on every cell has the upwinded form
///   v(t) = c1 + c2 * exp(-beta (t - t_k)/alpha)          (beta > 0)
/// or, in the degenerate linear mode (beta = 0),
///   v(t) = c1 + c2 * (t - t_k)/tau.
/// The local offset t_k keeps all exponents in [-p, 0].
struct UpwindFunction {
    Mesh1D mesh;
    double alpha = 1.0;
    double beta = 0.0;
    bool linear_mode = false;          // beta == 0 degeneracy
    Eigen::VectorXd c1, c2;            // one pair per cell

    double peclet() const;
    double eval(double t) const;
    double deriv(double t) const;
    double eval_local(int cell, double s) const;   // s in [0,1]
    double deriv_local(int cell, double s) const;  // d/dt at t_k + s*tau

    double node_value(int k) const;
    Eigen::VectorXd node_values() const;

    double l2_sq() const;          // exact per-cell integrals
    double deriv_l2_sq() const;
    /// max relative jump at interior vertices (continuity diagnostic)
    double max_relative_jump() const;
};

/// Nodal interpolation of a piecewise affine function by the upwinded
/// local solutions of alpha v'' + beta v' = 0 (same vertex values).
UpwindFunction exact_upwind_interpolant(const PiecewiseAffine& u, double alpha, double beta);

/// Upwind function with prescribed vertex values.
UpwindFunction upwind_from_nodal(const Mesh1D& mesh, const Eigen::VectorXd& nodal,
                                 double alpha, double beta);

/// L2 projection onto the piecewise constants of the given mesh.
PiecewiseConstant project_piecewise_constant(const Mesh1D& mesh,
                                             const std::function<double(double)>& u);
PiecewiseConstant project_piecewise_constant(const PiecewiseAffine& u);
/// projection of a function given on a finer/unrelated mesh (exact overlap)
PiecewiseConstant project_piecewise_constant(const Mesh1D& target, const PiecewiseAffine& u);

/// Causal exponential kernel G(s) = (beta/alpha) exp(-beta s/alpha), s >= 0.
struct Kernel {
    double alpha;
    double beta;
};

/// Convolution v = G * u of a piecewise constant (zero outside its mesh):
/// continuous, upwinded on every cell, with the decaying tail
/// v(T + s) = v(T) exp(-beta s / alpha) carried separately.
struct ConvolvedFunction {
    UpwindFunction core;   // on the mesh of u
    double tail_value;     // v at the right end of the mesh

    double eval(double t) const;
    /// alpha * integral over all of R of v'(t)^2 (exact, tail included)
    double alpha_deriv_l2_sq() const;
    double l2_sq() const;  // over all of R (tail included)
};

ConvolvedFunction convolve_exponential(const PiecewiseConstant& u, const Kernel& k);

/// exact integrals over one cell of the products of the two affine unit
/// shapes and the two upwinded unit shapes; building blocks for element
/// matrices and upwind mass grams.  All values are for the unit interval.
struct ShapeIntegrals {
    double int_psiL, int_psiR;          // plain integrals
    double m_LL, m_LR, m_RL, m_RR;      // affine_i * psi_j
    double p_LL, p_LR, p_RR;            // psi_i * psi_j
};
ShapeIntegrals shape_integrals(double p);

}  // namespace cdlab

#endif
