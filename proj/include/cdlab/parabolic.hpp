#ifndef CDLAB_PARABOLIC_HPP
#define CDLAB_PARABOLIC_HPP

#include <Eigen/Dense>
#include <functional>

#include "cdlab/mesh.hpp"

namespace cdlab {

/// Abstract parabolic problem: spatial P1 space on a uniform partition
/// of V with homogeneous Dirichlet conditions, bilinear form
/// a(u, v) = int uv + alpha int u'v', source f(t, x), zero initial data.
struct ParabolicProblem {
    Mesh1D space;
    double alpha = 0.0;
    std::function<double(double, double)> f;  // f(t, x)
    double horizon = 1.0;

    Eigen::MatrixXd mass() const;       // interior P1 mass (the O scalar product)
    Eigen::MatrixXd form() const;       // mass + alpha * stiffness (the a form)
};

/// time-piecewise-affine trajectory with values in the interior P1 dofs
struct Trajectory {
    Mesh1D time_mesh;
    Eigen::MatrixXd values;  // (n_time_vertices) x (n_space_interior)
};

Trajectory crank_nicolson_solve(const ParabolicProblem& problem, double tau, int n_steps);

/// midpoint states (the piecewise-constant projection of the trajectory)
Eigen::MatrixXd midpoint_states(const Trajectory& u);

/// residual of the integrated reformulation
///   int <du/dt, v> + int a(ubar, v) - int <fbar, v>
/// against a test trajectory of arbitrary time dependence, sampled by
/// per-step Gauss quadrature of order `order`.
double reformulation_residual(const ParabolicProblem& problem, const Trajectory& u,
                              const std::function<Eigen::VectorXd(double)>& v, int order = 8);

/// ||u||^2 in Y00 = H^{1/2}_00-in-time (O-valued) + L^2-in-time (X_alpha)
double y00_norm_sq(const ParabolicProblem& problem, const Trajectory& u);

struct StabilityReport {
    double ratio;          // ||u||_Y00 / dual norm of fbar (0 if f == 0)
    double y00_norm;
    double dual_norm;
    double residual;       // reformulation residual of the computed solution
};

/// Crank-Nicolson stability ratio on the discrete trajectory space: the
/// dual norm is the Riesz norm of v -> int <fbar, v> over test
/// trajectories with the intrinsic Y-norm (a declared surrogate).
StabilityReport cn_stability_ratio(const ParabolicProblem& problem, double tau, int n_steps);

/// Positivity measure of the combined test function v = H u + lambda u
/// against the integrated form: returns
///   (int <du/dt, v> + int a(ubar, v)) / (|u|^2_{H1/2(O)} + ||ubar||^2_{L2(Xa)}).
double combined_test_lower_bound(const ParabolicProblem& problem, const Trajectory& u,
                                 double lambda);

/// diagnostic: decay of the O-norm under f = 0 from a given state
/// (unconditional stability); returns max growth factor over the steps.
double cn_energy_growth(const ParabolicProblem& problem, const Eigen::VectorXd& u0,
                        double tau, int n_steps);

/// measured constant of ||u||_alpha <= C (1 + sqrt(alpha)/sigma) ||u||_0
/// over random coefficient vectors.
double inverse_inequality_constant(const ParabolicProblem& problem, int samples,
                                   unsigned seed);

}  // namespace cdlab

#endif
