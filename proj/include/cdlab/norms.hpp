#ifndef CDLAB_NORMS_HPP
#define CDLAB_NORMS_HPP

#include <Eigen/Dense>
#include <string>

#include "cdlab/functions.hpp"
#include "cdlab/mesh.hpp"

namespace cdlab {

/// All half-seminorms in this module carry the normalization
///   |u|^2 = (1/(2 pi)) * double integral of |u(x)-u(y)|^2 / (x-y)^2,
/// chosen so that the Hilbert pairing identity (hilbert.hpp) holds
/// without any extra constant.
double h_half_seminorm_scale();

enum class ShapeKind { affine, upwind };
enum class NormSide { trial, test };

/// Symmetric PSD quadratic form over nodal coefficients.
struct NormGram {
    Eigen::MatrixXd Q;
    std::string tag;  // h_half | h_half_00 | alpha_energy | l2 | theorem_trial | theorem_test
};

/// P1 grams over all vertices of a 1D mesh.
Eigen::MatrixXd p1_mass_gram(const Mesh1D& mesh);
Eigen::MatrixXd p1_stiffness_gram(const Mesh1D& mesh);

/// Exact grams over all vertices for the upwinded nodal space.
Eigen::MatrixXd upwind_mass_gram(const Mesh1D& mesh, double alpha, double beta);
/// equals Phi(p) times the P1 stiffness (energy identity of the
/// upwinded interpolant).
Eigen::MatrixXd upwind_stiffness_gram(const Mesh1D& mesh, double alpha, double beta);

/// strips first/last row and column (Dirichlet elimination in 1D)
Eigen::MatrixXd interior_block(const Eigen::MatrixXd& full);

/// Interval Slobodetski seminorm gram on (0, T).  Interior nodes only
/// unless include_boundary is set (the "free" variant, where constants
/// restricted to the interval have seminorm zero).
NormGram h_half_seminorm_gram(const Mesh1D& mesh, ShapeKind kind, double alpha = 1.0,
                              double beta = 0.0, bool include_boundary = false);

/// gram of 2 * integral of phi_m phi_n (1/x + 1/(T-x)) over interior nodes:
/// the exterior-kernel tail picked up by extension by zero.
Eigen::MatrixXd zero_extension_tail_gram(const Mesh1D& mesh, ShapeKind kind,
                                         double alpha = 1.0, double beta = 0.0);

/// Lions-Magenes seminorm gram: interval part plus the zero-extension
/// tail.  uT Q u equals the half seminorm squared of the zero extension.
NormGram h_half_00_gram(const Mesh1D& mesh, ShapeKind kind = ShapeKind::affine,
                        double alpha = 1.0, double beta = 0.0);

/// Translation-based weak Besov seminorm: sup over dyadic shifts
/// y = 2^-k T, k = 0..30, of ||u - u(.-y)|| / sqrt(y); a declared lower
/// approximation of the sup.
double h_half_weak_seminorm(const PiecewiseAffine& u);
double h_half_weak_seminorm(const PiecewiseConstant& u);
double h_half_weak_seminorm(const UpwindFunction& u);

/// ||u||_alpha^2 = l2 + alpha * |grad|^2 (exact for the 1D reps).
double alpha_norm_sq(const PiecewiseAffine& u, double alpha);
double alpha_norm_sq(const UpwindFunction& u, double alpha);

/// Grams of the stability-theorem norms over interior dofs (sum of
/// squares of the two norm terms).  Trial side: H^{1/2}_00 full norm
/// plus alpha-weighted Dirichlet energy on the affine space; test side:
/// intrinsic interval H^{1/2} full norm plus alpha energy on the
/// upwinded space.
NormGram theorem_norm_gram_1d(const Mesh1D& mesh, double alpha, double beta, NormSide side);
NormGram theorem_norm_gram_2d(const TensorMesh2D& mesh, double alpha, double beta,
                              NormSide side);

/// Smallest generalized singular value of the pairing B (rows = test,
/// cols = trial) with respect to SPD grams NX (trial) and NY (test):
/// Cholesky whitening followed by a dense SVD.  Throws on indefinite
/// grams.
double inf_sup_constant(const Eigen::MatrixXd& B, const Eigen::MatrixXd& NX,
                        const Eigen::MatrixXd& NY);

/// same computation, also returning the minimizing trial coefficient
/// vector (NX-normalized).
std::pair<double, Eigen::VectorXd> inf_sup_minimizer(const Eigen::MatrixXd& B,
                                                     const Eigen::MatrixXd& NX,
                                                     const Eigen::MatrixXd& NY);

/// half-seminorm squared of the zero extension of a piecewise-smooth
/// function given by its breakpoints (which must already resolve any
/// layers), by segment-pair quadrature with diagonal Duffy treatment
/// plus the analytic exterior tail.
double h_half_sq_zero_extension_quadrature(const std::vector<double>& breakpoints,
                                           const std::function<double(double)>& eval);

/// Dense CSV export (row-major), header records the tag and parameters.
void write_gram_csv(const std::string& path, const NormGram& gram,
                    const std::string& params);

/// Fourier-side evaluation of |u|^2_{H^s} (same normalization as the
/// Slobodetski grams) for compactly supported discrete inputs; optional
/// first-order low-pass 1/(1 + (alpha xi / beta)^2) applied to the
/// spectrum (the exponential-kernel convolution).  Used as the scalable
/// route in the operator-ratio measurements; cross-checked against the
/// Slobodetski quadrature in the tests.
double fourier_hs_seminorm_sq(const PiecewiseConstant& u, double s,
                              double filter_alpha = 0.0, double beta = 1.0);
double fourier_hs_seminorm_sq(const PiecewiseAffine& u, double s,
                              double filter_alpha = 0.0, double beta = 1.0);
/// alpha * int |d/dt (G * u)|^2 via the spectral side (for cross-checks).
double fourier_filtered_deriv_sq(const PiecewiseConstant& u, double alpha, double beta);

}  // namespace cdlab

#endif
