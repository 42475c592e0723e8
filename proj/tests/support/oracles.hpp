#ifndef CDLAB_TEST_ORACLES_HPP
#define CDLAB_TEST_ORACLES_HPP

// Brute-force reference computations for the test suites.  Everything
// here is deliberately independent of the closed forms and assembly
// shortcuts in the library: plain adaptive quadrature, principal-value
// integration through the symmetric difference, tensor Gauss with Duffy
// diagonals, and dense full-pivot solves.

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace cdlab::testing {

/// adaptive bisection quadrature (Gauss 10/20 error estimate)
double adaptive_integrate(const std::function<double(double)>& f, double a, double b,
                          double tol = 1e-12, int max_depth = 32);

/// Hilbert transform with multiplier i sgn(xi):
///   (H u)(x) = (1/pi) p.v. integral of u(t)/(t - x) dt,
/// evaluated as the one-sided integral of the symmetric difference.
double pv_hilbert_oracle(const std::function<double(double)>& u, double x, double support_lo,
                         double support_hi, double tol = 1e-10);

/// Slobodetski double integral over the span of `pts` with the module's
/// 1/(2 pi) normalization; Duffy treatment on the diagonal and geometric
/// grading toward segment junctions.  With zero_extension_tails the
/// exterior part of the zero extension is added.
double slobodetski_sq_oracle(const std::function<double(double)>& eval,
                             std::vector<double> pts, bool zero_extension_tails,
                             int order = 12);

/// dense full-pivot solve (reference for the sparse path)
Eigen::VectorXd dense_solve_oracle(const Eigen::MatrixXd& A, const Eigen::VectorXd& b);

}  // namespace cdlab::testing

#endif
