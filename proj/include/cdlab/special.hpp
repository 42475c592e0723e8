#ifndef CDLAB_SPECIAL_HPP
#define CDLAB_SPECIAL_HPP

// Overflow- and cancellation-safe exponential primitives shared by the
// element integrals, the upwinded function representations and the
// experiment drivers.  Every formula here is written so that only
// non-positive exponents are ever passed to exp/expm1.

namespace cdlab {

/// Dimensionless cell Peclet number p = beta * tau / alpha.
struct Peclet {
    double value = 0.0;
};

/// E(p) = (1 - exp(-p)) / p, continuously extended by E(0) = 1.
/// Taylor branch below 1e-4, asymptotic branch (drops exp(-p)) above 50.
double exp_avg(double p);

/// J(p) = integral over [0,1] of s * exp(-p s) ds
///      = (1 - exp(-p) * (1 + p)) / p^2, J(0) = 1/2.
double exp_first_moment(double p);

enum class CellNode { left, right };

/// Upwinded shape function on the unit interval:
///   psi_L(s) = (exp(-p s) - exp(-p)) / (1 - exp(-p)),
///   psi_R(s) = (1 - exp(-p s)) / (1 - exp(-p)).
/// p <= tiny falls back to the affine limit (1-s resp. s).
double upwind_shape(Peclet p, double s, CellNode node);

/// d/ds of the shape above (unit interval derivative).
double upwind_shape_deriv(Peclet p, double s, CellNode node);

/// Phi(p) = (p/2) * (exp(p)+1)/(exp(p)-1), the ratio of the Dirichlet
/// energies of an upwinded interpolant and its affine source.
/// Series branch keeps the p -> 0 limit Phi = 1 exact to machine.
double phi_of_p(double p);

/// Flow-coordinate in (0,1) where both upwind shapes cross 1/2:
/// s* = -log((1 + exp(-p))/2) / p, tending to 1/2 as p -> 0.
double upwind_half_crossing(double p);

/// Exact solution of -alpha u'' + beta u' = f0 on (0,T), u(0)=u(T)=0,
/// with constant data, evaluated without overflow:
///   u(t) = (f0/beta) * (t - T * r(t)),
///   r(t) = expm1(-beta t/alpha) * exp(-beta (T-t)/alpha) / expm1(-beta T/alpha).
double exact_layer_solution(double alpha, double beta, double f0, double T, double t);

/// integral over [A,B] of exp(c*(x - xr)) * (a + b*(x - xr)) dx.
/// Caller must anchor xr so that c*(x-xr) <= 0 on [A,B]; a Gauss
/// fallback is used when |c|*(B-A) is too small for the closed form.
double exp_affine_integral(double c, double xr, double a, double b, double A, double B);

}  // namespace cdlab

#endif
