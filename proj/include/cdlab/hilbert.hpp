#ifndef CDLAB_HILBERT_HPP
#define CDLAB_HILBERT_HPP

#include <Eigen/Dense>

#include "cdlab/functions.hpp"

namespace cdlab {

/// Hilbert transform of a continuous piecewise affine function with zero
/// extension, normalized with Fourier multiplier i*sgn(xi) so that
///   integral of u' * H u  =  |u|^2 in the half seminorm
/// holds exactly (see norms.hpp for the seminorm normalization).
/// All evaluations and integrals are exact (logarithmic closed forms);
/// evaluation at a vertex takes the continuous limit.
class HilbertClosedForm {
public:
    explicit HilbertClosedForm(const PiecewiseAffine& u);

    double eval(double x) const;

    /// exact integral of (H u) over [A, B]
    double integral(double A, double B) const;

    /// exact per-cell averages of H u on the mesh of u: the piecewise
    /// constant projection used by the optimal-test-function pipelines.
    PiecewiseConstant cell_averages() const;

    /// exact pairing: integral of w' * (H u) for w piecewise affine on
    /// the same mesh.
    double pairing_with_derivative(const Eigen::VectorXd& w_nodal) const;

    /// integral of u' * H u; equals the squared half seminorm of the
    /// zero extension of u.
    double self_pairing() const;

private:
    Mesh1D mesh_;
    Eigen::VectorXd a_, b_;   // per-cell affine pieces u = a + b t
};

/// squared half seminorm of the zero extension of u, via the Hilbert
/// pairing identity (exact closed form).
double h_half_sq_zero_extension(const PiecewiseAffine& u);

}  // namespace cdlab

#endif
