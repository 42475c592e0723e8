#include "cdlab/elements.hpp"

#include <cmath>
#include <stdexcept>

#include "cdlab/functions.hpp"
#include "cdlab/quadrature.hpp"

namespace cdlab {

LocalMatrices element_matrices(double alpha, double beta, double gamma, double tau) {
    if (alpha <= 0.0 || beta < 0.0 || gamma < 0.0 || tau <= 0.0) {
        throw std::invalid_argument("element_matrices: needs alpha > 0, beta >= 0, tau > 0");
    }
    (void)gamma;  // reaction enters assembly through the mass matrices
    LocalMatrices lm;
    const double p = beta * tau / alpha;
    lm.peclet = p;

    // alpha psi' + beta psi is constant on the cell (psi solves the local
    // adjoint equation), so conv rows need only the trial increments.
    const double E1 = exp_avg(p);
    const double KR = alpha / (tau * E1);             // beta / (1 - exp(-p))
    const double KL = -KR * std::exp(-p);
    lm.conv << -KL, -KR,
                KL,  KR;

    const ShapeIntegrals si = shape_integrals(p);
    lm.mass << si.m_LL, si.m_LR,
               si.m_RL, si.m_RR;
    lm.mass *= tau;

    // phi' is constant, so only the endpoint jump of psi survives:
    // identical to the P1 stiffness.
    lm.stiff << 1.0, -1.0,
               -1.0, 1.0;
    lm.stiff /= tau;

    lm.stiff_gal = lm.stiff;
    lm.mass_gal = p1_mass(tau);
    Eigen::Matrix2d bterm;
    bterm << -0.5, -0.5,
              0.5,  0.5;
    lm.conv_gal = alpha * lm.stiff + beta * bterm;
    return lm;
}

Eigen::Matrix2d weighted_mass(double alpha, double beta, double tau, double t0,
                              const std::function<double(double)>& gamma, bool upwind_test) {
    Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
    const GaussRule& g = gauss_rule(4);
    const Peclet pe{beta * tau / alpha};
    for (int q = 0; q < 4; ++q) {
        const double s = 0.5 * (1.0 + g.nodes[q]);
        const double w = 0.5 * g.weights[q] * tau * gamma(t0 + s * tau);
        const double phi[2] = {1.0 - s, s};
        double psi[2];
        if (upwind_test) {
            psi[0] = upwind_shape(pe, s, CellNode::left);
            psi[1] = 1.0 - psi[0];
        } else {
            psi[0] = phi[0];
            psi[1] = phi[1];
        }
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) m(i, j) += w * phi[i] * psi[j];
    }
    return m;
}

Eigen::Vector2d load_constant(double f, double alpha, double beta, double tau,
                              bool upwind_test) {
    Eigen::Vector2d v;
    if (!upwind_test) {
        v << 0.5, 0.5;
    } else {
        const ShapeIntegrals si = shape_integrals(beta * tau / alpha);
        v << si.int_psiL, si.int_psiR;
    }
    return f * tau * v;
}

Eigen::Vector2d load_callable(const std::function<double(double)>& f, double alpha,
                              double beta, double tau, double t0, bool upwind_test) {
    Eigen::Vector2d v = Eigen::Vector2d::Zero();
    const GaussRule& g = gauss_rule(6);
    const Peclet pe{beta * tau / alpha};
    for (int q = 0; q < 6; ++q) {
        const double s = 0.5 * (1.0 + g.nodes[q]);
        const double w = 0.5 * g.weights[q] * tau * f(t0 + s * tau);
        if (upwind_test) {
            const double l = upwind_shape(pe, s, CellNode::left);
            v(0) += w * l;
            v(1) += w * (1.0 - l);
        } else {
            v(0) += w * (1.0 - s);
            v(1) += w * s;
        }
    }
    return v;
}

Eigen::Matrix2d p1_mass(double h) {
    Eigen::Matrix2d m;
    m << 2.0, 1.0,
         1.0, 2.0;
    return m * (h / 6.0);
}

Eigen::Matrix2d p1_stiffness(double h) {
    Eigen::Matrix2d m;
    m << 1.0, -1.0,
        -1.0, 1.0;
    return m / h;
}

}  // namespace cdlab
