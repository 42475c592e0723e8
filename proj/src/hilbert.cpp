#include "cdlab/hilbert.hpp"

#include <cmath>
#include <stdexcept>

namespace cdlab {

namespace {

// antiderivative of (g0 + g1 * y) * log|y|, continuous through y = 0
double log_prim(double g0, double g1, double y) {
    if (y == 0.0) return 0.0;
    const double ly = std::log(std::abs(y));
    return g0 * (y * ly - y) + g1 * (0.5 * y * y * ly - 0.25 * y * y);
}

}  // namespace

HilbertClosedForm::HilbertClosedForm(const PiecewiseAffine& u) : mesh_(u.mesh) {
    if (!u.vanishes_at_ends) {
        throw std::invalid_argument(
            "HilbertClosedForm: zero extension needs vanishing endpoint values");
    }
    const int n = mesh_.n_cells();
    a_.resize(n);
    b_.resize(n);
    for (int k = 0; k < n; ++k) {
        b_(k) = (u.values(k + 1) - u.values(k)) / mesh_.step();
        a_(k) = u.values(k) - b_(k) * mesh_.vertex(k);
    }
}

double HilbertClosedForm::eval(double x) const {
    const int n = mesh_.n_cells();
    double acc = 0.0;
    for (int m = 0; m <= n; ++m) {
        const double am = (m > 0) ? a_(m - 1) : 0.0;
        const double bm = (m > 0) ? b_(m - 1) : 0.0;
        const double ap = (m < n) ? a_(m) : 0.0;
        const double bp = (m < n) ? b_(m) : 0.0;
        const double c = (am - ap) + (bm - bp) * x;
        const double d = mesh_.vertex(m) - x;
        if (c != 0.0 && d != 0.0) acc += c * std::log(std::abs(d));
    }
    // the total-slope term sums to u(T) - u(0) = 0 here
    return acc / M_PI;
}

double HilbertClosedForm::integral(double A, double B) const {
    const int n = mesh_.n_cells();
    double acc = 0.0;
    for (int m = 0; m <= n; ++m) {
        const double am = (m > 0) ? a_(m - 1) : 0.0;
        const double bm = (m > 0) ? b_(m - 1) : 0.0;
        const double ap = (m < n) ? a_(m) : 0.0;
        const double bp = (m < n) ? b_(m) : 0.0;
        // c(x) = g0 + g1 x; substitute y = x - t_m
        const double g1 = bm - bp;
        const double t = mesh_.vertex(m);
        const double g0t = (am - ap) + g1 * t;  // c written in y: g0t + g1 y
        acc += log_prim(g0t, g1, B - t) - log_prim(g0t, g1, A - t);
    }
    return acc / M_PI;
}

PiecewiseConstant HilbertClosedForm::cell_averages() const {
    Eigen::VectorXd vals(mesh_.n_cells());
    for (int k = 0; k < mesh_.n_cells(); ++k) {
        vals(k) = integral(mesh_.vertex(k), mesh_.vertex(k + 1)) / mesh_.step();
    }
    return PiecewiseConstant(mesh_, std::move(vals));
}

double HilbertClosedForm::pairing_with_derivative(const Eigen::VectorXd& w_nodal) const {
    if (w_nodal.size() != mesh_.n_vertices()) {
        throw std::invalid_argument("pairing_with_derivative: nodal size mismatch");
    }
    double acc = 0.0;
    for (int k = 0; k < mesh_.n_cells(); ++k) {
        const double slope = (w_nodal(k + 1) - w_nodal(k)) / mesh_.step();
        if (slope != 0.0) acc += slope * integral(mesh_.vertex(k), mesh_.vertex(k + 1));
    }
    return acc;
}

double HilbertClosedForm::self_pairing() const {
    double acc = 0.0;
    for (int k = 0; k < mesh_.n_cells(); ++k) {
        if (b_(k) != 0.0) acc += b_(k) * integral(mesh_.vertex(k), mesh_.vertex(k + 1));
    }
    return acc;
}

double h_half_sq_zero_extension(const PiecewiseAffine& u) {
    return HilbertClosedForm(u).self_pairing();
}

}  // namespace cdlab
