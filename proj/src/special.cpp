#include "cdlab/special.hpp"

#include <cmath>
#include <stdexcept>

namespace cdlab {

double exp_avg(double p) {
    if (p < 0.0) throw std::invalid_argument("exp_avg: p must be >= 0");
    if (p < 1e-4) {
        // 4-term Taylor branch; error ~ p^4/120 < 1e-18.
        return 1.0 - p / 2.0 + p * p / 6.0 - p * p * p / 24.0;
    }
    if (p > 50.0) return 1.0 / p;  // exp(-p) < 2e-22, below double noise
    return -std::expm1(-p) / p;
}

double exp_first_moment(double p) {
    if (p < 0.0) throw std::invalid_argument("exp_first_moment: p must be >= 0");
    if (p < 1e-4) {
        return 0.5 - p / 3.0 + p * p / 8.0 - p * p * p / 30.0;
    }
    if (p > 50.0) return 1.0 / (p * p);
    return (-std::expm1(-p) - p * std::exp(-p)) / (p * p);
}

double upwind_shape(Peclet pe, double s, CellNode node) {
    const double p = pe.value;
    if (p <= 1e-12) {
        return node == CellNode::left ? 1.0 - s : s;
    }
    // expm1 ratio is free of cancellation for every p > 0.
    const double r = std::expm1(-p * s) / std::expm1(-p);
    return node == CellNode::right ? r : 1.0 - r;
}

double upwind_shape_deriv(Peclet pe, double s, CellNode node) {
    const double p = pe.value;
    if (p <= 1e-12) {
        return node == CellNode::left ? -1.0 : 1.0;
    }
    const double d = p * std::exp(-p * s) / (-std::expm1(-p));
    return node == CellNode::right ? d : -d;
}

double phi_of_p(double p) {
    if (p <= 0.0) throw std::invalid_argument("phi_of_p: p must be > 0");
    if (p < 1e-2) {
        // (x coth x) with x = p/2: 1 + x^2/3 - x^4/45 + 2 x^6/945
        const double x2 = 0.25 * p * p;
        return 1.0 + x2 / 3.0 - x2 * x2 / 45.0 + 2.0 * x2 * x2 * x2 / 945.0;
    }
    const double e = std::exp(-p);
    return 0.5 * p * (1.0 + e) / (1.0 - e);
}

double upwind_half_crossing(double p) {
    if (p <= 1e-8) return 0.5 - p / 8.0;
    return -std::log1p(0.5 * std::expm1(-p)) / p;
}

double exact_layer_solution(double alpha, double beta, double f0, double T, double t) {
    if (alpha <= 0.0 || beta <= 0.0) {
        throw std::invalid_argument("exact_layer_solution: needs alpha > 0, beta > 0");
    }
    const double r = std::expm1(-beta * t / alpha) * std::exp(-beta * (T - t) / alpha) /
                     std::expm1(-beta * T / alpha);
    return (f0 / beta) * (t - T * r);
}

double exp_affine_integral(double c, double xr, double a, double b, double A, double B) {
    if (B <= A) return 0.0;
    const double span = std::abs(c) * (B - A);
    if (span < 1e-5) {
        // nearly constant weight: 4-point Gauss is exact to ~1e-21 here
        static const double gx[4] = {-0.8611363115940526, -0.3399810435848563,
                                     0.3399810435848563, 0.8611363115940526};
        static const double gw[4] = {0.3478548451374538, 0.6521451548625461,
                                     0.6521451548625461, 0.3478548451374538};
        const double mid = 0.5 * (A + B), half = 0.5 * (B - A);
        double acc = 0.0;
        for (int i = 0; i < 4; ++i) {
            const double x = mid + half * gx[i];
            acc += gw[i] * std::exp(c * (x - xr)) * (a + b * (x - xr));
        }
        return half * acc;
    }
    auto prim = [&](double x) {
        const double y = x - xr;
        return std::exp(c * y) * ((a + b * y) / c - b / (c * c));
    };
    return prim(B) - prim(A);
}

}  // namespace cdlab
