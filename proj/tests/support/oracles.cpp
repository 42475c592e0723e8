#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>

#include "cdlab/quadrature.hpp"

namespace cdlab::testing {

namespace {

double gauss_on(const std::function<double(double)>& f, double a, double b, int n) {
    const cdlab::GaussRule& g = cdlab::gauss_rule(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += g.weights[i] * f(mid + half * g.nodes[i]);
    return half * acc;
}

double adapt(const std::function<double(double)>& f, double a, double b, double tol,
             int depth) {
    const double coarse = gauss_on(f, a, b, 10);
    const double fine = gauss_on(f, a, b, 20);
    if (depth <= 0 || std::abs(fine - coarse) <= tol * (1.0 + std::abs(fine))) return fine;
    const double mid = 0.5 * (a + b);
    return adapt(f, a, mid, tol * 0.7, depth - 1) + adapt(f, mid, b, tol * 0.7, depth - 1);
}

}  // namespace

double adaptive_integrate(const std::function<double(double)>& f, double a, double b,
                          double tol, int max_depth) {
    if (b <= a) return 0.0;
    return adapt(f, a, b, tol, max_depth);
}

double pv_hilbert_oracle(const std::function<double(double)>& u, double x, double support_lo,
                         double support_hi, double tol) {
    const double R = std::max(std::abs(support_hi - x), std::abs(x - support_lo)) + 1.0;
    auto g = [&](double r) { return (u(x + r) - u(x - r)) / r; };
    // split at the distances where the kink pattern of u changes: every
    // breakpoint of u induces a kink of g at its distance from x
    std::vector<double> cuts{0.0, R};
    for (double s = 1e-7; s < R; s *= 4.0) cuts.push_back(s);
    for (int k = 0; k <= 64; ++k) {
        const double vtx = support_lo + (support_hi - support_lo) * k / 64.0;
        const double dist = std::abs(vtx - x);
        if (dist > 0.0 && dist < R) cuts.push_back(dist);
    }
    std::sort(cuts.begin(), cuts.end());
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] > cuts[i]) acc += adaptive_integrate(g, cuts[i], cuts[i + 1], tol);
    }
    return acc / M_PI;
}

double slobodetski_sq_oracle(const std::function<double(double)>& eval,
                             std::vector<double> pts, bool zero_extension_tails, int order) {
    std::sort(pts.begin(), pts.end());
    // geometric grading around every breakpoint
    std::vector<double> refined;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double a = pts[i], b = pts[i + 1];
        if (b <= a) continue;
        refined.push_back(a);
        double h = 0.25 * (b - a);
        while (h > 1e-7 * (b - a)) {
            refined.push_back(a + h);
            refined.push_back(b - h);
            h *= 0.5;
        }
    }
    refined.push_back(pts.back());
    auto segs = cdlab::segments_from_breakpoints(std::move(refined));
    const cdlab::GaussRule& g = cdlab::gauss_rule(order);
    double acc = 0.0;
    for (std::size_t a = 0; a < segs.size(); ++a) {
        const auto [xa, xb] = segs[a];
        double sub = 0.0;  // Duffy on the diagonal block
        for (int i = 0; i < order; ++i) {
            const double x = 0.5 * (xa + xb) + 0.5 * (xb - xa) * g.nodes[i];
            const double wx = 0.5 * (xb - xa) * g.weights[i];
            for (int j = 0; j < order; ++j) {
                const double t = 0.5 + 0.5 * g.nodes[j];
                const double y = x + t * (xb - x);
                if (y <= x) continue;
                const double q = (eval(x) - eval(y)) / (y - x);
                sub += wx * 0.5 * g.weights[j] * q * q * (xb - x);
            }
        }
        acc += 2.0 * sub;
        for (std::size_t b = a + 1; b < segs.size(); ++b) {
            const auto [ya, yb] = segs[b];
            double s2 = 0.0;
            for (int i = 0; i < order; ++i) {
                const double x = 0.5 * (xa + xb) + 0.5 * (xb - xa) * g.nodes[i];
                const double wx = 0.5 * (xb - xa) * g.weights[i];
                const double fx = eval(x);
                for (int j = 0; j < order; ++j) {
                    const double y = 0.5 * (ya + yb) + 0.5 * (yb - ya) * g.nodes[j];
                    const double q = (fx - eval(y)) / (x - y);
                    s2 += wx * 0.5 * (yb - ya) * g.weights[j] * q * q;
                }
            }
            acc += 2.0 * s2;
        }
    }
    if (zero_extension_tails) {
        const double lo = segs.front().first, hi = segs.back().second;
        for (const auto& [xa, xb] : segs) {
            auto f = [&](double x) {
                const double v = eval(x);
                double w = 0.0;
                if (x > lo) w += 1.0 / (x - lo);
                if (x < hi) w += 1.0 / (hi - x);
                return v * v * w;
            };
            acc += 2.0 * adaptive_integrate(f, xa, xb, 1e-10);
        }
    }
    return acc / (2.0 * M_PI);
}

Eigen::VectorXd dense_solve_oracle(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
    return Eigen::FullPivLU<Eigen::MatrixXd>(A).solve(b);
}

}  // namespace cdlab::testing
