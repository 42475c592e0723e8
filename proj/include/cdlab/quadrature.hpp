#ifndef CDLAB_QUADRATURE_HPP
#define CDLAB_QUADRATURE_HPP

#include <functional>
#include <vector>

namespace cdlab {

/// Gauss-Legendre rule on [-1,1]; nodes/weights cached per order.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const GaussRule& gauss_rule(int n);

/// integral of f over [a,b] with an n-point Gauss rule.
double integrate(const std::function<double(double)>& f, double a, double b, int n = 16);

/// integral of f over a list of segments.
double integrate_segments(const std::function<double(double)>& f,
                          const std::vector<std::pair<double, double>>& segs, int n = 16);

/// Splits [a,b] into segments that resolve an exponential layer of width
/// `layer` attached to the `a` end: geometric refinement inside the layer
/// strip, coarse pieces outside.  With layer <= 0 returns {[a,b]}.
std::vector<std::pair<double, double>> layer_segments(double a, double b, double layer,
                                                      int levels = 10);

/// Merge a sorted list of breakpoints into consecutive segments,
/// dropping empty ones.
std::vector<std::pair<double, double>> segments_from_breakpoints(std::vector<double> pts);

/// Degree-4 rule on a triangle (6 points).  Weights sum to 1 and are to be
/// multiplied by the triangle area.
struct TrianglePoint {
    double l1, l2, l3;  // barycentric coordinates
    double w;
};
const std::vector<TrianglePoint>& triangle_rule_deg4();

/// Quadrature order that resolves a cell of Peclet number p, per the
/// layer-resolving policy: max(8, ceil(p/4)) capped at 64.
int peclet_order(double p);

}  // namespace cdlab

#endif
