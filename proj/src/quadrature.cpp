#include "cdlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace cdlab {

namespace {

GaussRule compute_rule(int n) {
    // Newton iteration on Legendre polynomials, symmetric roots.
    GaussRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    return r;
}

}  // namespace

const GaussRule& gauss_rule(int n) {
    if (n < 1) throw std::invalid_argument("gauss_rule: order must be >= 1");
    static std::map<int, GaussRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
    return it->second;
}

double integrate(const std::function<double(double)>& f, double a, double b, int n) {
    if (b <= a) return 0.0;
    const GaussRule& r = gauss_rule(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += r.weights[i] * f(mid + half * r.nodes[i]);
    return half * acc;
}

double integrate_segments(const std::function<double(double)>& f,
                          const std::vector<std::pair<double, double>>& segs, int n) {
    double acc = 0.0;
    for (const auto& [a, b] : segs) acc += integrate(f, a, b, n);
    return acc;
}

std::vector<std::pair<double, double>> layer_segments(double a, double b, double layer,
                                                      int levels) {
    std::vector<std::pair<double, double>> segs;
    const double len = b - a;
    if (len <= 0.0) return segs;
    if (layer <= 0.0 || layer >= 0.5 * len) {
        segs.emplace_back(a, b);
        return segs;
    }
    // geometric strip from layer * 2^-levels up to a few decades past the
    // layer width, then the smooth remainder
    std::vector<double> pts{a};
    double step = layer * std::pow(0.5, levels);
    while (step < layer) {
        pts.push_back(a + step);
        step *= 2.0;
    }
    double hi = a + layer;
    while (hi < a + 0.5 * len && step < 64.0 * layer) {
        pts.push_back(hi);
        step *= 2.0;
        hi = a + step;
    }
    hi = std::min(hi, a + 0.5 * len);
    pts.push_back(hi);
    std::sort(pts.begin(), pts.end());
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (pts[i + 1] > pts[i]) segs.emplace_back(pts[i], pts[i + 1]);
    }
    const int chunks = 4;
    for (int i = 0; i < chunks; ++i) {
        segs.emplace_back(hi + (b - hi) * i / chunks, hi + (b - hi) * (i + 1) / chunks);
    }
    return segs;
}

std::vector<std::pair<double, double>> segments_from_breakpoints(std::vector<double> pts) {
    std::sort(pts.begin(), pts.end());
    std::vector<std::pair<double, double>> segs;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (pts[i + 1] - pts[i] > 0.0) segs.emplace_back(pts[i], pts[i + 1]);
    }
    return segs;
}

const std::vector<TrianglePoint>& triangle_rule_deg4() {
    static const std::vector<TrianglePoint> rule = [] {
        const double a = 0.445948490915965, wa = 0.223381589678011;
        const double b = 0.091576213509771, wb = 0.109951743655322;
        std::vector<TrianglePoint> pts;
        pts.push_back({1.0 - 2.0 * a, a, a, wa});
        pts.push_back({a, 1.0 - 2.0 * a, a, wa});
        pts.push_back({a, a, 1.0 - 2.0 * a, wa});
        pts.push_back({1.0 - 2.0 * b, b, b, wb});
        pts.push_back({b, 1.0 - 2.0 * b, b, wb});
        pts.push_back({b, b, 1.0 - 2.0 * b, wb});
        return pts;
    }();
    return rule;
}

int peclet_order(double p) {
    const int n = static_cast<int>(std::ceil(p / 4.0));
    return std::min(64, std::max(8, n));
}

}  // namespace cdlab
