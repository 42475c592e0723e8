#include "cdlab/functions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cdlab/quadrature.hpp"

namespace cdlab {

namespace {

int locate_cell(const Mesh1D& mesh, double t) {
    const int n = mesh.n_cells();
    int k = static_cast<int>(std::floor(t / mesh.step()));
    return std::clamp(k, 0, n - 1);
}

bool inside(const Mesh1D& mesh, double t) { return t >= 0.0 && t <= mesh.extent(); }

}  // namespace

PiecewiseAffine::PiecewiseAffine(Mesh1D m, Eigen::VectorXd v, bool zero_ends)
    : mesh(std::move(m)), values(std::move(v)), vanishes_at_ends(zero_ends) {
    if (values.size() != mesh.n_vertices()) {
        throw std::invalid_argument("PiecewiseAffine: one value per vertex required");
    }
    if (vanishes_at_ends && (values(0) != 0.0 || values(values.size() - 1) != 0.0)) {
        throw std::invalid_argument("PiecewiseAffine: endpoint values must be 0");
    }
}

double PiecewiseAffine::eval(double t) const {
    if (!inside(mesh, t)) return 0.0;
    const int k = locate_cell(mesh, t);
    const double s = (t - mesh.vertex(k)) / mesh.step();
    return values(k) * (1.0 - s) + values(k + 1) * s;
}

double PiecewiseAffine::slope(int cell) const {
    return (values(cell + 1) - values(cell)) / mesh.step();
}

double PiecewiseAffine::l2_sq() const {
    double acc = 0.0;
    for (int k = 0; k < mesh.n_cells(); ++k) {
        const double a = values(k), b = values(k + 1);
        acc += mesh.step() * (a * a + a * b + b * b) / 3.0;
    }
    return acc;
}

double PiecewiseAffine::deriv_l2_sq() const {
    double acc = 0.0;
    for (int k = 0; k < mesh.n_cells(); ++k) {
        const double d = values(k + 1) - values(k);
        acc += d * d / mesh.step();
    }
    return acc;
}

double PiecewiseAffine::linf() const { return values.cwiseAbs().maxCoeff(); }

PiecewiseConstant::PiecewiseConstant(Mesh1D m, Eigen::VectorXd v)
    : mesh(std::move(m)), values(std::move(v)) {
    if (values.size() != mesh.n_cells()) {
        throw std::invalid_argument("PiecewiseConstant: one value per cell required");
    }
}

double PiecewiseConstant::eval(double t) const {
    if (!inside(mesh, t)) return 0.0;
    return values(locate_cell(mesh, t));
}

double PiecewiseConstant::l2_sq() const { return mesh.step() * values.squaredNorm(); }

double UpwindFunction::peclet() const { return beta * mesh.step() / alpha; }

double UpwindFunction::eval_local(int cell, double s) const {
    if (linear_mode) return c1(cell) + c2(cell) * s;
    return c1(cell) + c2(cell) * std::exp(-peclet() * s);
}

double UpwindFunction::deriv_local(int cell, double s) const {
    if (linear_mode) return c2(cell) / mesh.step();
    return -c2(cell) * (beta / alpha) * std::exp(-peclet() * s);
}

double UpwindFunction::eval(double t) const {
    if (!inside(mesh, t)) return 0.0;
    const int k = locate_cell(mesh, t);
    return eval_local(k, (t - mesh.vertex(k)) / mesh.step());
}

double UpwindFunction::deriv(double t) const {
    if (!inside(mesh, t)) return 0.0;
    const int k = locate_cell(mesh, t);
    return deriv_local(k, (t - mesh.vertex(k)) / mesh.step());
}

double UpwindFunction::node_value(int k) const {
    if (k < mesh.n_cells()) return eval_local(k, 0.0);
    return eval_local(mesh.n_cells() - 1, 1.0);
}

Eigen::VectorXd UpwindFunction::node_values() const {
    Eigen::VectorXd v(mesh.n_vertices());
    for (int k = 0; k < mesh.n_vertices(); ++k) v(k) = node_value(k);
    return v;
}

double UpwindFunction::l2_sq() const {
    const double tau = mesh.step();
    double acc = 0.0;
    if (linear_mode) {
        for (int k = 0; k < mesh.n_cells(); ++k) {
            const double a = c1(k), d = c2(k);
            acc += tau * (a * a + a * d + d * d / 3.0);
        }
        return acc;
    }
    const double p = peclet();
    const double e1 = exp_avg(p), e2 = exp_avg(2.0 * p);
    for (int k = 0; k < mesh.n_cells(); ++k) {
        acc += tau * (c1(k) * c1(k) + 2.0 * c1(k) * c2(k) * e1 + c2(k) * c2(k) * e2);
    }
    return acc;
}

double UpwindFunction::deriv_l2_sq() const {
    const double tau = mesh.step();
    double acc = 0.0;
    if (linear_mode) {
        for (int k = 0; k < mesh.n_cells(); ++k) acc += c2(k) * c2(k) / tau;
        return acc;
    }
    const double p = peclet();
    const double r = beta / alpha;
    const double e2 = exp_avg(2.0 * p);
    for (int k = 0; k < mesh.n_cells(); ++k) acc += tau * c2(k) * c2(k) * r * r * e2;
    return acc;
}

double UpwindFunction::max_relative_jump() const {
    double scale = 1e-300;
    for (int k = 0; k < mesh.n_vertices(); ++k) scale = std::max(scale, std::abs(node_value(k)));
    double jump = 0.0;
    for (int k = 1; k < mesh.n_cells(); ++k) {
        jump = std::max(jump, std::abs(eval_local(k - 1, 1.0) - eval_local(k, 0.0)));
    }
    return jump / scale;
}

UpwindFunction upwind_from_nodal(const Mesh1D& mesh, const Eigen::VectorXd& nodal,
                                 double alpha, double beta) {
    if (nodal.size() != mesh.n_vertices()) {
        throw std::invalid_argument("upwind_from_nodal: one value per vertex required");
    }
    if (alpha <= 0.0) throw std::invalid_argument("upwind_from_nodal: alpha must be > 0");
    UpwindFunction v;
    v.mesh = mesh;
    v.alpha = alpha;
    v.beta = beta;
    const double p = beta * mesh.step() / alpha;
    v.linear_mode = (p <= 1e-12);
    v.c1.resize(mesh.n_cells());
    v.c2.resize(mesh.n_cells());
    for (int k = 0; k < mesh.n_cells(); ++k) {
        const double a = nodal(k), b = nodal(k + 1);
        if (v.linear_mode) {
            v.c1(k) = a;
            v.c2(k) = b - a;
        } else {
            const double c2 = (a - b) / (-std::expm1(-p));
            v.c2(k) = c2;
            v.c1(k) = a - c2;
        }
    }
    return v;
}

UpwindFunction exact_upwind_interpolant(const PiecewiseAffine& u, double alpha, double beta) {
    return upwind_from_nodal(u.mesh, u.values, alpha, beta);
}

PiecewiseConstant project_piecewise_constant(const Mesh1D& mesh,
                                             const std::function<double(double)>& u) {
    Eigen::VectorXd vals(mesh.n_cells());
    for (int k = 0; k < mesh.n_cells(); ++k) {
        vals(k) = integrate(u, mesh.vertex(k), mesh.vertex(k + 1), 10) / mesh.step();
    }
    return PiecewiseConstant(mesh, std::move(vals));
}

PiecewiseConstant project_piecewise_constant(const PiecewiseAffine& u) {
    Eigen::VectorXd vals(u.mesh.n_cells());
    for (int k = 0; k < u.mesh.n_cells(); ++k) vals(k) = 0.5 * (u.values(k) + u.values(k + 1));
    return PiecewiseConstant(u.mesh, std::move(vals));
}

PiecewiseConstant project_piecewise_constant(const Mesh1D& target, const PiecewiseAffine& u) {
    Eigen::VectorXd vals(target.n_cells());
    for (int k = 0; k < target.n_cells(); ++k) {
        const double a = target.vertex(k), b = target.vertex(k + 1);
        // exact trapezoid sums over the overlap with the source cells
        std::vector<double> pts{a, b};
        for (double t : u.mesh.vertices()) {
            if (t > a && t < b) pts.push_back(t);
        }
        std::sort(pts.begin(), pts.end());
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            acc += (pts[i + 1] - pts[i]) * 0.5 * (u.eval(pts[i]) + u.eval(pts[i + 1]));
        }
        vals(k) = acc / target.step();
    }
    return PiecewiseConstant(target, std::move(vals));
}

double ConvolvedFunction::eval(double t) const {
    const double T = core.mesh.extent();
    if (t < 0.0) return 0.0;
    if (t <= T) return core.eval(t);
    return tail_value * std::exp(-core.beta * (t - T) / core.alpha);
}

double ConvolvedFunction::l2_sq() const {
    return core.l2_sq() + tail_value * tail_value * core.alpha / (2.0 * core.beta);
}

double ConvolvedFunction::alpha_deriv_l2_sq() const {
    return core.alpha * core.deriv_l2_sq() + tail_value * tail_value * core.beta / 2.0;
}

ConvolvedFunction convolve_exponential(const PiecewiseConstant& u, const Kernel& kern) {
    if (kern.alpha <= 0.0 || kern.beta <= 0.0) {
        throw std::invalid_argument("convolve_exponential: needs alpha > 0, beta > 0");
    }
    UpwindFunction v;
    v.mesh = u.mesh;
    v.alpha = kern.alpha;
    v.beta = kern.beta;
    v.linear_mode = false;
    const int n = u.mesh.n_cells();
    v.c1.resize(n);
    v.c2.resize(n);
    const double p = kern.beta * u.mesh.step() / kern.alpha;
    const double ep = std::exp(-p);
    double left = 0.0;  // v at the left cell edge; zero extension before 0
    for (int k = 0; k < n; ++k) {
        v.c1(k) = u.values(k);
        v.c2(k) = left - u.values(k);
        left = v.c1(k) + v.c2(k) * ep;
    }
    ConvolvedFunction out{std::move(v), left};
    return out;
}

ShapeIntegrals shape_integrals(double p) {
    ShapeIntegrals si{};
    if (p < 1e-2) {
        // smooth regime: 20-point Gauss on the stably evaluated shapes
        const GaussRule& g = gauss_rule(20);
        double ir = 0, m1r = 0, pll = 0, plr = 0, prr = 0;
        for (int i = 0; i < 20; ++i) {
            const double s = 0.5 * (1.0 + g.nodes[i]);
            const double w = 0.5 * g.weights[i];
            const double R = upwind_shape({p}, s, CellNode::right);
            const double L = 1.0 - R;
            ir += w * R;
            m1r += w * s * R;
            pll += w * L * L;
            plr += w * L * R;
            prr += w * R * R;
        }
        si.int_psiR = ir;
        si.int_psiL = 1.0 - ir;
        si.m_RR = m1r;
        si.m_LR = ir - m1r;
        si.m_RL = 0.5 - m1r;
        si.m_LL = 0.5 - ir + m1r;
        si.p_LL = pll;
        si.p_LR = plr;
        si.p_RR = prr;
        return si;
    }
    const double E1 = exp_avg(p);
    const double E2 = exp_avg(2.0 * p);
    const double J = exp_first_moment(p);
    const double e1 = std::exp(-p);
    const double e2 = e1 * e1;
    const double D = p * E1;        // 1 - exp(-p)
    const double D2 = D * D;
    const double IR = (1.0 - E1) / D;
    const double M1R = (0.5 - J) / D;
    si.int_psiR = IR;
    si.int_psiL = 1.0 - IR;
    si.m_RR = M1R;
    si.m_LR = IR - M1R;
    si.m_RL = 0.5 - M1R;
    si.m_LL = 0.5 - IR + M1R;
    si.p_RR = (1.0 - 2.0 * E1 + E2) / D2;
    si.p_LR = (E1 - E2 - e1 + e1 * E1) / D2;
    si.p_LL = (E2 - 2.0 * e1 * E1 + e2) / D2;
    return si;
}

}  // namespace cdlab
