#include "cdlab/upwind_basis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cdlab/quadrature.hpp"
#include "cdlab/special.hpp"

namespace cdlab {

double ExactTestBasis2D::eval(double x, double y) const {
    const double sy = (y - mesh.transverse().vertex(vj)) / mesh.transverse().step();
    double hy = 0.0;
    if (sy >= -1.0 && sy <= 1.0) hy = 1.0 - std::abs(sy);
    if (hy == 0.0) return 0.0;
    return flow_hat.eval(x) * hy;
}

double ExactTestBasis2D::dx(double x, double y) const {
    const double sy = (y - mesh.transverse().vertex(vj)) / mesh.transverse().step();
    double hy = 0.0;
    if (sy >= -1.0 && sy <= 1.0) hy = 1.0 - std::abs(sy);
    if (hy == 0.0) return 0.0;
    return flow_hat.deriv(x) * hy;
}

double ExactTestBasis2D::dy(double x, double y) const {
    const double sy = (y - mesh.transverse().vertex(vj)) / mesh.transverse().step();
    if (sy < -1.0 || sy > 1.0) return 0.0;
    const double dh = (sy < 0.0 ? 1.0 : -1.0) / mesh.transverse().step();
    return flow_hat.eval(x) * dh;
}

double ExactTestBasis2D::integral() const {
    // the upwinded hat integrates to exactly tau (its two pieces form a
    // partition of unity across the cell), the P1 hat to sigma
    return mesh.flow().step() * mesh.transverse().step();
}

ExactTestBasis2D exact_test_basis_2d(const TensorMesh2D& mesh, int vi, int vj, double alpha,
                                     double beta) {
    if (!mesh.is_interior(vi, vj)) {
        throw std::invalid_argument("exact_test_basis_2d: vertex must be interior");
    }
    // flow-direction hat lives on the whole flow mesh (zero away from vi)
    Eigen::VectorXd nodal = Eigen::VectorXd::Zero(mesh.flow().n_vertices());
    nodal(vi) = 1.0;
    UpwindFunction fh = upwind_from_nodal(mesh.flow(), nodal, alpha, beta);
    return {mesh, vi, vj, alpha, beta, std::move(fh)};
}

std::vector<double> flow_stations(double peclet, int level) {
    if (level < 1) throw std::invalid_argument("flow_stations: level must be >= 1");
    const int m = (1 << level) - 1;
    std::vector<double> st(m);
    if (level == 1) {
        st[0] = std::clamp(upwind_half_crossing(peclet), 0.1, 0.9);
        return st;
    }
    for (int k = 1; k <= m; ++k) {
        const double q = static_cast<double>(k) / (1 << level);
        double s;
        if (peclet <= 1e-8) {
            s = q;
        } else {
            // psi_R(s) = q  =>  s = -log(1 - q (1 - e^-p)) / p
            s = -std::log1p(q * std::expm1(-peclet)) / peclet;
        }
        st[k - 1] = s;
    }
    // keep the stations strictly increasing and away from the ends
    const double lo = 0.02, hi = 0.98, gap = 1e-3 / (1 << level);
    double prev = lo - gap;
    for (int k = 0; k < m; ++k) {
        st[k] = std::clamp(st[k], lo + k * gap, hi - (m - 1 - k) * gap);
        if (st[k] <= prev + gap) st[k] = prev + gap;
        prev = st[k];
    }
    return st;
}

SubgridGeometry subgrid_geometry(double x0, double tau, double y0, double sigma,
                                 double peclet, int level) {
    SubgridGeometry g;
    g.xs.push_back(x0);
    for (double s : flow_stations(peclet, level)) g.xs.push_back(x0 + s * tau);
    g.xs.push_back(x0 + tau);
    const int m = 1 << level;
    for (int k = 0; k <= m; ++k) g.ys.push_back(y0 + sigma * k / m);
    // alternating diagonals: at level 1 this is the 8-triangle star
    for (int iy = 0; iy + 1 < g.ny(); ++iy) {
        for (int ix = 0; ix + 1 < g.nx(); ++ix) {
            const int n00 = g.node(ix, iy), n10 = g.node(ix + 1, iy);
            const int n01 = g.node(ix, iy + 1), n11 = g.node(ix + 1, iy + 1);
            if ((ix + iy) % 2 == 0) {
                g.tris.push_back({n00, n10, n11});
                g.tris.push_back({n00, n11, n01});
            } else {
                g.tris.push_back({n10, n01, n00});
                g.tris.push_back({n10, n11, n01});
            }
        }
    }
    return g;
}

namespace {

// integral over [A,B] of the face weight anchored at xr (exponent <= 0)
double weight_integral(double A, double B, double alpha, double beta, double xr) {
    return exp_affine_integral(beta / alpha, xr, 1.0, 0.0, A, B);
}

// integral of exp(beta (x - xr)/alpha) over a triangle, by slicing in x
double triangle_weight_integral(const double* px, const double* py, double alpha, double beta,
                                double xr) {
    int idx[3] = {0, 1, 2};
    std::sort(idx, idx + 3, [&](int a, int b) { return px[a] < px[b]; });
    const double x1 = px[idx[0]], x2 = px[idx[1]], x3 = px[idx[2]];
    const double y1 = py[idx[0]], y2 = py[idx[1]], y3 = py[idx[2]];
    const double c = beta / alpha;
    double acc = 0.0;
    if (x3 - x1 < 1e-300) return 0.0;
    // width of the triangle at station x: affine on [x1,x2] and [x2,x3]
    const double ym_at = y1 + (y3 - y1) * ((x2 - x1) / (x3 - x1));
    const double w2 = std::abs(y2 - ym_at);  // width at x2
    if (x2 - x1 > 0.0) {
        // width rises linearly 0 -> w2; coefficients anchored at xr
        const double slope = w2 / (x2 - x1);
        acc += exp_affine_integral(c, xr, slope * (xr - x1), slope, x1, x2);
    }
    if (x3 - x2 > 0.0) {
        const double slope = -w2 / (x3 - x2);
        acc += exp_affine_integral(c, xr, w2 + slope * (xr - x2), slope, x2, x3);
    }
    return acc;
}

}  // namespace

std::vector<double> edge_subgrid_solve(const std::vector<double>& stations, double x0,
                                       double tau, double g0, double g1, double alpha,
                                       double beta) {
    // P1 Galerkin for (w v')' = 0 with w = exp(beta x / alpha): the
    // symmetrized SPD form of the local extension equation
    std::vector<double> xs;
    xs.push_back(x0);
    for (double s : stations) xs.push_back(x0 + s * tau);
    xs.push_back(x0 + tau);
    const int m = static_cast<int>(stations.size());
    if (m == 0) return {};
    const double xr = x0 + tau;  // anchor: exponents stay <= 0
    std::vector<double> cond(m + 1);
    for (int k = 0; k <= m; ++k) {
        const double len = xs[k + 1] - xs[k];
        cond[k] = weight_integral(xs[k], xs[k + 1], alpha, beta, xr) / (len * len);
    }
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    for (int k = 0; k <= m; ++k) {
        // segment k couples nodes (k-1, k) in interior numbering
        const int il = k - 1, ir = k;
        if (il >= 0 && il < m) A(il, il) += cond[k];
        if (ir >= 0 && ir < m) A(ir, ir) += cond[k];
        if (il >= 0 && ir < m && il < m) {
            A(il, ir) -= cond[k];
            A(ir, il) -= cond[k];
        }
        if (il < 0 && ir < m) b(ir) += cond[k] * g0;
        if (ir == m && il >= 0) b(il) += cond[m] * g1;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("edge_subgrid_solve: weighted system not SPD");
    }
    Eigen::VectorXd v = llt.solve(b);
    return std::vector<double>(v.data(), v.data() + m);
}

double SubgridBasis::eval(double x, double y) const {
    const auto& xs = geo.xs;
    const auto& ys = geo.ys;
    if (x < xs.front() || x > xs.back() || y < ys.front() || y > ys.back()) return 0.0;
    int ix = static_cast<int>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin()) - 1;
    int iy = static_cast<int>(std::upper_bound(ys.begin(), ys.end(), y) - ys.begin()) - 1;
    ix = std::clamp(ix, 0, geo.nx() - 2);
    iy = std::clamp(iy, 0, geo.ny() - 2);
    const double fx = (x - xs[ix]) / (xs[ix + 1] - xs[ix]);
    const double fy = (y - ys[iy]) / (ys[iy + 1] - ys[iy]);
    const double v00 = values(geo.node(ix, iy)), v10 = values(geo.node(ix + 1, iy));
    const double v01 = values(geo.node(ix, iy + 1)), v11 = values(geo.node(ix + 1, iy + 1));
    if ((ix + iy) % 2 == 0) {
        // diagonal n00 - n11
        if (fx >= fy) return v00 + (v10 - v00) * fx + (v11 - v10) * fy;
        return v00 + (v01 - v00) * fy + (v11 - v01) * fx;
    }
    // diagonal n10 - n01
    if (fx + fy <= 1.0) return v00 + (v10 - v00) * fx + (v01 - v00) * fy;
    return v11 + (v01 - v11) * (1.0 - fx) + (v10 - v11) * (1.0 - fy);
}

std::pair<double, double> SubgridBasis::grad(double x, double y) const {
    const auto& xs = geo.xs;
    const auto& ys = geo.ys;
    if (x < xs.front() || x > xs.back() || y < ys.front() || y > ys.back()) return {0.0, 0.0};
    int ix = static_cast<int>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin()) - 1;
    int iy = static_cast<int>(std::upper_bound(ys.begin(), ys.end(), y) - ys.begin()) - 1;
    ix = std::clamp(ix, 0, geo.nx() - 2);
    iy = std::clamp(iy, 0, geo.ny() - 2);
    const double hx = xs[ix + 1] - xs[ix], hy = ys[iy + 1] - ys[iy];
    const double fx = (x - xs[ix]) / hx, fy = (y - ys[iy]) / hy;
    const double v00 = values(geo.node(ix, iy)), v10 = values(geo.node(ix + 1, iy));
    const double v01 = values(geo.node(ix, iy + 1)), v11 = values(geo.node(ix + 1, iy + 1));
    if ((ix + iy) % 2 == 0) {
        if (fx >= fy) return {(v10 - v00) / hx, (v11 - v10) / hy};
        return {(v11 - v01) / hx, (v01 - v00) / hy};
    }
    if (fx + fy <= 1.0) return {(v10 - v00) / hx, (v01 - v00) / hy};
    return {(v11 - v01) / hx, (v11 - v10) / hy};
}

SubgridBasis approx_cell_basis(double x0, double tau, double y0, double sigma, int corner_ix,
                               int corner_iy, double alpha, double beta, int level) {
    const double p = beta * tau / alpha;
    SubgridBasis sb;
    sb.geo = subgrid_geometry(x0, tau, y0, sigma, p, level);
    const SubgridGeometry& g = sb.geo;
    const int nx = g.nx(), ny = g.ny();
    sb.values = Eigen::VectorXd::Zero(g.n_nodes());

    auto corner_val = [&](int ix, int iy) {
        return (ix == corner_ix * (nx - 1) && iy == corner_iy * (ny - 1)) ? 1.0 : 0.0;
    };
    // vertices
    sb.values(g.node(0, 0)) = corner_val(0, 0);
    sb.values(g.node(nx - 1, 0)) = corner_val(nx - 1, 0);
    sb.values(g.node(0, ny - 1)) = corner_val(0, ny - 1);
    sb.values(g.node(nx - 1, ny - 1)) = corner_val(nx - 1, ny - 1);

    // flow-direction edges (bottom, top): the Peclet-weighted 1D solve
    std::vector<double> st;
    for (int i = 1; i + 1 < nx; ++i) st.push_back((g.xs[i] - x0) / tau);
    for (int side = 0; side < 2; ++side) {
        const int iy = side == 0 ? 0 : ny - 1;
        const double gl = sb.values(g.node(0, iy)), gr = sb.values(g.node(nx - 1, iy));
        auto vals = edge_subgrid_solve(st, x0, tau, gl, gr, alpha, beta);
        for (int i = 1; i + 1 < nx; ++i) sb.values(g.node(i, iy)) = vals[i - 1];
    }
    // transverse edges (left, right): tangential convection vanishes, so
    // the extension is linear interpolation of the endpoint data
    for (int side = 0; side < 2; ++side) {
        const int ix = side == 0 ? 0 : nx - 1;
        const double gb = sb.values(g.node(ix, 0)), gt = sb.values(g.node(ix, ny - 1));
        for (int j = 1; j + 1 < ny; ++j) {
            const double f = (g.ys[j] - y0) / sigma;
            sb.values(g.node(ix, j)) = gb * (1.0 - f) + gt * f;
        }
    }

    // face: weighted P1 solve with the edge traces as Dirichlet data
    std::vector<int> interior;
    std::vector<int> index_of(g.n_nodes(), -1);
    for (int j = 1; j + 1 < ny; ++j) {
        for (int i = 1; i + 1 < nx; ++i) {
            index_of[g.node(i, j)] = static_cast<int>(interior.size());
            interior.push_back(g.node(i, j));
        }
    }
    if (interior.empty()) return sb;

    const int nin = static_cast<int>(interior.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nin, nin);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(nin);
    const double xr = x0 + tau;
    for (const auto& tri : g.tris) {
        const int ids[3] = {tri.a, tri.b, tri.c};
        double px[3], py[3];
        for (int k = 0; k < 3; ++k) {
            auto [xx, yy] = g.node_xy(ids[k]);
            px[k] = xx;
            py[k] = yy;
        }
        const double det =
            (px[1] - px[0]) * (py[2] - py[0]) - (px[2] - px[0]) * (py[1] - py[0]);
        const double area = 0.5 * std::abs(det);
        if (area <= 0.0) continue;
        // P1 gradients
        double gx[3], gy[3];
        gx[0] = (py[1] - py[2]) / det;
        gy[0] = (px[2] - px[1]) / det;
        gx[1] = (py[2] - py[0]) / det;
        gy[1] = (px[0] - px[2]) / det;
        gx[2] = (py[0] - py[1]) / det;
        gy[2] = (px[1] - px[0]) / det;
        const double wint = triangle_weight_integral(px, py, alpha, beta, xr);
        for (int a = 0; a < 3; ++a) {
            const int ia = index_of[ids[a]];
            if (ia < 0) continue;
            for (int c = 0; c < 3; ++c) {
                const double entry = (gx[a] * gx[c] + gy[a] * gy[c]) * wint;
                const int ic = index_of[ids[c]];
                if (ic >= 0) {
                    A(ia, ic) += entry;
                } else {
                    b(ia) -= entry * sb.values(ids[c]);
                }
            }
        }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("approx_cell_basis: face system not SPD");
    }
    Eigen::VectorXd sol = llt.solve(b);
    for (int k = 0; k < nin; ++k) sb.values(interior[k]) = sol(k);
    return sb;
}

std::vector<SubgridBasis> approx_upwind_basis(const TensorMesh2D& mesh, int vi, int vj,
                                              double alpha, double beta, int level) {
    if (!mesh.is_interior(vi, vj)) {
        throw std::invalid_argument("approx_upwind_basis: vertex must be interior");
    }
    const double tau = mesh.flow().step(), sigma = mesh.transverse().step();
    std::vector<SubgridBasis> out;
    for (int cj = vj - 1; cj <= vj; ++cj) {
        for (int ci = vi - 1; ci <= vi; ++ci) {
            SubgridBasis sb = approx_cell_basis(mesh.flow().vertex(ci), tau,
                                                mesh.transverse().vertex(cj), sigma,
                                                vi - ci == 1 ? 1 : 0, vj - cj == 1 ? 1 : 0,
                                                alpha, beta, level);
            sb.cell_i = ci;
            sb.cell_j = cj;
            out.push_back(std::move(sb));
        }
    }
    return out;
}

double basis_relative_error(const ExactTestBasis2D& exact,
                            const std::vector<SubgridBasis>& approx, double alpha) {
    double err = 0.0, nrm = 0.0;
    const double beta = exact.beta;
    for (const SubgridBasis& sb : approx) {
        const double x0 = sb.geo.xs.front(), x1 = sb.geo.xs.back();
        // flow segments: subgrid stations plus the exponential layer strip
        std::vector<double> xb(sb.geo.xs);
        if (beta > 0.0) {
            const double layer = exact.alpha / beta;
            for (auto& s : layer_segments(x0, x1, layer)) xb.push_back(s.second);
        }
        auto xsegs = segments_from_breakpoints(std::move(xb));
        auto ysegs = segments_from_breakpoints(std::vector<double>(sb.geo.ys));
        const GaussRule& g = gauss_rule(8);
        for (const auto& [xa, xbnd] : xsegs) {
            for (const auto& [ya, ybnd] : ysegs) {
                for (int i = 0; i < 8; ++i) {
                    const double x = 0.5 * (xa + xbnd) + 0.5 * (xbnd - xa) * g.nodes[i];
                    const double wx = 0.5 * (xbnd - xa) * g.weights[i];
                    for (int j = 0; j < 8; ++j) {
                        const double y = 0.5 * (ya + ybnd) + 0.5 * (ybnd - ya) * g.nodes[j];
                        const double w = wx * 0.5 * (ybnd - ya) * g.weights[j];
                        const double ve = exact.eval(x, y);
                        const double va = sb.eval(x, y);
                        const double ex = exact.dx(x, y), ey = exact.dy(x, y);
                        auto [ax, ay] = sb.grad(x, y);
                        err += w * ((ve - va) * (ve - va) +
                                    alpha * ((ex - ax) * (ex - ax) + (ey - ay) * (ey - ay)));
                        nrm += w * (ve * ve + alpha * (ex * ex + ey * ey));
                    }
                }
            }
        }
    }
    return std::sqrt(err / nrm);
}

}  // namespace cdlab
