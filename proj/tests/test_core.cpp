#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cdlab/elements.hpp"
#include "cdlab/functions.hpp"
#include "cdlab/mesh.hpp"
#include "cdlab/quadrature.hpp"
#include "cdlab/special.hpp"
#include "support/oracles.hpp"

using namespace cdlab;
using cdlab::testing::adaptive_integrate;

TEST_CASE("uniform partition basics") {
    Mesh1D m(1.0, 4);
    CHECK(m.n_vertices() == 5);
    for (int k = 0; k <= 4; ++k) CHECK(m.vertex(k) == doctest::Approx(0.25 * k).epsilon(1e-15));

    Mesh1D single(1.0, 1);
    CHECK(single.n_cells() == 1);
    CHECK(single.vertex(0) == 0.0);
    CHECK(single.vertex(1) == 1.0);

    Mesh1D wide(2.0, 80);
    CHECK(wide.step() == doctest::Approx(0.025).epsilon(1e-15));
    CHECK(wide.n_vertices() == 81);

    CHECK_THROWS_AS(uniform_partition(-1.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(uniform_partition(1.0, 0), std::invalid_argument);
}

TEST_CASE("cell lengths sum to the extent") {
    for (int n : {1, 3, 7, 80, 1000}) {
        Mesh1D m(2.7, n);
        double sum = 0.0;
        for (int k = 0; k < n; ++k) sum += m.vertex(k + 1) - m.vertex(k);
        CHECK(sum == doctest::Approx(2.7).epsilon(1e-14));
    }
}

TEST_CASE("tensor mesh counting and boundary classification") {
    TensorMesh2D t22(Mesh1D(1.0, 2), Mesh1D(1.0, 2));
    CHECK(t22.n_vertices() == 9);
    CHECK(t22.n_interior() == 1);

    TensorMesh2D t80(Mesh1D(1.0, 80), Mesh1D(1.0, 80));
    CHECK(t80.n_vertices() == 6561);
    CHECK(t80.n_interior() == 79 * 79);

    TensorMesh2D t11(Mesh1D(1.0, 1), Mesh1D(1.0, 1));
    CHECK(t11.n_vertices() == 4);
    CHECK(t11.n_interior() == 0);

    // the three boundary classes partition the boundary vertices
    int inflow = 0, outflow = 0, lateral = 0, interior = 0;
    for (int j = 0; j <= 4; ++j) {
        for (int i = 0; i <= 4; ++i) {
            TensorMesh2D t(Mesh1D(1.0, 4), Mesh1D(1.0, 4));
            switch (t.classify(i, j)) {
                case BoundaryKind::interior: ++interior; break;
                case BoundaryKind::inflow: ++inflow; break;
                case BoundaryKind::outflow: ++outflow; break;
                case BoundaryKind::lateral: ++lateral; break;
            }
        }
    }
    CHECK(interior == 9);
    CHECK(inflow == 5);
    CHECK(outflow == 5);
    CHECK(lateral == 6);
    CHECK(inflow + outflow + lateral == 25 - 9);
}

TEST_CASE("interior dof numbering is lexicographic and complete") {
    TensorMesh2D t(Mesh1D(1.0, 5), Mesh1D(1.0, 4));
    int count = 0;
    int prev = -1;
    for (int j = 1; j < 4; ++j) {
        for (int i = 1; i < 5; ++i) {
            const int d = t.interior_dof(i, j);
            CHECK(d == prev + 1);
            prev = d;
            ++count;
        }
    }
    CHECK(count == t.n_interior());
    CHECK(t.interior_dof(0, 2) == -1);
}

TEST_CASE("upwind shapes: nodal values, partition of unity, maximum principle") {
    for (double p : {1e-12, 1e-6, 1e-2, 1.0, 41.7, 1e4}) {
        Peclet pe{p};
        CHECK(upwind_shape(pe, 0.0, CellNode::left) == 1.0);
        CHECK(upwind_shape(pe, 1.0, CellNode::left) == 0.0);
        CHECK(upwind_shape(pe, 0.0, CellNode::right) == 0.0);
        CHECK(upwind_shape(pe, 1.0, CellNode::right) == 1.0);
        for (int k = 0; k <= 1000; ++k) {
            const double s = k / 1000.0;
            const double l = upwind_shape(pe, s, CellNode::left);
            const double r = upwind_shape(pe, s, CellNode::right);
            CHECK(std::abs(l + r - 1.0) <= 1e-12);
            CHECK(l >= -1e-15);
            CHECK(l <= 1.0 + 1e-15);
        }
    }
}

TEST_CASE("upwind shape tends to the affine limit linearly in p") {
    // deviation is p s(1-s)/2, so the 1e-8 tolerance is honored at p = 1e-8
    for (int k = 0; k <= 100; ++k) {
        const double s = k / 100.0;
        CHECK(std::abs(upwind_shape({1e-8}, s, CellNode::left) - (1.0 - s)) < 1e-8);
    }
    // and the O(p) rate itself
    const double dev = std::abs(upwind_shape({1e-4}, 0.5, CellNode::right) - 0.5);
    CHECK(dev == doctest::Approx(1e-4 / 8.0).epsilon(1e-3));
}

TEST_CASE("upwind shape against a two-point boundary-value oracle") {
    // solve alpha v'' + beta v' = 0 on a 10^4-point grid, v(0)=1, v(1)=0
    const double p = 1.0;
    const int N = 10000;
    // integrate the first-order system for w = v': w ~ exp(-p s); build v
    // by the trapezoid rule and normalize the boundary values
    std::vector<double> v(N + 1);
    double acc = 0.0;
    v[0] = 0.0;
    for (int i = 1; i <= N; ++i) {
        const double s0 = (i - 1.0) / N, s1 = static_cast<double>(i) / N;
        acc += 0.5 * (std::exp(-p * s0) + std::exp(-p * s1)) / N;
        v[i] = acc;
    }
    // v above rises 0 -> c; the left shape is 1 - v/c
    const double psiL_mid = 1.0 - v[N / 2] / v[N];
    CHECK(psiL_mid == doctest::Approx(0.377541).epsilon(1e-5));
    CHECK(upwind_shape({1.0}, 0.5, CellNode::left) ==
          doctest::Approx(0.377541).epsilon(1e-5));
    CHECK(std::abs(upwind_shape({1.0}, 0.5, CellNode::left) - psiL_mid) < 1e-7);
}

TEST_CASE("shape monotone in the Peclet number") {
    for (double s : {0.25, 0.5, 0.75}) {
        double prev = -1.0;
        for (double p : {1e-6, 1e-3, 0.1, 1.0, 10.0, 1e3}) {
            const double r = upwind_shape({p}, s, CellNode::right);
            CHECK(r >= prev - 1e-14);
            prev = r;
        }
    }
}

TEST_CASE("energy ratio function") {
    CHECK(phi_of_p(1e-9) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(phi_of_p(1.0) == doctest::Approx(1.081977).epsilon(1e-6));
    // linear growth: phi(p)/p -> 1/2
    CHECK(std::abs(phi_of_p(100.0) / 100.0 - 0.5) < 1e-6);
    // branch seam continuity (the two evaluations differ by O(dp))
    CHECK(phi_of_p(0.0099999) == doctest::Approx(phi_of_p(0.0100001)).epsilon(1e-8));
    CHECK_THROWS_AS(phi_of_p(0.0), std::invalid_argument);
}

TEST_CASE("energy ratio measured by quadrature on a random interpolant") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> N(0, 1);
    Mesh1D m(1.0, 8);
    Eigen::VectorXd vals = Eigen::VectorXd::Zero(9);
    for (int i = 1; i < 8; ++i) vals(i) = N(rng);
    PiecewiseAffine u(m, vals, true);
    const double p = 1.0;
    const double alpha = p > 0 ? 1.0 * m.step() / p : 1.0;
    UpwindFunction v = exact_upwind_interpolant(u, alpha, 1.0);
    double num = 0.0;
    for (int c = 0; c < 8; ++c) {
        num += adaptive_integrate([&](double t) { return v.deriv(t) * v.deriv(t); },
                                  m.vertex(c) + 1e-15, m.vertex(c + 1) - 1e-15, 1e-13);
    }
    CHECK(num / u.deriv_l2_sq() == doctest::Approx(phi_of_p(p)).epsilon(1e-8));
}

TEST_CASE("exact layer solution solves the two-point problem") {
    const double alpha = 1e-2, beta = 2.0, f0 = 1.5, T = 1.0;
    CHECK(exact_layer_solution(alpha, beta, f0, T, 0.0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(std::abs(exact_layer_solution(alpha, beta, f0, T, T)) < 1e-14);
    // finite-difference residual of -alpha u'' + beta u' = f0
    for (double t : {0.2, 0.5, 0.9}) {
        const double h = 1e-5;
        const double um = exact_layer_solution(alpha, beta, f0, T, t - h);
        const double u0 = exact_layer_solution(alpha, beta, f0, T, t);
        const double up = exact_layer_solution(alpha, beta, f0, T, t + h);
        const double resid = -alpha * (up - 2 * u0 + um) / (h * h) + beta * (up - um) / (2 * h);
        CHECK(resid == doctest::Approx(f0).epsilon(1e-5));
    }
}

TEST_CASE("element matrices: Galerkin limit entries") {
    const double alpha = 0.7, tau = 0.3;
    LocalMatrices lm = element_matrices(alpha, 0.0, 0.0, tau);
    Eigen::Matrix2d stiff;
    stiff << 1, -1, -1, 1;
    stiff /= tau;
    CHECK((lm.conv - alpha * stiff).cwiseAbs().maxCoeff() < 1e-14);
    Eigen::Matrix2d mass;
    mass << 2, 1, 1, 2;
    mass *= tau / 6.0;
    CHECK((lm.mass - mass).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((lm.stiff - stiff).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("element matrices agree with adaptive quadrature of the defining integrals") {
    // Entries such as conv_LL carry a factor exp(-p); below ~1e-4 of the
    // matrix norm the quadrature route hits the double-precision
    // cancellation floor, so tiny entries get an absolute gate instead.
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(-6.0, 0.0);
    for (int it = 0; it < 50; ++it) {
        const double alpha = std::pow(10.0, U(rng));
        const double beta = std::pow(10.0, U(rng));
        const double tau = std::pow(10.0, U(rng));
        const LocalMatrices lm = element_matrices(alpha, beta, 0.0, tau);
        const double p = beta * tau / alpha;
        const double cnorm = lm.conv.cwiseAbs().maxCoeff();
        const double mnorm = lm.mass.cwiseAbs().maxCoeff();
        auto segs = layer_segments(0.0, 1.0, std::min(0.45, 1.0 / std::max(p, 4.0)), 20);
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                const CellNode nj = j ? CellNode::right : CellNode::left;
                const double dphi = (i == 0 ? -1.0 : 1.0) / tau;
                double q = 0.0, qm = 0.0;
                for (const auto& [a, b] : segs) {
                    q += adaptive_integrate(
                        [&](double s) {
                            return dphi *
                                   (alpha * upwind_shape_deriv({p}, s, nj) / tau +
                                    beta * upwind_shape({p}, s, nj)) *
                                   tau;
                        },
                        a, b, 1e-13);
                    qm += adaptive_integrate(
                        [&](double s) {
                            const double phi = (i == 0 ? 1.0 - s : s);
                            return phi * upwind_shape({p}, s, nj) * tau;
                        },
                        a, b, 1e-13);
                }
                CHECK(std::abs(q - lm.conv(i, j)) <=
                      1e-10 * std::max(std::abs(lm.conv(i, j)), 1e-4 * cnorm));
                CHECK(std::abs(qm - lm.mass(i, j)) <=
                      1e-9 * std::max(std::abs(lm.mass(i, j)), 1e-4 * mnorm));
            }
        }
    }
}

TEST_CASE("element matrices finite and robust across the Peclet range") {
    for (double p : {1e-12, 1e-6, 1e-3, 1.0, 41.7, 1e4, 1e6}) {
        const double tau = 1.0 / 80, beta = 1.0, alpha = beta * tau / p;
        const LocalMatrices lm = element_matrices(alpha, beta, 0.0, tau);
        CHECK(lm.conv.allFinite());
        CHECK(lm.mass.allFinite());
        CHECK(lm.stiff.allFinite());
    }
    // the paper's configuration sits above Peclet 40
    const LocalMatrices lm = element_matrices(3e-4, 1.0, 0.0, 1.0 / 80);
    CHECK(lm.peclet == doctest::Approx(41.7).epsilon(1e-2));
    CHECK(lm.conv.allFinite());
}

TEST_CASE("small-Peclet limit reaches the Galerkin matrices linearly") {
    // mass deviates at rate p/24, so the 1e-8 gate is honored at p = 1e-8
    {
        const double tau = 1.0, alpha = 1.0, beta = 1e-8;
        const LocalMatrices lm = element_matrices(alpha, beta, 0.0, tau);
        CHECK((lm.conv - lm.conv_gal).cwiseAbs().maxCoeff() /
                  lm.conv_gal.cwiseAbs().maxCoeff() <
              1e-8);
        CHECK((lm.mass - lm.mass_gal).cwiseAbs().maxCoeff() /
                  lm.mass_gal.cwiseAbs().maxCoeff() <
              1e-8);
    }
    // and the linear rate itself at p = 1e-4
    {
        const LocalMatrices lm = element_matrices(1.0, 1e-4, 0.0, 1.0);
        const double dev = (lm.mass - lm.mass_gal).cwiseAbs().maxCoeff();
        CHECK(dev == doctest::Approx(1e-4 / 24.0).epsilon(2e-2));
    }
}

TEST_CASE("weighted mass with constant coefficient matches the closed form") {
    // the variable-coefficient path is pinned to order-4 Gauss, exact for
    // the affine-affine pairing and approximate at moderate Peclet
    {
        const Eigen::Matrix2d wm =
            weighted_mass(1.0, 0.0, 0.125, 0.0, [](double) { return 3.0; }, false);
        CHECK((wm - 3.0 * p1_mass(0.125)).cwiseAbs().maxCoeff() < 1e-14);
    }
    const double alpha = 0.5, beta = 1.0, tau = 0.125;  // p = 0.25
    const LocalMatrices lm = element_matrices(alpha, beta, 0.0, tau);
    const Eigen::Matrix2d wm =
        weighted_mass(alpha, beta, tau, 0.0, [](double) { return 3.0; }, true);
    CHECK((wm - 3.0 * lm.mass).cwiseAbs().maxCoeff() < 1e-7 * lm.mass.norm());
}

TEST_CASE("loads: exact for constants, quadrature for callables") {
    const double alpha = 0.5, beta = 1.0, tau = 0.125;  // smooth regime
    const Eigen::Vector2d lc = load_constant(2.0, alpha, beta, tau, true);
    // the upwinded hat pieces integrate to tau in total
    CHECK(lc.sum() == doctest::Approx(2.0 * tau).epsilon(1e-13));
    const Eigen::Vector2d lq =
        load_callable([](double) { return 2.0; }, alpha, beta, tau, 0.0, true);
    CHECK((lc - lq).cwiseAbs().maxCoeff() < 1e-9 * tau);
    // the total integral of the hat is tau at any Peclet number
    const Eigen::Vector2d steep = load_constant(1.0, 3e-4, 1.0, 1.0 / 80, true);
    CHECK(steep.sum() == doctest::Approx(1.0 / 80).epsilon(1e-12));
}

TEST_CASE("piecewise representations: evaluation and exact integrals") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> N(0, 1);
    Mesh1D m(2.0, 10);
    Eigen::VectorXd vals(11);
    for (int i = 0; i <= 10; ++i) vals(i) = N(rng);
    PiecewiseAffine u(m, vals);
    const double l2 =
        adaptive_integrate([&](double t) { return u.eval(t) * u.eval(t); }, 0.0, 2.0, 1e-13);
    CHECK(u.l2_sq() == doctest::Approx(l2).epsilon(1e-11));
    CHECK(u.linf() == vals.cwiseAbs().maxCoeff());

    CHECK_THROWS_AS(PiecewiseAffine(m, Eigen::VectorXd::Zero(3)), std::invalid_argument);
    CHECK_THROWS_AS(PiecewiseAffine(m, vals, true), std::invalid_argument);
}

TEST_CASE("upwind interpolant: zero-convection limit and hat shapes") {
    std::mt19937_64 rng(29);
    std::normal_distribution<double> N(0, 1);
    Mesh1D m(1.0, 8);
    Eigen::VectorXd vals = Eigen::VectorXd::Zero(9);
    for (int i = 1; i < 8; ++i) vals(i) = N(rng);
    PiecewiseAffine u(m, vals, true);

    UpwindFunction v0 = exact_upwind_interpolant(u, 1.0, 0.0);
    CHECK(v0.linear_mode);
    for (double t : {0.05, 0.3, 0.55, 0.81, 0.99}) {
        CHECK(std::abs(v0.eval(t) - u.eval(t)) < 1e-12);
    }

    // single hat at Peclet 1: the two cell restrictions are the unit shapes
    Eigen::VectorXd hat = Eigen::VectorXd::Zero(9);
    hat(4) = 1.0;
    const double p = 1.0, beta = 1.0, alpha = beta * m.step() / p;
    UpwindFunction vh = upwind_from_nodal(m, hat, alpha, beta);
    CHECK(vh.eval_local(3, 0.5) ==
          doctest::Approx(upwind_shape({p}, 0.5, CellNode::right)).epsilon(1e-13));
    CHECK(vh.eval_local(4, 0.5) ==
          doctest::Approx(upwind_shape({p}, 0.5, CellNode::left)).epsilon(1e-13));
    CHECK(vh.max_relative_jump() < 1e-10);

    // nodal Kronecker property
    for (int k = 0; k <= 8; ++k) {
        CHECK(vh.node_value(k) == doctest::Approx(k == 4 ? 1.0 : 0.0).epsilon(1e-14));
    }
}

TEST_CASE("upwind integrals match quadrature") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> N(0, 1);
    Mesh1D m(1.0, 6);
    Eigen::VectorXd vals(7);
    for (int i = 0; i <= 6; ++i) vals(i) = N(rng);
    for (double p : {0.3, 7.0, 300.0}) {
        const double beta = 1.0, alpha = beta * m.step() / p;
        UpwindFunction v = upwind_from_nodal(m, vals, alpha, beta);
        double l2 = 0.0, dl2 = 0.0;
        for (int c = 0; c < 6; ++c) {
            for (auto& [a, b] :
                 layer_segments(m.vertex(c), m.vertex(c + 1), m.step() / std::max(p, 4.0))) {
                l2 += adaptive_integrate([&](double t) { return v.eval(t) * v.eval(t); }, a,
                                         b, 1e-13);
                dl2 += adaptive_integrate([&](double t) { return v.deriv(t) * v.deriv(t); },
                                          a, b, 1e-13);
            }
        }
        CHECK(v.l2_sq() == doctest::Approx(l2).epsilon(1e-9));
        CHECK(v.deriv_l2_sq() == doctest::Approx(dl2).epsilon(1e-9));
    }
}

TEST_CASE("shape integrals are continuous across the branch seam") {
    const ShapeIntegrals a = shape_integrals(0.00999999);
    const ShapeIntegrals b = shape_integrals(0.01000001);
    CHECK(a.m_LL == doctest::Approx(b.m_LL).epsilon(1e-7));
    CHECK(a.p_LR == doctest::Approx(b.p_LR).epsilon(1e-7));
    CHECK(a.int_psiR == doctest::Approx(b.int_psiR).epsilon(1e-7));
}

TEST_CASE("kernel convolution: steady state, step response, contraction") {
    Mesh1D m(1.0, 4);
    const Kernel k{0.05, 1.0};

    // constant data: the unit-mass kernel reproduces the constant, up to
    // the zero-extension start-up layer
    PiecewiseConstant c3(m, Eigen::VectorXd::Constant(4, 3.0));
    ConvolvedFunction vc = convolve_exponential(c3, k);
    CHECK(std::abs(vc.eval(1.0) - 3.0) <= 3.0 * std::exp(-1.0 / 0.05) + 1e-12);
    // the recursion fixes constants exactly once the state reaches them
    CHECK(vc.core.eval_local(2, 0.5) ==
          doctest::Approx(3.0).epsilon(std::exp(-0.5 / 0.05)));

    // unit step: v(t) = 1 - exp(-beta t / alpha) while the data lasts,
    // then the exponential tail
    PiecewiseConstant st(m, Eigen::VectorXd::Ones(4));
    ConvolvedFunction vs = convolve_exponential(st, k);
    for (double t : {0.01, 0.2, 0.5, 0.99}) {
        CHECK(vs.eval(t) == doctest::Approx(-std::expm1(-t / 0.05)).epsilon(1e-12));
    }
    CHECK(vs.eval(1.3) ==
          doctest::Approx(-std::expm1(-1.0 / 0.05) * std::exp(-0.3 / 0.05)).epsilon(1e-12));

    // L2 contraction on random data
    std::mt19937_64 rng(37);
    std::normal_distribution<double> N(0, 1);
    for (int it = 0; it < 10; ++it) {
        Eigen::VectorXd vals(4);
        for (int i = 0; i < 4; ++i) vals(i) = N(rng);
        PiecewiseConstant u(m, vals);
        ConvolvedFunction v = convolve_exponential(u, {0.03, 1.0});
        CHECK(v.l2_sq() <= u.l2_sq() * (1.0 + 1e-12));
    }

    CHECK_THROWS_AS(convolve_exponential(st, Kernel{0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("projection onto piecewise constants") {
    Mesh1D m(1.0, 5);
    PiecewiseConstant c = project_piecewise_constant(m, [](double) { return 4.0; });
    for (int k = 0; k < 5; ++k) CHECK(c.values(k) == doctest::Approx(4.0).epsilon(1e-14));

    Mesh1D single(0.4, 1);
    PiecewiseConstant ramp = project_piecewise_constant(single, [](double t) { return t; });
    CHECK(ramp.values(0) == doctest::Approx(0.2).epsilon(1e-13));

    // random piecewise affine vs the order-10 Gauss route
    std::mt19937_64 rng(41);
    std::normal_distribution<double> N(0, 1);
    Eigen::VectorXd vals(6);
    for (int i = 0; i <= 5; ++i) vals(i) = N(rng);
    PiecewiseAffine u(m, vals);
    PiecewiseConstant exact = project_piecewise_constant(u);
    PiecewiseConstant quad =
        project_piecewise_constant(m, [&](double t) { return u.eval(t); });
    CHECK((exact.values - quad.values).cwiseAbs().maxCoeff() < 1e-12);

    // projection onto an unrelated coarser mesh by exact overlap,
    // checked against adaptive integration across the interior kinks
    Mesh1D coarse(1.0, 3);
    PiecewiseConstant ovl = project_piecewise_constant(coarse, u);
    for (int kcell = 0; kcell < 3; ++kcell) {
        const double avg = adaptive_integrate([&](double t) { return u.eval(t); },
                                              coarse.vertex(kcell), coarse.vertex(kcell + 1),
                                              1e-13) /
                           coarse.step();
        CHECK(ovl.values(kcell) == doctest::Approx(avg).epsilon(1e-11));
    }
}
