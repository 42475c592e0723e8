#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "cdlab/assembly.hpp"
#include "cdlab/functions.hpp"
#include "cdlab/elements.hpp"
#include "cdlab/quadrature.hpp"
#include "cdlab/special.hpp"
#include "support/oracles.hpp"

using namespace cdlab;
using cdlab::testing::adaptive_integrate;
using cdlab::testing::dense_solve_oracle;

TEST_CASE("single-cell diffusion row") {
    ProblemSpec spec;
    spec.alpha = 0.3;
    spec.beta = 0.0;
    spec.gamma = 0.0;
    spec.f = 2.0;
    Mesh1D mesh(1.0, 2);
    LinearSystem sys = assemble_petrov_galerkin(spec, mesh);
    REQUIRE(sys.A.rows() == 1);
    CHECK(sys.A.coeff(0, 0) == doctest::Approx(2.0 * spec.alpha / 0.5).epsilon(1e-14));
    CHECK(sys.rhs(0) == doctest::Approx(2.0 * 0.5).epsilon(1e-13));  // f * tau
}

TEST_CASE("assembled action equals direct quadrature of the form") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> N(0, 1);
    ProblemSpec spec;
    spec.alpha = 0.07;
    spec.beta = 0.9;
    spec.gamma = 0.4;
    Mesh1D mesh(1.0, 4);
    LinearSystem sys = assemble_petrov_galerkin(spec, mesh);
    const double p = spec.beta * mesh.step() / spec.alpha;
    for (int trial = 0; trial < 4; ++trial) {
        Eigen::VectorXd uc(3), vc(3);
        for (int i = 0; i < 3; ++i) {
            uc(i) = N(rng);
            vc(i) = N(rng);
        }
        Eigen::VectorXd un = Eigen::VectorXd::Zero(5), vn = Eigen::VectorXd::Zero(5);
        un.segment(1, 3) = uc;
        vn.segment(1, 3) = vc;
        PiecewiseAffine u(mesh, un, true);
        UpwindFunction v = upwind_from_nodal(mesh, vn, spec.alpha, spec.beta);
        double form = 0.0;
        for (int c = 0; c < 4; ++c) {
            for (auto& [a, b] : layer_segments(mesh.vertex(c), mesh.vertex(c + 1),
                                               mesh.step() / std::max(p, 4.0))) {
                form += adaptive_integrate(
                    [&](double t) {
                        const double du = u.slope(c);
                        return du * (spec.alpha * v.deriv(t) + spec.beta * v.eval(t)) +
                               spec.gamma * u.eval(t) * v.eval(t);
                    },
                    a, b, 1e-13);
            }
        }
        CHECK(vc.dot(sys.A * uc) == doctest::Approx(form).epsilon(1e-10));
    }
}

TEST_CASE("2D system dimension at the paper configuration") {
    ProblemSpec spec;
    spec.alpha = 3e-4;
    spec.beta = 1.0;
    spec.dim = 2;
    TensorMesh2D mesh(Mesh1D(1.0, 80), Mesh1D(1.0, 80));
    LinearSystem sys = assemble_petrov_galerkin(spec, mesh);
    CHECK(sys.A.rows() == 79 * 79);
    CHECK(sys.A.cols() == 79 * 79);
}

TEST_CASE("standard pairing: symmetry and convection pattern") {
    ProblemSpec spec;
    spec.alpha = 0.2;
    spec.beta = 0.0;
    spec.gamma = 0.3;
    Mesh1D mesh(1.0, 8);
    LinearSystem sys = assemble_galerkin(spec, mesh);
    Eigen::MatrixXd A(sys.A);
    CHECK((A - A.transpose()).cwiseAbs().maxCoeff() < 1e-12 * A.norm());

    // interior row with convection: alpha [-1 2 -1]/tau + beta [-1/2 0 1/2]
    spec.beta = 0.7;
    spec.gamma = 0.0;
    LinearSystem sysc = assemble_galerkin(spec, mesh);
    const double tau = mesh.step();
    const int r = 3;
    CHECK(sysc.A.coeff(r, r - 1) ==
          doctest::Approx(-spec.alpha / tau - 0.5 * spec.beta).epsilon(1e-13));
    CHECK(sysc.A.coeff(r, r) == doctest::Approx(2.0 * spec.alpha / tau).epsilon(1e-13));
    CHECK(sysc.A.coeff(r, r + 1) ==
          doctest::Approx(-spec.alpha / tau + 0.5 * spec.beta).epsilon(1e-13));

    // hand-assembled row against quadrature of the affine pairing
    const double hand = adaptive_integrate(
        [&](double t) {
            // d/dt hat_3 * (alpha d/dt hat_4 + beta hat_4) on their overlap
            const double dh3 = -1.0 / tau;
            const double dh4 = 1.0 / tau;
            const double h4 = (t - mesh.vertex(3)) / tau;
            return dh3 * (spec.alpha * dh4 + spec.beta * h4);
        },
        mesh.vertex(3), mesh.vertex(4), 1e-13);
    CHECK(sysc.A.coeff(r, r + 1) == doctest::Approx(hand).epsilon(1e-12));
}

TEST_CASE("upwinded pairing reaches the standard one as the Peclet number vanishes") {
    ProblemSpec spec;
    spec.alpha = 1.0;
    spec.gamma = 0.5;
    Mesh1D mesh(1.0, 8);
    // mass-type entries deviate at rate p/24: the 1e-8 gate holds at 1e-8
    spec.beta = 1e-8;
    Eigen::MatrixXd pg(assemble_petrov_galerkin(spec, mesh).A);
    Eigen::MatrixXd ga(assemble_galerkin(spec, mesh).A);
    CHECK((pg - ga).cwiseAbs().maxCoeff() / ga.cwiseAbs().maxCoeff() < 1e-8);
    // and stays below 1e-6 of the matrix scale at p = 1e-4
    spec.beta = 1e-4 * spec.alpha / mesh.step();
    Eigen::MatrixXd pg2(assemble_petrov_galerkin(spec, mesh).A);
    Eigen::MatrixXd ga2(assemble_galerkin(spec, mesh).A);
    CHECK((pg2 - ga2).cwiseAbs().maxCoeff() / ga2.cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("sparse solve: identity, SPD oracle, extreme-Peclet residual") {
    {
        std::vector<Eigen::Triplet<double>> trips;
        for (int i = 0; i < 5; ++i) trips.emplace_back(i, i, 1.0);
        LinearSystem sys;
        sys.A.resize(5, 5);
        sys.A.setFromTriplets(trips.begin(), trips.end());
        sys.rhs = Eigen::VectorXd::LinSpaced(5, 1.0, 5.0);
        CHECK((solve_system(sys) - sys.rhs).cwiseAbs().maxCoeff() < 1e-14);
    }
    {
        std::mt19937_64 rng(7);
        std::normal_distribution<double> N(0, 1);
        Eigen::MatrixXd R(50, 50);
        for (int i = 0; i < 50; ++i)
            for (int j = 0; j < 50; ++j) R(i, j) = N(rng);
        Eigen::MatrixXd S = R * R.transpose() + 50.0 * Eigen::MatrixXd::Identity(50, 50);
        Eigen::VectorXd b(50);
        for (int i = 0; i < 50; ++i) b(i) = N(rng);
        LinearSystem sys;
        sys.A = S.sparseView();
        sys.rhs = b;
        const Eigen::VectorXd x = solve_system(sys);
        const Eigen::VectorXd ref = dense_solve_oracle(S, b);
        CHECK((x - ref).norm() / ref.norm() < 1e-10);
    }
    {
        ProblemSpec spec;
        spec.alpha = 1e-3 * (1.0 / 16);  // p = 1000
        spec.beta = 1.0;
        Mesh1D mesh(1.0, 16);
        LinearSystem sys = assemble_petrov_galerkin(spec, mesh);
        const Eigen::VectorXd x = solve_system(sys);
        CHECK((sys.A * x - sys.rhs).norm() / sys.rhs.norm() <= 1e-10);
    }
    {
        // numerically singular: explicit error carrying a pivot magnitude
        LinearSystem sys;
        sys.A.resize(2, 2);
        std::vector<Eigen::Triplet<double>> trips{{0, 0, 1.0}, {1, 0, 1.0}};
        sys.A.setFromTriplets(trips.begin(), trips.end());
        sys.rhs = Eigen::VectorXd::Ones(2);
        CHECK_THROWS_AS(solve_system(sys), SingularSystemError);
    }
}

TEST_CASE("1D nodal exactness of the upwinded method") {
    ProblemSpec spec;
    spec.beta = 1.0;
    spec.gamma = 0.0;
    spec.f = 1.0;
    spec.alpha = 1e-3;
    Mesh1D mesh(1.0, 16);
    Solution1D sol = solve_convection_diffusion(spec, mesh, Method::pg_exact);
    CHECK(sol.values(0) == 0.0);
    CHECK(sol.values(16) == 0.0);
    double scale = 0.0;
    for (int k = 0; k <= 16; ++k) {
        scale = std::max(scale,
                         std::abs(exact_layer_solution(1e-3, 1.0, 1.0, 1.0, mesh.vertex(k))));
    }
    for (int k = 0; k <= 16; ++k) {
        const double ex = exact_layer_solution(1e-3, 1.0, 1.0, 1.0, mesh.vertex(k));
        CHECK(std::abs(sol.values(k) - ex) <= 1e-9 * scale);
    }
}

TEST_CASE("consistency: the exact solution satisfies the discrete equations") {
    const double alpha = 1e-2, beta = 1.0, f0 = 1.0, T = 1.0;
    Mesh1D mesh(T, 8);
    ProblemSpec spec;
    spec.alpha = alpha;
    spec.beta = beta;
    spec.f = f0;
    const double p = beta * mesh.step() / alpha;
    for (int k = 2; k <= 4; ++k) {
        Eigen::VectorXd hat = Eigen::VectorXd::Zero(9);
        hat(k) = 1.0;
        UpwindFunction psi = upwind_from_nodal(mesh, hat, alpha, beta);
        double B = 0.0;
        for (int c = k - 1; c <= k; ++c) {
            for (auto& [a, b] : layer_segments(mesh.vertex(c), mesh.vertex(c + 1),
                                               mesh.step() / std::max(p, 4.0))) {
                B += adaptive_integrate(
                    [&](double t) {
                        const double h = 1e-6;
                        const double du =
                            (exact_layer_solution(alpha, beta, f0, T, t + h) -
                             exact_layer_solution(alpha, beta, f0, T, t - h)) /
                            (2.0 * h);
                        return du * (alpha * psi.deriv(t) + beta * psi.eval(t));
                    },
                    a, b, 1e-11);
            }
        }
        CHECK(B == doctest::Approx(f0 * mesh.step()).epsilon(1e-7));
    }
}

TEST_CASE("oscillation contrast of the standard method at large Peclet") {
    ProblemSpec spec;
    spec.alpha = 1e-3;
    spec.beta = 1.0;
    spec.f = 1.0;
    Mesh1D mesh(1.0, 16);  // p = 62.5
    Solution1D ga = solve_convection_diffusion(spec, mesh, Method::galerkin);
    CHECK(derivative_sign_changes(ga.values) >= 8);
    Solution1D pg = solve_convection_diffusion(spec, mesh, Method::pg_exact);
    CHECK(derivative_sign_changes(pg.values) <= 2);
}

TEST_CASE("2D midline contrast at the paper configuration (coarse probe)") {
    ProblemSpec spec;
    spec.alpha = 3e-4;
    spec.beta = 1.0;
    spec.f = 1.0;
    spec.dim = 2;
    TensorMesh2D mesh(Mesh1D(1.0, 40), Mesh1D(1.0, 40));
    Solution2D pg = solve_convection_diffusion(spec, mesh, Method::pg_exact);
    Solution2D ga = solve_convection_diffusion(spec, mesh, Method::galerkin);
    const Eigen::VectorXd mp = midline_profile(pg);
    const Eigen::VectorXd mg = midline_profile(ga);
    CHECK(total_variation(mg) >= 5.0 * total_variation(mp));
    CHECK(undershoot(mp) <= 1e-6);
    // monotone up to the tolerated undershoot before the outflow layer
    for (int i = 0; i + 2 < mp.size(); ++i) CHECK(mp(i + 1) - mp(i) >= -1e-6);
}

TEST_CASE("Kronecker and element-loop assembly agree") {
    ProblemSpec spec;
    spec.alpha = 2e-3;
    spec.beta = 1.0;
    spec.gamma = 0.7;
    spec.dim = 2;
    TensorMesh2D mesh(Mesh1D(1.0, 6), Mesh1D(1.0, 5));
    for (Method m : {Method::pg_exact, Method::galerkin}) {
        LinearSystem fast = (m == Method::pg_exact)
                                ? assemble_petrov_galerkin(spec, mesh)
                                : assemble_galerkin(spec, mesh);
        LinearSystem loop = assemble_element_loop(spec, mesh, m);
        const Eigen::MatrixXd D = Eigen::MatrixXd(fast.A) - Eigen::MatrixXd(loop.A);
        CHECK(D.cwiseAbs().maxCoeff() < 1e-10 * Eigen::MatrixXd(fast.A).cwiseAbs().maxCoeff());
        CHECK((fast.rhs - loop.rhs).cwiseAbs().maxCoeff() < 1e-10);
    }
    // cellwise-variable reaction goes through the loop path
    ProblemSpec varg = spec;
    varg.gamma_fn = [](double t, double) { return t < 0.5 ? 0.2 : 1.3; };
    LinearSystem sys = assemble_petrov_galerkin(varg, mesh);
    CHECK(sys.A.rows() == mesh.n_interior());
    Eigen::VectorXd x = solve_system(sys);
    CHECK(x.allFinite());
}

TEST_CASE("approximate upwinding converges to exact upwinding with the subgrid") {
    ProblemSpec spec;
    spec.alpha = 1e-2;
    spec.beta = 1.0;
    spec.f = 1.0;
    spec.dim = 2;
    TensorMesh2D mesh(Mesh1D(1.0, 16), Mesh1D(1.0, 16));
    Solution2D ex = solve_convection_diffusion(spec, mesh, Method::pg_exact);
    double prev = 1e300;
    for (int level : {1, 2, 3}) {
        Solution2D ap = solve_convection_diffusion(spec, mesh, Method::pg_approx, level);
        const double d =
            std::sqrt(alpha_norm_sq_diff(ex, ap, spec.alpha) / alpha_norm_sq(ex, spec.alpha));
        CHECK(d < prev);
        prev = d;
    }
}

TEST_CASE("method reduction: the two methods agree at vanishing Peclet") {
    ProblemSpec spec;
    spec.alpha = 1.0;
    spec.f = 1.0;
    spec.gamma = 0.0;
    Mesh1D mesh(1.0, 16);
    spec.beta = 1e-3 * spec.alpha / mesh.step();  // p = 1e-3
    Solution1D pg = solve_convection_diffusion(spec, mesh, Method::pg_exact);
    Solution1D ga = solve_convection_diffusion(spec, mesh, Method::galerkin);
    CHECK((pg.values - ga.values).cwiseAbs().maxCoeff() <=
          1e-6 * ga.values.cwiseAbs().maxCoeff());
}

TEST_CASE("solution CSV: schema and byte-identical reruns") {
    ProblemSpec spec;
    spec.alpha = 0.01;
    spec.beta = 1.0;
    Mesh1D mesh(1.0, 8);
    Solution1D sol = solve_convection_diffusion(spec, mesh, Method::pg_exact);
    const std::string p1 = "/tmp/cdlab_sol_a.csv", p2 = "/tmp/cdlab_sol_b.csv";
    write_solution_csv(p1, sol, spec);
    write_solution_csv(p2, sol, spec);
    std::ifstream f1(p1), f2(p2);
    std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
    CHECK(s1.find("# dim,T,V,n_flow,n_transverse,alpha,beta,method") == 0);
    CHECK(s1.find("pg-exact") != std::string::npos);
    CHECK(s1.find("x,value") != std::string::npos);
}

TEST_CASE("invalid problem parameters are rejected") {
    ProblemSpec spec;
    spec.alpha = 0.0;
    Mesh1D mesh(1.0, 4);
    CHECK_THROWS_AS(assemble_galerkin(spec, mesh), std::invalid_argument);
    CHECK_THROWS_AS(method_from_name("upwind"), std::invalid_argument);
    CHECK(method_from_name("pg-approx") == Method::pg_approx);
}
