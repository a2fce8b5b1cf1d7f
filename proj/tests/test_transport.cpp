#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "bouquet/registry.hpp"
#include "bouquet/transport.hpp"

using namespace bouquet;

namespace {

EquivariantGeometry monopole_north(int charge) {
    EquivariantGeometry geom;
    geom.chart = Chart{2, {-40.0, -40.0}, {40.0, 40.0}, 400, "north"};
    geom.group = make_group("so2");
    geom.action = rotation_action_base(geom.group, 1);
    attach_weight_cocycle(geom.action, geom.group, {0});
    geom.connection = make_monopole_connection(charge, false);
    geom.fiber_rank = 1;
    return geom;
}

EquivariantGeometry weighted_plane(double k) {
    EquivariantGeometry geom;
    geom.chart = Chart{2, {-3.0, -3.0}, {3.0, 3.0}, 64, "plane"};
    geom.group = make_group("u1");
    geom.action = rotation_action_base(geom.group, 2);
    attach_trivial_cocycle(geom.action, 1);
    geom.connection = make_plane_connection(k);
    geom.fiber_rank = 1;
    return geom;
}

// Scalar transport around the unit circle integrated without any library
// machinery: dT/dt = -A(x'(t)) T with plain complex arithmetic.
cplx scalar_circle_transport_rk4(const std::function<cplx(double, double, double, double)>& a_of,
                                 int steps) {
    cplx t_sol(1.0);
    const double h = 1.0 / steps;
    const auto rhs = [&](double t, cplx v) {
        const double x = std::cos(2.0 * M_PI * t);
        const double y = std::sin(2.0 * M_PI * t);
        const double vx = -2.0 * M_PI * y;
        const double vy = 2.0 * M_PI * x;
        return -a_of(x, y, vx, vy) * v;
    };
    for (int s = 0; s < steps; ++s) {
        const double t = s * h;
        const cplx k1 = rhs(t, t_sol);
        const cplx k2 = rhs(t + h / 2, t_sol + (h / 2) * k1);
        const cplx k3 = rhs(t + h / 2, t_sol + (h / 2) * k2);
        const cplx k4 = rhs(t + h, t_sol + h * k3);
        t_sol += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return t_sol;
}

} // namespace

TEST_CASE("circle transport on the charge-1 bundle matches an independent integrator") {
    const EquivariantGeometry geom = monopole_north(1);
    TransportProblem problem = make_problem(
        geom, SuperPath::circle({0.0, 0.0}, 1.0, 0), CMatrix(2, 2), geom.group.identity(), 1.0, 512);
    const Exterior<CMatrix> t_sol = integrate_parallel(problem);
    const cplx got = t_sol[0](0, 0);

    const cplx oracle = scalar_circle_transport_rk4(
        [](double x, double y, double vx, double vy) {
            const cplx f(0.0, -1.0 / (1.0 + x * x + y * y));
            return f * (x * vy - y * vx);
        },
        512);
    CHECK(std::abs(got - oracle) < 1e-12);

    // enclosed flux integrates to pi at radius 1, so the holonomy is -1
    CHECK(std::abs(got - cplx(-1.0)) < 1e-9);
}

TEST_CASE("transport around a closed loop composes over subintervals") {
    const EquivariantGeometry geom = monopole_north(2);
    TransportProblem problem = make_problem(
        geom, SuperPath::circle({0.3, 0.1}, 0.5, 0), CMatrix(2, 2), geom.group.identity(), 1.0, 512);
    const Exterior<CMatrix> full = integrate_parallel_window(problem, 0.0, 1.0, 512);
    const Exterior<CMatrix> a = integrate_parallel_window(problem, 0.0, 0.375, 192);
    const Exterior<CMatrix> b = integrate_parallel_window(problem, 0.375, 1.0, 320);
    CHECK(max_abs_diff(full, b * a) < 1e-13);
}

TEST_CASE("step halving converges at fourth order") {
    const EquivariantGeometry geom = monopole_north(2);
    TransportProblem problem = make_problem(
        geom, SuperPath::circle({0.3, 0.1}, 0.5, 0), CMatrix(2, 2), geom.group.identity(), 1.0, 64);
    const double e1 = max_abs_diff(integrate_parallel(problem, 64), integrate_parallel(problem, 128));
    const double e2 = max_abs_diff(integrate_parallel(problem, 128), integrate_parallel(problem, 256));
    const double order = std::log2(e1 / e2);
    CHECK(order > 3.7);
    CHECK(order < 4.3);
}

TEST_CASE("constant superloop holonomy is the exponential of curvature") {
    const EquivariantGeometry geom = weighted_plane(0.8);
    const Point x{0.7, 0.4};
    TransportProblem problem = make_problem(
        geom, SuperPath::constant_with_generators(x), CMatrix(1, 1), geom.group.identity(), 1.0, 512);
    const FormValue hol = holonomy_form(equivariant_holonomy(problem));
    const FormValue target = exp_even(curvature(geom, x));
    CHECK(max_abs_diff(hol, target) < 1e-12);
    CHECK(max_abs_diff(trace(hol), trace(target)) < 1e-12);
}

TEST_CASE("equivariant holonomy at a fixed point matches the closed-form constant") {
    const EquivariantGeometry geom = monopole_north(2);
    const CMatrix h = geom.group.exponential(geom.group.algebra_element({0.9}));
    const CMatrix a = geom.group.algebra_element({0.35});
    const Point pole{0.0, 0.0};
    TransportProblem problem =
        make_problem(geom, SuperPath::constant_with_generators(pole), a, h, 1.0, 512);
    const FormValue ode = holonomy_form(equivariant_holonomy(problem));
    const FormValue closed = super_holonomy_constant(geom, pole, a, h);
    CHECK(max_abs_diff(ode, closed) < 1e-13);
}

TEST_CASE("holonomy validation rejects open loops and non-centralizing twists") {
    const EquivariantGeometry geom = monopole_north(1);
    TransportProblem open_path = make_problem(
        geom, SuperPath::polyline({{0.0, 0.0}, {1.0, 0.5}}, 0), CMatrix(2, 2),
        geom.group.identity(), 1.0, 64);
    CHECK(!loop_validate(open_path).pass);
    CHECK_THROWS_AS(equivariant_holonomy(open_path), ValidationError);

    // a generic rotation does not fix an off-center point
    const CMatrix h = geom.group.exponential(geom.group.algebra_element({0.9}));
    TransportProblem off = make_problem(
        geom, SuperPath::constant_with_generators({0.5, 0.0}), CMatrix(2, 2), h, 1.0, 64);
    CHECK(!loop_validate(off).pass);
    CHECK_THROWS_AS(equivariant_holonomy(off), ValidationError);
}

TEST_CASE("transport leaving the chart reports the exit domain error") {
    const EquivariantGeometry geom = weighted_plane(0.8);
    TransportProblem problem = make_problem(
        geom, SuperPath::circle({0.0, 0.0}, 5.0, 0), CMatrix(1, 1), geom.group.identity(), 1.0, 64);
    CHECK_THROWS_AS(integrate_parallel(problem), DomainError);
}

TEST_CASE("infinitesimal holonomy recovers the equivariant curvature") {
    const EquivariantGeometry geom = weighted_plane(0.8);
    const CMatrix a = geom.group.algebra_element({0.3});
    const InfinitesimalReport rep = infinitesimal_holonomy(geom, {0.7, 0.4}, a, {1e-2, 5e-3}, 512);
    CHECK(rep.deviation < 1e-6);
    // target is the equivariant curvature with the loop generator convention
    CHECK(max_abs_diff(rep.target, equivariant_curvature(geom, -a, {0.7, 0.4})) == 0.0);
}

TEST_CASE("section components and reconstruction invert each other") {
    const EquivariantGeometry geom = weighted_plane(0.8);
    const Point x{0.6, -0.2};
    const int q = 3;
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<Grassmann> psi(2, grassmann_zero(q));
    psi[0] = grassmann_generator(q, 0);
    psi[1] = grassmann_generator(q, 1) + grassmann_generator(q, 2) * cplx(0.5);
    SectionPair section;
    section.v.assign(1, grassmann_zero(q));
    section.w.assign(1, grassmann_zero(q));
    for (mask_t m = 0; m < (mask_t{1} << q); ++m) {
        if (std::popcount(m) % 2 == 0)
            section.v[0][m] = cplx(d(rng), d(rng));
        else
            section.w[0][m] = cplx(d(rng), d(rng));
    }
    const SectionComponents comp = components(geom, x, psi, section);
    // s1 picks up the connection contraction on top of w
    CHECK(max_abs_diff(comp.s1[0], section.w[0]) > 1e-6);
    const SectionPair back = reconstruct(geom, x, psi, comp);
    CHECK(max_abs_diff(back.v[0], section.v[0]) == 0.0);
    CHECK(max_abs_diff(back.w[0], section.w[0]) < 1e-12);
}

TEST_CASE("commuting odd gauge components do not change the holonomy") {
    const EquivariantGeometry geom = weighted_plane(0.8);
    const int q = 2;
    TransportProblem problem = make_problem(
        geom, SuperPath::circle({0.0, 0.0}, 0.5, q), CMatrix(1, 1), geom.group.identity(), 1.0, 256);
    MatrixGrassmann alpha = matrix_grassmann(q, 1);
    alpha[mask_t{1}](0, 0) = cplx(0.0, 0.4);
    alpha[mask_t{2}](0, 0) = cplx(0.0, -0.7);
    const Exterior<CMatrix> plain = equivariant_holonomy(problem);
    const Exterior<CMatrix> reduced = holonomy_with_odd_component(problem, alpha);
    CHECK(max_abs_diff(plain, reduced) == 0.0);
}

TEST_CASE("non-commuting odd gauge components are rejected") {
    // fiber rank 2 with a 2x2 group algebra keeps the worldline data square
    EquivariantGeometry geom;
    geom.chart = Chart{2, {-3.0, -3.0}, {3.0, 3.0}, 64, "plane"};
    geom.group = make_group("so2");
    geom.action = rotation_action_base(geom.group, 1);
    attach_trivial_cocycle(geom.action, 2);
    geom.connection = make_zero_connection(2, 2);
    geom.fiber_rank = 2;
    const int q = 2;
    TransportProblem problem = make_problem(
        geom, SuperPath::circle({0.0, 0.0}, 0.5, q), CMatrix(2, 2), geom.group.identity(), 1.0, 64);
    MatrixGrassmann alpha = matrix_grassmann(q, 2);
    CMatrix m1(2, 2), m2(2, 2);
    m1(0, 1) = cplx(1.0);
    m2(1, 0) = cplx(1.0);
    alpha[mask_t{1}] = m1;
    alpha[mask_t{2}] = m2;
    CHECK_THROWS_AS(holonomy_with_odd_component(problem, alpha), DomainError);
}

TEST_CASE("moving equivariant loop closes under the twisted return map") {
    // path runs along a chord; h e^{circ a} rotates the endpoint back onto
    // the start, so the loop closes only through the group twist
    const EquivariantGeometry geom = monopole_north(1);
    const double phi = 0.7;
    const Point start{0.5, 0.0};
    const Point stop{0.5 * std::cos(phi), 0.5 * std::sin(phi)};
    const CMatrix a = geom.group.algebra_element({-0.35});
    const CMatrix h = geom.group.exponential(geom.group.algebra_element({-0.35}));
    TransportProblem problem =
        make_problem(geom, SuperPath::polyline({start, stop}, 0), a, h, 1.0, 256);
    const LoopReport rep = loop_validate(problem);
    INFO(rep.detail);
    CHECK(rep.pass);
    const Exterior<CMatrix> hol = equivariant_holonomy(problem);
    CHECK(hol[0](0, 0) != cplx(0.0));
    // the connection is imaginary and the cocycle has weight zero, so the
    // equivariant holonomy stays on the unit circle
    CHECK(std::abs(std::abs(hol[0](0, 0)) - 1.0) < 1e-6);
}
