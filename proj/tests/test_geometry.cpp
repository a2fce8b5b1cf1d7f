#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bouquet/geometry.hpp"
#include "bouquet/registry.hpp"

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

} // namespace

TEST_CASE("interior grid stays inside the chart and has the requested size") {
    const Chart chart{2, {-1.0, -1.0}, {1.0, 1.0}, 64, "box"};
    const std::vector<Point> pts = interior_grid(chart, 5);
    REQUIRE(pts.size() == 25);
    for (const Point& p : pts) {
        CHECK(chart.contains(p, 0.05));
        CHECK(p.size() == 2);
    }
    const Chart point_chart{0, {}, {}, 64, "pt"};
    CHECK(interior_grid(point_chart, 5).size() == 1);
}

TEST_CASE("numerical exterior derivative reproduces the analytic curvature") {
    const EquivariantGeometry geom = monopole_north(2);
    const Point p{0.7, -0.4};
    const FormValue da = exterior_derivative<CMatrix>(
        geom.connection.local_form, geom.chart, p, 1e-4, true);
    const FormValue f = geom.connection.curvature_analytic(p);
    CHECK(max_abs_diff(da, f) < 1e-9);
    CHECK(max_abs_diff(curvature(geom, p), f) < 1e-12);
}

TEST_CASE("fundamental vector field of the rotation action") {
    const EquivariantGeometry geom = monopole_north(1);
    const CMatrix x = geom.group.algebra_element({1.0});
    const Point p{0.8, -0.5};
    const Point v = fundamental_vector_field(geom, x, p);
    // d/dt R(t)p at t=0 is (-y, x)
    CHECK(std::abs(v[0] - 0.5) < 1e-9);
    CHECK(std::abs(v[1] - 0.8) < 1e-9);
}

TEST_CASE("moment endomorphism of the monopole matches the closed form") {
    const EquivariantGeometry geom = monopole_north(2);
    const CMatrix x = geom.group.algebra_element({0.7});
    const Point p{1.1, 0.3};
    const double r2 = p[0] * p[0] + p[1] * p[1];
    // weight cocycle [0] contributes nothing; moment = -A(X_M)
    const cplx f(0.0, -2.0 * 2 / (2.0 * (1.0 + r2)));
    const cplx expected = -f * 0.7 * r2;
    const CMatrix mu = moment(geom, x, p);
    CHECK(std::abs(mu(0, 0) - expected) < 1e-9);
    const FormValue fx = equivariant_curvature(geom, x, p);
    CHECK(std::abs(fx[mask_t{0}](0, 0) - expected) < 1e-9);
    CHECK(max_abs_diff(fx, curvature(geom, p) + form_from_matrix(2, mu)) < 1e-12);
}

TEST_CASE("action jacobian of a rotation is the rotation matrix") {
    const EquivariantGeometry geom = monopole_north(1);
    const CMatrix g = geom.group.exponential(geom.group.algebra_element({0.6}));
    const Jacobian j = action_jacobian(geom, g, {0.2, 0.4});
    CHECK(std::abs(j[0][0] - std::cos(0.6)) < 1e-12);
    CHECK(std::abs(j[0][1] + std::sin(0.6)) < 1e-12);
    CHECK(std::abs(j[1][0] - std::sin(0.6)) < 1e-12);
    CHECK(std::abs(j[1][1] - std::cos(0.6)) < 1e-12);
}

TEST_CASE("connection invariance holds for the monopole and fails for a skewed action") {
    EquivariantGeometry geom = monopole_north(1);
    const std::vector<Point> pts = interior_grid(geom.chart, 4, 0.1);
    const CMatrix g = geom.group.exponential(geom.group.algebra_element({0.9}));
    CHECK(invariance_residual(geom, g, pts) < 1e-8);

    // a connection with a preferred axis is not rotation invariant
    EquivariantGeometry skewed = monopole_north(1);
    skewed.connection.local_form = [](const Point& p) {
        FormValue a(2, CMatrix(1, 1));
        a[mask_t{2}](0, 0) = cplx(0.0, 1.0) * (p[0] * p[0]);
        return a;
    };
    skewed.connection.curvature_analytic = nullptr;
    CHECK(invariance_residual(skewed, g, pts) > 1e-3);
}

TEST_CASE("fixed stratum declaration validates the fixed-point property") {
    const EquivariantGeometry geom = monopole_north(1);
    const CMatrix g = geom.group.exponential(geom.group.algebra_element({0.9}));
    Chart sub;
    sub.dim = 0;
    sub.label = "pole";
    const FixedStratum pole = declare_fixed_stratum(
        geom, g, sub, [](const Point&) { return Point{0.0, 0.0}; }, nullptr, "pole");
    CHECK(pole.sub_chart.dim == 0);

    CHECK_THROWS_AS(declare_fixed_stratum(
                        geom, g, sub, [](const Point&) { return Point{0.5, 0.0}; }, nullptr, "off"),
                    ValidationError);
    CHECK_THROWS_AS(declare_fixed_stratum(
                        geom, g, sub, [](const Point&) { return Point{50.0, 0.0}; }, nullptr, "out"),
                    ValidationError);
}

TEST_CASE("stratum jacobian of an embedded point is empty") {
    const EquivariantGeometry geom = monopole_north(1);
    const CMatrix g = geom.group.identity();
    Chart sub;
    sub.dim = 0;
    sub.label = "pole";
    const FixedStratum pole = declare_fixed_stratum(
        geom, g, sub, [](const Point&) { return Point{0.0, 0.0}; }, nullptr, "pole");
    const Jacobian j = stratum_jacobian(pole, {});
    CHECK(j.size() == 2);
    CHECK(j[0].empty());
}

TEST_CASE("centralizer of a diagonal torus element is the full diagonal algebra") {
    const GroupModel su2 = make_group("su2-diagonal");
    const CMatrix g = su2.exponential(su2.algebra_element({0.7}));
    CHECK(centralizer_basis(su2, g).size() == 1);
    CHECK(centralizer_basis(su2, weyl_swap()).empty());
}

TEST_CASE("group registry exposes the documented models") {
    for (const char* name : {"u1", "so2", "t2", "su2-diagonal"}) {
        const GroupModel g = make_group(name);
        CHECK(!g.lie_algebra_basis.empty());
        const CMatrix e = g.identity();
        CHECK(max_abs_diff(e * e, e) == 0.0);
    }
    CHECK_THROWS_AS(make_group("nope"), ValidationError);

    // t2 has a two-dimensional algebra; adjoint action is trivial
    const GroupModel t2 = make_group("t2");
    REQUIRE(t2.lie_algebra_basis.size() == 2);
    const CMatrix x = t2.algebra_element({0.3, -0.8});
    const CMatrix g = t2.exponential(x);
    CHECK(max_abs_diff(t2.adjoint(g, x), x) < 1e-14);
}

TEST_CASE("chart containment rejects exterior points with margins") {
    const Chart chart{2, {-1.0, -1.0}, {1.0, 1.0}, 16, "box"};
    CHECK(chart.contains({0.0, 0.0}));
    CHECK(!chart.contains({1.5, 0.0}));
    CHECK(!chart.contains({0.999, 0.0}, 0.01));
    CHECK_THROWS_AS(chart.require_interior({2.0, 0.0}, 0.0, "test"), DomainError);
}
