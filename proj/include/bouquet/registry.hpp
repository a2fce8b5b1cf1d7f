#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "bouquet/geometry.hpp"

namespace bouquet {

// Built-in matrix groups.  Algebra coefficients are real; the chosen bases
// make the rotation angle of an element the natural coordinate.
inline GroupModel make_group(const std::string& name) {
    GroupModel g;
    g.name = name;
    if (name == "u1") {
        g.matrix_size = 1;
        CMatrix b(1, 1);
        b(0, 0) = cplx(0.0, 1.0);
        g.lie_algebra_basis = {b};
    } else if (name == "so2") {
        g.matrix_size = 2;
        CMatrix b(2, 2);
        b(0, 1) = cplx(-1.0);
        b(1, 0) = cplx(1.0);
        g.lie_algebra_basis = {b};
    } else if (name == "t2") {
        g.matrix_size = 2;
        CMatrix b0(2, 2), b1(2, 2);
        b0(0, 0) = cplx(0.0, 1.0);
        b1(1, 1) = cplx(0.0, 1.0);
        g.lie_algebra_basis = {b0, b1};
    } else if (name == "su2-diagonal") {
        g.matrix_size = 2;
        CMatrix b(2, 2);
        b(0, 0) = cplx(0.0, 1.0);
        b(1, 1) = cplx(0.0, -1.0);
        g.lie_algebra_basis = {b};
    } else {
        throw ValidationError("make_group: unknown group '" + name + "'");
    }
    return g;
}

// Weyl-type signed permutation normalizing the diagonal torus of SU(2).
inline CMatrix weyl_swap() {
    CMatrix w(2, 2);
    w(0, 1) = cplx(1.0);
    w(1, 0) = cplx(-1.0);
    return w;
}

// Rotation angles of a group element, one per torus factor.
inline std::vector<double> group_angles(const GroupModel& group, const CMatrix& g) {
    if (group.name == "u1") return {std::arg(g(0, 0))};
    if (group.name == "so2") return {std::atan2(g(1, 0).real(), g(0, 0).real())};
    if (group.name == "t2") return {std::arg(g(0, 0)), std::arg(g(1, 1))};
    if (group.name == "su2-diagonal") return {std::arg(g(0, 0))};
    throw ValidationError("group_angles: no angle chart for group '" + group.name + "'");
}

// Angle rates of an algebra element, matching group_angles coordinates.
inline std::vector<double> algebra_angle_rates(const GroupModel& group, const CMatrix& x) {
    if (group.name == "u1") return {x(0, 0).imag()};
    if (group.name == "so2") return {x(1, 0).real()};
    if (group.name == "t2") return {x(0, 0).imag(), x(1, 1).imag()};
    if (group.name == "su2-diagonal") return {x(0, 0).imag()};
    throw ValidationError("algebra_angle_rates: no angle chart for group '" + group.name + "'");
}

namespace detail {
inline double single_angle(const GroupModel& group, const CMatrix& g) {
    const std::vector<double> a = group_angles(group, g);
    if (a.size() != 1)
        throw ValidationError("expected a group with a single rotation angle, got '" + group.name + "'");
    return a[0];
}
inline double single_rate(const GroupModel& group, const CMatrix& x) {
    const std::vector<double> a = algebra_angle_rates(group, x);
    if (a.size() != 1)
        throw ValidationError("expected a group with a single rotation angle, got '" + group.name + "'");
    return a[0];
}
} // namespace detail

// Action bases (chart part only; a cocycle must be attached afterwards).
inline ActionModel trivial_action_base() {
    ActionModel a;
    a.act = [](const CMatrix&, const Point& p) { return p; };
    a.jacobian = [](const CMatrix&, const Point& p) {
        const int n = static_cast<int>(p.size());
        Jacobian j(n, std::vector<double>(n, 0.0));
        for (int i = 0; i < n; ++i) j[i][i] = 1.0;
        return j;
    };
    return a;
}

// Weight-w rotation of a 2-dimensional chart by the group's angle.
inline ActionModel rotation_action_base(const GroupModel& group, int weight) {
    ActionModel a;
    a.act = [group, weight](const CMatrix& g, const Point& p) {
        if (p.size() != 2) throw DimensionError("rotation action: chart must be 2-dimensional");
        const double phi = weight * detail::single_angle(group, g);
        const double c = std::cos(phi), s = std::sin(phi);
        return Point{c * p[0] - s * p[1], s * p[0] + c * p[1]};
    };
    a.jacobian = [group, weight](const CMatrix& g, const Point&) {
        const double phi = weight * detail::single_angle(group, g);
        const double c = std::cos(phi), s = std::sin(phi);
        return Jacobian{{c, -s}, {s, c}};
    };
    return a;
}

// Cocycles.
inline void attach_trivial_cocycle(ActionModel& a, int fiber_rank) {
    a.cocycle = [fiber_rank](const CMatrix&, const Point&) { return CMatrix::identity(fiber_rank); };
    a.cocycle_rate = [fiber_rank](const CMatrix&, const Point&) { return CMatrix(fiber_rank, fiber_rank); };
}

// Diagonal character cocycle diag(e^{i n_k phi(g)}); weights must be
// integers so the cocycle is single-valued on the group.
inline void attach_weight_cocycle(ActionModel& a, const GroupModel& group, std::vector<int> weights) {
    if (weights.empty()) throw ValidationError("weight cocycle: needs at least one weight");
    const int d = static_cast<int>(weights.size());
    a.cocycle = [group, weights, d](const CMatrix& g, const Point&) {
        const double phi = detail::single_angle(group, g);
        CMatrix c(d, d);
        for (int k = 0; k < d; ++k) c(k, k) = std::exp(cplx(0.0, weights[k] * phi));
        return c;
    };
    a.cocycle_rate = [group, weights, d](const CMatrix& x, const Point&) {
        const double xi = detail::single_rate(group, x);
        CMatrix r(d, d);
        for (int k = 0; k < d; ++k) r(k, k) = cplx(0.0, weights[k] * xi);
        return r;
    };
}

// The group acting on its own matrix space: c(g, p) = g.
inline void attach_defining_cocycle(ActionModel& a, const GroupModel& group) {
    (void)group;
    a.cocycle = [](const CMatrix& g, const Point&) { return g; };
    a.cocycle_rate = [](const CMatrix& x, const Point&) { return x; };
}

// Connections.
inline ConnectionModel make_zero_connection(int dim, int fiber_rank) {
    ConnectionModel c;
    c.local_form = [dim, fiber_rank](const Point&) { return form_zero(dim, fiber_rank); };
    c.curvature_analytic = c.local_form;
    return c;
}

// Rotation-invariant charge-n line connection on the stereographic chart:
// A = cc/(2(1+r^2)) (x dy - y dx), F = cc/(1+r^2)^2 dx dy, with
// cc = -2 i n on the chart containing the source and +2 i n on the other.
inline ConnectionModel make_monopole_connection(int charge, bool flipped) {
    const cplx cc(0.0, flipped ? 2.0 * charge : -2.0 * charge);
    ConnectionModel c;
    c.local_form = [cc](const Point& p) {
        if (p.size() != 2) throw DimensionError("monopole connection: chart must be 2-dimensional");
        const double r2 = p[0] * p[0] + p[1] * p[1];
        FormValue a = form_zero(2, 1);
        const cplx f = cc / (2.0 * (1.0 + r2));
        a[mask_t{1} << 1](0, 0) = f * p[0];  // dy coefficient
        a[mask_t{1} << 0](0, 0) = -f * p[1]; // dx coefficient
        return a;
    };
    c.curvature_analytic = [cc](const Point& p) {
        const double r2 = p[0] * p[0] + p[1] * p[1];
        FormValue f = form_zero(2, 1);
        f[mask_t{3}](0, 0) = cc / ((1.0 + r2) * (1.0 + r2));
        return f;
    };
    return c;
}

// Constant-curvature line connection A = (i k / 2)(x dy - y dx) on the
// plane, F = i k dx dy.
inline ConnectionModel make_plane_connection(double k) {
    const cplx ik(0.0, k);
    ConnectionModel c;
    c.local_form = [ik](const Point& p) {
        if (p.size() != 2) throw DimensionError("plane connection: chart must be 2-dimensional");
        FormValue a = form_zero(2, 1);
        a[mask_t{1} << 1](0, 0) = ik / 2.0 * p[0];
        a[mask_t{1} << 0](0, 0) = -ik / 2.0 * p[1];
        return a;
    };
    c.curvature_analytic = [ik](const Point&) {
        FormValue f = form_zero(2, 1);
        f[mask_t{3}](0, 0) = ik;
        return f;
    };
    return c;
}

} // namespace bouquet
