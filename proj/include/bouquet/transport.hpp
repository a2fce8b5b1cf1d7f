#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bouquet/geometry.hpp"
#include "bouquet/grassmann.hpp"
#include "bouquet/super_connection.hpp"

namespace bouquet {

// Super path in a chart: even position x(t), odd tangent data psi(t) with
// values in a fixed Grassmann algebra.  On constant paths psi^j corresponds
// to the covector dx^j, which is what makes the transport-vs-exponential
// cross-check a literal identity of data structures.
struct SuperPath {
    std::function<Point(double)> position;
    std::function<Point(double)> velocity;                   // optional analytic d/dt
    std::function<std::vector<Grassmann>(double)> odd_data;  // optional; zero when absent
    bool constant = false;
    int dim = 0;
    int odd_generators = 0;

    Point position_at(double t) const {
        Point p = position(t);
        if (static_cast<int>(p.size()) != dim) throw DimensionError("SuperPath: position has wrong dimension");
        return p;
    }

    Point velocity_at(double t, double h = 1e-6) const {
        if (constant) return Point(dim, 0.0);
        if (velocity) {
            Point v = velocity(t);
            if (static_cast<int>(v.size()) != dim) throw DimensionError("SuperPath: velocity has wrong dimension");
            return v;
        }
        const Point fwd = position(t + h), bwd = position(t - h);
        Point v(dim);
        for (int i = 0; i < dim; ++i) v[i] = (fwd[i] - bwd[i]) / (2.0 * h);
        return v;
    }

    std::vector<Grassmann> odd_at(double t) const {
        if (!odd_data) return std::vector<Grassmann>(dim, grassmann_zero(odd_generators));
        std::vector<Grassmann> psi = odd_data(t);
        if (static_cast<int>(psi.size()) != dim) throw DimensionError("SuperPath: odd data has wrong dimension");
        for (const Grassmann& c : psi) {
            if (c.generators() != odd_generators) throw DimensionError("SuperPath: odd data generator count");
            if (!c.is_odd()) throw ParityError("SuperPath: odd data has even component");
        }
        return psi;
    }

    static SuperPath constant_at(Point x, std::vector<Grassmann> psi, int q) {
        SuperPath p;
        p.dim = static_cast<int>(x.size());
        p.odd_generators = q;
        if (psi.size() != x.size()) throw DimensionError("SuperPath: odd data size mismatch");
        p.position = [x](double) { return x; };
        p.velocity = [n = p.dim](double) { return Point(n, 0.0); };
        p.odd_data = [psi](double) { return psi; };
        p.constant = true;
        return p;
    }

    // Constant path whose odd data is the full set of generators: psi^j = theta_j.
    static SuperPath constant_with_generators(Point x) {
        const int n = static_cast<int>(x.size());
        std::vector<Grassmann> psi;
        psi.reserve(n);
        for (int j = 0; j < n; ++j) psi.push_back(grassmann_generator(n, j));
        return constant_at(std::move(x), std::move(psi), n);
    }

    static SuperPath circle(Point center, double radius, int q = 0) {
        if (center.size() != 2) throw DimensionError("SuperPath::circle: needs a 2-dimensional chart");
        SuperPath p;
        p.dim = 2;
        p.odd_generators = q;
        p.position = [center, radius](double t) {
            return Point{center[0] + radius * std::cos(2.0 * M_PI * t),
                         center[1] + radius * std::sin(2.0 * M_PI * t)};
        };
        p.velocity = [radius](double t) {
            return Point{-2.0 * M_PI * radius * std::sin(2.0 * M_PI * t),
                         2.0 * M_PI * radius * std::cos(2.0 * M_PI * t)};
        };
        return p;
    }

    // Piecewise-linear path through the given nodes, parametrized over [0,1].
    static SuperPath polyline(std::vector<Point> nodes, int q = 0) {
        if (nodes.size() < 2) throw DimensionError("SuperPath::polyline: needs at least two nodes");
        const int n = static_cast<int>(nodes[0].size());
        for (const Point& pt : nodes)
            if (static_cast<int>(pt.size()) != n) throw DimensionError("SuperPath::polyline: ragged nodes");
        SuperPath p;
        p.dim = n;
        p.odd_generators = q;
        const int segments = static_cast<int>(nodes.size()) - 1;
        p.position = [nodes, segments, n](double t) {
            const double s = std::clamp(t, 0.0, 1.0) * segments;
            const int k = std::min(static_cast<int>(s), segments - 1);
            const double f = s - k;
            Point out(n);
            for (int i = 0; i < n; ++i) out[i] = nodes[k][i] * (1.0 - f) + nodes[k + 1][i] * f;
            return out;
        };
        p.velocity = [nodes, segments, n](double t) {
            const double s = std::clamp(t, 0.0, 1.0) * segments;
            const int k = std::min(static_cast<int>(s), segments - 1);
            Point out(n);
            for (int i = 0; i < n; ++i) out[i] = (nodes[k + 1][i] - nodes[k][i]) * segments;
            return out;
        };
        return p;
    }
};

// Loop transport data: geometry, path, the constant worldline datum a, and
// the loop-closing group element h.
struct TransportProblem {
    EquivariantGeometry geom;
    SuperPath path;
    CMatrix a;
    CMatrix h;
    double circumference = 1.0;
    int steps = 512;
};

inline TransportProblem make_problem(EquivariantGeometry geom, SuperPath path, CMatrix a,
                                     CMatrix h, double circumference = 1.0, int steps = 512) {
    if (path.dim != geom.chart.dim) throw DimensionError("TransportProblem: path dimension mismatch");
    if (circumference <= 0.0) throw ValidationError("TransportProblem: circumference must be positive");
    return TransportProblem{std::move(geom), std::move(path), std::move(a), std::move(h),
                            circumference, steps};
}

inline Exterior<CMatrix> embed_matrix(int q, const CMatrix& m) {
    Exterior<CMatrix> r(q, CMatrix(m.rows(), m.cols()));
    r[0] = m;
    return r;
}

inline Grassmann entry_grassmann(const Exterior<CMatrix>& m, int r, int c) {
    Grassmann g = grassmann_zero(m.generators());
    for (mask_t k = 0; k < (mask_t{1} << m.generators()); ++k) g[k] = m[k](r, c);
    return g;
}

// Matrix-Grassmann element applied to a vector of Grassmann fiber entries.
inline std::vector<Grassmann> apply(const Exterior<CMatrix>& m, const std::vector<Grassmann>& v) {
    const int d = m.zero_prototype().rows();
    if (static_cast<int>(v.size()) != d) throw DimensionError("apply: fiber size mismatch");
    std::vector<Grassmann> out(d, grassmann_zero(m.generators()));
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) out[r] += entry_grassmann(m, r, c) * v[c];
    return out;
}

namespace detail {

// Instantaneous data of the lifted path y(t) = act(exp(-t a), x(t)).
struct LiftSample {
    Point y;
    Point ydot;
    std::vector<Grassmann> psi; // pushed forward along act(exp(-t a), .)
};

inline LiftSample lift_sample(const TransportProblem& problem, double t) {
    const Point x = problem.path.position_at(t);
    const std::vector<Grassmann> psi = problem.path.odd_at(t);
    const Point xdot = problem.path.velocity_at(t);
    LiftSample s;
    if (problem.a.is_zero()) {
        s.y = x;
        s.ydot = xdot;
        s.psi = psi;
        return s;
    }
    const CMatrix u = problem.geom.group.exponential(problem.a * cplx(-t));
    s.y = problem.geom.action.act(u, x);
    const Jacobian j = action_jacobian(problem.geom, u, x);
    const Point am = fundamental_vector_field(problem.geom, problem.a, s.y);
    const int n = problem.path.dim;
    s.ydot.assign(n, 0.0);
    s.psi.assign(n, grassmann_zero(problem.path.odd_generators));
    for (int i = 0; i < n; ++i) {
        s.ydot[i] = -am[i];
        for (int k = 0; k < n; ++k) {
            s.ydot[i] += j[i][k] * xdot[k];
            s.psi[i] += psi[k] * cplx(j[i][k]);
        }
    }
    return s;
}

// Right-hand-side generator: A(ydot) + sum_{i<j} F_ij Psi^i Psi^j, a
// Grassmann-even matrix; parallel sections solve dT/dt = -G(t) T.
inline Exterior<CMatrix> transport_generator(const TransportProblem& problem, double t) {
    const LiftSample s = lift_sample(problem, t);
    if (!problem.geom.chart.contains(s.y)) {
        std::ostringstream os;
        os << "integrate_parallel: lifted path leaves chart '" << problem.geom.chart.label
           << "' at t = " << t;
        throw DomainError(os.str());
    }
    const int q = problem.path.odd_generators;
    const int d = problem.geom.fiber_rank;
    Exterior<CMatrix> g(q, CMatrix(d, d));
    const FormValue a_form = problem.geom.connection.local_form(s.y);
    g[0] = contract(a_form, to_complex(s.ydot))[mask_t{0}];
    const FormValue f = curvature(problem.geom, s.y);
    const int n = problem.path.dim;
    for (int i = 0; i < n; ++i) {
        for (int j2 = i + 1; j2 < n; ++j2) {
            const CMatrix& fij = f[(mask_t{1} << i) | (mask_t{1} << j2)];
            if (fij.is_zero()) continue;
            const Grassmann quad = s.psi[i] * s.psi[j2];
            for (mask_t m = 0; m < (mask_t{1} << q); ++m)
                if (quad[m] != cplx(0.0)) g[m] += fij * quad[m];
        }
    }
    return g;
}

} // namespace detail

// Fundamental solution of the component transport equation over [t0, t1] by
// the classical 4th-order one-step method in the Grassmann coefficient ring.
inline Exterior<CMatrix> integrate_parallel_window(const TransportProblem& problem, double t0,
                                                   double t1, int steps) {
    if (steps < 1) throw ValidationError("integrate_parallel: steps must be at least 1");
    const int q = problem.path.odd_generators;
    const int d = problem.geom.fiber_rank;
    Exterior<CMatrix> t_sol(q, CMatrix(d, d));
    t_sol[0] = CMatrix::identity(d);

    const bool frozen = problem.path.constant && problem.a.is_zero();
    Exterior<CMatrix> frozen_g(q, CMatrix(d, d));
    if (frozen) frozen_g = detail::transport_generator(problem, t0);
    auto rhs = [&](double t, const Exterior<CMatrix>& state) {
        return -((frozen ? frozen_g : detail::transport_generator(problem, t)) * state);
    };

    const double h = (t1 - t0) / steps;
    for (int k = 0; k < steps; ++k) {
        const double t = t0 + k * h;
        const Exterior<CMatrix> k1 = rhs(t, t_sol);
        const Exterior<CMatrix> k2 = rhs(t + h / 2.0, t_sol + k1 * cplx(h / 2.0));
        const Exterior<CMatrix> k3 = rhs(t + h / 2.0, t_sol + k2 * cplx(h / 2.0));
        const Exterior<CMatrix> k4 = rhs(t + h, t_sol + k3 * cplx(h));
        t_sol += (k1 + k2 * cplx(2.0) + k3 * cplx(2.0) + k4) * cplx(h / 6.0);
    }
    return t_sol;
}

inline Exterior<CMatrix> integrate_parallel(const TransportProblem& problem, int steps_override = -1) {
    return integrate_parallel_window(problem, 0.0, problem.circumference,
                                     steps_override > 0 ? steps_override : problem.steps);
}

// Difference between the full-resolution and half-resolution solves; the
// runner flags step counts whose residual exceeds 1e-6.
inline double refinement_residual(const TransportProblem& problem) {
    const Exterior<CMatrix> full = integrate_parallel(problem);
    const Exterior<CMatrix> half = integrate_parallel(problem, std::max(1, problem.steps / 2));
    return max_abs_diff(full, half);
}

struct LoopReport {
    bool pass = false;
    double ad_residual = 0.0;
    double point_residual = 0.0; // fixed-point (constant) or closure (moving) residual
    std::string detail;
};

// Checks the loop data: Ad_h a = a; constant paths sit at h-fixed points;
// moving paths close up through h e^{circumference a}.
inline LoopReport loop_validate(const TransportProblem& problem) {
    LoopReport rep;
    const auto& geom = problem.geom;
    if (!problem.a.is_zero())
        rep.ad_residual = max_abs_diff(geom.group.adjoint(problem.h, problem.a), problem.a);
    double point_tol;
    if (problem.path.constant) {
        point_tol = 1e-8;
        const Point x = problem.path.position_at(0.0);
        const Point moved = geom.action.act(problem.h, x);
        for (size_t i = 0; i < x.size(); ++i)
            rep.point_residual = std::max(rep.point_residual, std::abs(moved[i] - x[i]));
    } else {
        point_tol = 1e-6;
        const Point x0 = problem.path.position_at(0.0);
        const Point x1 = problem.path.position_at(problem.circumference);
        const CMatrix g = problem.h * geom.group.exponential(problem.a * cplx(problem.circumference));
        const Point moved = geom.action.act(g, x1);
        for (size_t i = 0; i < x0.size(); ++i)
            rep.point_residual = std::max(rep.point_residual, std::abs(moved[i] - x0[i]));
    }
    rep.pass = rep.ad_residual < 1e-8 && rep.point_residual < point_tol;
    std::ostringstream os;
    os << (rep.pass ? "pass" : "fail") << ": Ad residual " << rep.ad_residual
       << (problem.path.constant ? ", fixed-point residual " : ", closure residual ")
       << rep.point_residual;
    rep.detail = os.str();
    return rep;
}

// Holonomy of the equivariant loop: transport along the lifted path, then
// the fiber action of h e^{circumference a} at the lifted endpoint.
inline Exterior<CMatrix> equivariant_holonomy(const TransportProblem& problem) {
    const LoopReport rep = loop_validate(problem);
    if (!rep.pass) throw ValidationError("equivariant_holonomy: " + rep.detail);
    const Exterior<CMatrix> t_sol = integrate_parallel(problem);
    const auto& geom = problem.geom;
    const CMatrix g_end = problem.h * geom.group.exponential(problem.a * cplx(problem.circumference));
    Point y_end = problem.path.position_at(problem.circumference);
    if (!problem.a.is_zero())
        y_end = geom.action.act(geom.group.exponential(problem.a * cplx(-problem.circumference)), y_end);
    const CMatrix c = geom.action.cocycle(g_end, y_end);
    return embed_matrix(problem.path.odd_generators, c) * t_sol;
}

// psi-monomial to covector-monomial identification: each even monomial of
// degree 2k carries the sign (-1)^k.  Sends the integrated holonomy of a
// constant super loop to the closed-form algebra exponential.
inline FormValue holonomy_form(const Exterior<CMatrix>& t_sol) {
    if (!t_sol.is_even()) throw ParityError("holonomy_form: holonomy has odd component");
    const int n = t_sol.generators();
    if (n > form_max_covectors) throw DimensionError("holonomy_form: too many generators for covectors");
    FormValue out(n, t_sol.zero_prototype());
    for (mask_t m = 0; m < (mask_t{1} << n); ++m) {
        const int deg = std::popcount(m);
        if (deg & 1) continue;
        out[m] = ((deg / 2) & 1) ? -t_sol[m] : t_sol[m];
    }
    return out;
}

// Closed-form equivariant super holonomy on a constant loop at a fixed
// point of h: c(h, x) exp(F + cocycle rate + iota_{a_M} A).
inline FormValue super_holonomy_constant(const EquivariantGeometry& geom, const Point& x,
                                         const CMatrix& a, const CMatrix& h) {
    if (!a.is_zero()) {
        const double ad = max_abs_diff(geom.group.adjoint(h, a), a);
        if (ad > 1e-8) throw ValidationError("super_holonomy_constant: a is not Ad_h-invariant");
    }
    const Point moved = geom.action.act(h, x);
    double fixed_res = 0.0;
    for (size_t i = 0; i < x.size(); ++i) fixed_res = std::max(fixed_res, std::abs(moved[i] - x[i]));
    if (fixed_res > 1e-8) throw ValidationError("super_holonomy_constant: base point is not fixed by h");
    const FormValue gen = loop_generator(geom, a, x);
    return form_from_matrix(geom.chart.dim, geom.action.cocycle(h, x)) * exp_even(gen);
}

struct InfinitesimalReport {
    std::vector<double> eps;
    FormValue limit;
    FormValue target;
    double deviation = 0.0;
};

// (Hol(eps) - id)/eps extrapolated to eps -> 0 over the last two sample
// sizes, reported against the equivariant curvature at the sign convention
// a |-> -a of the geometry module.
inline InfinitesimalReport infinitesimal_holonomy(const EquivariantGeometry& geom, const Point& x,
                                                  const CMatrix& a, const CMatrix& h,
                                                  std::vector<double> eps_list, int steps = 512) {
    if (eps_list.empty()) throw ValidationError("infinitesimal_holonomy: empty eps list");
    const int n = geom.chart.dim;
    std::vector<FormValue> slopes;
    for (double eps : eps_list) {
        TransportProblem problem = make_problem(
            geom, SuperPath::constant_with_generators(x), a, h, eps, steps);
        const FormValue hol = holonomy_form(equivariant_holonomy(problem));
        FormValue diff = hol - form_identity(n, geom.fiber_rank);
        slopes.push_back(diff * cplx(1.0 / eps));
    }
    InfinitesimalReport rep;
    rep.eps = std::move(eps_list);
    if (slopes.size() == 1) {
        rep.limit = slopes[0];
    } else {
        const size_t k = slopes.size();
        const double e1 = rep.eps[k - 2], e2 = rep.eps[k - 1];
        rep.limit = (slopes[k - 1] * cplx(e1) - slopes[k - 2] * cplx(e2)) * cplx(1.0 / (e1 - e2));
    }
    rep.target = equivariant_curvature(geom, -a, x);
    rep.deviation = max_abs_diff(rep.limit, rep.target);
    return rep;
}

inline InfinitesimalReport infinitesimal_holonomy(const EquivariantGeometry& geom, const Point& x,
                                                  const CMatrix& a, std::vector<double> eps_list,
                                                  int steps = 512) {
    return infinitesimal_holonomy(geom, x, a, geom.group.identity(), std::move(eps_list), steps);
}

// Section along a constant super path as s = v + theta w, and its
// component fields (s0, s1) with s1 = w + A_i Psi^i v.
struct SectionPair {
    std::vector<Grassmann> v, w;
};
struct SectionComponents {
    std::vector<Grassmann> s0, s1;
};

namespace detail {
inline Exterior<CMatrix> odd_connection_term(const EquivariantGeometry& geom, const Point& x,
                                             const std::vector<Grassmann>& psi) {
    const int q = psi.empty() ? 0 : psi[0].generators();
    const int d = geom.fiber_rank;
    Exterior<CMatrix> acc(q, CMatrix(d, d));
    const FormValue a_form = geom.connection.local_form(x);
    for (size_t i = 0; i < psi.size(); ++i) {
        const CMatrix& ai = a_form[mask_t{1} << i];
        if (ai.is_zero()) continue;
        for (mask_t m = 0; m < (mask_t{1} << q); ++m)
            if (psi[i][m] != cplx(0.0)) acc[m] += ai * psi[i][m];
    }
    return acc;
}
} // namespace detail

inline SectionComponents components(const EquivariantGeometry& geom, const Point& x,
                                    const std::vector<Grassmann>& psi, const SectionPair& s) {
    if (s.v.size() != static_cast<size_t>(geom.fiber_rank) || s.w.size() != s.v.size())
        throw DimensionError("components: fiber size mismatch");
    for (const Grassmann& c : s.v)
        if (!c.is_even()) throw ParityError("components: v must be even");
    for (const Grassmann& c : s.w)
        if (!c.is_odd()) throw ParityError("components: w must be odd");
    const Exterior<CMatrix> conn = detail::odd_connection_term(geom, x, psi);
    SectionComponents out;
    out.s0 = s.v;
    out.s1 = apply(conn, s.v);
    for (size_t i = 0; i < out.s1.size(); ++i) out.s1[i] += s.w[i];
    return out;
}

inline SectionPair reconstruct(const EquivariantGeometry& geom, const Point& x,
                               const std::vector<Grassmann>& psi, const SectionComponents& c) {
    const Exterior<CMatrix> conn = detail::odd_connection_term(geom, x, psi);
    SectionPair out;
    out.v = c.s0;
    const std::vector<Grassmann> correction = apply(conn, c.s0);
    out.w = c.s1;
    for (size_t i = 0; i < out.w.size(); ++i) out.w[i] -= correction[i];
    return out;
}

// Holonomy of the problem with the odd worldline component alpha present:
// the reduction gauge e^{-theta alpha} removes alpha exactly; the reduced
// even datum must stay the plain matrix a (true whenever the alpha entries
// commute), which is the regime the constant-datum integrator covers.
inline Exterior<CMatrix> holonomy_with_odd_component(const TransportProblem& problem,
                                                     const MatrixGrassmann& alpha) {
    const MatrixGrassmann a_emb = embed_matrix(alpha.generators(), problem.a);
    const SuperConnectionForm reduced =
        gauge_transform(SuperConnectionForm(alpha, a_emb), gauge_reduction(alpha));
    if (!reduced.alpha.is_zero())
        throw ConsistencyError("holonomy_with_odd_component: reduction left an odd component");
    if (max_abs_diff(reduced.a, a_emb) != 0.0)
        throw DomainError(
            "holonomy_with_odd_component: reduction produced a nilpotent correction to the "
            "constant datum; only commuting odd components are integrable here");
    return equivariant_holonomy(problem);
}

} // namespace bouquet
