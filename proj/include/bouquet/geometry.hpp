#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bouquet/forms.hpp"

namespace bouquet {

using Point = std::vector<double>;
using Jacobian = std::vector<std::vector<double>>; // [row][col] = d out_row / d in_col

// Axis-aligned chart box.  Dimension 0 models a point (the empty tuple is
// its only element).
struct Chart {
    int dim = 0;
    Point lo, hi;
    int resolution = 64; // default samples per axis for sweeps
    std::string label;

    void validate() const {
        if (dim < 0 || dim > form_max_covectors) throw DimensionError("Chart: dimension out of range");
        if (static_cast<int>(lo.size()) != dim || static_cast<int>(hi.size()) != dim)
            throw DimensionError("Chart: box arrays do not match dimension");
        for (int i = 0; i < dim; ++i)
            if (!(hi[i] > lo[i])) throw ValidationError("Chart: non-positive extent on axis " + std::to_string(i));
        if (dim > 0 && resolution < 2) throw ValidationError("Chart: resolution must be at least 2");
    }

    bool contains(const Point& p, double margin = 0.0) const {
        if (static_cast<int>(p.size()) != dim) return false;
        for (int i = 0; i < dim; ++i)
            if (p[i] < lo[i] + margin || p[i] > hi[i] - margin) return false;
        return true;
    }

    void require_interior(const Point& p, double margin, const char* who) const {
        if (!contains(p, margin))
            throw DomainError(std::string(who) + ": point leaves chart '" + label + "' interior");
    }
};

// Interior sample grid: per_axis points per axis, shrunk toward the middle
// of the box so finite differences never poke outside.
inline std::vector<Point> interior_grid(const Chart& chart, int per_axis, double margin_fraction = 0.05) {
    std::vector<Point> pts;
    if (chart.dim == 0) {
        pts.push_back({});
        return pts;
    }
    per_axis = std::max(per_axis, 2);
    std::vector<int> idx(chart.dim, 0);
    const size_t total = [&] {
        size_t t = 1;
        for (int i = 0; i < chart.dim; ++i) t *= static_cast<size_t>(per_axis);
        return t;
    }();
    pts.reserve(total);
    for (size_t flat = 0; flat < total; ++flat) {
        size_t rest = flat;
        Point p(chart.dim);
        for (int i = 0; i < chart.dim; ++i) {
            const int k = static_cast<int>(rest % per_axis);
            rest /= per_axis;
            const double span = chart.hi[i] - chart.lo[i];
            const double a = chart.lo[i] + margin_fraction * span;
            const double b = chart.hi[i] - margin_fraction * span;
            p[i] = a + (b - a) * (per_axis == 1 ? 0.5 : double(k) / (per_axis - 1));
        }
        pts.push_back(std::move(p));
    }
    return pts;
}

// Matrix group with a chosen Lie algebra basis.  Group elements are plain
// matrices; algebra elements are real combinations of the basis.
struct GroupModel {
    std::string name;
    int matrix_size = 1;
    std::vector<CMatrix> lie_algebra_basis;
    std::function<CMatrix(const CMatrix&)> exp_fn; // defaults to matrix_exp

    CMatrix identity() const { return CMatrix::identity(matrix_size); }

    CMatrix algebra_element(const std::vector<double>& coeffs) const {
        if (coeffs.size() != lie_algebra_basis.size())
            throw DimensionError("GroupModel: coefficient count does not match basis");
        CMatrix x(matrix_size, matrix_size);
        for (size_t i = 0; i < coeffs.size(); ++i) x += lie_algebra_basis[i] * cplx(coeffs[i]);
        return x;
    }

    CMatrix exponential(const CMatrix& x) const {
        if (x.rows() != matrix_size || x.cols() != matrix_size)
            throw DimensionError("GroupModel: algebra element has wrong shape");
        return exp_fn ? exp_fn(x) : matrix_exp(x);
    }

    CMatrix adjoint(const CMatrix& g, const CMatrix& x) const { return g * x * g.inverse(); }
};

// Chart action of the group together with the fiber cocycle c(g, p).  The
// optional analytic callbacks (rate of the cocycle in the group direction,
// Jacobian of act(g, .)) tighten derivative-based computations; finite
// differences cover their absence.
struct ActionModel {
    std::function<Point(const CMatrix&, const Point&)> act;
    std::function<CMatrix(const CMatrix&, const Point&)> cocycle;
    std::function<CMatrix(const CMatrix&, const Point&)> cocycle_rate; // d/dt|0 c(e^{tX}, p), argument X
    std::function<Jacobian(const CMatrix&, const Point&)> jacobian;    // d act(g,.)/dp
};

struct ConnectionModel {
    std::function<FormValue(const Point&)> local_form;         // pure degree 1
    std::function<FormValue(const Point&)> curvature_analytic; // optional, pure degree 2
};

struct EquivariantGeometry {
    Chart chart;
    GroupModel group;
    ActionModel action;
    ConnectionModel connection;
    int fiber_rank = 1;
};

// Fixed-point stratum of a group element, modeled by its own chart and an
// embedding into the ambient chart.
struct FixedStratum {
    CMatrix group_element;
    Chart sub_chart;
    std::function<Point(const Point&)> embedding;
    std::function<Jacobian(const Point&)> embedding_jacobian; // optional analytic
    std::string label;
};

// d(field) at p by central differences coefficientwise: d omega =
// sum_i dx^i ^ d_i omega.  Richardson combines steps h and h/2.
template <class Coeff>
Exterior<Coeff> exterior_derivative(const std::function<Exterior<Coeff>(const Point&)>& field,
                                    const Chart& chart, const Point& p, double h = 1e-4,
                                    bool richardson = false) {
    chart.require_interior(p, h, "exterior_derivative");
    auto single = [&](double step) {
        Exterior<Coeff> probe = field(p);
        Exterior<Coeff> result(probe.generators(), probe.zero_prototype());
        for (int i = 0; i < chart.dim; ++i) {
            Point pp = p, pm = p;
            pp[i] += step;
            pm[i] -= step;
            Exterior<Coeff> di = (field(pp) - field(pm)) * cplx(1.0 / (2.0 * step));
            Exterior<Coeff> dxi(probe.generators(), probe.zero_prototype());
            dxi[mask_t{1} << i] = coeff_one(probe.zero_prototype());
            result += dxi * di;
        }
        return result;
    };
    if (!richardson) return single(h);
    const Exterior<Coeff> coarse = single(h);
    const Exterior<Coeff> fine = single(h / 2.0);
    return (fine * cplx(4.0) - coarse) * cplx(1.0 / 3.0);
}

// F = dA + A ^ A, or the supplied analytic curvature.
inline FormValue curvature(const EquivariantGeometry& geom, const Point& p, double h = 1e-4) {
    if (geom.connection.curvature_analytic) return geom.connection.curvature_analytic(p);
    std::function<FormValue(const Point&)> field = geom.connection.local_form;
    const FormValue a = geom.connection.local_form(p);
    return exterior_derivative(field, geom.chart, p, h) + a * a;
}

// X_M(p) = d/dt|0 act(exp(tX), p).
inline Point fundamental_vector_field(const EquivariantGeometry& geom, const CMatrix& X,
                                      const Point& p, double h = 1e-5, bool richardson = false) {
    auto single = [&](double step) {
        const Point fwd = geom.action.act(geom.group.exponential(X * cplx(step)), p);
        const Point bwd = geom.action.act(geom.group.exponential(X * cplx(-step)), p);
        if (fwd.size() != p.size() || bwd.size() != p.size())
            throw DimensionError("fundamental_vector_field: action changed dimension");
        Point v(p.size());
        for (size_t i = 0; i < p.size(); ++i) v[i] = (fwd[i] - bwd[i]) / (2.0 * step);
        return v;
    };
    if (!richardson) return single(h);
    const Point coarse = single(h);
    const Point fine = single(h / 2.0);
    Point v(p.size());
    for (size_t i = 0; i < p.size(); ++i) v[i] = (4.0 * fine[i] - coarse[i]) / 3.0;
    return v;
}

// d/dt|0 c(exp(tX), p), analytic when the model provides it.
inline CMatrix cocycle_rate(const EquivariantGeometry& geom, const CMatrix& X, const Point& p,
                            double h = 1e-5) {
    if (geom.action.cocycle_rate) return geom.action.cocycle_rate(X, p);
    const CMatrix fwd = geom.action.cocycle(geom.group.exponential(X * cplx(h)), p);
    const CMatrix bwd = geom.action.cocycle(geom.group.exponential(X * cplx(-h)), p);
    return (fwd - bwd) * cplx(1.0 / (2.0 * h));
}

inline std::vector<cplx> to_complex(const Point& v) {
    std::vector<cplx> r(v.size());
    for (size_t i = 0; i < v.size(); ++i) r[i] = v[i];
    return r;
}

// mu(X)(p) = d/dt|0 c(e^{tX}, p) - iota_{X_M} A(p): the degree-0 correction
// whose closedness consequences are tested, not assumed.
inline CMatrix moment(const EquivariantGeometry& geom, const CMatrix& X, const Point& p) {
    const CMatrix rate = cocycle_rate(geom, X, p);
    const Point xm = fundamental_vector_field(geom, X, p);
    const FormValue a = geom.connection.local_form(p);
    const FormValue contracted = contract(a, to_complex(xm));
    return rate - contracted[mask_t{0}];
}

// F(X) = F + mu(X) as an even FormValue.
inline FormValue equivariant_curvature(const EquivariantGeometry& geom, const CMatrix& X,
                                       const Point& p) {
    FormValue f = curvature(geom, p);
    f[mask_t{0}] += moment(geom, X, p);
    return f;
}

// Generator of constant-loop holonomy: F + d/dt|0 c(e^{ta}, p) + iota_{a_M} A.
// The cocycle rate enters with a plus because the loop closes through the
// composed group element h e^{ta}; the contraction enters with a plus
// because the horizontal representative moves with velocity -a_M.
inline FormValue loop_generator(const EquivariantGeometry& geom, const CMatrix& a, const Point& p) {
    FormValue f = curvature(geom, p);
    const Point am = fundamental_vector_field(geom, a, p);
    const FormValue conn = geom.connection.local_form(p);
    f[mask_t{0}] += cocycle_rate(geom, a, p) + contract(conn, to_complex(am))[mask_t{0}];
    return f;
}

// Jacobian of act(g, .) at p, analytic when provided.
inline Jacobian action_jacobian(const EquivariantGeometry& geom, const CMatrix& g, const Point& p,
                                double h = 1e-5) {
    if (geom.action.jacobian) return geom.action.jacobian(g, p);
    const int n = static_cast<int>(p.size());
    Jacobian j(n, std::vector<double>(n, 0.0));
    for (int col = 0; col < n; ++col) {
        Point pp = p, pm = p;
        pp[col] += h;
        pm[col] -= h;
        const Point fwd = geom.action.act(g, pp);
        const Point bwd = geom.action.act(g, pm);
        for (int row = 0; row < n; ++row) j[row][col] = (fwd[row] - bwd[row]) / (2.0 * h);
    }
    return j;
}

// Invariance residual of the connection under g:
// c^{-1} (act_g^* A) c + c^{-1} dc - A, maximized over the sample points.
inline double invariance_residual(const EquivariantGeometry& geom, const CMatrix& g,
                                  const std::vector<Point>& points, double h = 1e-5) {
    double worst = 0.0;
    for (const Point& p : points) {
        const CMatrix c = geom.action.cocycle(g, p);
        const CMatrix cinv = c.inverse();
        const Jacobian j = action_jacobian(geom, g, p, h);
        const FormValue pulled = pullback(geom.connection.local_form(geom.action.act(g, p)), j);
        FormValue dc = form_zero(geom.chart.dim, geom.fiber_rank);
        for (int i = 0; i < geom.chart.dim; ++i) {
            Point pp = p, pm = p;
            pp[i] += h;
            pm[i] -= h;
            dc[mask_t{1} << i] =
                (geom.action.cocycle(g, pp) - geom.action.cocycle(g, pm)) * cplx(1.0 / (2.0 * h));
        }
        const FormValue cinv_f = form_from_matrix(geom.chart.dim, cinv);
        const FormValue c_f = form_from_matrix(geom.chart.dim, c);
        const FormValue lhs = cinv_f * pulled * c_f + cinv_f * dc;
        worst = std::max(worst, max_abs_diff(lhs, geom.connection.local_form(p)));
    }
    return worst;
}

// Validates act(g, embedding(q)) = embedding(q) over the sub-chart grid and
// returns the stratum; failure reports the worst offending point.
inline FixedStratum declare_fixed_stratum(
    const EquivariantGeometry& geom, const CMatrix& g, Chart sub_chart,
    std::function<Point(const Point&)> embedding,
    std::function<Jacobian(const Point&)> embedding_jacobian = nullptr,
    std::string label = std::string(), double tol = 1e-8) {
    sub_chart.validate();
    const int per_axis = std::min(sub_chart.resolution, 9);
    double worst = 0.0;
    Point worst_q;
    for (const Point& q : interior_grid(sub_chart, per_axis, 0.0)) {
        const Point p = embedding(q);
        if (!geom.chart.contains(p))
            throw ValidationError("declare_fixed_stratum: embedding leaves the ambient chart");
        const Point moved = geom.action.act(g, p);
        double r = 0.0;
        for (size_t i = 0; i < p.size(); ++i) r = std::max(r, std::abs(moved[i] - p[i]));
        if (r > worst) {
            worst = r;
            worst_q = q;
        }
    }
    if (worst > tol) {
        std::ostringstream os;
        os << "declare_fixed_stratum: residual " << worst << " at sub-chart point (";
        for (size_t i = 0; i < worst_q.size(); ++i) os << (i ? ", " : "") << worst_q[i];
        os << ")";
        throw ValidationError(os.str());
    }
    FixedStratum s;
    s.group_element = g;
    s.sub_chart = std::move(sub_chart);
    s.embedding = std::move(embedding);
    s.embedding_jacobian = std::move(embedding_jacobian);
    s.label = std::move(label);
    return s;
}

inline Jacobian stratum_jacobian(const FixedStratum& stratum, const Point& q, double h = 1e-5) {
    if (stratum.embedding_jacobian) return stratum.embedding_jacobian(q);
    const Point p0 = stratum.embedding(q);
    const int rows = static_cast<int>(p0.size());
    const int cols = stratum.sub_chart.dim;
    Jacobian j(rows, std::vector<double>(cols, 0.0));
    for (int c = 0; c < cols; ++c) {
        Point qp = q, qm = q;
        qp[c] += h;
        qm[c] -= h;
        const Point fwd = stratum.embedding(qp);
        const Point bwd = stratum.embedding(qm);
        for (int r = 0; r < rows; ++r) j[r][c] = (fwd[r] - bwd[r]) / (2.0 * h);
    }
    return j;
}

// Sub-basis of the Lie algebra fixed by Ad_g.
inline std::vector<CMatrix> centralizer_basis(const GroupModel& group, const CMatrix& g,
                                              double tol = 1e-8) {
    std::vector<CMatrix> out;
    for (const CMatrix& x : group.lie_algebra_basis)
        if (max_abs_diff(group.adjoint(g, x), x) < tol) out.push_back(x);
    return out;
}

} // namespace bouquet
