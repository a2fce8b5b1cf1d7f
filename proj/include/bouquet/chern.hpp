#pragma once

#include <bit>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "bouquet/geometry.hpp"

namespace bouquet {

// raw keeps curvature inputs as supplied; chern_integer rescales the
// degree-2 coefficients by i/(2 pi) so top-form integrals land on integers.
enum class Normalization { raw, chern_integer };

inline FormValue rescale_curvature(FormValue f, Normalization norm) {
    if (norm == Normalization::raw) return f;
    const cplx scale(0.0, 1.0 / (2.0 * M_PI));
    for (mask_t m = 0; m < (mask_t{1} << f.generators()); ++m)
        if (std::popcount(m) == 2) f[m] *= scale;
    return f;
}

inline FormValue form_from_scalar(const Exterior<cplx>& s) {
    FormValue out(s.generators(), CMatrix(1, 1));
    for (mask_t m = 0; m < (mask_t{1} << s.generators()); ++m) out[m](0, 0) = s[m];
    return out;
}

// One branch of the character bouquet: a scalar equivariant form on the
// fixed stratum of group_element, evaluated at one centralizer direction.
struct BouquetEntry {
    CMatrix group_element;
    CMatrix algebra_element;
    FixedStratum stratum;
    std::function<FormValue(const Point&)> form_field; // fiber rank 1
    Normalization normalization = Normalization::raw;
    std::string label;
};

// Character form: trace of the fiber action of group_element composed with
// the exponential of the equivariant curvature restricted to the stratum.
inline BouquetEntry chern_character(const EquivariantGeometry& geom, const CMatrix& g,
                                    const CMatrix& x_alg, FixedStratum stratum,
                                    Normalization norm = Normalization::raw,
                                    std::string label = "") {
    if (!x_alg.is_zero()) {
        const double ad = max_abs_diff(geom.group.adjoint(g, x_alg), x_alg);
        if (ad > 1e-8)
            throw ValidationError("chern_character: algebra element is not invariant under the "
                                  "group element (residual " + std::to_string(ad) + ")");
    }
    BouquetEntry entry;
    entry.group_element = g;
    entry.algebra_element = x_alg;
    entry.stratum = stratum;
    entry.normalization = norm;
    entry.label = std::move(label);
    entry.form_field = [geom, g, x_alg, stratum, norm](const Point& q) {
        const Point p = stratum.embedding(q);
        const FormValue ambient = rescale_curvature(equivariant_curvature(geom, x_alg, p), norm);
        const Jacobian j = stratum_jacobian(stratum, q);
        const FormValue restricted = pullback(ambient, j);
        const CMatrix c = geom.action.cocycle(g, p);
        const int sub_dim = stratum.sub_chart.dim;
        return form_from_scalar(trace(form_from_matrix(sub_dim, c) * exp_even(restricted)));
    };
    return entry;
}

// Cartan differential d - iota_{X_M} applied to a form field at a point.
inline FormValue equivariant_differential(const EquivariantGeometry& geom,
                                          const std::function<FormValue(const Point&)>& field,
                                          const CMatrix& x_alg, const Point& p, double h = 1e-4,
                                          bool richardson = false) {
    geom.chart.require_interior(p, h, "equivariant_differential");
    const FormValue d_field = exterior_derivative(field, geom.chart, p, h, richardson);
    const Point xm = fundamental_vector_field(geom, x_alg, p);
    return d_field - contract(field(p), to_complex(xm));
}

// Max Cartan-differential coefficient of an entry over interior grid
// points.  Point strata are closed for free; full-chart strata are the
// only positive-dimensional case the built-in geometries produce.
inline double entry_closedness(const EquivariantGeometry& geom, const BouquetEntry& entry,
                               int per_axis = 64, double h = 1e-4) {
    const Chart& sub = entry.stratum.sub_chart;
    if (sub.dim == 0) return 0.0;
    if (sub.dim != geom.chart.dim)
        throw ValidationError("entry_closedness: only point strata and full-chart strata are supported");
    {
        Point probe(sub.dim);
        for (int i = 0; i < sub.dim; ++i) probe[i] = 0.5 * (sub.lo[i] + sub.hi[i]);
        const Point embedded = entry.stratum.embedding(probe);
        for (int i = 0; i < sub.dim; ++i)
            if (std::abs(embedded[i] - probe[i]) > 1e-12)
                throw ValidationError("entry_closedness: full-chart stratum must embed identically");
    }
    double residual = 0.0;
    for (const Point& q : interior_grid(sub, per_axis)) {
        const FormValue r = equivariant_differential(geom, entry.form_field, entry.algebra_element, q, h);
        residual = std::max(residual, r.max_abs());
    }
    return residual;
}

// First axiom of the bouquet: conjugation equivariance.  Compares the entry
// of g with the pullback of the entry of h g h^{-1} along the action of h.
inline double bouquet_axiom1(const EquivariantGeometry& geom, const CMatrix& h, const CMatrix& g,
                             const CMatrix& x_alg, const FixedStratum& stratum_g,
                             const FixedStratum& stratum_conj, int per_axis = 8) {
    const CMatrix g_conj = h * g * h.inverse();
    const CMatrix x_conj = geom.group.adjoint(h, x_alg);
    const BouquetEntry left = chern_character(geom, g, x_alg, stratum_g);
    const BouquetEntry right = chern_character(geom, g_conj, x_conj, stratum_conj);

    if (stratum_g.sub_chart.dim == 0 && stratum_conj.sub_chart.dim == 0) {
        const Point p1 = stratum_g.embedding({});
        const Point p2 = stratum_conj.embedding({});
        const Point moved = geom.action.act(h, p1);
        double map_res = 0.0;
        for (size_t i = 0; i < moved.size(); ++i)
            map_res = std::max(map_res, std::abs(moved[i] - p2[i]));
        if (map_res > 1e-6)
            throw ValidationError("bouquet_axiom1: h does not map the fixed stratum onto its conjugate");
        return max_abs_diff(left.form_field({}), right.form_field({}));
    }
    if (stratum_g.sub_chart.dim != geom.chart.dim || stratum_conj.sub_chart.dim != geom.chart.dim)
        throw ValidationError("bouquet_axiom1: strata must both be points or both full charts");

    double residual = 0.0;
    int evaluated = 0;
    for (const Point& q : interior_grid(stratum_g.sub_chart, per_axis)) {
        const Point y = geom.action.act(h, q);
        if (!geom.chart.contains(y, 1e-9)) continue; // h moves the sample off the chart box
        const Jacobian j = action_jacobian(geom, h, q);
        const FormValue pulled = pullback(right.form_field(y), j);
        residual = std::max(residual, max_abs_diff(pulled, left.form_field(q)));
        ++evaluated;
    }
    if (evaluated == 0)
        throw ValidationError("bouquet_axiom1: the action of h maps every sample point off the chart");
    return residual;
}

// Second axiom: compatibility of the group and algebra slots.  Both sides
// are evaluated on the stratum of g e^{eps X}, which in every built-in
// geometry shares coordinates with the stratum of g.
inline double bouquet_axiom2(const EquivariantGeometry& geom, const CMatrix& g, const CMatrix& x_alg,
                             const CMatrix& y_alg, double eps, const FixedStratum& stratum_g,
                             const FixedStratum& stratum_shift, int per_axis = 8) {
    if (stratum_g.sub_chart.dim != stratum_shift.sub_chart.dim)
        throw ValidationError("bouquet_axiom2: strata must share coordinates");
    const CMatrix g_shift = g * geom.group.exponential(x_alg * cplx(eps));
    const std::vector<Point> grid = interior_grid(stratum_shift.sub_chart, per_axis);
    for (const Point& q : grid) {
        const Point p1 = stratum_g.embedding(q);
        const Point p2 = stratum_shift.embedding(q);
        double emb_res = 0.0, fix_res = 0.0;
        const Point moved = geom.action.act(g_shift, p2);
        for (size_t i = 0; i < p1.size(); ++i) {
            emb_res = std::max(emb_res, std::abs(p1[i] - p2[i]));
            fix_res = std::max(fix_res, std::abs(moved[i] - p2[i]));
        }
        if (emb_res > 1e-8)
            throw ValidationError("bouquet_axiom2: strata must share coordinates");
        if (fix_res > 1e-6)
            throw ValidationError("bouquet_axiom2: eps too large, the shifted stratum is not fixed");
    }
    const BouquetEntry left = chern_character(geom, g_shift, y_alg, stratum_shift);
    const BouquetEntry right = chern_character(geom, g, x_alg * cplx(eps) + y_alg, stratum_g);
    double residual = 0.0;
    for (const Point& q : grid)
        residual = std::max(residual, max_abs_diff(left.form_field(q), right.form_field(q)));
    return residual;
}

// Tensor-product trapezoid quadrature of the top-degree coefficient trace.
inline cplx integrate_top_form(const std::function<FormValue(const Point&)>& field,
                               const Chart& chart, int per_axis) {
    if (chart.dim == 0) {
        const Exterior<cplx> v = trace(field({}));
        return v[0];
    }
    if (per_axis < 2) throw ValidationError("integrate_top_form: per_axis must be at least 2");
    const int n = chart.dim;
    const mask_t top = (mask_t{1} << n) - 1;
    std::vector<double> spacing(n);
    double cell = 1.0;
    for (int i = 0; i < n; ++i) {
        spacing[i] = (chart.hi[i] - chart.lo[i]) / (per_axis - 1);
        cell *= spacing[i];
    }
    std::vector<int> idx(n, 0);
    cplx total(0.0);
    while (true) {
        Point p(n);
        double w = cell;
        for (int i = 0; i < n; ++i) {
            p[i] = chart.lo[i] + idx[i] * spacing[i];
            if (idx[i] == 0 || idx[i] == per_axis - 1) w *= 0.5;
        }
        const Exterior<cplx> v = trace(field(p));
        const cplx sample = v[top];
        if (!std::isfinite(sample.real()) || !std::isfinite(sample.imag()))
            throw NumericError("integrate_top_form: non-finite sample");
        total += w * sample;
        int axis = 0;
        while (axis < n && ++idx[axis] == per_axis) idx[axis++] = 0;
        if (axis == n) break;
    }
    return total;
}

inline cplx integrate_top_form(const BouquetEntry& entry, int per_axis) {
    return integrate_top_form(entry.form_field, entry.stratum.sub_chart, per_axis);
}

// Taylor data of the character along a one-parameter subgroup: value, first
// and second derivative in the flow parameter at 0.  Report only.
struct CharacterTaylorReport {
    std::vector<cplx> derivatives; // orders 0, 1, 2
    double step = 0.0;
};

inline CharacterTaylorReport character_taylor_report(const EquivariantGeometry& geom,
                                                     const CMatrix& x_alg,
                                                     const FixedStratum& stratum,
                                                     double step = 1e-3) {
    const CMatrix zero(x_alg.rows(), x_alg.cols());
    auto value_at = [&](double eps) {
        const CMatrix g = geom.group.exponential(x_alg * cplx(eps));
        const BouquetEntry entry = chern_character(geom, g, zero, stratum);
        Point q0(stratum.sub_chart.dim);
        for (int i = 0; i < stratum.sub_chart.dim; ++i)
            q0[i] = 0.5 * (stratum.sub_chart.lo[i] + stratum.sub_chart.hi[i]);
        return entry.form_field(q0)[0](0, 0);
    };
    const cplx f0 = value_at(0.0), fp = value_at(step), fm = value_at(-step);
    CharacterTaylorReport rep;
    rep.step = step;
    rep.derivatives = {f0, (fp - fm) / (2.0 * step), (fp - 2.0 * f0 + fm) / (step * step)};
    return rep;
}

} // namespace bouquet
