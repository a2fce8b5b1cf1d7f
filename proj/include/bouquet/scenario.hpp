#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bouquet/chern.hpp"
#include "bouquet/registry.hpp"
#include "bouquet/serialization.hpp"
#include "bouquet/transport.hpp"

namespace bouquet {

// One chart-with-structure unit of a scenario.
struct GeometryBlock {
    std::string label;
    EquivariantGeometry geom;
    std::vector<FixedStratum> strata;

    const FixedStratum& stratum(const std::string& name, const std::string& where) const {
        for (const FixedStratum& s : strata)
            if (s.label == name) return s;
        throw SchemaError(where, "unknown stratum '" + name + "' in block '" + label + "'");
    }
};

struct CheckSpec {
    std::string kind;
    std::string label;
    std::string block;
    double tolerance = 0.0;
    bool lower_bound = false; // pass when residual >= tolerance (order measurements)
    json params;
};

struct Scenario {
    std::string name;
    std::string description;
    std::vector<GeometryBlock> blocks;
    std::vector<CheckSpec> checks;

    const GeometryBlock& block(const std::string& label, const std::string& where) const {
        for (const GeometryBlock& b : blocks)
            if (b.label == label) return b;
        throw SchemaError(where, "unknown block '" + label + "'");
    }
};

struct RunSettings {
    std::string out_dir;       // empty: no artifact files
    int steps_override = 0;    // 0: per-check values
    int grid_override = 0;     // 0: per-check values
    double tolerance_scale = 1.0;
    std::string normalization; // "", "raw" or "chern": closedness/field artifacts
};

struct CheckResult {
    std::string label;
    std::string kind;
    std::string block;
    bool pass = false;
    double residual = 0.0;
    double tolerance = 0.0;
    bool lower_bound = false;
    std::string detail;
    double wall_seconds = 0.0;
    json data;                                             // per-check payload for the report
    std::vector<std::pair<std::string, std::string>> files; // artifact name -> content
};

struct RunReport {
    std::string scenario;
    std::vector<CheckResult> results;
    std::vector<std::string> artifacts;
    bool all_pass = true;
};

// ---------------------------------------------------------------------------
// Scenario JSON parsing
// ---------------------------------------------------------------------------

namespace detail {

inline double param_double(const json& p, const char* key, double def, const std::string& where) {
    if (!p.contains(key)) return def;
    return require_double(p.at(key), ptr(where, key));
}

inline int param_int(const json& p, const char* key, int def, const std::string& where) {
    if (!p.contains(key)) return def;
    return static_cast<int>(require_int(p.at(key), ptr(where, key)));
}

inline std::string param_string(const json& p, const char* key, const std::string& def,
                                const std::string& where) {
    if (!p.contains(key)) return def;
    return require_string(p.at(key), ptr(where, key));
}

inline std::vector<double> double_array(const json& j, const std::string& where) {
    require_array(j, where);
    std::vector<double> out;
    out.reserve(j.size());
    for (size_t i = 0; i < j.size(); ++i) out.push_back(require_double(j[i], ptr(where, i)));
    return out;
}

inline std::vector<double> param_double_array(const json& p, const char* key,
                                              std::vector<double> def, const std::string& where) {
    if (!p.contains(key)) return def;
    return double_array(p.at(key), ptr(where, key));
}

inline std::vector<int> int_array(const json& j, const std::string& where) {
    require_array(j, where);
    std::vector<int> out;
    out.reserve(j.size());
    for (size_t i = 0; i < j.size(); ++i)
        out.push_back(static_cast<int>(require_int(j[i], ptr(where, i))));
    return out;
}

// Group element spec: {"angles": [...]} exponentiates the algebra basis,
// {"matrix": [[...]]} is explicit, {"weyl": true} is the torus-normalizing
// permutation of the diagonal SU(2) model.
inline CMatrix parse_group_element(const json& j, const GroupModel& group, const std::string& where) {
    if (!j.is_object()) throw SchemaError(where, "expected a group element object");
    if (j.contains("weyl")) {
        if (group.name != "su2-diagonal")
            throw SchemaError(ptr(where, "weyl"), "weyl element only exists for su2-diagonal");
        return weyl_swap();
    }
    if (j.contains("matrix")) {
        const CMatrix m = matrix_from_json(j.at("matrix"), ptr(where, "matrix"));
        if (m.rows() != group.matrix_size || m.cols() != group.matrix_size)
            throw SchemaError(ptr(where, "matrix"), "group element has wrong size");
        return m;
    }
    if (j.contains("angles")) {
        const std::vector<double> a = double_array(j.at("angles"), ptr(where, "angles"));
        if (a.size() != group.lie_algebra_basis.size())
            throw SchemaError(ptr(where, "angles"), "angle count does not match the algebra basis");
        return group.exponential(group.algebra_element(a));
    }
    throw SchemaError(where, "group element needs 'angles', 'matrix' or 'weyl'");
}

inline CMatrix parse_algebra_element(const json& p, const char* key, const GroupModel& group,
                                     const std::string& where) {
    if (!p.contains(key)) return CMatrix(group.matrix_size, group.matrix_size);
    const std::vector<double> c = double_array(p.at(key), ptr(where, key));
    if (c.size() != group.lie_algebra_basis.size())
        throw SchemaError(ptr(where, key), "coefficient count does not match the algebra basis");
    return group.algebra_element(c);
}

inline Chart parse_chart(const json& j, const std::string& fallback_label, const std::string& where) {
    Chart c;
    c.dim = static_cast<int>(require_int(require_member(j, "dim", where), ptr(where, "dim")));
    c.lo = double_array(require_member(j, "lo", where), ptr(where, "lo"));
    c.hi = double_array(require_member(j, "hi", where), ptr(where, "hi"));
    c.resolution = param_int(j, "resolution", 64, where);
    c.label = param_string(j, "label", fallback_label, where);
    if (static_cast<int>(c.lo.size()) != c.dim || static_cast<int>(c.hi.size()) != c.dim)
        throw SchemaError(where, "lo/hi must have 'dim' entries");
    try {
        c.validate();
    } catch (const Error& e) {
        throw SchemaError(where, e.what());
    }
    return c;
}

} // namespace detail

inline GeometryBlock parse_geometry_block(const json& j, const std::string& where) {
    using namespace detail;
    GeometryBlock blk;
    blk.label = require_string(require_member(j, "label", where), ptr(where, "label"));
    EquivariantGeometry& geom = blk.geom;
    geom.chart = parse_chart(require_member(j, "chart", where), blk.label, ptr(where, "chart"));

    const std::string group_name =
        require_string(require_member(j, "group", where), ptr(where, "group"));
    try {
        geom.group = make_group(group_name);
    } catch (const Error& e) {
        throw SchemaError(ptr(where, "group"), e.what());
    }

    const json& action = require_member(j, "action", where);
    const std::string action_where = ptr(where, "action");
    const std::string action_kind =
        require_string(require_member(action, "kind", action_where), ptr(action_where, "kind"));
    try {
        if (action_kind == "trivial") {
            geom.action = trivial_action_base();
        } else if (action_kind == "rotation") {
            const int weight = param_int(action, "weight", 1, action_where);
            geom.action = rotation_action_base(geom.group, weight);
        } else {
            throw SchemaError(ptr(action_where, "kind"), "unknown action kind '" + action_kind + "'");
        }

        const json& coc = require_member(j, "cocycle", where);
        const std::string coc_where = ptr(where, "cocycle");
        const std::string coc_kind =
            require_string(require_member(coc, "kind", coc_where), ptr(coc_where, "kind"));
        if (coc_kind == "trivial") {
            geom.fiber_rank = param_int(coc, "rank", 1, coc_where);
            attach_trivial_cocycle(geom.action, geom.fiber_rank);
        } else if (coc_kind == "weights") {
            const std::vector<int> w =
                int_array(require_member(coc, "weights", coc_where), ptr(coc_where, "weights"));
            geom.fiber_rank = static_cast<int>(w.size());
            attach_weight_cocycle(geom.action, geom.group, w);
        } else if (coc_kind == "defining") {
            geom.fiber_rank = geom.group.matrix_size;
            attach_defining_cocycle(geom.action, geom.group);
        } else {
            throw SchemaError(ptr(coc_where, "kind"), "unknown cocycle kind '" + coc_kind + "'");
        }

        const json& conn = require_member(j, "connection", where);
        const std::string conn_where = ptr(where, "connection");
        const std::string conn_kind =
            require_string(require_member(conn, "kind", conn_where), ptr(conn_where, "kind"));
        if (conn_kind == "zero") {
            geom.connection = make_zero_connection(geom.chart.dim, geom.fiber_rank);
        } else if (conn_kind == "monopole") {
            if (geom.fiber_rank != 1)
                throw SchemaError(conn_where, "monopole connection needs a rank-1 fiber");
            const int charge = param_int(conn, "charge", 1, conn_where);
            const bool flipped = conn.contains("flipped") && conn.at("flipped").is_boolean() &&
                                 conn.at("flipped").get<bool>();
            geom.connection = make_monopole_connection(charge, flipped);
        } else if (conn_kind == "plane") {
            if (geom.fiber_rank != 1)
                throw SchemaError(conn_where, "plane connection needs a rank-1 fiber");
            geom.connection = make_plane_connection(param_double(conn, "k", 1.0, conn_where));
        } else {
            throw SchemaError(ptr(conn_where, "kind"), "unknown connection kind '" + conn_kind + "'");
        }
    } catch (const SchemaError&) {
        throw;
    } catch (const Error& e) {
        throw SchemaError(where, e.what());
    }

    if (j.contains("strata")) {
        const json& strata = require_array(j.at("strata"), ptr(where, "strata"));
        for (size_t i = 0; i < strata.size(); ++i) {
            const std::string sw = ptr(ptr(where, "strata"), i);
            const json& s = strata[i];
            const std::string label = require_string(require_member(s, "label", sw), ptr(sw, "label"));
            const CMatrix g = parse_group_element(require_member(s, "group", sw), geom.group, ptr(sw, "group"));
            try {
                if (s.contains("full_chart") && s.at("full_chart").get<bool>()) {
                    const int n = geom.chart.dim;
                    blk.strata.push_back(declare_fixed_stratum(
                        geom, g, geom.chart, [](const Point& q) { return q; },
                        [n](const Point&) {
                            Jacobian jac(n, std::vector<double>(n, 0.0));
                            for (int k = 0; k < n; ++k) jac[k][k] = 1.0;
                            return jac;
                        },
                        label));
                } else {
                    const std::vector<double> pt =
                        double_array(require_member(s, "point", sw), ptr(sw, "point"));
                    if (static_cast<int>(pt.size()) != geom.chart.dim)
                        throw SchemaError(ptr(sw, "point"), "point has wrong dimension");
                    Chart sub;
                    sub.dim = 0;
                    sub.label = label;
                    blk.strata.push_back(declare_fixed_stratum(
                        geom, g, sub, [pt](const Point&) { return pt; }, nullptr, label));
                }
            } catch (const SchemaError&) {
                throw;
            } catch (const Error& e) {
                throw SchemaError(sw, e.what());
            }
        }
    }
    return blk;
}

inline Scenario parse_scenario(const json& j, const std::string& where = "") {
    using namespace detail;
    Scenario sc;
    sc.name = require_string(require_member(j, "name", where), ptr(where, "name"));
    sc.description = param_string(j, "description", "", where);
    const json& blocks = require_array(require_member(j, "blocks", where), ptr(where, "blocks"));
    if (blocks.empty()) throw SchemaError(ptr(where, "blocks"), "scenario needs at least one block");
    for (size_t i = 0; i < blocks.size(); ++i)
        sc.blocks.push_back(parse_geometry_block(blocks[i], ptr(ptr(where, "blocks"), i)));
    for (size_t i = 0; i + 1 < sc.blocks.size(); ++i)
        for (size_t k = i + 1; k < sc.blocks.size(); ++k)
            if (sc.blocks[i].label == sc.blocks[k].label)
                throw SchemaError(ptr(where, "blocks"), "duplicate block label '" + sc.blocks[i].label + "'");

    const json& checks = require_array(require_member(j, "checks", where), ptr(where, "checks"));
    for (size_t i = 0; i < checks.size(); ++i) {
        const std::string cw = ptr(ptr(where, "checks"), i);
        const json& c = checks[i];
        CheckSpec spec;
        spec.kind = require_string(require_member(c, "kind", cw), ptr(cw, "kind"));
        spec.label = param_string(c, "label", spec.kind + "-" + std::to_string(i), cw);
        spec.block = param_string(c, "block", sc.blocks.front().label, cw);
        sc.block(spec.block, ptr(cw, "block"));
        spec.lower_bound = (spec.kind == "convergence-order");
        if (spec.kind == "borel-taylor") {
            spec.tolerance = param_double(c, "tolerance", 0.0, cw);
        } else {
            spec.tolerance = require_double(require_member(c, "tolerance", cw), ptr(cw, "tolerance"));
            if (spec.tolerance <= 0.0) throw SchemaError(ptr(cw, "tolerance"), "tolerance must be positive");
        }
        spec.params = c;
        sc.checks.push_back(std::move(spec));
    }
    for (size_t i = 0; i + 1 < sc.checks.size(); ++i)
        for (size_t k = i + 1; k < sc.checks.size(); ++k)
            if (sc.checks[i].label == sc.checks[k].label)
                throw SchemaError(ptr(where, "checks"), "duplicate check label '" + sc.checks[i].label + "'");
    return sc;
}

// ---------------------------------------------------------------------------
// Check execution
// ---------------------------------------------------------------------------

namespace detail {

inline std::mt19937 seeded_rng(const json& p, const std::string& where, int fallback) {
    return std::mt19937(static_cast<unsigned>(param_int(p, "seed", fallback, where)));
}

inline std::vector<double> random_coeffs(std::mt19937& rng, size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> out(n);
    for (double& v : out) v = dist(rng);
    return out;
}

inline SuperPath parse_path(const json& p, const GeometryBlock& blk, const std::string& where) {
    if (!p.contains("path")) throw SchemaError(where, "missing field 'path'");
    const json& spec = p.at("path");
    const std::string pw = ptr(where, "path");
    const std::string kind = require_string(require_member(spec, "kind", pw), ptr(pw, "kind"));
    if (kind == "circle") {
        const std::vector<double> center =
            param_double_array(spec, "center", Point(blk.geom.chart.dim, 0.0), pw);
        const double radius = param_double(spec, "radius", 0.5, pw);
        return SuperPath::circle(center, radius, 0);
    }
    if (kind == "constant") {
        const std::vector<double> pt = double_array(require_member(spec, "point", pw), ptr(pw, "point"));
        const std::string odd = param_string(spec, "odd", "generators", pw);
        if (odd == "generators") return SuperPath::constant_with_generators(pt);
        if (odd == "none")
            return SuperPath::constant_at(pt, std::vector<Grassmann>(pt.size(), grassmann_zero(0)), 0);
        throw SchemaError(ptr(pw, "odd"), "odd data must be 'generators' or 'none'");
    }
    if (kind == "custom-polyline") {
        const json& nodes = require_array(require_member(spec, "nodes", pw), ptr(pw, "nodes"));
        std::vector<Point> pts;
        for (size_t i = 0; i < nodes.size(); ++i)
            pts.push_back(double_array(nodes[i], ptr(ptr(pw, "nodes"), i)));
        return SuperPath::polyline(std::move(pts), 0);
    }
    throw SchemaError(ptr(pw, "kind"), "unknown path kind '" + kind + "'");
}

inline std::string csv_number(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline Normalization settings_normalization(const RunSettings& st, Normalization def) {
    if (st.normalization == "raw") return Normalization::raw;
    if (st.normalization == "chern") return Normalization::chern_integer;
    return def;
}

} // namespace detail

// Executes one check against its geometry block.  Library-level failures
// (validation, domain, numeric) turn into failed results, not crashes;
// schema problems in the check parameters propagate as SchemaError.
inline CheckResult run_check(const Scenario& sc, const CheckSpec& spec, const RunSettings& st) {
    using namespace detail;
    CheckResult res;
    res.label = spec.label;
    res.kind = spec.kind;
    res.block = spec.block;
    res.lower_bound = spec.lower_bound;
    res.tolerance = spec.lower_bound ? spec.tolerance : spec.tolerance * st.tolerance_scale;
    const std::string where = "check '" + spec.label + "'";
    const GeometryBlock& blk = sc.block(spec.block, where);
    const EquivariantGeometry& geom = blk.geom;
    const json& p = spec.params;
    const int steps = st.steps_override > 0 ? st.steps_override
                                            : param_int(p, "steps", 512, where);
    std::ostringstream detail_os;
    detail_os << std::setprecision(6);

    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (spec.kind == "cocycle-consistency") {
            // c(g1 g2, p) = c(g1, g2 p) c(g2, p) over random pairs.
            std::mt19937 rng = seeded_rng(p, where, 1);
            const int samples = param_int(p, "samples", 25, where);
            const int grid = param_int(p, "grid", 3, where);
            const std::vector<Point> pts = interior_grid(geom.chart, grid);
            double r = 0.0;
            for (int s = 0; s < samples; ++s) {
                const CMatrix g1 = geom.group.exponential(geom.group.algebra_element(
                    random_coeffs(rng, geom.group.lie_algebra_basis.size(), -M_PI, M_PI)));
                const CMatrix g2 = geom.group.exponential(geom.group.algebra_element(
                    random_coeffs(rng, geom.group.lie_algebra_basis.size(), -M_PI, M_PI)));
                for (const Point& pt : pts) {
                    const CMatrix lhs = geom.action.cocycle(g1 * g2, pt);
                    const CMatrix rhs = geom.action.cocycle(g1, geom.action.act(g2, pt)) *
                                        geom.action.cocycle(g2, pt);
                    r = std::max(r, max_abs_diff(lhs, rhs));
                }
            }
            res.residual = r;
        } else if (spec.kind == "invariance") {
            std::mt19937 rng = seeded_rng(p, where, 2);
            const int samples = param_int(p, "samples", 8, where);
            const int grid = param_int(p, "grid", 5, where);
            const std::vector<Point> pts = interior_grid(geom.chart, grid, 0.1);
            double r = 0.0;
            for (int s = 0; s < samples; ++s) {
                const CMatrix g = geom.group.exponential(geom.group.algebra_element(
                    random_coeffs(rng, geom.group.lie_algebra_basis.size(), -M_PI, M_PI)));
                r = std::max(r, invariance_residual(geom, g, pts));
            }
            res.residual = r;
        } else if (spec.kind == "holonomy-ode-vs-exponential") {
            const std::vector<double> pt = double_array(require_member(p, "point", where), ptr(where, "point"));
            TransportProblem problem = make_problem(geom, SuperPath::constant_with_generators(pt),
                                                    CMatrix(geom.group.matrix_size, geom.group.matrix_size),
                                                    geom.group.identity(), 1.0, steps);
            const FormValue ode = holonomy_form(equivariant_holonomy(problem));
            const FormValue target = exp_even(curvature(geom, pt));
            const double scale = std::max(1.0, target.max_abs());
            const double form_diff = max_abs_diff(ode, target) / scale;
            const double trace_diff = max_abs_diff(trace(ode), trace(target)) / scale;
            const double refine = refinement_residual(problem);
            res.residual = std::max(form_diff, trace_diff);
            if (refine > 1e-6) {
                res.residual = std::max(res.residual, refine);
                detail_os << "step count flagged: halving changes result by " << refine << "; ";
            }
            detail_os << "form diff " << form_diff << ", trace diff " << trace_diff;
            res.data["holonomy"] = form_to_json(ode);
        } else if (spec.kind == "equivariant-holonomy-stratum") {
            const FixedStratum& stratum = blk.stratum(
                require_string(require_member(p, "stratum", where), ptr(where, "stratum")), where);
            if (stratum.sub_chart.dim != 0)
                throw ValidationError("equivariant-holonomy-stratum: needs a point stratum");
            const Point x = stratum.embedding({});
            const CMatrix h = parse_group_element(require_member(p, "h", where), geom.group, ptr(where, "h"));
            const CMatrix a = parse_algebra_element(p, "a", geom.group, where);
            TransportProblem problem =
                make_problem(geom, SuperPath::constant_with_generators(x), a, h, 1.0, steps);
            const FormValue ode = holonomy_form(equivariant_holonomy(problem));
            const FormValue closed = super_holonomy_constant(geom, x, a, h);
            res.residual = max_abs_diff(ode, closed);
            res.data["holonomy"] = form_to_json(ode);
            res.data["loop"] = loop_validate(problem).detail;
        } else if (spec.kind == "character-table") {
            const FixedStratum& stratum = blk.stratum(
                require_string(require_member(p, "stratum", where), ptr(where, "stratum")), where);
            if (stratum.sub_chart.dim != 0)
                throw ValidationError("character-table: needs a point stratum");
            std::mt19937 rng = seeded_rng(p, where, 7);
            const int samples = param_int(p, "samples", 20, where);
            const Point x = stratum.embedding({});
            const size_t k = geom.group.lie_algebra_basis.size();
            double r = 0.0;
            std::ostringstream csv;
            csv << std::setprecision(17) << "sample,value_re,value_im,oracle_re,oracle_im\n";
            for (int s = 0; s < samples; ++s) {
                const CMatrix g = geom.group.exponential(
                    geom.group.algebra_element(random_coeffs(rng, k, -M_PI, M_PI)));
                const CMatrix xa = geom.group.algebra_element(random_coeffs(rng, k, -1.0, 1.0));
                const BouquetEntry entry = chern_character(geom, g, xa, stratum);
                const cplx value = entry.form_field({})[0](0, 0);
                const cplx oracle = (geom.action.cocycle(g * geom.group.exponential(xa), x)).trace();
                r = std::max(r, std::abs(value - oracle));
                csv << s << "," << value.real() << "," << value.imag() << "," << oracle.real()
                    << "," << oracle.imag() << "\n";
            }
            res.residual = r;
            res.files.emplace_back(spec.label + ".csv", csv.str());
            res.data["samples"] = samples;
        } else if (spec.kind == "closedness") {
            const FixedStratum& stratum = blk.stratum(
                require_string(require_member(p, "stratum", where), ptr(where, "stratum")), where);
            const CMatrix g = p.contains("g")
                                  ? parse_group_element(p.at("g"), geom.group, ptr(where, "g"))
                                  : geom.group.identity();
            const CMatrix xa = parse_algebra_element(p, "x", geom.group, where);
            const Normalization norm = settings_normalization(st, Normalization::raw);
            const BouquetEntry entry = chern_character(geom, g, xa, stratum, norm, spec.label);
            const int grid = st.grid_override > 0 ? st.grid_override : param_int(p, "grid", 64, where);
            const double fd = param_double(p, "fd_step", 1e-4, where);
            res.residual = entry_closedness(geom, entry, grid, fd);
            // coarse field table artifact
            std::ostringstream csv;
            csv << std::setprecision(17);
            const int n = stratum.sub_chart.dim;
            for (int i = 0; i < n; ++i) csv << "q" << i << ",";
            csv << "mask,re,im\n";
            for (const Point& q : interior_grid(stratum.sub_chart, std::min(grid, 9))) {
                const FormValue v = entry.form_field(q);
                for (mask_t m = 0; m < (mask_t{1} << n); ++m) {
                    for (int i = 0; i < n; ++i) csv << q[i] << ",";
                    csv << m << "," << v[m](0, 0).real() << "," << v[m](0, 0).imag() << "\n";
                }
            }
            res.files.emplace_back(spec.label + "-field.csv", csv.str());
        } else if (spec.kind == "axiom1") {
            const FixedStratum& stratum = blk.stratum(
                require_string(require_member(p, "stratum", where), ptr(where, "stratum")), where);
            const FixedStratum& stratum_conj =
                blk.stratum(param_string(p, "stratum_conj",
                                         require_string(require_member(p, "stratum", where),
                                                        ptr(where, "stratum")),
                                         where),
                            where);
            const CMatrix h = parse_group_element(require_member(p, "h", where), geom.group, ptr(where, "h"));
            const CMatrix g = p.contains("g")
                                  ? parse_group_element(p.at("g"), geom.group, ptr(where, "g"))
                                  : geom.group.identity();
            const CMatrix xa = parse_algebra_element(p, "x", geom.group, where);
            const int grid = st.grid_override > 0 ? st.grid_override : param_int(p, "grid", 8, where);
            res.residual = bouquet_axiom1(geom, h, g, xa, stratum, stratum_conj, grid);
        } else if (spec.kind == "axiom2") {
            const std::string stratum_name =
                require_string(require_member(p, "stratum", where), ptr(where, "stratum"));
            const FixedStratum& stratum = blk.stratum(stratum_name, where);
            const FixedStratum& stratum_shift =
                blk.stratum(param_string(p, "stratum_shift", stratum_name, where), where);
            const CMatrix g = parse_group_element(require_member(p, "g", where), geom.group, ptr(where, "g"));
            const CMatrix xa = parse_algebra_element(p, "x", geom.group, where);
            const CMatrix ya = parse_algebra_element(p, "y", geom.group, where);
            const std::vector<double> eps = param_double_array(p, "eps", {1e-2, 1e-3}, where);
            const int grid = st.grid_override > 0 ? st.grid_override : param_int(p, "grid", 8, where);
            double r = 0.0;
            for (double e : eps)
                r = std::max(r, bouquet_axiom2(geom, g, xa, ya, e, stratum, stratum_shift, grid));
            res.residual = r;
            res.data["eps"] = eps;
        } else if (spec.kind == "chern-number") {
            const FixedStratum& stratum = blk.stratum(
                require_string(require_member(p, "stratum", where), ptr(where, "stratum")), where);
            const double expected = require_double(require_member(p, "expected", where), ptr(where, "expected"));
            const int grid = st.grid_override > 0 ? st.grid_override : param_int(p, "grid", 400, where);
            const BouquetEntry entry =
                chern_character(geom, geom.group.identity(),
                                CMatrix(geom.group.matrix_size, geom.group.matrix_size), stratum,
                                Normalization::chern_integer, spec.label);
            const cplx value = integrate_top_form(entry, grid);
            res.residual = std::abs(value - cplx(expected)) / std::max(1.0, std::abs(expected));
            detail_os << "integral " << value.real();
            if (std::abs(value.imag()) > 0) detail_os << (value.imag() < 0 ? "" : "+") << value.imag() << "i";
            detail_os << ", expected " << expected;
            res.data["chern_number"] = json{{"re", value.real()}, {"im", value.imag()}};
            res.data["expected"] = expected;
        } else if (spec.kind == "infinitesimal-holonomy") {
            const std::vector<double> pt = double_array(require_member(p, "point", where), ptr(where, "point"));
            const CMatrix a = parse_algebra_element(p, "a", geom.group, where);
            const std::vector<double> eps = param_double_array(p, "eps", {1e-2, 5e-3}, where);
            const InfinitesimalReport rep = infinitesimal_holonomy(geom, pt, a, eps, steps);
            res.residual = rep.deviation;
            res.data["limit"] = form_to_json(rep.limit);
            res.data["target"] = form_to_json(rep.target);
        } else if (spec.kind == "flow-property") {
            SuperPath path = parse_path(p, blk, where);
            TransportProblem problem =
                make_problem(geom, std::move(path), CMatrix(geom.group.matrix_size, geom.group.matrix_size),
                             geom.group.identity(), 1.0, steps);
            const double split = param_double(p, "split", 0.375, where);
            const int steps_a = std::max(1, static_cast<int>(std::lround(split * steps)));
            const int steps_b = std::max(1, steps - steps_a);
            const double t_mid = static_cast<double>(steps_a) / steps;
            const Exterior<CMatrix> full = integrate_parallel_window(problem, 0.0, 1.0, steps);
            const Exterior<CMatrix> first = integrate_parallel_window(problem, 0.0, t_mid, steps_a);
            const Exterior<CMatrix> second = integrate_parallel_window(problem, t_mid, 1.0, steps_b);
            res.residual = max_abs_diff(full, second * first);
            detail_os << "split at t = " << t_mid;
        } else if (spec.kind == "convergence-order") {
            SuperPath path = parse_path(p, blk, where);
            TransportProblem problem =
                make_problem(geom, std::move(path), CMatrix(geom.group.matrix_size, geom.group.matrix_size),
                             geom.group.identity(), 1.0, param_int(p, "steps", 64, where));
            const Exterior<CMatrix> t1 = integrate_parallel(problem, problem.steps);
            const Exterior<CMatrix> t2 = integrate_parallel(problem, problem.steps * 2);
            const Exterior<CMatrix> t4 = integrate_parallel(problem, problem.steps * 4);
            const double e1 = max_abs_diff(t1, t2);
            const double e2 = max_abs_diff(t2, t4);
            res.residual = (e2 < 1e-300) ? 16.0 : std::log2(e1 / e2);
            detail_os << "coarse err " << e1 << ", fine err " << e2;
        } else if (spec.kind == "ordinary-transport-oracle") {
            if (geom.fiber_rank != 1)
                throw ValidationError("ordinary-transport-oracle: needs a rank-1 fiber");
            const double radius = param_double(p, "radius", 1.0, where);
            TransportProblem problem = make_problem(
                geom, SuperPath::circle(Point(geom.chart.dim, 0.0), radius, 0),
                CMatrix(geom.group.matrix_size, geom.group.matrix_size), geom.group.identity(), 1.0, steps);
            const Exterior<CMatrix> t_sol = integrate_parallel(problem);
            // rotationally symmetric A = f(r^2)(x dy - y dx): closed-form
            // holonomy exp(-2 pi r^2 f) with f read off one sample.
            const cplx f = geom.connection.local_form({radius, 0.0})[mask_t{2}](0, 0) / radius;
            const cplx oracle = std::exp(-2.0 * M_PI * radius * radius * f);
            res.residual = std::abs(t_sol[0](0, 0) - oracle);
            detail_os << "transport " << t_sol[0](0, 0).real() << (t_sol[0](0, 0).imag() < 0 ? "" : "+")
                      << t_sol[0](0, 0).imag() << "i";
        } else if (spec.kind == "gauge-reduction-invariance") {
            if (geom.fiber_rank != 1)
                throw ValidationError("gauge-reduction-invariance: needs a rank-1 fiber");
            std::mt19937 rng = seeded_rng(p, where, 3);
            const double radius = param_double(p, "radius", 0.5, where);
            const int q = param_int(p, "odd_generators", 2, where);
            SuperPath path = SuperPath::circle(Point(geom.chart.dim, 0.0), radius, q);
            TransportProblem problem =
                make_problem(geom, std::move(path), CMatrix(geom.group.matrix_size, geom.group.matrix_size),
                             geom.group.identity(), 1.0, steps);
            MatrixGrassmann alpha = matrix_grassmann(q, 1);
            std::uniform_real_distribution<double> dist(-1.0, 1.0);
            for (int jgen = 0; jgen < q; ++jgen)
                alpha[mask_t{1} << jgen](0, 0) = cplx(0.0, dist(rng));
            const Exterior<CMatrix> plain = equivariant_holonomy(problem);
            const Exterior<CMatrix> reduced = holonomy_with_odd_component(problem, alpha);
            res.residual = max_abs_diff(trace(plain), trace(reduced));
        } else if (spec.kind == "borel-taylor") {
            const FixedStratum& stratum = blk.stratum(
                require_string(require_member(p, "stratum", where), ptr(where, "stratum")), where);
            const CMatrix xa = parse_algebra_element(p, "x", geom.group, where);
            const double step = param_double(p, "step", 1e-3, where);
            const CharacterTaylorReport rep = character_taylor_report(geom, xa, stratum, step);
            json ders = json::array();
            for (const cplx& d : rep.derivatives) ders.push_back(complex_to_json(d));
            res.data["derivatives"] = std::move(ders);
            res.residual = 0.0;
            detail_os << "report only";
        } else {
            throw SchemaError(where, "unknown check kind '" + spec.kind + "'");
        }
        if (spec.lower_bound)
            res.pass = res.residual >= res.tolerance;
        else if (res.tolerance == 0.0)
            res.pass = true; // report-only check
        else
            res.pass = res.residual < res.tolerance;
    } catch (const SchemaError&) {
        throw;
    } catch (const Error& e) {
        res.pass = false;
        res.residual = std::numeric_limits<double>::quiet_NaN();
        detail_os << e.what();
    }
    const auto t1 = std::chrono::steady_clock::now();
    res.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    res.detail = detail_os.str();
    return res;
}

// Deterministic report body: identical inputs give byte-identical JSON.
// Wall times stay out of this object on purpose.
inline json report_to_json(const RunReport& report, const RunSettings& st) {
    json checks = json::array();
    for (const CheckResult& r : report.results) {
        json c{{"name", r.label},
               {"kind", r.kind},
               {"block", r.block},
               {"status", r.pass ? "pass" : "fail"},
               {"comparison", r.lower_bound ? ">=" : "<"}};
        c["residual"] = std::isfinite(r.residual) ? json(r.residual) : json(nullptr);
        c["tolerance"] = r.tolerance;
        if (!r.detail.empty()) c["detail"] = r.detail;
        if (!r.data.is_null()) c["data"] = r.data;
        checks.push_back(std::move(c));
    }
    json settings{{"steps", st.steps_override},
                  {"grid", st.grid_override},
                  {"tolerance_scale", st.tolerance_scale},
                  {"normalization", st.normalization.empty() ? "default" : st.normalization}};
    json top{{"scenario", report.scenario},
             {"settings", std::move(settings)},
             {"checks", std::move(checks)},
             {"summary",
              json{{"total", report.results.size()},
                   {"passed",
                    std::count_if(report.results.begin(), report.results.end(),
                                  [](const CheckResult& r) { return r.pass; })},
                   {"all_pass", report.all_pass}}}};
    // roll-up of the curvature verification quantities, when present
    json verification = json::object();
    auto fold_max = [&verification](const char* key, double v) {
        if (!std::isfinite(v)) return;
        if (!verification.contains(key) || verification[key].get<double>() < v)
            verification[key] = v;
    };
    for (const CheckResult& r : report.results) {
        if (r.kind == "closedness") fold_max("closedness_max", r.residual);
        if (r.kind == "axiom1") fold_max("axiom1_residual", r.residual);
        if (r.kind == "axiom2") fold_max("axiom2_residual", r.residual);
        if (r.kind == "chern-number" && r.data.contains("chern_number"))
            verification["chern_number"] = r.data.at("chern_number");
    }
    if (!verification.empty()) top["verification"] = std::move(verification);
    return top;
}

inline json timings_to_json(const RunReport& report) {
    json timings = json::array();
    for (const CheckResult& r : report.results)
        timings.push_back(json{{"name", r.label}, {"wall_seconds", r.wall_seconds}});
    return json{{"scenario", report.scenario}, {"checks", std::move(timings)}};
}

inline RunReport run_scenario(const Scenario& sc, const RunSettings& st) {
    RunReport report;
    report.scenario = sc.name;
    for (const CheckSpec& spec : sc.checks) {
        CheckResult r = run_check(sc, spec, st);
        report.all_pass = report.all_pass && r.pass;
        report.results.push_back(std::move(r));
    }
    if (!st.out_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(st.out_dir);
        for (const CheckResult& r : report.results) {
            for (const auto& [name, content] : r.files) {
                const std::string path = (fs::path(st.out_dir) / name).string();
                std::ofstream out(path);
                out << content;
                report.artifacts.push_back(path);
            }
        }
        const std::string report_path = (fs::path(st.out_dir) / "report.json").string();
        write_json_file(report_path, report_to_json(report, st));
        report.artifacts.push_back(report_path);
        // timings are machine-dependent, so they live outside report.json
        const std::string timing_path = (fs::path(st.out_dir) / "timings.json").string();
        write_json_file(timing_path, timings_to_json(report));
        report.artifacts.push_back(timing_path);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Built-in scenarios
// ---------------------------------------------------------------------------

inline const std::vector<std::pair<std::string, std::string>>& builtin_scenario_descriptions() {
    static const std::vector<std::pair<std::string, std::string>> table = {
        {"point-u1-weights",
         "Weighted circle representations over a point: character table, closedness, both bouquet axioms."},
        {"monopole-s2",
         "Charge-2 line bundle on the two-sphere in stereographic charts: holonomy, strata, Chern number."},
        {"weighted-c-plane",
         "Trivial line bundle on the plane with a weight-2 circle action: curvature from infinitesimal loops."},
        {"su2-diagonal-point",
         "Defining representation of the diagonal torus in SU(2) over a point, with the Weyl reflection."},
    };
    return table;
}

const char* builtin_scenario_text(const std::string& name);

inline Scenario builtin_scenario(const std::string& name) {
    const char* text = builtin_scenario_text(name);
    if (!text) throw SchemaError(name, "unknown built-in scenario");
    return parse_scenario(json::parse(text));
}

// Resolves a name against the built-ins first, then the filesystem.
inline Scenario load_scenario(const std::string& name_or_path) {
    if (builtin_scenario_text(name_or_path)) return builtin_scenario(name_or_path);
    return parse_scenario(read_json_file(name_or_path), name_or_path);
}

inline const char* builtin_scenario_text(const std::string& name) {
    if (name == "point-u1-weights") {
        return R"json({
  "name": "point-u1-weights",
  "description": "Weighted circle representations over a single point; character identities and bouquet axioms at dimension zero.",
  "blocks": [
    {
      "label": "pt",
      "chart": {"dim": 0, "lo": [], "hi": [], "label": "pt"},
      "group": "u1",
      "action": {"kind": "trivial"},
      "cocycle": {"kind": "weights", "weights": [1, 2, -3]},
      "connection": {"kind": "zero"},
      "strata": [
        {"label": "pt", "group": {"angles": [0.9]}, "point": []}
      ]
    }
  ],
  "checks": [
    {"kind": "cocycle-consistency", "label": "cocycle-law", "block": "pt", "tolerance": 1e-12, "samples": 32, "seed": 101, "grid": 1},
    {"kind": "character-table", "label": "characters-vs-trace", "block": "pt", "tolerance": 1e-12, "stratum": "pt", "samples": 20, "seed": 7},
    {"kind": "closedness", "label": "closed-at-point", "block": "pt", "tolerance": 1e-6, "stratum": "pt", "g": {"angles": [0.7]}, "x": [0.4]},
    {"kind": "axiom1", "label": "conjugation-axiom", "block": "pt", "tolerance": 1e-7, "h": {"angles": [1.1]}, "g": {"angles": [0.7]}, "x": [0.3], "stratum": "pt"},
    {"kind": "axiom2", "label": "shift-axiom", "block": "pt", "tolerance": 1e-7, "g": {"angles": [0.7]}, "x": [1.0], "y": [0.6], "eps": [0.01, 0.001], "stratum": "pt"},
    {"kind": "borel-taylor", "label": "character-taylor", "block": "pt", "stratum": "pt", "x": [0.8], "step": 0.001}
  ]
})json";
    }
    if (name == "monopole-s2") {
        return R"json({
  "name": "monopole-s2",
  "description": "Charge-2 line bundle over the two-sphere in stereographic charts with the rotation action; holonomy, bouquet checks, Chern number.",
  "blocks": [
    {
      "label": "north",
      "chart": {"dim": 2, "lo": [-40, -40], "hi": [40, 40], "resolution": 400, "label": "north"},
      "group": "so2",
      "action": {"kind": "rotation", "weight": 1},
      "cocycle": {"kind": "weights", "weights": [0]},
      "connection": {"kind": "monopole", "charge": 2, "flipped": false},
      "strata": [
        {"label": "pole", "group": {"angles": [0.9]}, "point": [0, 0]},
        {"label": "all", "group": {"angles": [0]}, "full_chart": true}
      ]
    },
    {
      "label": "south",
      "chart": {"dim": 2, "lo": [-40, -40], "hi": [40, 40], "resolution": 400, "label": "south"},
      "group": "so2",
      "action": {"kind": "rotation", "weight": -1},
      "cocycle": {"kind": "weights", "weights": [2]},
      "connection": {"kind": "monopole", "charge": 2, "flipped": true},
      "strata": [
        {"label": "pole", "group": {"angles": [0.9]}, "point": [0, 0]},
        {"label": "all", "group": {"angles": [0]}, "full_chart": true}
      ]
    }
  ],
  "checks": [
    {"kind": "invariance", "label": "north-invariance", "block": "north", "tolerance": 1e-8, "samples": 6, "seed": 21, "grid": 4},
    {"kind": "invariance", "label": "south-invariance", "block": "south", "tolerance": 1e-8, "samples": 6, "seed": 22, "grid": 4},
    {"kind": "cocycle-consistency", "label": "south-cocycle-law", "block": "south", "tolerance": 1e-12, "samples": 16, "seed": 23, "grid": 2},
    {"kind": "holonomy-ode-vs-exponential", "label": "holonomy-vs-exp", "block": "north", "tolerance": 1e-8, "point": [0.7, -0.3], "steps": 512},
    {"kind": "equivariant-holonomy-stratum", "label": "north-pole-holonomy", "block": "north", "tolerance": 1e-7, "stratum": "pole", "h": {"angles": [0.9]}, "a": [0.35], "steps": 512},
    {"kind": "equivariant-holonomy-stratum", "label": "south-pole-holonomy", "block": "south", "tolerance": 1e-7, "stratum": "pole", "h": {"angles": [0.9]}, "a": [0.35], "steps": 512},
    {"kind": "closedness", "label": "north-closedness", "block": "north", "tolerance": 1e-6, "stratum": "all", "x": [0.5], "grid": 64, "fd_step": 1e-4},
    {"kind": "axiom1", "label": "rotation-axiom1", "block": "north", "tolerance": 1e-7, "h": {"angles": [0.8]}, "g": {"angles": [0]}, "x": [0.4], "stratum": "all", "grid": 8},
    {"kind": "axiom2", "label": "south-pole-axiom2", "block": "south", "tolerance": 1e-7, "g": {"angles": [0.9]}, "x": [1.0], "y": [0.55], "eps": [0.01, 0.001], "stratum": "pole"},
    {"kind": "chern-number", "label": "chern-number", "block": "north", "tolerance": 1e-3, "stratum": "all", "expected": 2, "grid": 400},
    {"kind": "ordinary-transport-oracle", "label": "circle-transport", "block": "north", "tolerance": 1e-9, "radius": 1.0, "steps": 1024},
    {"kind": "flow-property", "label": "flow-composition", "block": "north", "tolerance": 1e-9, "path": {"kind": "circle", "center": [0.3, 0.1], "radius": 0.5}, "steps": 512, "split": 0.375},
    {"kind": "convergence-order", "label": "step-halving-order", "block": "north", "tolerance": 3.7, "path": {"kind": "circle", "center": [0.3, 0.1], "radius": 0.5}, "steps": 64},
    {"kind": "infinitesimal-holonomy", "label": "curvature-limit", "block": "north", "tolerance": 1e-6, "point": [0.7, -0.3], "a": [0.0], "eps": [0.01, 0.005], "steps": 512}
  ]
})json";
    }
    if (name == "weighted-c-plane") {
        return R"json({
  "name": "weighted-c-plane",
  "description": "Trivial line bundle on the plane with a weight-2 circle action and a constant-curvature connection; equivariant curvature from infinitesimal loops.",
  "blocks": [
    {
      "label": "plane",
      "chart": {"dim": 2, "lo": [-3, -3], "hi": [3, 3], "resolution": 64, "label": "plane"},
      "group": "u1",
      "action": {"kind": "rotation", "weight": 2},
      "cocycle": {"kind": "trivial", "rank": 1},
      "connection": {"kind": "plane", "k": 0.8},
      "strata": [
        {"label": "origin", "group": {"angles": [0.9]}, "point": [0, 0]},
        {"label": "all", "group": {"angles": [0]}, "full_chart": true}
      ]
    }
  ],
  "checks": [
    {"kind": "invariance", "label": "rotation-invariance", "block": "plane", "tolerance": 1e-8, "samples": 6, "seed": 31, "grid": 5},
    {"kind": "holonomy-ode-vs-exponential", "label": "holonomy-vs-exp", "block": "plane", "tolerance": 1e-8, "point": [0.7, 0.4], "steps": 512},
    {"kind": "infinitesimal-holonomy", "label": "equivariant-curvature-limit", "block": "plane", "tolerance": 1e-6, "point": [0.7, 0.4], "a": [0.3], "eps": [0.01, 0.005], "steps": 512},
    {"kind": "closedness", "label": "plane-closedness", "block": "plane", "tolerance": 1e-6, "stratum": "all", "x": [0.5], "grid": 64, "fd_step": 1e-4},
    {"kind": "equivariant-holonomy-stratum", "label": "origin-holonomy", "block": "plane", "tolerance": 1e-7, "stratum": "origin", "h": {"angles": [0.9]}, "a": [0.35], "steps": 512},
    {"kind": "gauge-reduction-invariance", "label": "reduced-gauge-holonomy", "block": "plane", "tolerance": 1e-12, "seed": 41, "radius": 0.5, "steps": 512},
    {"kind": "flow-property", "label": "flow-composition", "block": "plane", "tolerance": 1e-9, "path": {"kind": "circle", "center": [0.4, 0.2], "radius": 0.6}, "steps": 512, "split": 0.375},
    {"kind": "convergence-order", "label": "step-halving-order", "block": "plane", "tolerance": 3.7, "path": {"kind": "circle", "center": [0.4, 0.2], "radius": 0.6}, "steps": 64}
  ]
})json";
    }
    if (name == "su2-diagonal-point") {
        return R"json({
  "name": "su2-diagonal-point",
  "description": "Defining representation of the diagonal torus in SU(2) over a point, with the Weyl reflection exercising the conjugation axiom.",
  "blocks": [
    {
      "label": "pt",
      "chart": {"dim": 0, "lo": [], "hi": [], "label": "pt"},
      "group": "su2-diagonal",
      "action": {"kind": "trivial"},
      "cocycle": {"kind": "defining"},
      "connection": {"kind": "zero"},
      "strata": [
        {"label": "pt", "group": {"angles": [0.7]}, "point": []}
      ]
    }
  ],
  "checks": [
    {"kind": "cocycle-consistency", "label": "cocycle-law", "block": "pt", "tolerance": 1e-12, "samples": 24, "seed": 51, "grid": 1},
    {"kind": "character-table", "label": "characters-vs-trace", "block": "pt", "tolerance": 1e-12, "stratum": "pt", "samples": 20, "seed": 52},
    {"kind": "axiom1", "label": "weyl-axiom1", "block": "pt", "tolerance": 1e-7, "h": {"weyl": true}, "g": {"angles": [0.7]}, "x": [0.3], "stratum": "pt"},
    {"kind": "axiom2", "label": "shift-axiom", "block": "pt", "tolerance": 1e-7, "g": {"angles": [0.7]}, "x": [0.5], "y": [0.4], "eps": [0.01, 0.001], "stratum": "pt"}
  ]
})json";
    }
    return nullptr;
}

} // namespace bouquet
