#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bouquet/forms.hpp"
#include "bouquet/grassmann.hpp"

namespace bouquet {

using json = nlohmann::ordered_json;

namespace detail {

inline std::string ptr(const std::string& base, const std::string& key) {
    return base + "/" + key;
}
inline std::string ptr(const std::string& base, size_t index) {
    return base + "/" + std::to_string(index);
}

inline const json& require_member(const json& j, const char* key, const std::string& where) {
    if (!j.is_object()) throw SchemaError(where, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw SchemaError(where, std::string("missing field '") + key + "'");
    return *it;
}

inline double require_double(const json& j, const std::string& where) {
    if (!j.is_number()) throw SchemaError(where, "expected a number");
    return j.get<double>();
}

inline long require_int(const json& j, const std::string& where) {
    if (!j.is_number_integer()) throw SchemaError(where, "expected an integer");
    return j.get<long>();
}

inline std::string require_string(const json& j, const std::string& where) {
    if (!j.is_string()) throw SchemaError(where, "expected a string");
    return j.get<std::string>();
}

inline const json& require_array(const json& j, const std::string& where) {
    if (!j.is_array()) throw SchemaError(where, "expected an array");
    return j;
}

} // namespace detail

inline json complex_to_json(const cplx& z) {
    return json{{"re", z.real()}, {"im", z.imag()}};
}

inline cplx complex_from_json(const json& j, const std::string& where) {
    if (j.is_number()) return cplx(j.get<double>(), 0.0);
    const double re = detail::require_double(detail::require_member(j, "re", where), detail::ptr(where, "re"));
    const double im = detail::require_double(detail::require_member(j, "im", where), detail::ptr(where, "im"));
    return cplx(re, im);
}

inline json matrix_to_json(const CMatrix& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline CMatrix matrix_from_json(const json& j, const std::string& where) {
    detail::require_array(j, where);
    const int rows = static_cast<int>(j.size());
    if (rows == 0) throw SchemaError(where, "matrix needs at least one row");
    detail::require_array(j[0], detail::ptr(where, size_t{0}));
    const int cols = static_cast<int>(j[0].size());
    if (cols == 0) throw SchemaError(detail::ptr(where, size_t{0}), "matrix needs at least one column");
    CMatrix m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        const std::string row_where = detail::ptr(where, static_cast<size_t>(r));
        detail::require_array(j[r], row_where);
        if (static_cast<int>(j[r].size()) != cols) throw SchemaError(row_where, "ragged matrix row");
        for (int c = 0; c < cols; ++c)
            m(r, c) = complex_from_json(j[r][c], detail::ptr(row_where, static_cast<size_t>(c)));
    }
    return m;
}

// Grassmann values serialize as the generator count plus the nonzero terms,
// sorted by monomial mask.
inline json grassmann_to_json(const Grassmann& g) {
    json terms = json::array();
    for (mask_t m = 0; m < (mask_t{1} << g.generators()); ++m) {
        if (g[m] == cplx(0.0)) continue;
        terms.push_back(json{{"mask", m}, {"re", g[m].real()}, {"im", g[m].imag()}});
    }
    return json{{"q", g.generators()}, {"terms", std::move(terms)}};
}

inline Grassmann grassmann_from_json(const json& j, const std::string& where = "") {
    const long q = detail::require_int(detail::require_member(j, "q", where), detail::ptr(where, "q"));
    if (q < 0 || q > grassmann_max_generators)
        throw SchemaError(detail::ptr(where, "q"), "generator count out of range");
    Grassmann g = grassmann_zero(static_cast<int>(q));
    const json& terms = detail::require_array(detail::require_member(j, "terms", where),
                                              detail::ptr(where, "terms"));
    for (size_t i = 0; i < terms.size(); ++i) {
        const std::string tw = detail::ptr(detail::ptr(where, "terms"), i);
        const long mask = detail::require_int(detail::require_member(terms[i], "mask", tw),
                                              detail::ptr(tw, "mask"));
        if (mask < 0 || mask >= (long{1} << q))
            throw SchemaError(detail::ptr(tw, "mask"), "mask out of range for q generators");
        const double re = detail::require_double(detail::require_member(terms[i], "re", tw),
                                                 detail::ptr(tw, "re"));
        const double im = detail::require_double(detail::require_member(terms[i], "im", tw),
                                                 detail::ptr(tw, "im"));
        g[static_cast<mask_t>(mask)] = cplx(re, im);
    }
    return g;
}

// Matrix-valued forms serialize as covector count, fiber size, and the
// nonzero coefficient matrices, sorted by monomial mask.
inline json form_to_json(const FormValue& omega) {
    json coeffs = json::array();
    for (mask_t m = 0; m < (mask_t{1} << omega.generators()); ++m) {
        if (omega[m].is_zero()) continue;
        coeffs.push_back(json{{"mask", m}, {"matrix", matrix_to_json(omega[m])}});
    }
    return json{{"n", omega.generators()},
                {"d", omega.zero_prototype().rows()},
                {"coeffs", std::move(coeffs)}};
}

inline FormValue form_from_json(const json& j, const std::string& where = "") {
    const long n = detail::require_int(detail::require_member(j, "n", where), detail::ptr(where, "n"));
    const long d = detail::require_int(detail::require_member(j, "d", where), detail::ptr(where, "d"));
    if (n < 0 || n > form_max_covectors)
        throw SchemaError(detail::ptr(where, "n"), "covector count out of range");
    if (d < 1) throw SchemaError(detail::ptr(where, "d"), "fiber size must be positive");
    FormValue omega(static_cast<int>(n), CMatrix(static_cast<int>(d), static_cast<int>(d)));
    const json& coeffs = detail::require_array(detail::require_member(j, "coeffs", where),
                                               detail::ptr(where, "coeffs"));
    for (size_t i = 0; i < coeffs.size(); ++i) {
        const std::string cw = detail::ptr(detail::ptr(where, "coeffs"), i);
        const long mask = detail::require_int(detail::require_member(coeffs[i], "mask", cw),
                                              detail::ptr(cw, "mask"));
        if (mask < 0 || mask >= (long{1} << n))
            throw SchemaError(detail::ptr(cw, "mask"), "mask out of range for n covectors");
        const CMatrix m = matrix_from_json(detail::require_member(coeffs[i], "matrix", cw),
                                           detail::ptr(cw, "matrix"));
        if (m.rows() != d || m.cols() != d)
            throw SchemaError(detail::ptr(cw, "matrix"), "coefficient matrix has wrong fiber size");
        omega[static_cast<mask_t>(mask)] = m;
    }
    return omega;
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError(path, "cannot open file");
    try {
        return json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(path, std::string("parse error: ") + e.what());
    }
}

inline void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw SchemaError(path, "cannot open file for writing");
    out << j.dump(2) << "\n";
}

} // namespace bouquet
