#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <vector>

#include "bouquet/exterior.hpp"

namespace bouquet {

// Value of an endomorphism-valued differential form at a point: generators
// are the chart covectors dx^1..dx^n, coefficients act on the fiber.  The
// wedge product is Exterior's Koszul product.
using FormValue = Exterior<CMatrix>;

inline constexpr int form_max_covectors = 6;

inline FormValue form_zero(int n_covectors, int fiber_dim) {
    if (n_covectors > form_max_covectors)
        throw DimensionError("FormValue: more than 6 covector generators");
    return FormValue(n_covectors, CMatrix(fiber_dim, fiber_dim));
}

inline FormValue form_identity(int n_covectors, int fiber_dim) {
    FormValue f = form_zero(n_covectors, fiber_dim);
    f[0] = CMatrix::identity(fiber_dim);
    return f;
}

inline FormValue form_from_matrix(int n_covectors, const CMatrix& m) {
    if (n_covectors > form_max_covectors)
        throw DimensionError("FormValue: more than 6 covector generators");
    FormValue f(n_covectors, CMatrix(m.rows(), m.cols()));
    f[0] = m;
    return f;
}

// Multiplicative units for the coefficient rings exp/inverse work over.
inline cplx coeff_one(const cplx&) { return cplx(1.0); }
inline CMatrix coeff_one(const CMatrix& proto) { return CMatrix::identity(proto.rows()); }

// Interior product with a tangent vector (components v[i] against the i-th
// generator).  Odd antiderivation: contracting generator i out of a monomial
// costs the sign of moving past the generators below it.
template <class Coeff>
Exterior<Coeff> contract(const Exterior<Coeff>& omega, const std::vector<cplx>& v) {
    const int q = omega.generators();
    if (static_cast<int>(v.size()) != q)
        throw DimensionError("contract: vector length does not match generator count");
    Exterior<Coeff> r(q, omega.zero_prototype());
    for (mask_t m = 0; m < (mask_t{1} << q); ++m) {
        if (coeff_is_zero(omega[m])) continue;
        mask_t rest = m;
        while (rest != 0) {
            const int i = std::countr_zero(rest);
            rest &= rest - 1;
            if (v[i] == cplx(0.0)) continue;
            const int below = std::popcount(m & ((mask_t{1} << i) - 1));
            const cplx factor = ((below & 1) ? -v[i] : v[i]);
            r[m & ~(mask_t{1} << i)] += omega[m] * factor;
        }
    }
    return r;
}

inline Exterior<cplx> trace(const FormValue& omega) {
    Exterior<cplx> r(omega.generators(), cplx(0.0));
    for (mask_t m = 0; m < (mask_t{1} << omega.generators()); ++m) r[m] = omega[m].trace();
    return r;
}

// Exponential of an even element.  The body (degree-0 coefficient) drives
// convergence; the nilpotent rest terminates on its own, so scaling and
// squaring against the full max-norm covers both.
template <class Coeff>
Exterior<Coeff> exp_even(const Exterior<Coeff>& x, double tol = 1e-12) {
    if (!x.is_even()) throw ParityError("exp_even: argument has odd part");
    const Coeff one = coeff_one(x.zero_prototype());
    Exterior<Coeff> unit(x.generators(), x.zero_prototype());
    unit[0] = one;

    int squarings = 0;
    double norm = x.max_abs();
    while (norm > 0.5) {
        norm *= 0.5;
        ++squarings;
    }
    Exterior<Coeff> xs = x * cplx(std::ldexp(1.0, -squarings));
    Exterior<Coeff> result = unit;
    Exterior<Coeff> term = unit;
    for (int k = 1; k <= 64; ++k) {
        term = term * xs;
        term *= cplx(1.0 / k);
        result += term;
        if (term.max_abs() < tol * std::max(1.0, result.max_abs())) break;
        if (k == 64) throw NumericError("exp_even: series did not converge");
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

inline cplx inverse_coeff(const cplx& c) {
    if (std::abs(c) < 1e-14) throw NumericError("inverse_even: body is numerically zero");
    return cplx(1.0) / c;
}
inline CMatrix inverse_coeff(const CMatrix& m) { return m.inverse(); }

// Inverse of an even element with invertible body B: writing x = B(1 + M)
// with M = B^{-1} (x - B) of degree >= 2, the Neumann series for (1 + M)^{-1}
// terminates because M is nilpotent.
template <class Coeff>
Exterior<Coeff> inverse_even(const Exterior<Coeff>& x) {
    if (!x.is_even()) throw ParityError("inverse_even: argument has odd part");
    const int q = x.generators();
    Exterior<Coeff> binv_ext(q, x.zero_prototype());
    binv_ext[0] = inverse_coeff(x[mask_t{0}]);
    Exterior<Coeff> unit(q, x.zero_prototype());
    unit[0] = coeff_one(x.zero_prototype());

    const Exterior<Coeff> m = binv_ext * x - unit;
    Exterior<Coeff> series = unit;
    Exterior<Coeff> power = unit;
    for (int k = 1; 2 * k <= q; ++k) {
        power = power * m;
        if (power.is_zero()) break;
        if (k & 1)
            series -= power;
        else
            series += power;
    }
    return series * binv_ext;
}

// Determinant of a small real matrix (minors never exceed 6x6 here).
inline double small_det(std::vector<double>& a, int n) {
    double det = 1.0;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
        if (a[piv * n + col] == 0.0) return 0.0;
        if (piv != col) {
            for (int c = 0; c < n; ++c) std::swap(a[piv * n + c], a[col * n + c]);
            det = -det;
        }
        det *= a[col * n + col];
        for (int r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] / a[col * n + col];
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
        }
    }
    return det;
}

// Pullback along a map with Jacobian jac[a][b] = dy_a/dx_b (targets index
// the form's generators, sources the result's):
// (pullback omega)_B = sum_A omega_A det(jac[A, B]).
template <class Coeff>
Exterior<Coeff> pullback(const Exterior<Coeff>& omega, const std::vector<std::vector<double>>& jac) {
    const int target_dim = omega.generators();
    if (static_cast<int>(jac.size()) != target_dim)
        throw DimensionError("pullback: Jacobian row count does not match form generators");
    const int source_dim = jac.empty() ? 0 : static_cast<int>(jac[0].size());
    for (const auto& row : jac)
        if (static_cast<int>(row.size()) != source_dim)
            throw DimensionError("pullback: ragged Jacobian");
    if (source_dim > form_max_covectors)
        throw DimensionError("pullback: more than 6 source covectors");

    Exterior<Coeff> r(source_dim, omega.zero_prototype());
    std::vector<double> minor;
    for (mask_t ma = 0; ma < (mask_t{1} << target_dim); ++ma) {
        if (coeff_is_zero(omega[ma])) continue;
        const int k = std::popcount(ma);
        std::array<int, form_max_covectors> rows_a{};
        {
            int idx = 0;
            for (int a = 0; a < target_dim; ++a)
                if (ma & (mask_t{1} << a)) rows_a[idx++] = a;
        }
        for (mask_t mb = 0; mb < (mask_t{1} << source_dim); ++mb) {
            if (std::popcount(mb) != k) continue;
            std::array<int, form_max_covectors> cols_b{};
            {
                int idx = 0;
                for (int b = 0; b < source_dim; ++b)
                    if (mb & (mask_t{1} << b)) cols_b[idx++] = b;
            }
            minor.assign(static_cast<size_t>(k) * k, 0.0);
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j) minor[i * k + j] = jac[rows_a[i]][cols_b[j]];
            const double d = k == 0 ? 1.0 : small_det(minor, k);
            if (d == 0.0) continue;
            r[mb] += omega[ma] * cplx(d);
        }
    }
    return r;
}

} // namespace bouquet
