#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "bouquet/exterior.hpp"

namespace bouquet {

// Complex Grassmann algebra on q <= 8 generators.  The generators model all
// odd quantities in play: odd coordinates, odd family parameters, and odd
// tangent data; which bits play which role is a caller-side convention.
using Grassmann = Exterior<cplx>;

inline constexpr int grassmann_max_generators = 8;

inline Grassmann grassmann_zero(int q) {
    if (q > grassmann_max_generators) throw DimensionError("Grassmann: more than 8 generators");
    return Grassmann(q, cplx(0.0));
}

inline Grassmann grassmann_scalar(int q, cplx value) {
    Grassmann g = grassmann_zero(q);
    g[0] = value;
    return g;
}

inline Grassmann grassmann_generator(int q, int j) {
    if (j < 0 || j >= q) throw DimensionError("Grassmann: generator index out of range");
    Grassmann g = grassmann_zero(q);
    g[mask_t{1} << j] = 1.0;
    return g;
}

// S-point of R^{1|1}: an even time component and an odd theta component.
// Parity is enforced at construction; arithmetic then preserves it.
struct SuperPoint11 {
    Grassmann t;
    Grassmann theta;

    SuperPoint11(Grassmann t_, Grassmann theta_) : t(std::move(t_)), theta(std::move(theta_)) {
        if (!t.compatible(theta)) throw DimensionError("SuperPoint11: mismatched generator counts");
        if (!t.is_even()) throw ParityError("SuperPoint11: time component must be even");
        if (!theta.is_odd()) throw ParityError("SuperPoint11: theta component must be odd");
    }

    static SuperPoint11 identity(int q) {
        return SuperPoint11(grassmann_zero(q), grassmann_zero(q));
    }
};

// Group law of E^{1|1}: (t,theta)·(s,eta) = (t + s + theta·eta, theta + eta).
inline SuperPoint11 compose(const SuperPoint11& p, const SuperPoint11& q) {
    if (!p.t.compatible(q.t)) throw DimensionError("compose: mismatched generator counts");
    return SuperPoint11(p.t + q.t + p.theta * q.theta, p.theta + q.theta);
}

// Odd elements square to zero in a supercommutative algebra, so (-t,-theta)
// is a genuine two-sided inverse.
inline SuperPoint11 inverse(const SuperPoint11& p) {
    return SuperPoint11(-p.t, -p.theta);
}

// Value of a superfunction at fixed time: f(t, ·) = even + theta·odd.
struct SuperValue {
    Grassmann even;
    Grassmann odd;
};

inline double max_abs_diff(const SuperValue& a, const SuperValue& b) {
    return std::max(max_abs_diff(a.even, b.even), max_abs_diff(a.odd, b.odd));
}

// Function on R^{1|1} in components, f(t,theta) = f0(t) + theta f1(t),
// carrying its total parity tag: an even f has even f0 and odd f1, an odd f
// the reverse.  Derivatives in t come from analytic callbacks when supplied
// and central differences otherwise.
struct SuperFunction {
    enum class Parity { even, odd };

    std::function<Grassmann(double)> f0;
    std::function<Grassmann(double)> f1;
    std::function<Grassmann(double)> df0; // optional analytic d/dt
    std::function<Grassmann(double)> df1; // optional analytic d/dt
    Parity parity = Parity::even;
    double fd_step = 1e-5;

    SuperValue value(double t) const { return SuperValue{f0(t), f1(t)}; }

    Grassmann d_f0(double t) const { return df0 ? df0(t) : central_difference(f0, t); }
    Grassmann d_f1(double t) const { return df1 ? df1(t) : central_difference(f1, t); }

    Grassmann central_difference(const std::function<Grassmann(double)>& g, double t) const {
        return (g(t + fd_step) - g(t - fd_step)) * cplx(1.0 / (2.0 * fd_step));
    }

    // Validates the parity tag against sampled component values.
    void validate(double t) const {
        const bool f0_even = parity == Parity::even;
        const Grassmann v0 = f0(t), v1 = f1(t);
        if (f0_even ? !v0.is_even() : !v0.is_odd())
            throw ParityError("SuperFunction: f0 parity does not match tag");
        if (f0_even ? !v1.is_odd() : !v1.is_even())
            throw ParityError("SuperFunction: f1 parity does not match tag");
    }
};

// D = d/dtheta + theta d/dt acting on components:
// D(f0 + theta f1) = f1 + theta f0'.  D is odd, so the parity tag flips, and
// analytic derivative callbacks propagate so that D(Df) reproduces d/dt f
// exactly when the input carries analytic derivatives.
inline SuperFunction super_derivative(const SuperFunction& f) {
    SuperFunction r;
    r.f0 = f.f1;
    r.f1 = [f](double t) { return f.d_f0(t); };
    r.df0 = f.df1;
    if (f.df0) {
        // d/dt of f0' via a finite difference of the analytic callback; only
        // consulted when D is applied a third time.
        r.df1 = [f](double t) { return f.central_difference(f.df0, t); };
    }
    r.parity = (f.parity == SuperFunction::Parity::even) ? SuperFunction::Parity::odd
                                                         : SuperFunction::Parity::even;
    r.fd_step = f.fd_step;
    return r;
}

inline SuperValue super_derivative(const SuperFunction& f, double t) {
    return SuperValue{f.f1(t), f.d_f0(t)};
}

inline SuperFunction partial_t(const SuperFunction& f) {
    SuperFunction r;
    r.f0 = [f](double t) { return f.d_f0(t); };
    r.f1 = [f](double t) { return f.d_f1(t); };
    r.parity = f.parity;
    r.fd_step = f.fd_step;
    return r;
}

// Pullback of a chart function along the evaluation map at a fixed S-point
// of the odd tangent bundle: ev*(f) = f(x) + theta <df(x), psi>.  The
// supplied differential is cross-checked against central differences of f
// at x; disagreement beyond tol means the pair (f, df) is inconsistent.
inline SuperFunction ev_pullback(const std::function<double(const std::vector<double>&)>& f,
                                 const std::function<std::vector<double>(const std::vector<double>&)>& df,
                                 const std::vector<double>& x, const std::vector<Grassmann>& psi,
                                 double tol = 1e-6, double fd_step = 1e-5) {
    const size_t n = x.size();
    if (psi.size() != n) throw DimensionError("ev_pullback: odd tangent size mismatch");
    const std::vector<double> grad = df(x);
    if (grad.size() != n) throw DimensionError("ev_pullback: differential size mismatch");
    for (size_t i = 0; i < n; ++i) {
        std::vector<double> xp = x, xm = x;
        xp[i] += fd_step;
        xm[i] -= fd_step;
        const double fd = (f(xp) - f(xm)) / (2.0 * fd_step);
        if (std::abs(fd - grad[i]) > tol)
            throw ConsistencyError("ev_pullback: supplied differential disagrees with finite differences");
    }
    const int q = n == 0 ? 0 : psi[0].generators();
    Grassmann odd = grassmann_zero(q);
    for (size_t i = 0; i < n; ++i) {
        if (!psi[i].is_odd()) throw ParityError("ev_pullback: odd tangent entry has even component");
        odd += psi[i] * cplx(grad[i]);
    }
    const Grassmann even = grassmann_scalar(q, f(x));
    SuperFunction r;
    r.f0 = [even](double) { return even; };
    r.f1 = [odd](double) { return odd; };
    r.df0 = [q](double) { return grassmann_zero(q); };
    r.df1 = [q](double) { return grassmann_zero(q); };
    r.parity = SuperFunction::Parity::even;
    return r;
}

} // namespace bouquet
