#pragma once

#include <utility>

#include "bouquet/forms.hpp"
#include "bouquet/grassmann.hpp"

namespace bouquet {

// Lie-algebra-valued Grassmann element: same container as FormValue, but the
// generators are odd family parameters rather than covectors.
using MatrixGrassmann = Exterior<CMatrix>;

inline MatrixGrassmann matrix_grassmann(int q, int fiber_dim) {
    return MatrixGrassmann(q, CMatrix(fiber_dim, fiber_dim));
}

// Embed a pair (f0, f1) as f0 + theta*f1 over q+1 generators, theta being
// the new top generator (bit q).  theta * e_m = (-1)^{|m|} e_m theta fixes
// the stored coefficient at mask m|theta.
template <class Coeff>
Exterior<Coeff> join_theta(const Exterior<Coeff>& f0, const Exterior<Coeff>& f1) {
    if (!f0.compatible(f1)) throw DimensionError("join_theta: incompatible components");
    const int q = f0.generators();
    Exterior<Coeff> r(q + 1, f0.zero_prototype());
    const mask_t theta_bit = mask_t{1} << q;
    for (mask_t m = 0; m < (mask_t{1} << q); ++m) {
        r[m] = f0[m];
        if ((std::popcount(m) & 1) != 0)
            r[m | theta_bit] = -f1[m];
        else
            r[m | theta_bit] = f1[m];
    }
    return r;
}

template <class Coeff>
std::pair<Exterior<Coeff>, Exterior<Coeff>> split_theta(const Exterior<Coeff>& f) {
    const int q = f.generators() - 1;
    if (q < 0) throw DimensionError("split_theta: no generator to split off");
    Exterior<Coeff> f0(q, f.zero_prototype());
    Exterior<Coeff> f1(q, f.zero_prototype());
    const mask_t theta_bit = mask_t{1} << q;
    for (mask_t m = 0; m < (mask_t{1} << q); ++m) {
        f0[m] = f[m];
        if ((std::popcount(m) & 1) != 0)
            f1[m] = -f[m | theta_bit];
        else
            f1[m] = f[m | theta_bit];
    }
    return {f0, f1};
}

// Constant super connection datum A = dtheta (x) alpha + theta dtheta (x) a
// on the worldline, with Lie-algebra-valued Grassmann components.
struct SuperConnectionForm {
    MatrixGrassmann alpha; // odd
    MatrixGrassmann a;     // even

    SuperConnectionForm(MatrixGrassmann alpha_, MatrixGrassmann a_)
        : alpha(std::move(alpha_)), a(std::move(a_)) {
        if (!alpha.compatible(a)) throw DimensionError("SuperConnectionForm: mismatched components");
        if (!alpha.is_odd()) throw ParityError("SuperConnectionForm: alpha must be odd");
        if (!a.is_even()) throw ParityError("SuperConnectionForm: a must be even");
    }
};

// Gauge transformation, stored as the even invertible group-like element
// g = exp(c + theta w) of the algebra over q+1 generators.  Composition of
// gauge maps is the plain product of representatives.
struct GaugeMap {
    Exterior<CMatrix> rep; // over q+1 generators, even, invertible body

    int base_generators() const { return rep.generators() - 1; }
};

inline GaugeMap gauge_identity(int q, int fiber_dim) {
    Exterior<CMatrix> rep(q + 1, CMatrix(fiber_dim, fiber_dim));
    rep[0] = CMatrix::identity(fiber_dim);
    return GaugeMap{rep};
}

// g = exp(c + theta w); c even and w odd make the exponent even overall.
inline GaugeMap gauge_exp(const MatrixGrassmann& c, const MatrixGrassmann& w) {
    if (!c.is_even()) throw ParityError("gauge_exp: even exponent component has odd part");
    if (!w.is_odd()) throw ParityError("gauge_exp: odd exponent component has even part");
    return GaugeMap{exp_even(join_theta(c, w))};
}

// The reduction map of the worldline gauge argument: g = exp(-theta alpha).
inline GaugeMap gauge_reduction(const MatrixGrassmann& alpha) {
    if (!alpha.is_odd()) throw ParityError("gauge_reduction: alpha must be odd");
    MatrixGrassmann zero(alpha.generators(), alpha.zero_prototype());
    return gauge_exp(zero, -alpha);
}

inline GaugeMap compose(const GaugeMap& first, const GaugeMap& second) {
    if (first.rep.generators() != second.rep.generators())
        throw DimensionError("GaugeMap compose: mismatched generator counts");
    return GaugeMap{first.rep * second.rep};
}

// A |-> g^{-1} A g + g^{-1} Dg with D = d/dtheta on t-constant gauge maps.
// Contracted with D, the connection reads alpha + theta a; the computation
// runs in the q+1 generator algebra and splits back into components.
inline SuperConnectionForm gauge_transform(const SuperConnectionForm& A, const GaugeMap& g) {
    if (g.base_generators() != A.alpha.generators())
        throw DimensionError("gauge_transform: generator counts do not match");
    const Exterior<CMatrix> a_hat = join_theta(A.alpha, A.a);
    const Exterior<CMatrix> ginv = inverse_even(g.rep);
    const MatrixGrassmann dtheta_g = split_theta(g.rep).second;
    MatrixGrassmann zero(dtheta_g.generators(), dtheta_g.zero_prototype());
    const Exterior<CMatrix> transformed =
        ginv * a_hat * g.rep + ginv * join_theta(dtheta_g, zero);
    auto [alpha_p, a_p] = split_theta(transformed);
    return SuperConnectionForm(std::move(alpha_p), std::move(a_p));
}

} // namespace bouquet
