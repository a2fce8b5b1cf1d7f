#pragma once

#include <bit>
#include <complex>
#include <cstdint>
#include <vector>

#include "bouquet/complex_matrix.hpp"
#include "bouquet/errors.hpp"

namespace bouquet {

using mask_t = std::uint32_t;

// Sign produced when the sorted generator monomial e_a is multiplied by e_b
// (disjoint masks): (-1)^k where k counts pairs (i in a, j in b) with i > j,
// i.e. the transpositions needed to interleave the two sorted lists.
inline int koszul_sign(mask_t a, mask_t b) {
    int swaps = 0;
    while (b != 0) {
        const int j = std::countr_zero(b);
        // Generators of `a` strictly above position j must hop over e_j.
        swaps += std::popcount(a >> (j + 1));
        b &= b - 1;
    }
    return (swaps & 1) ? -1 : 1;
}

// Coefficient-ring hooks shared by the scalar and matrix instantiations.
inline bool coeff_is_zero(const cplx& c) { return c == cplx(0.0); }
inline bool coeff_is_zero(const CMatrix& m) { return m.is_zero(); }
inline double coeff_abs(const cplx& c) { return std::abs(c); }
inline double coeff_abs(const CMatrix& m) { return m.max_abs(); }
inline bool coeff_same_shape(const cplx&, const cplx&) { return true; }
inline bool coeff_same_shape(const CMatrix& a, const CMatrix& b) { return a.same_shape(b); }

// Element of the exterior algebra on `q` anticommuting generators with
// coefficients in Coeff (complex scalars, or fiber endomorphisms in which
// case coefficients multiply in fiber order while generator monomials merge
// with the Koszul sign).  Dense storage indexed by generator bitmask.
//
// The same container serves three roles that the theory identifies anyway:
// Grassmann function algebras, differential-form values (generators =
// covectors), and odd-tangent data along super paths.
template <class Coeff>
class Exterior {
  public:
    // Generous internal cap; public entry points enforce the tighter
    // per-module limits (8 Grassmann generators, 6 covectors).
    static constexpr int max_generators = 10;

    Exterior() : Exterior(0, Coeff{}) {}
    Exterior(int q, Coeff zero) : q_(q), zero_(std::move(zero)) {
        if (q < 0 || q > max_generators) throw DimensionError("Exterior: generator count out of range");
        c_.assign(size_t{1} << q_, zero_);
    }

    int generators() const { return q_; }
    size_t size() const { return c_.size(); }
    const Coeff& zero_prototype() const { return zero_; }

    const Coeff& operator[](mask_t m) const { return c_[m]; }
    Coeff& operator[](mask_t m) { return c_[m]; }

    bool compatible(const Exterior& o) const {
        return q_ == o.q_ && coeff_same_shape(zero_, o.zero_);
    }

    Exterior& operator+=(const Exterior& o) {
        require_compatible(o, "operator+=");
        for (size_t m = 0; m < c_.size(); ++m) c_[m] += o.c_[m];
        return *this;
    }
    Exterior& operator-=(const Exterior& o) {
        require_compatible(o, "operator-=");
        for (size_t m = 0; m < c_.size(); ++m) c_[m] -= o.c_[m];
        return *this;
    }
    Exterior& operator*=(const cplx& s) {
        for (auto& c : c_) c *= s;
        return *this;
    }

    friend Exterior operator+(Exterior a, const Exterior& b) { return a += b; }
    friend Exterior operator-(Exterior a, const Exterior& b) { return a -= b; }
    friend Exterior operator*(Exterior a, const cplx& s) { return a *= s; }
    friend Exterior operator*(const cplx& s, Exterior a) { return a *= s; }
    friend Exterior operator-(Exterior a) {
        for (auto& c : a.c_) c = -c;
        return a;
    }

    friend Exterior operator*(const Exterior& a, const Exterior& b) {
        a.require_compatible(b, "operator*");
        Exterior r(a.q_, a.zero_);
        for (mask_t ma = 0; ma < a.c_.size(); ++ma) {
            if (coeff_is_zero(a.c_[ma])) continue;
            for (mask_t mb = 0; mb < b.c_.size(); ++mb) {
                if (ma & mb) continue;
                if (coeff_is_zero(b.c_[mb])) continue;
                Coeff prod = a.c_[ma] * b.c_[mb];
                if (koszul_sign(ma, mb) < 0)
                    r.c_[ma | mb] -= prod;
                else
                    r.c_[ma | mb] += prod;
            }
        }
        return r;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& c : c_) m = std::max(m, coeff_abs(c));
        return m;
    }

    bool is_zero() const {
        for (const auto& c : c_)
            if (!coeff_is_zero(c)) return false;
        return true;
    }

    // Parity is structural: a coefficient is either exactly zero or it
    // contributes its monomial's degree.  Products of exact inputs keep
    // exact zeros, so no tolerance is involved.
    bool is_even() const { return parity_clean(1); }
    bool is_odd() const { return parity_clean(0); }

    Exterior even_part() const { return parity_part(0); }
    Exterior odd_part() const { return parity_part(1); }

    Exterior degree_part(int k) const {
        Exterior r(q_, zero_);
        for (mask_t m = 0; m < c_.size(); ++m)
            if (std::popcount(m) == k) r.c_[m] = c_[m];
        return r;
    }

    int top_degree() const {
        int d = 0;
        for (mask_t m = 0; m < c_.size(); ++m)
            if (!coeff_is_zero(c_[m])) d = std::max(d, std::popcount(m));
        return d;
    }

  private:
    bool parity_clean(int banned_parity) const {
        for (mask_t m = 0; m < c_.size(); ++m)
            if ((std::popcount(m) & 1) == banned_parity && !coeff_is_zero(c_[m])) return false;
        return true;
    }
    Exterior parity_part(int parity) const {
        Exterior r(q_, zero_);
        for (mask_t m = 0; m < c_.size(); ++m)
            if ((std::popcount(m) & 1) == parity) r.c_[m] = c_[m];
        return r;
    }
    void require_compatible(const Exterior& o, const char* op) const {
        if (!compatible(o))
            throw DimensionError(std::string("Exterior: incompatible operands in ") + op);
    }

    int q_ = 0;
    Coeff zero_;
    std::vector<Coeff> c_;
};

inline double max_abs_diff(const Exterior<cplx>& a, const Exterior<cplx>& b) {
    return (a - b).max_abs();
}
inline double max_abs_diff(const Exterior<CMatrix>& a, const Exterior<CMatrix>& b) {
    return (a - b).max_abs();
}

} // namespace bouquet
