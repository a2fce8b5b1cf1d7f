#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "bouquet/grassmann.hpp"

using namespace bouquet;

namespace {

// Dyadic coefficients keep products and sums exact in binary floating point.
cplx dyadic(std::mt19937& rng) {
    std::uniform_int_distribution<int> d(-256, 256);
    return cplx(d(rng) / 256.0, d(rng) / 256.0);
}

Grassmann random_even(std::mt19937& rng, int q) {
    Grassmann g = grassmann_zero(q);
    for (mask_t m = 0; m < (mask_t{1} << q); ++m)
        if (__builtin_popcountll(m) % 2 == 0) g[m] = dyadic(rng);
    return g;
}

Grassmann random_odd(std::mt19937& rng, int q) {
    Grassmann g = grassmann_zero(q);
    for (mask_t m = 0; m < (mask_t{1} << q); ++m)
        if (__builtin_popcountll(m) % 2 == 1) g[m] = dyadic(rng);
    return g;
}

} // namespace

TEST_CASE("generators anticommute and square to zero") {
    const Grassmann t1 = grassmann_generator(3, 0);
    const Grassmann t2 = grassmann_generator(3, 1);
    CHECK((t1 * t1).max_abs() == 0.0);
    CHECK((t1 * t2 + t2 * t1).max_abs() == 0.0);
    CHECK((t1 * t2)[mask_t{3}] == cplx(1.0));
    CHECK((t2 * t1)[mask_t{3}] == cplx(-1.0));
}

TEST_CASE("multiplication is associative and distributive on random elements") {
    std::mt19937 rng(5);
    for (int i = 0; i < 50; ++i) {
        const Grassmann a = random_even(rng, 4) + random_odd(rng, 4);
        const Grassmann b = random_even(rng, 4) + random_odd(rng, 4);
        const Grassmann c = random_even(rng, 4) + random_odd(rng, 4);
        CHECK(max_abs_diff((a * b) * c, a * (b * c)) == 0.0);
        CHECK(max_abs_diff(a * (b + c), a * b + a * c) == 0.0);
    }
}

TEST_CASE("even elements are central, odd elements anticommute") {
    std::mt19937 rng(6);
    for (int i = 0; i < 20; ++i) {
        const Grassmann e = random_even(rng, 4);
        const Grassmann o1 = random_odd(rng, 4);
        const Grassmann o2 = random_odd(rng, 4);
        CHECK(max_abs_diff(e * o1, o1 * e) == 0.0);
        CHECK((o1 * o2 + o2 * o1).max_abs() == 0.0);
    }
}

TEST_CASE("supergroup composition is associative and unital") {
    std::mt19937 rng(7);
    const SuperPoint11 e = SuperPoint11::identity(4);
    for (int i = 0; i < 200; ++i) {
        const SuperPoint11 p(random_even(rng, 4), random_odd(rng, 4));
        const SuperPoint11 q(random_even(rng, 4), random_odd(rng, 4));
        const SuperPoint11 r(random_even(rng, 4), random_odd(rng, 4));
        const SuperPoint11 lhs = compose(compose(p, q), r);
        const SuperPoint11 rhs = compose(p, compose(q, r));
        CHECK(max_abs_diff(lhs.t, rhs.t) == 0.0);
        CHECK(max_abs_diff(lhs.theta, rhs.theta) == 0.0);
        const SuperPoint11 le = compose(e, p);
        const SuperPoint11 re = compose(p, e);
        CHECK(max_abs_diff(le.t, p.t) == 0.0);
        CHECK(max_abs_diff(le.theta, p.theta) == 0.0);
        CHECK(max_abs_diff(re.t, p.t) == 0.0);
        CHECK(max_abs_diff(re.theta, p.theta) == 0.0);
    }
}

TEST_CASE("composition with the inverse returns to the identity") {
    std::mt19937 rng(8);
    for (int i = 0; i < 50; ++i) {
        const SuperPoint11 p(random_even(rng, 4), random_odd(rng, 4));
        const SuperPoint11 both = compose(p, inverse(p));
        CHECK((both.t).max_abs() == 0.0);
        CHECK((both.theta).max_abs() == 0.0);
    }
}

TEST_CASE("parity constraints on superpoints are enforced") {
    const Grassmann even = grassmann_scalar(2, 1.0);
    const Grassmann odd = grassmann_generator(2, 0);
    CHECK_THROWS_AS(SuperPoint11(odd, odd), ParityError);
    CHECK_THROWS_AS(SuperPoint11(even, even), ParityError);
    CHECK_THROWS_AS(SuperPoint11(grassmann_zero(2), grassmann_generator(3, 0)), DimensionError);
}

namespace {

// f(t, theta) = f0(t) + theta f1(t) with polynomial coefficient curves.
SuperFunction polynomial_superfunction(int q, bool analytic) {
    SuperFunction f;
    f.f0 = [q](double t) {
        Grassmann g = grassmann_scalar(q, 2.0 + t * t * t);
        g[mask_t{3}] = cplx(0.5 * t * t, -t);
        return g;
    };
    f.f1 = [q](double t) {
        Grassmann g = grassmann_zero(q);
        g[mask_t{1}] = cplx(1.0 + t * t, 0.25 * t);
        g[mask_t{4}] = cplx(-t, 2.0);
        return g;
    };
    if (analytic) {
        f.df0 = [q](double t) {
            Grassmann g = grassmann_scalar(q, 3.0 * t * t);
            g[mask_t{3}] = cplx(t, -1.0);
            return g;
        };
        f.df1 = [q](double t) {
            Grassmann g = grassmann_zero(q);
            g[mask_t{1}] = cplx(2.0 * t, 0.25);
            g[mask_t{4}] = cplx(-1.0, 0.0);
            return g;
        };
    }
    return f;
}

} // namespace

TEST_CASE("odd derivative squares to the time derivative, analytic policy") {
    const SuperFunction f = polynomial_superfunction(3, true);
    const SuperFunction dd = super_derivative(super_derivative(f));
    const SuperFunction dt = partial_t(f);
    for (double t : {-1.3, -0.2, 0.0, 0.7, 2.1}) {
        CHECK(max_abs_diff(dd.f0(t), dt.f0(t)) == 0.0);
        CHECK(max_abs_diff(dd.f1(t), dt.f1(t)) == 0.0);
    }
}

TEST_CASE("odd derivative squares to the time derivative, finite differences") {
    const SuperFunction f = polynomial_superfunction(3, false);
    const SuperFunction truth = polynomial_superfunction(3, true);
    const SuperFunction dd = super_derivative(super_derivative(f));
    for (double t : {-1.3, -0.2, 0.0, 0.7, 2.1}) {
        CHECK(max_abs_diff(dd.f0(t), truth.df0(t)) < 1e-7);
        CHECK(max_abs_diff(dd.f1(t), truth.df1(t)) < 1e-7);
    }
}

TEST_CASE("evaluation pullback produces the linearization in the odd directions") {
    const int q = 2;
    const std::vector<Grassmann> psi = {grassmann_generator(q, 0), grassmann_generator(q, 1)};
    const auto f = [](const std::vector<double>& x) { return x[0] * x[0] + 3.0 * x[1]; };
    const auto df = [](const std::vector<double>& x) {
        return std::vector<double>{2.0 * x[0], 3.0};
    };
    const SuperFunction pulled = ev_pullback(f, df, {1.5, -2.0}, psi);
    CHECK(pulled.f0(0.0)[0] == cplx(1.5 * 1.5 - 6.0));
    CHECK(pulled.f1(0.0)[mask_t{1}] == cplx(3.0));
    CHECK(pulled.f1(0.0)[mask_t{2}] == cplx(3.0));

    const auto bad_df = [](const std::vector<double>&) { return std::vector<double>{0.0, 0.0}; };
    CHECK_THROWS_AS(ev_pullback(f, bad_df, {1.5, -2.0}, psi), ConsistencyError);
}
