#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "specvar/trigpoly.hpp"

using namespace specvar;

namespace {

const CylinderDomain cyl{1.0, 1.0};

BoundaryPoly bnd_term(int n, Wave w, Sym s, double c) {
    BoundaryPoly p(cyl);
    p.add_term(BoundaryFreq{n, w, s}, c);
    return p;
}

TorusPoly torus_term(const TorusDomain& d, int m, int n, Wave w, double c) {
    TorusPoly p(d);
    p.add_term(TorusFreq{m, n, w}, c);
    return p;
}

TorusPoly random_torus_poly(const TorusDomain& d, std::mt19937& rng) {
    std::uniform_int_distribution<int> fdist(-3, 3);
    std::uniform_real_distribution<double> cdist(-2.0, 2.0);
    std::uniform_int_distribution<int> wdist(0, 1);
    TorusPoly p(d);
    for (int t = 0; t < 4; ++t)
        p.add_term(TorusFreq{fdist(rng), fdist(rng), wdist(rng) ? Wave::sin : Wave::cos}, cdist(rng));
    return p;
}

} // namespace

TEST_CASE("multiply: sin^2 = 1/2 - 1/2 cos 2theta") {
    auto s = bnd_term(1, Wave::sin, Sym::even, 1.0);
    auto p = multiply(s, s);
    CHECK(p.coefficient({0, Wave::cos, Sym::even}) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(p.coefficient({2, Wave::cos, Sym::even}) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(p.terms().size() == 2);
}

TEST_CASE("multiply: (sin t - a sin 3t) sin t expands to the even cosine triple") {
    const double a = 0.2;
    auto omega = bnd_term(1, Wave::sin, Sym::even, 1.0) + bnd_term(3, Wave::sin, Sym::even, -a);
    auto u1 = bnd_term(1, Wave::sin, Sym::even, 1.0);
    auto p = multiply(omega, u1);
    CHECK(p.coefficient({0, Wave::cos, Sym::even}) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(p.coefficient({2, Wave::cos, Sym::even}) == doctest::Approx(-0.5 * (1 + a)).epsilon(1e-15));
    CHECK(p.coefficient({4, Wave::cos, Sym::even}) == doctest::Approx(0.5 * a).epsilon(1e-15));
    CHECK(p.terms().size() == 3);

    auto u2 = bnd_term(1, Wave::cos, Sym::even, 1.0);
    auto q = multiply(omega, u2);
    CHECK(q.coefficient({2, Wave::sin, Sym::even}) == doctest::Approx(0.5 * (1 - a)).epsilon(1e-15));
    CHECK(q.coefficient({4, Wave::sin, Sym::even}) == doctest::Approx(-0.5 * a).epsilon(1e-15));
    CHECK(q.terms().size() == 2);
}

TEST_CASE("multiply: torus double angle on the (0,1) line") {
    const TorusDomain d{0.5, 1.0, 1.0};
    auto u1 = torus_term(d, 0, 1, Wave::sin, std::sqrt(2.0));
    auto u2 = torus_term(d, 0, 1, Wave::cos, std::sqrt(2.0));
    auto p = multiply(u1, u2);
    // sqrt2 sin * sqrt2 cos = sin(double angle): coefficient 1 on (0,2) sin.
    CHECK(p.coefficient({0, 2, Wave::sin}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(p.terms().size() == 1);

    auto sq = multiply(u1, u1);
    CHECK(sq.coefficient({0, 0, Wave::cos}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(sq.coefficient({0, 2, Wave::cos}) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("inner: boundary norms and orthogonality") {
    auto s1 = bnd_term(1, Wave::sin, Sym::even, 1.0);
    auto c1 = bnd_term(1, Wave::cos, Sym::even, 1.0);
    CHECK(inner(s1, s1) == doctest::Approx(two_pi).epsilon(1e-15));
    CHECK(inner(s1, c1) == 0.0);

    const double a = 0.2;
    auto omega = bnd_term(1, Wave::sin, Sym::even, 1.0) + bnd_term(3, Wave::sin, Sym::even, -a);
    CHECK(norm_sq(omega) == doctest::Approx(two_pi * (1 + a * a)).epsilon(1e-15));

    // Constants: 4*pi over the two circles, either parity; opposite parities
    // are orthogonal.
    CHECK(norm_sq(bnd_term(0, Wave::cos, Sym::even, 1.0)) == doctest::Approx(2 * two_pi).epsilon(1e-15));
    CHECK(norm_sq(bnd_term(0, Wave::cos, Sym::odd, 1.0)) == doctest::Approx(2 * two_pi).epsilon(1e-15));
    CHECK(inner(bnd_term(2, Wave::cos, Sym::even, 1.0), bnd_term(2, Wave::cos, Sym::odd, 1.0)) == 0.0);
}

TEST_CASE("inner: torus weights scale with area and metric scale") {
    const TorusDomain d{0.3, 1.2, 1.0};
    CHECK(norm_sq(torus_term(d, 0, 0, Wave::cos, 1.0)) == doctest::Approx(1.2).epsilon(1e-15));
    CHECK(norm_sq(torus_term(d, 2, -1, Wave::sin, 1.0)) == doctest::Approx(0.6).epsilon(1e-15));

    const TorusDomain unit_area{0.3, 1.2, 1.0 / 1.2};
    CHECK(norm_sq(torus_term(unit_area, 0, 1, Wave::sin, 1.0)) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("longitudinal parity multiplies like signs") {
    auto even = bnd_term(1, Wave::sin, Sym::even, 1.0);
    auto odd = bnd_term(2, Wave::cos, Sym::odd, 1.0);
    auto eo = multiply(even, odd);
    auto oo = multiply(odd, odd);
    for (const auto& [f, c] : eo.terms()) CHECK(f.s == Sym::odd);
    for (const auto& [f, c] : oo.terms()) CHECK(f.s == Sym::even);
    // Pointwise check on both circles.
    const auto& prod = eo;
    for (double theta : {0.3, 1.1, 4.0}) {
        CHECK(evaluate_circle(prod, theta, BoundaryCircle::upper) ==
              doctest::Approx(evaluate_circle(even, theta, BoundaryCircle::upper) *
                              evaluate_circle(odd, theta, BoundaryCircle::upper))
                  .epsilon(1e-13));
        CHECK(evaluate_circle(prod, theta, BoundaryCircle::lower) ==
              doctest::Approx(evaluate_circle(even, theta, BoundaryCircle::lower) *
                              evaluate_circle(odd, theta, BoundaryCircle::lower))
                  .epsilon(1e-13));
    }
}

TEST_CASE("canonicalization folds negative frequencies") {
    const TorusDomain d{0.0, 1.0, 1.0};
    TorusPoly p(d);
    p.add_term(TorusFreq{-1, 2, Wave::sin}, 1.0);
    CHECK(p.coefficient({1, -2, Wave::sin}) == doctest::Approx(-1.0));
    CHECK(p.terms().begin()->first.m == 1);

    // sin of the zero frequency vanishes.
    TorusPoly q(d);
    q.add_term(TorusFreq{0, 0, Wave::sin}, 5.0);
    CHECK(q.is_zero());

    // Exact cancellation prunes the stored term entirely.
    TorusPoly r(d);
    r.add_term(TorusFreq{1, 1, Wave::cos}, 0.75);
    r.add_term(TorusFreq{-1, -1, Wave::cos}, -0.75);
    CHECK(r.is_zero());
}

TEST_CASE("multiply is commutative and matches pointwise evaluation") {
    std::mt19937 rng(31u);
    const TorusDomain d{0.4, 1.3, 1.0};
    for (int rep = 0; rep < 10; ++rep) {
        auto f = random_torus_poly(d, rng);
        auto g = random_torus_poly(d, rng);
        auto fg = multiply(f, g);
        auto gf = multiply(g, f);
        for (const auto& [freq, c] : fg.terms())
            CHECK(gf.coefficient(freq) == doctest::Approx(c).epsilon(1e-12));
        for (double s : {0.17, 0.43})
            for (double r : {0.29, 0.81})
                CHECK(evaluate_lattice(fg, s, r) ==
                      doctest::Approx(evaluate_lattice(f, s, r) * evaluate_lattice(g, s, r))
                          .epsilon(1e-12));
    }
}

TEST_CASE("multiply is associative on random polynomials") {
    std::mt19937 rng(23u);
    const TorusDomain d{0.2, 1.2, 1.0};
    for (int rep = 0; rep < 6; ++rep) {
        auto f = random_torus_poly(d, rng);
        auto g = random_torus_poly(d, rng);
        auto h = random_torus_poly(d, rng);
        auto left = multiply(multiply(f, g), h);
        auto right = multiply(f, multiply(g, h));
        TorusPoly diff = left - right;
        for (const auto& [freq, c] : diff.terms()) CHECK(std::abs(c) <= 1e-12);
    }
}

TEST_CASE("inner(f*g, h) == inner(f, g*h) on random polynomials") {
    std::mt19937 rng(57u);
    const TorusDomain d{0.25, 1.1, 1.0};
    for (int rep = 0; rep < 10; ++rep) {
        auto f = random_torus_poly(d, rng);
        auto g = random_torus_poly(d, rng);
        auto h = random_torus_poly(d, rng);
        const double lhs = inner(multiply(f, g), h);
        const double rhs = inner(f, multiply(g, h));
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("Parseval: norm_sq equals weighted coefficient sum") {
    std::mt19937 rng(91u);
    const TorusDomain d{0.1, 1.4, 1.0};
    for (int rep = 0; rep < 10; ++rep) {
        auto f = random_torus_poly(d, rng);
        double s = 0.0;
        for (const auto& [freq, c] : f.terms()) s += c * c * term_norm_sq(d, freq);
        CHECK(norm_sq(f) == doctest::Approx(s).epsilon(1e-12));
    }
}

TEST_CASE("product bandwidth is bounded by the sum of input bandwidths") {
    std::mt19937 rng(13u);
    const TorusDomain d{0.2, 1.05, 1.0};
    for (int rep = 0; rep < 10; ++rep) {
        auto f = random_torus_poly(d, rng);
        auto g = random_torus_poly(d, rng);
        CHECK(multiply(f, g).bandwidth() <= f.bandwidth() + g.bandwidth());
    }
}

TEST_CASE("project: coefficient and exact residual") {
    auto s1 = bnd_term(1, Wave::sin, Sym::even, 1.0);
    const double inv = 1.0 / std::sqrt(two_pi);
    std::vector<BoundaryPoly> basis{inv * s1};
    auto pr = project(s1, basis);
    REQUIRE(pr.coefficients.size() == 1);
    CHECK(pr.coefficients[0] == doctest::Approx(std::sqrt(two_pi)).epsilon(1e-14));
    CHECK(pr.residual.is_zero());
}

TEST_CASE("project: round trip reassembles the input exactly") {
    std::mt19937 rng(3u);
    const TorusDomain d{0.35, 1.25, 1.0};
    std::vector<TorusPoly> basis{
        torus_term(d, 0, 1, Wave::sin, std::sqrt(2.0 / d.b)),
        torus_term(d, 0, 1, Wave::cos, std::sqrt(2.0 / d.b)),
        torus_term(d, 1, 0, Wave::sin, std::sqrt(2.0 / d.b)),
    };
    for (int rep = 0; rep < 8; ++rep) {
        auto f = random_torus_poly(d, rng);
        auto pr = project(f, basis);
        TorusPoly rebuilt = pr.residual;
        for (std::size_t i = 0; i < basis.size(); ++i) rebuilt += pr.coefficients[i] * basis[i];
        TorusPoly diff = rebuilt - f;
        CHECK(norm_sq(diff) <= 1e-24);
    }
}

TEST_CASE("project: rejects a non-orthonormal basis") {
    auto s1 = bnd_term(1, Wave::sin, Sym::even, 1.0);
    std::vector<BoundaryPoly> bad{s1}; // norm 2*pi, not 1
    CHECK_THROWS_AS(project(s1, bad), BasisNotOrthonormal);
}

TEST_CASE("operations on mismatched domains are rejected") {
    const TorusDomain d1{0.5, 1.0, 1.0};
    const TorusDomain d2{0.5, 1.1, 1.0};
    auto f = torus_term(d1, 0, 1, Wave::sin, 1.0);
    auto g = torus_term(d2, 0, 1, Wave::sin, 1.0);
    CHECK_THROWS_AS(multiply(f, g), DomainMismatch);
    CHECK_THROWS_AS(inner(f, g), DomainMismatch);
    // Same moduli, different metric scale: still distinct domains.
    const TorusDomain d3{0.5, 1.0, 2.0};
    auto h = torus_term(d3, 0, 1, Wave::sin, 1.0);
    CHECK_THROWS_AS(inner(f, h), DomainMismatch);
}
