#include "doctest.h"
#include "support.hpp"

#include "chbu/numerics/piecewise.hpp"

using namespace chbu;
using chbu::testing::error_code_of;
using chbu::testing::q;

TEST_CASE("rational canonical text") {
    CHECK(Rational(2, 4).str() == "1/2");
    CHECK(Rational(-3, 6).str() == "-1/2");
    CHECK(Rational(3, -6).str() == "-1/2");
    CHECK(Rational(5).str() == "5/1");
    CHECK(Rational::parse("6/4") == Rational(3, 2));
    CHECK(Rational::parse("-7") == Rational(-7));
    CHECK(Rational::parse("+7/14") == Rational(1, 2));
    CHECK(error_code_of([] { Rational::parse("0.5"); }) == Errc::ParseError);
    CHECK(error_code_of([] { Rational::parse("1/0"); }) == Errc::ParseError);
    CHECK(error_code_of([] { Rational::parse("1/-2"); }) == Errc::ParseError);
    CHECK(error_code_of([] { Rational::parse(""); }) == Errc::ParseError);
}

TEST_CASE("rational text round-trip is lossless") {
    chbu::testing::Rng rng(7);
    for (int i = 0; i < 2000; ++i) {
        Rational x = rng.rational(-1000, 1000, 100000) / Rational(rng.integer(1, 1000));
        CHECK(Rational::parse(x.str()) == x);
    }
    Rational big = pow2(200) + Rational(1, 3);
    CHECK(Rational::parse(big.str()) == big);
}

TEST_CASE("rational helpers") {
    CHECK(ceil_log2(Rational(1)) == 0);
    CHECK(ceil_log2(Rational(2)) == 1);
    CHECK(ceil_log2(Rational(3)) == 2);
    CHECK(ceil_log2(Rational(5, 2)) == 2);
    CHECK(ceil_log2(Rational(1, 3)) == -1);
    CHECK(pow2(-3) == Rational(1, 8));
    CHECK(ceil(Rational(-3, 2)) == -1);
    CHECK(floor(Rational(-3, 2)) == -2);
    CHECK(error_code_of([] { Rational(1) / Rational(0); }) == Errc::InvalidArgument);
}

TEST_CASE("eval_poly examples") {
    auto c4 = PiecewisePoly::constant(0, 1, 4);
    CHECK(eval_poly(c4, Rational(1, 2)) == 4);

    PiecewisePoly ramp({0, 1}, {Coeffs{0, 2, 0}});
    CHECK(eval_poly(ramp, Rational(1, 3)) == Rational(2, 3));

    PiecewisePoly step({0, 1, 2}, {Coeffs{1, 0, 0}, Coeffs{0, 0, 0}});
    CHECK(eval_poly(step, 1) == 0);
    CHECK(eval_poly(step, 2) == 0);
    PiecewisePoly last({0, 1, 2}, {Coeffs{0, 0, 0}, Coeffs{1, 0, 0}});
    CHECK(eval_poly(last, 2) == 1);
    CHECK(eval_poly(last, 0) == 0);

    CHECK(error_code_of([&] { eval_poly(step, 3); }) == Errc::OutOfDomain);
    CHECK(error_code_of([&] { eval_poly(step, -1); }) == Errc::OutOfDomain);
}

TEST_CASE("constructor invariants") {
    CHECK(error_code_of([] { PiecewisePoly({0, 0}, {Coeffs{}}); }) == Errc::InvalidArgument);
    CHECK(error_code_of([] { PiecewisePoly({0, 1, 2}, {Coeffs{}}); }) == Errc::InvalidArgument);
    CHECK(error_code_of([] { PiecewisePoly({0, 1, 2}, {Coeffs{0, 1, 0}, Coeffs{0, 0, 0}}, true); }) ==
          Errc::InvalidArgument);
    CHECK_NOTHROW(PiecewisePoly({0, 1, 2}, {Coeffs{0, 1, 0}, Coeffs{1, 0, 0}}, true));
}

TEST_CASE("integrate examples") {
    auto F = integrate(PiecewisePoly::constant(0, 1, 1));
    CHECK(F.integral_form());
    CHECK(F.pieces()[0] == Coeffs{0, 1, 0});

    auto G = integrate(PiecewisePoly({0, 1}, {Coeffs{0, 2, 0}}));
    CHECK(G.pieces()[0] == Coeffs{0, 0, 1});
    CHECK(G.eval(Rational(1, 3)) == Rational(1, 9));

    auto H = integrate(PiecewisePoly({0, 1, 2}, {Coeffs{0, 0, 0}, Coeffs{4, 0, 0}}));
    CHECK(H.pieces()[0] == Coeffs{0, 0, 0});
    CHECK(H.pieces()[1] == Coeffs{0, 4, 0});

    // Midpoint-rule quadrature oracle.
    PiecewisePoly f({0, Rational(1, 2), 2}, {Coeffs{1, 3, 0}, Coeffs{Rational(5, 2), -1, 0}});
    auto Ff = integrate(f);
    const int steps = 4000;
    double acc = 0, h = 2.0 / steps;
    for (int i = 0; i < steps; ++i) acc += f.eval_double((i + 0.5) * h) * h;
    CHECK(Ff.eval(2).to_double() == doctest::Approx(acc).epsilon(1e-6));

    CHECK(error_code_of([] { integrate(PiecewisePoly({0, 1}, {Coeffs{0, 0, 1}})); }) == Errc::DegreeTooHigh);
}

TEST_CASE("definite_integral examples") {
    CHECK(definite_integral(PiecewisePoly::constant(0, 1, 1), 0, 1) == 1);
    CHECK(definite_integral(PiecewisePoly::constant(0, 1, 1), Rational(1, 3), Rational(1, 3)) == 0);
    PiecewisePoly f({0, 1, 2}, {Coeffs{4, 0, 0}, Coeffs{0, 0, 0}});
    CHECK(definite_integral(f, Rational(1, 2), Rational(3, 2)) == 2);
    // Riemann-sum oracle.
    double acc = 0;
    for (int i = 0; i < 10000; ++i) acc += f.eval_double(0.5 + (i + 0.5) * 1e-4) * 1e-4;
    CHECK(acc == doctest::Approx(2.0));
    CHECK(error_code_of([&] { definite_integral(f, -1, 1); }) == Errc::OutOfDomain);
    CHECK(error_code_of([&] { definite_integral(f, 1, 3); }) == Errc::OutOfDomain);
}

TEST_CASE("definite_integral is additive over adjacent intervals") {
    chbu::testing::Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Rational> bps{0};
        std::vector<Coeffs> pieces;
        int k = static_cast<int>(rng.integer(1, 5));
        for (int i = 0; i < k; ++i) {
            bps.push_back(bps.back() + rng.rational(Rational(1, 8), 2, 16));
            pieces.push_back(Coeffs{rng.rational(-2, 2), rng.rational(-2, 2), rng.rational(-2, 2)});
        }
        PiecewisePoly f(bps, pieces);
        std::vector<Rational> pts{rng.rational(0, bps.back(), 32), rng.rational(0, bps.back(), 32),
                                  rng.rational(0, bps.back(), 32)};
        std::sort(pts.begin(), pts.end());
        CHECK(definite_integral(f, pts[0], pts[2]) ==
              definite_integral(f, pts[0], pts[1]) + definite_integral(f, pts[1], pts[2]));
    }
}

TEST_CASE("integrate then differentiate recovers the density") {
    chbu::testing::Rng rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Rational> bps{rng.rational(-2, 2, 8)};
        std::vector<Coeffs> pieces;
        int k = static_cast<int>(rng.integer(1, 6));
        for (int i = 0; i < k; ++i) {
            bps.push_back(bps.back() + rng.rational(Rational(1, 16), 1, 16));
            pieces.push_back(Coeffs{rng.rational(-3, 3), rng.rational(-3, 3), 0});
        }
        PiecewisePoly f(bps, pieces);
        auto F = integrate(f);
        CHECK(F.eval(F.lo()) == 0);
        CHECK(F.derivative() == f);
        CHECK(F.eval(F.hi()) == definite_integral(f, f.lo(), f.hi()));
    }
}

TEST_CASE("density builder and addition") {
    auto d = DensityBuilder(0, 12).constant(0, 1, 4).constant(2, 3, 4).constant(1, 2, 1).build();
    CHECK(d.eval(Rational(1, 2)) == 4);
    CHECK(d.eval(Rational(3, 2)) == 1);
    CHECK(d.eval(5) == 0);
    CHECK(definite_integral(d, 0, 12) == 9);

    auto r = DensityBuilder(0, 4).ramp(1, 2, 2).constant(1, 3, 1).build();
    CHECK(r.eval(Rational(3, 2)) == 2);
    CHECK(definite_integral(r, 1, 2) == 2);

    auto s = add(PiecewisePoly::constant(0, 1, 1), PiecewisePoly::constant(Rational(1, 2), 2, 3));
    CHECK(s.lo() == 0);
    CHECK(s.hi() == 2);
    CHECK(s.eval(Rational(1, 4)) == 1);
    CHECK(s.eval(Rational(3, 4)) == 4);
    CHECK(s.eval(Rational(3, 2)) == 3);
}

TEST_CASE("domain scaling") {
    auto F = integrate(DensityBuilder(0, 12).constant(1, 2, 1).build());
    auto G = F.scaled_domain(Rational(1, 12));
    CHECK(G.hi() == 1);
    for (int k = 0; k <= 24; ++k) CHECK(G.eval(Rational(k, 24)) == F.eval(Rational(k, 2)));
}
