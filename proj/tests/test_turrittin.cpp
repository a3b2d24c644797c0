#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "sectoria/errors.hpp"
#include "sectoria/honda.hpp"
#include "sectoria/turrittin.hpp"

using namespace sectoria;

namespace {
constexpr double kPi = 3.14159265358979323846;

OperatorSpec scalar_op(int N, const std::string& a) {
    OperatorSpec op;
    op.m = 1;
    op.N = N;
    op.A = {{Polynomial::parse(a)}};
    return op;
}

PuiseuxPoly mono(double re, long num, long den = 1) {
    return PuiseuxPoly::monomial(cplx(re, 0.0), num, den);
}
} // namespace

TEST_CASE("Polynomial parse / print / eval") {
    Polynomial p = Polynomial::parse("1 + 2*z^(1) + (0+1i)*z^(2)");
    CHECK(p.degree() == 2);
    cplx z(0.3, -0.2);
    CHECK(std::abs(p.eval(z) - (1.0 + 2.0 * z + cplx(0, 1) * z * z)) < 1e-14);
    Polynomial q = Polynomial::parse(p.to_string());
    CHECK(q.c == p.c);
    CHECK_THROWS_AS(Polynomial::parse("z^(-1)"), error);
    CHECK_THROWS_AS(Polynomial::parse("z^(1/2)"), error);
}

TEST_CASE("scalar encoding") {
    ScalarOperator s = ScalarOperator::from_operator(scalar_op(2, "1"));
    CHECK(s.order() == 1);
    CHECK(s.a[1].coeff(2, 1) == cplx(1.0, 0.0));
    CHECK(s.a[0].coeff(0, 1) == cplx(1.0, 0.0));
}

TEST_CASE("newton polygon fixtures") {
    // z^2 u' + u: slope 1, multiplicity 1
    auto np1 = newton_polygon(ScalarOperator::from_operator(scalar_op(2, "1")));
    REQUIRE(np1.size() == 1);
    CHECK(np1[0].num == 1);
    CHECK(np1[0].den == 1);
    CHECK(np1[0].multiplicity == 1);

    // z u' - a u: regular (slope 0)
    auto np2 = newton_polygon(ScalarOperator::from_operator(scalar_op(1, "-2")));
    REQUIRE(np2.size() == 1);
    CHECK(np2[0].num == 0);
    CHECK(np2[0].multiplicity == 1);

    // z^4 u'' - u: slope 1, multiplicity 2
    ScalarOperator s3;
    s3.a = {mono(-1.0, 0), PuiseuxPoly::zero(), mono(1.0, 4)};
    auto np3 = newton_polygon(s3);
    REQUIRE(np3.size() == 1);
    CHECK(np3[0].num == 1);
    CHECK(np3[0].den == 1);
    CHECK(np3[0].multiplicity == 2);

    // z^3 u'' - u: slope 1/2, multiplicity 2 (ramified)
    ScalarOperator s4;
    s4.a = {mono(-1.0, 0), PuiseuxPoly::zero(), mono(1.0, 3)};
    auto np4 = newton_polygon(s4);
    REQUIRE(np4.size() == 1);
    CHECK(np4[0].num == 1);
    CHECK(np4[0].den == 2);
    CHECK(np4[0].multiplicity == 2);
}

TEST_CASE("exponential parts: first-order closed forms") {
    // z^2 u' + u = 0 -> u = e^{1/z}: Lambda = z^{-1}
    ExponentialPart e1 = exponential_parts(scalar_op(2, "1"));
    CHECK(e1.l == 1);
    REQUIRE(e1.lambdas.size() == 1);
    CHECK(e1.lambdas[0] == mono(1.0, -1));

    // z^3 u' - 2u = 0 -> Lambda = -z^{-2}
    ExponentialPart e2 = exponential_parts(scalar_op(3, "-2"));
    REQUIRE(e2.lambdas.size() == 1);
    CHECK(e2.lambdas[0] == mono(-1.0, -2));

    // z u' - a u = 0 (regular singular): Lambda = 0 for a in {1/2, 1, 2}
    for (const char* a : {"-0.5", "-1", "-2"}) {
        ExponentialPart e = exponential_parts(scalar_op(1, a));
        CHECK(e.l == 1);
        REQUIRE(e.lambdas.size() == 1);
        CHECK(e.lambdas[0].is_zero());
    }
}

TEST_CASE("exponential parts: decoupled 2x2 diag(1,-1)/z^2") {
    OperatorSpec op;
    op.m = 2;
    op.N = 2;
    op.A = {{Polynomial::parse("1"), Polynomial{}},
            {Polynomial{}, Polynomial::parse("-1")}};
    ExponentialPart ep = exponential_parts(op);
    CHECK(ep.l == 1);
    REQUIRE(ep.lambdas.size() == 2);
    // sorted canonically: -z^{-1} before z^{-1}
    CHECK(ep.lambdas[0] == mono(-1.0, -1));
    CHECK(ep.lambdas[1] == mono(1.0, -1));
}

TEST_CASE("exponential parts: repeated leading eigenvalues rejected") {
    OperatorSpec op;
    op.m = 2;
    op.N = 2;
    op.A = {{Polynomial::parse("1"), Polynomial::parse("z")},
            {Polynomial{}, Polynomial::parse("1")}};
    CHECK_THROWS_AS(exponential_parts(op), error);
}

TEST_CASE("scalar higher order: z^4 u'' = u and the ramified z^3 u'' = u") {
    // solutions ~ z e^{±1/z}: Lambda = ±z^{-1}
    ScalarOperator s;
    s.a = {mono(-1.0, 0), PuiseuxPoly::zero(), mono(1.0, 4)};
    ExponentialPart ep = exponential_parts_scalar(s);
    REQUIRE(ep.lambdas.size() == 2);
    CHECK(ep.l == 1);
    CHECK(std::abs(ep.lambdas[0].coeff(-1, 1) - cplx(-1.0, 0.0)) < 1e-10);
    CHECK(std::abs(ep.lambdas[1].coeff(-1, 1) - cplx(1.0, 0.0)) < 1e-10);

    // z^3 u'' = u: Lambda = ∓2 z^{-1/2}, l = 2
    ScalarOperator r;
    r.a = {mono(-1.0, 0), PuiseuxPoly::zero(), mono(1.0, 3)};
    ExponentialPart er = exponential_parts_scalar(r);
    REQUIRE(er.lambdas.size() == 2);
    CHECK(er.l == 2);
    CHECK(std::abs(er.lambdas[0].coeff(-1, 2) - cplx(-2.0, 0.0)) < 1e-10);
    CHECK(std::abs(er.lambdas[1].coeff(-1, 2) - cplx(2.0, 0.0)) < 1e-10);
}

TEST_CASE("split_exponent_integral") {
    // b = 1 + 3z + 5z^2, N = 2: -int b z^{-2} = z^{-1} - 3 log z - 5z
    ExponentSplit sp = split_exponent_integral({cplx(1, 0), cplx(3, 0), cplx(5, 0)}, 2);
    CHECK(sp.lambda == mono(1.0, -1));
    CHECK(sp.rho == cplx(-3.0, 0.0));
    CHECK(sp.analytic == mono(-5.0, 1));
}

TEST_CASE("formal fundamental: regular singular z u' - 1/2 u") {
    OperatorSpec op = scalar_op(1, "-0.5");
    ExponentialPart ep = exponential_parts(op);
    FormalFundamental ff = formal_fundamental(op, ep, 10);
    // F = [z^{1/2}]
    cplx z(0.09, 0.02);
    cplx expect = std::exp(0.5 * std::log(z));
    CHECK(std::abs(ff.entry(0, 0, z) - expect) < 1e-10);
    CHECK(ff.cert.ok);
    CHECK(ff.cert.M == doctest::Approx(0.5).epsilon(0.5));  // within 0.25 of 1/2
    CHECK(std::abs(ff.cert.M - 0.5) <= 0.25);
}

TEST_CASE("formal fundamental: irregular scalar z^2 u' + u") {
    OperatorSpec op = scalar_op(2, "1");
    ExponentialPart ep = exponential_parts(op);
    FormalFundamental ff = formal_fundamental(op, ep, 10);
    // full solution e^{1/z} = F e^{Lambda} with F = 1
    cplx z(0.2, 0.05);
    CHECK(std::abs(ff.entry(0, 0, z) - 1.0) < 1e-12);
    CHECK(ff.cert.ok);
    CHECK(std::abs(ff.cert.M - 0.0) <= 0.25);
}

TEST_CASE("formal fundamental: coupled system residual decays with order") {
    OperatorSpec op;
    op.m = 2;
    op.N = 2;
    op.A = {{Polynomial::parse("1"), Polynomial::parse("z")},
            {Polynomial::parse("z"), Polynomial::parse("-1")}};
    ExponentialPart ep = exponential_parts(op);
    REQUIRE(ep.lambdas.size() == 2);
    CHECK(ep.lambdas[0] == mono(-1.0, -1));
    CHECK(ep.lambdas[1] == mono(1.0, -1));

    // relative residual of each column of F e^Lambda shrinks sharply from
    // order 10 to order 20 deep inside the disc (|z| ~ 0.03, well inside the
    // optimal-truncation radius); derivatives via Cauchy's formula
    auto col_residual = [&](const FormalFundamental& ff) {
        double worst = 0.0;
        for (int k = 0; k < 2; ++k) {
            double tau = ep.lambdas[k].coeff(-1, 1).real() < 0 ? 0.0 : kPi;
            auto u = [&](int i, cplx w) {
                return ff.entry(i, k, w) * std::exp(ep.lambdas[k].eval(w, tau));
            };
            for (int t = 0; t < 6; ++t) {
                cplx z = std::polar(0.028 + 0.001 * t, tau + 0.03 * (t - 2.5));
                double scale = std::exp(ep.lambdas[k].eval(z, tau).real());
                for (int i = 0; i < 2; ++i) {
                    cplx du = cauchy_derivative([&](cplx w) { return u(i, w); }, z,
                                                0.3 * std::abs(z), 64);
                    cplx res = z * z * du;
                    for (int j = 0; j < 2; ++j) res += op.A[i][j].eval(z) * u(j, z);
                    worst = std::max(worst, std::abs(res) / scale);
                }
            }
        }
        return worst;
    };
    double r10 = col_residual(formal_fundamental(op, ep, 10));
    double r20 = col_residual(formal_fundamental(op, ep, 20));
    CHECK(r20 <= std::max(r10 / 10.0, 1e-12));
    CHECK(r10 < 1e-6);
}

TEST_CASE("fundamental_norm and growth certificate") {
    OperatorSpec op = scalar_op(2, "1");
    ExponentialPart ep = exponential_parts(op);
    FormalFundamental ff = formal_fundamental(op, ep, 8);
    CHECK(fundamental_norm(ff, cplx(0.1, 0.05)) == doctest::Approx(1.0));
    GrowthCert gc = verify_growth_bounds(ff, Sector(0.0, kPi / 4.0, 0.5), 64);
    CHECK(gc.ok);
    CHECK(gc.K >= 1.0);
}
