#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "sectoria/errors.hpp"
#include "sectoria/json_io.hpp"

using namespace sectoria;

namespace {
constexpr double kPi = 3.14159265358979323846;
} // namespace

TEST_CASE("parse_json error diagnostics") {
    CHECK_THROWS_AS(parse_json("{oops", "spec.json"), error);
    try {
        parse_json("[1,", "spec.json");
    } catch (const error& e) {
        CHECK(e.code() == errc::parse_error);
        CHECK(std::string(e.what()).find("spec.json") != std::string::npos);
    }
    ojson j = parse_json("{\"a\": 1}");
    CHECK(j["a"] == 1);
}

TEST_CASE("operator round trip") {
    OperatorSpec op;
    op.m = 2;
    op.N = 2;
    op.A = {{Polynomial::parse("1"), Polynomial::parse("z")},
            {Polynomial::parse("0.5*z^(2)"), Polynomial::parse("-1")}};
    op.disc_radius = 0.8;
    ojson j = operator_to_json(op);
    CHECK(j["schema"] == kSchemaTag);
    OperatorSpec back = operator_from_json(j);
    CHECK(back.m == op.m);
    CHECK(back.N == op.N);
    CHECK(back.disc_radius == op.disc_radius);
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) CHECK(back.A[i][k].c == op.A[i][k].c);
    // round trip is idempotent on the serialized form
    CHECK(operator_to_json(back) == j);
}

TEST_CASE("band round trip") {
    Band b;
    b.lower = CurveSpec{PuiseuxPoly::constant(cplx(kPi - 0.4, 0.0)), 0.3};
    b.upper = CurveSpec{PuiseuxPoly::constant(cplx(kPi, 0.0)) +
                            PuiseuxPoly::monomial(cplx(1.0, 0.0), 1, 2),
                        0.3};
    b.R = 0.3;
    ojson j = band_to_json(b);
    Band back = band_from_json(j);
    CHECK(back.R == b.R);
    CHECK(back.lower.poly == b.lower.poly);
    CHECK(back.upper.poly == b.upper.poly);
    CHECK(band_to_json(back) == j);
}

TEST_CASE("region round trip covers the node kinds") {
    Region s = Region::raw_sector(Sector(0.3, 0.4, 0.5));
    Region d = Region::disc(cplx(0.1, -0.2), 0.05);
    Region u = Region::union_of({s, d});
    Region i = Region::intersect_of({s, d});
    for (const Region& r : {s, d, u, i}) {
        ojson j = region_to_json(r);
        Region back = region_from_json(j);
        CHECK(region_to_json(back) == j);
        // sampled membership agreement
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> ur(-0.6, 0.6);
        for (int t = 0; t < 200; ++t) {
            cplx z(ur(rng), ur(rng));
            CHECK(r.contains(z) == back.contains(z));
        }
    }
}

TEST_CASE("canonical Lambda strings parse back to the same polynomial") {
    PuiseuxPoly lam = PuiseuxPoly::monomial(cplx(0, 1), -3, 2) +
                      PuiseuxPoly::monomial(cplx(2, 0), -1, 1);
    std::string s = lam.to_string();
    CHECK(PuiseuxPoly::parse(s) == lam);
    CHECK(PuiseuxPoly::monomial(cplx(1, 0), -1, 1).to_string().find("z^(-1)") !=
          std::string::npos);
}

TEST_CASE("analyze_to_json carries schema, ramification and growth data") {
    OperatorSpec op;
    op.m = 1;
    op.N = 2;
    op.A = {{Polynomial::parse("1")}};
    ExponentialPart ep = exponential_parts(op);
    FormalFundamental ff = formal_fundamental(op, ep, 8);
    ojson j = analyze_to_json(op, ep, ff);
    CHECK(j["schema"] == kSchemaTag);
    CHECK(j["ramification"] == 1);
    REQUIRE(j["lambdas"].size() == 1);
    CHECK(PuiseuxPoly::parse(j["lambdas"][0].get<std::string>()) == ep.lambdas[0]);
    CHECK(j["growth"]["ok"] == true);
}

TEST_CASE("parse_rhs grammar") {
    // plain puiseux with nonnegative integer exponents -> polynomial node
    HoloFn a = parse_rhs("1 + 2*z^(1)");
    CHECK(std::abs(a.eval(cplx(0.3, 0.0)) - 1.6) < 1e-13);

    HoloFn b = parse_rhs("exp((-1+0i)*z^(-1))");
    CHECK(std::abs(b.eval(cplx(0.5, 0.0)) - std::exp(-2.0)) < 1e-13);

    HoloFn c = parse_rhs("2*z^(1)*exp((-1+0i)*z^(-1))");
    CHECK(std::abs(c.eval(cplx(0.5, 0.0)) - std::exp(-2.0)) < 1e-13);

    // fractional powers go through branch-aware power nodes
    HoloFn d = parse_rhs("1*z^(1/2)");
    CHECK(std::abs(d.eval(cplx(0.25, 0.0)) - 0.5) < 1e-13);

    CHECK_THROWS_AS(parse_rhs("exp("), error);
    CHECK_THROWS_AS(parse_rhs("z^$"), error);
}

TEST_CASE("report_to_json and CSV artifacts") {
    OperatorSpec op;
    op.m = 1;
    op.N = 2;
    op.A = {{Polynomial::parse("1")}};
    Band band;
    band.lower = CurveSpec{PuiseuxPoly::constant(cplx(kPi - 0.4, 0.0)), 0.25};
    band.upper = CurveSpec{PuiseuxPoly::constant(cplx(kPi + 0.4, 0.0)), 0.25};
    band.R = 0.25;
    std::vector<HoloFn> g = {HoloFn::constant(cplx(1, 0))};
    SolverOptions o;
    o.residual_samples = 16;
    o.tempered = TemperedOptions{10, 32, 31415, 96, 0.5, 20.0};
    SolveReport rep = cover_and_solve(op, band, g, o);
    REQUIRE(rep.verdict == SolveVerdict::solved);

    ojson j = report_to_json(rep);
    CHECK(j["schema"] == kSchemaTag);
    CHECK(j["verdict"] == "solved");
    CHECK(j["seed"] == rep.seed);
    CHECK(j["pieces"].size() == rep.pieces.size());
    for (const auto& pj : j["pieces"]) {
        CHECK(pj.contains("residual"));
        CHECK(pj.contains("certificates"));
        CHECK(pj["solved"] == true);
    }

    std::string csv = solution_samples_csv(rep, g, 8);
    CHECK(csv.rfind("z_re,z_im,u_re,u_im,residual,delta", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') >= 8);

    std::string pcsv = piece_summary_csv(rep);
    CHECK(pcsv.rfind("id,kind,residual,max_M,tempered,solved", 0) == 0);
}

TEST_CASE("certificate round trip") {
    TemperedCertificate c;
    c.M = 1.25;
    c.sup_value = 3.5;
    c.fitted_slope = 1.1;
    c.fit_residual = 0.2;
    c.grid_size = 640;
    c.seed = 123;
    c.min_delta = 1e-5;
    c.verdict = Verdict::tempered;
    c.strata = {{0, 10, -1.0}, {1, 12, -0.5}};
    ojson j = certificate_to_json(c);
    TemperedCertificate back = certificate_from_json(j);
    CHECK(back.M == c.M);
    CHECK(back.verdict == c.verdict);
    CHECK(back.strata.size() == 2);
    CHECK(certificate_to_json(back) == j);
}
