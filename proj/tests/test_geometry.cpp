#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "sectoria/errors.hpp"
#include "sectoria/geometry.hpp"

using namespace sectoria;

namespace {
constexpr double kPi = 3.14159265358979323846;

Band make_band(const PuiseuxPoly& lower, const PuiseuxPoly& upper, double R) {
    Band b;
    b.lower = CurveSpec{lower, R};
    b.upper = CurveSpec{upper, R};
    b.R = R;
    return b;
}
} // namespace

TEST_CASE("sector membership and boundary distance") {
    Sector s(0.0, kPi / 4.0, 1.0);
    CHECK(s.contains(cplx(0.5, 0.0)));
    CHECK(!s.contains(cplx(-0.5, 0.0)));
    CHECK(!s.contains(cplx(1.5, 0.0)));
    CHECK(!s.contains(cplx(0.0, 0.0)));
    // interior point: compare exact distance against a dense boundary scan
    cplx z(0.4, 0.05);
    double exact = s.boundary_distance_exact(z);
    double brute = 1e9;
    for (int i = 0; i <= 4000; ++i) {
        double rho = 1.0 * i / 4000;
        brute = std::min(brute, std::abs(z - std::polar(rho, s.alpha())));
        brute = std::min(brute, std::abs(z - std::polar(rho, s.beta())));
        double th = s.alpha() + s.amplitude() * i / 4000;
        brute = std::min(brute, std::abs(z - std::polar(s.r, th)));
    }
    CHECK(exact == doctest::Approx(brute).epsilon(1e-3));
}

TEST_CASE("band validation and membership") {
    Band b = make_band(PuiseuxPoly::constant(cplx(kPi / 2.0, 0.0)),
                       PuiseuxPoly::constant(cplx(3.0 * kPi / 2.0, 0.0)), 0.5);
    b.validate();
    CHECK(b.contains_polar(0.1, kPi));
    CHECK(!b.contains_polar(0.1, 0.0));
    CHECK(b.contains_point(cplx(-0.1, 0.0)));
    CHECK(!b.contains_point(cplx(0.1, 0.0)));
    CHECK(std::abs(band_to_plane(b, 0.1, kPi) - cplx(-0.1, 0.0)) < 1e-15);

    Band bad = make_band(PuiseuxPoly::constant(cplx(2.0, 0.0)),
                         PuiseuxPoly::constant(cplx(1.0, 0.0)), 0.5);
    CHECK_THROWS_AS(bad.validate(), error);
}

TEST_CASE("chart_from_arc maps the radial segment onto the arc") {
    // theta(rho) = 1 + rho
    CurveSpec curve{PuiseuxPoly::constant(cplx(1.0, 0.0)) +
                        PuiseuxPoly::monomial(cplx(1.0, 0.0), 1, 1),
                    0.4};
    Chart ch = chart_from_arc(curve);
    CHECK(ch.vanishing_order() == 1);
    for (double t : {0.02, 0.05, 0.1}) {
        if (t > ch.validity().r) continue;
        cplx expect = std::polar(t, curve.eval(t));
        CHECK(std::abs(ch.eval(cplx(t, 0.0)) - expect) < 1e-8);
    }
}

TEST_CASE("chart inversion round trip") {
    CurveSpec curve{PuiseuxPoly::constant(cplx(0.5, 0.0)) +
                        PuiseuxPoly::monomial(cplx(2.0, 0.0), 1, 1),
                    0.3};
    Chart ch = chart_from_arc(curve);
    Sector dom(0.0, kPi / 8.0, 0.5 * ch.validity().r);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ur(0.1, 0.9), ut(-1.0, 1.0);
    for (int i = 0; i < 30; ++i) {
        cplx w = std::polar(dom.r * ur(rng), dom.tau + dom.eta * ut(rng));
        cplx z = ch.eval(w);
        auto back = ch.invert(z);
        REQUIRE(back.has_value());
        CHECK(std::abs(*back - w) < 1e-8 * (1.0 + std::abs(w)));
    }
    CHECK(ch.check_injectivity(dom));
}

TEST_CASE("region algebra") {
    Region a = Region::raw_sector(Sector(0.0, kPi / 3.0, 1.0));
    Region b = Region::raw_sector(Sector(kPi / 3.0, kPi / 3.0, 1.0));
    Region u = Region::union_of({a, b});
    Region i = Region::intersect_of({a, b});
    cplx only_a(0.5, -0.2), both = std::polar(0.5, kPi / 4.0);
    CHECK(a.contains(only_a));
    CHECK(!b.contains(only_a));
    CHECK(u.contains(only_a));
    CHECK(!i.contains(only_a));
    CHECK(i.contains(both));
    CHECK(region_membership(u, both));

    Region d = Region::disc(cplx(0.2, 0.0), 0.1);
    CHECK(d.contains(cplx(0.25, 0.0)));
    CHECK(!d.contains(cplx(0.35, 0.0)));
}

TEST_CASE("sample_region produces members spanning small radii") {
    Region a = Region::raw_sector(Sector(kPi, kPi / 6.0, 0.5));
    std::mt19937_64 rng(77);
    auto pts = sample_region(a, 500, rng, 20);
    REQUIRE(!pts.empty());
    double min_r = 1e9;
    for (cplx z : pts) {
        CHECK(a.contains(z));
        min_r = std::min(min_r, std::abs(z));
    }
    CHECK(min_r < 1e-3);  // log-uniform sampling reaches deep strata
}

TEST_CASE("boundary_distance approximates the exact sector distance") {
    Sector s(0.3, kPi / 5.0, 0.8);
    Region reg = Region::raw_sector(s);
    std::mt19937_64 rng(11);
    auto pts = sample_region(reg, 60, rng, 6);
    for (cplx z : pts) {
        double approx = boundary_distance(reg, z, 256);
        double exact = s.boundary_distance_exact(z);
        CHECK(approx >= exact * (1.0 - 2e-3) - 1e-9);  // chord lies inside the true arc
        CHECK(approx <= exact * 1.35 + 1e-9);
    }
}

namespace {

double cover_agreement(const Band& b, const BandCover& cover, int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uu(0.0, 1.0);
    int agree = 0, total = 0;
    for (int i = 0; i < n; ++i) {
        double rho = cover.W_radius * std::exp2(-14.0 * uu(rng));
        double th = -kPi + 2.0 * kPi * uu(rng);
        if (rho <= 0.0 || rho >= cover.W_radius) continue;
        cplx z = std::polar(rho, th);
        bool in_band = b.contains_point(z);  // planar comparison, wrap-insensitive
        bool in_cover = false;
        for (const auto& piece : cover.pieces)
            if (piece.contains(z)) in_cover = true;
        // two-sided agreement restricted to the W-disc
        ++total;
        if (in_band == in_cover) ++agree;
    }
    return total ? static_cast<double>(agree) / total : 0.0;
}

} // namespace

TEST_CASE("cover_band: constant thin band") {
    Band b = make_band(PuiseuxPoly::constant(cplx(kPi - 0.3, 0.0)),
                       PuiseuxPoly::constant(cplx(kPi + 0.3, 0.0)), 0.4);
    BandCover cover = cover_band(b, kPi / 2.0, 0.4);
    CHECK(cover.W_radius > 0.0);
    CHECK(!cover.pieces.empty());
    CHECK(cover_agreement(b, cover, 4000, 1) >= 0.999);
}

TEST_CASE("cover_band: wide band splits into several pieces") {
    Band b = make_band(PuiseuxPoly::constant(cplx(0.2, 0.0)),
                       PuiseuxPoly::constant(cplx(0.2 + 2.6, 0.0)), 0.4);
    BandCover cover = cover_band(b, kPi / 4.0, 0.4);
    CHECK(cover.pieces.size() >= 3);
    CHECK(cover_agreement(b, cover, 4000, 2) >= 0.999);
}

TEST_CASE("cover_band: cusp band (equal endpoints)") {
    // lower = pi, upper = pi + rho: cusp at 0
    Band b = make_band(PuiseuxPoly::constant(cplx(kPi, 0.0)),
                       PuiseuxPoly::constant(cplx(kPi, 0.0)) +
                           PuiseuxPoly::monomial(cplx(1.0, 0.0), 1, 1),
                       0.4);
    BandCover cover = cover_band(b, kPi / 2.0, 0.4);
    CHECK(!cover.pieces.empty());
    CHECK(cover_agreement(b, cover, 4000, 3) >= 0.999);
}

TEST_CASE("cover_band: curved Puiseux band eta = rho^{1/2}") {
    Band b = make_band(PuiseuxPoly::constant(cplx(kPi, 0.0)),
                       PuiseuxPoly::constant(cplx(kPi, 0.0)) +
                           PuiseuxPoly::monomial(cplx(1.0, 0.0), 1, 2),
                       0.4);
    BandCover cover = cover_band(b, kPi / 2.0, 0.4);
    CHECK(!cover.pieces.empty());
    CHECK(cover_agreement(b, cover, 4000, 4) >= 0.999);
}
