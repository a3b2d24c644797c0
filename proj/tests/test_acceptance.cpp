// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "sectoria/errors.hpp"
#include "sectoria/geometry.hpp"
#include "sectoria/honda.hpp"
#include "sectoria/json_io.hpp"
#include "sectoria/solver.hpp"
#include "sectoria/tempered.hpp"
#include "sectoria/turrittin.hpp"

using namespace sectoria;

namespace {
constexpr double kPi = 3.14159265358979323846;
int g_failures = 0;

void report(int idx, bool pass, const std::string& what) {
    std::printf("criterion %2d: %s  %s\n", idx, pass ? "PASS" : "FAIL", what.c_str());
    if (!pass) ++g_failures;
}

PuiseuxPoly mono(double re, long num, long den = 1) {
    return PuiseuxPoly::monomial(cplx(re, 0.0), num, den);
}

OperatorSpec scalar_op(int N, const std::string& a) {
    OperatorSpec op;
    op.m = 1;
    op.N = N;
    op.A = {{Polynomial::parse(a)}};
    return op;
}

OperatorSpec decoupled_2x2() {
    OperatorSpec op;
    op.m = 2;
    op.N = 2;
    op.A = {{Polynomial::parse("1"), Polynomial{}}, {Polynomial{}, Polynomial::parse("-1")}};
    return op;
}

Band make_band(const PuiseuxPoly& lower, const PuiseuxPoly& upper, double R) {
    Band b;
    b.lower = CurveSpec{lower, R};
    b.upper = CurveSpec{upper, R};
    b.R = R;
    return b;
}

Band const_band(double lo, double hi, double R) {
    return make_band(PuiseuxPoly::constant(cplx(lo, 0.0)), PuiseuxPoly::constant(cplx(hi, 0.0)),
                     R);
}

Band cusp_band(double R) {
    return make_band(PuiseuxPoly::constant(cplx(kPi, 0.0)),
                     PuiseuxPoly::constant(cplx(kPi, 0.0)) + mono(1.0, 1, 1), R);
}

Band curved_band(double R) {
    return make_band(PuiseuxPoly::constant(cplx(kPi, 0.0)),
                     PuiseuxPoly::constant(cplx(kPi, 0.0)) + mono(1.0, 1, 2), R);
}

SolverOptions fast_opts() {
    SolverOptions o;
    o.residual_samples = 24;
    o.tempered = TemperedOptions{10, 32, 31415, 96, 0.5, 20.0};
    return o;
}

// -------------------------------------------------------------------------

void criterion_1() {
    bool ok = true;
    auto expect = [&](const OperatorSpec& op, const std::vector<PuiseuxPoly>& lams) {
        ExponentialPart ep = exponential_parts(op);
        if (ep.lambdas.size() != lams.size()) {
            ok = false;
            return;
        }
        for (std::size_t i = 0; i < lams.size(); ++i) {
            const auto& ta = ep.lambdas[i].terms();
            const auto& tb = lams[i].terms();
            if (ep.lambdas[i].ramification() != lams[i].ramification() || ta.size() != tb.size()) {
                ok = false;
                return;
            }
            for (const auto& [num, cb] : tb) {
                auto it = ta.find(num);
                if (it == ta.end() || std::abs(it->second - cb) > 1e-12) ok = false;
            }
        }
    };
    expect(scalar_op(2, "1"), {mono(1.0, -1)});
    expect(scalar_op(3, "-2"), {mono(-1.0, -2)});
    expect(scalar_op(1, "-0.5"), {PuiseuxPoly::zero()});
    expect(scalar_op(1, "-1"), {PuiseuxPoly::zero()});
    expect(scalar_op(1, "-2"), {PuiseuxPoly::zero()});
    expect(decoupled_2x2(), {mono(-1.0, -1), mono(1.0, -1)});
    report(1, ok, "exponential-part oracle suite (6 closed-form fixtures, exact)");
}

double coupled_residual(const OperatorSpec& op, const ExponentialPart& ep,
                        const FormalFundamental& ff) {
    double worst = 0.0;
    for (std::size_t k = 0; k < ep.lambdas.size(); ++k) {
        double tau = 0.0;
        if (auto me = ep.lambdas[k].min_exponent())
            tau = ep.lambdas[k].coeff(me->first, me->second).real() < 0 ? 0.0 : kPi;
        auto u = [&](int i, cplx w) {
            return ff.entry(i, static_cast<int>(k), w) * std::exp(ep.lambdas[k].eval(w, tau));
        };
        for (int t = 0; t < 5; ++t) {
            cplx z = std::polar(0.028 + 0.001 * t, tau + 0.03 * (t - 2.0));
            double scale = std::exp(ep.lambdas[k].eval(z, tau).real());
            for (int i = 0; i < op.m; ++i) {
                cplx du = cauchy_derivative([&](cplx w) { return u(i, w); }, z,
                                            0.3 * std::abs(z), 64);
                cplx res = std::pow(z, op.N) * du;
                for (int j = 0; j < op.m; ++j) res += op.A[i][j].eval(z) * u(j, z);
                worst = std::max(worst, std::abs(res) / scale);
            }
        }
    }
    return worst;
}

void criterion_2() {
    bool ok = true;
    OperatorSpec coupled;
    coupled.m = 2;
    coupled.N = 2;
    coupled.A = {{Polynomial::parse("1"), Polynomial::parse("z")},
                 {Polynomial::parse("z"), Polynomial::parse("-1")}};
    std::vector<OperatorSpec> fixtures = {scalar_op(2, "1"), scalar_op(1, "-0.5"), coupled};
    std::vector<double> expect_M = {0.0, 0.5, 0.0};
    for (std::size_t f = 0; f < fixtures.size(); ++f) {
        ExponentialPart ep = exponential_parts(fixtures[f]);
        FormalFundamental f10 = formal_fundamental(fixtures[f], ep, 10);
        FormalFundamental f20 = formal_fundamental(fixtures[f], ep, 20);
        double r10 = coupled_residual(fixtures[f], ep, f10);
        double r20 = coupled_residual(fixtures[f], ep, f20);
        if (!(r20 <= std::max(r10 / 2.0, 1e-12))) ok = false;
        if (!f20.cert.ok || std::abs(f20.cert.M - expect_M[f]) > 0.25) ok = false;
    }
    report(2, ok, "Hukuhara-Turrittin residual decay >= 2x and M within 0.25 of analytic");
}

void criterion_3() {
    struct Fixture {
        PuiseuxPoly p;
        Sector S;
    };
    // sectors sit on one side of any anti-Stokes dip so the strict phase
    // invariant is attainable; both decay and growth directions appear
    std::vector<Fixture> fx = {
        {mono(1.0, -1), Sector(0.0, 0.6, 0.3)},           // vertex
        {mono(1.0, -1), Sector(kPi - 0.7, 0.6, 0.3)},     // outer, one-sided
        {mono(-1.0, -2), Sector(kPi / 2.0, 0.35, 0.3)},   // vertex
        {mono(-1.0, -2), Sector(0.38, 0.35, 0.3)},        // outer, one-sided
        {mono(2.0, -1, 2), Sector(0.0, 1.5, 0.3)},        // ramified, vertex
        {mono(-2.0, -1, 2), Sector(0.8, 0.7, 0.3)},       // ramified, outer
    };
    std::vector<HoloFn> gs = {HoloFn::constant(cplx(1, 0)), HoloFn::poly({cplx(0, 0), cplx(1, 0)})};
    bool ok = true;
    int count = 0;
    for (const auto& f : fx) {
        for (const auto& g : gs) {
            ++count;
            try {
                // phase invariant at all nodes of the constructed paths
                for (double fr : {0.2, 0.55, 0.85}) {
                    cplx z = std::polar(f.S.r * fr, f.S.tau + 0.3 * f.S.eta * (fr - 0.5));
                    PathSpec path = build_path(f.p, f.S, z);
                    if (max_phase_violation(f.p, path, z, f.S.tau) > 1e-9) ok = false;
                }
                // ODE residual of the Honda operator output
                auto I = [&](cplx z) { return integral_op(f.p, g, f.S, z); };
                PuiseuxPoly dp = f.p.derivative();
                for (double fr : {0.3, 0.6}) {
                    cplx z = std::polar(f.S.r * fr, f.S.tau + 0.2 * f.S.eta);
                    double pd = std::abs(dp.eval(z, f.S.tau));
                    double rc = std::min(0.3 * f.S.boundary_distance_exact(z),
                                         2.0 / std::max(pd, 1.0));
                    cplx dI = cauchy_derivative(I, z, rc, 48);
                    cplx res = dI - dp.eval(z, f.S.tau) * I(z) - g.eval(z);
                    if (std::abs(res) > 1e-6 * (1.0 + std::abs(I(z)))) ok = false;
                }
                // tempered in, tempered out
                TemperedOptions topts{12, 64, 31415, 96, 0.5, 20.0};
                Region reg = Region::raw_sector(f.S);
                TemperedCertificate cg = fit_growth_exponent(g, reg, topts);
                IntegralOptions iopts;
                HoloFn If = HoloFn::path_integral(
                    [p = f.p, g, S = f.S, iopts](cplx z) { return integral_op(p, g, S, z, iopts); },
                    "honda output");
                TemperedCertificate cI = fit_growth_exponent(If, reg, topts);
                if (cg.verdict == Verdict::tempered && cI.verdict != Verdict::tempered) ok = false;
            } catch (const error&) {
                ok = false;
            }
        }
    }
    report(3, ok && count == 12, "Honda operator contract on 12 (p, g, S) fixtures");
}

void criterion_4() {
    bool ok = true;
    Region reg = Region::raw_sector(Sector(0.0, kPi / 8.0, 1.0));
    TemperedOptions topts{14, 128, 31415, 96, 0.5, 20.0};
    HoloFn bad = HoloFn::puiseux_exp(mono(1.0, -1));
    if (fit_growth_exponent(bad, reg, topts).verdict != Verdict::not_tempered) ok = false;
    for (int k = 1; k <= 3; ++k) {
        TemperedCertificate c =
            fit_growth_exponent(HoloFn::power_log(cplx(-k, 0.0), 0), reg, topts);
        if (c.verdict != Verdict::tempered || std::abs(c.M - k) > 0.25 + 1e-9) ok = false;
    }
    report(4, ok, "negative control: e^{1/z} not tempered; 1/z^k fitted within 0.25");
}

void criterion_5() {
    auto chart_of = [](std::vector<cplx> coeffs, double eta, double r) {
        PowerSeries ps;
        ps.c = std::move(coeffs);
        return Chart(ps, Sector(0.0, eta, r));
    };
    std::vector<Chart> charts = {
        chart_of({cplx(0, 0), cplx(1, 0)}, kPi / 2.0, 0.4),                 // identity
        chart_of({cplx(0, 0), cplx(0, 0), cplx(1, 0)}, kPi / 2.0, 0.4),     // w^2
        chart_of({cplx(0, 0), cplx(2, 0)}, kPi / 2.0, 0.4),                 // 2w
        chart_of({cplx(0, 0), cplx(1, 0), cplx(0.4, 0)}, kPi / 2.0, 0.4),   // w + 0.4w^2
        chart_of({cplx(0, 0), cplx(0, 0), cplx(1, 0), cplx(0.3, 0)}, kPi / 2.0, 0.4),
    };
    std::vector<HoloFn> hs = {HoloFn::power_log(cplx(-1, 0), 0),
                              HoloFn::puiseux_exp(mono(1.0, -1))};
    Sector S(0.0, kPi / 8.0, 0.3);
    TemperedOptions topts{12, 96, 31415, 96, 0.5, 20.0};
    bool ok = true;
    int count = 0;
    for (const auto& ch : charts)
        for (const auto& h : hs) {
            ++count;
            PullbackReport rep = pullback_temperedness_check(h, ch, S, topts);
            if (!rep.consistent) ok = false;
        }
    PullbackReport key = pullback_temperedness_check(hs[0], charts[1], S, topts);
    if (!(std::abs(key.direct.fitted_slope - 1.0) <= 0.3 &&
          std::abs(key.pulled.fitted_slope - 2.0) <= 0.3))
        ok = false;
    report(5, ok && count == 10, "pullback equivalence on 10 (h, chart) fixtures");
}

void criterion_6() {
    bool ok = true;
    std::vector<Band> bands = {
        const_band(kPi - 0.3, kPi + 0.3, 0.4),
        cusp_band(0.4),
        curved_band(0.4),
        const_band(0.2, 2.8, 0.4),  // wide: needs >= 3 pieces
    };
    for (std::size_t i = 0; i < bands.size(); ++i) {
        BandCover cover = cover_band(bands[i], kPi / 4.0, 0.4);
        if (i == 3 && cover.pieces.size() < 3) ok = false;
        std::mt19937_64 rng(100 + i);
        std::uniform_real_distribution<double> uu(0.0, 1.0);
        int agree = 0, total = 0;
        for (int t = 0; t < 10000; ++t) {
            double rho = cover.W_radius * std::exp2(-14.0 * uu(rng));
            double th = -kPi + 2.0 * kPi * uu(rng);
            if (rho <= 0.0 || rho >= cover.W_radius) continue;
            cplx z = std::polar(rho, th);
            bool in_band = bands[i].contains_point(z);
            bool in_cover = false;
            for (const auto& piece : cover.pieces)
                if (piece.contains(z)) in_cover = true;
            ++total;
            if (in_band == in_cover) ++agree;
        }
        if (total == 0 || static_cast<double>(agree) / total < 0.999) ok = false;
    }
    report(6, ok, "covering soundness: >= 99.9% membership agreement on 4 band fixtures");
}

std::vector<SolveReport> g_reports;  // kept for criteria 8 and 10

void criterion_7() {
    bool ok = true;
    struct Case {
        OperatorSpec op;
        Band band;
        std::vector<HoloFn> g;
    };
    std::vector<Case> cases = {
        {scalar_op(2, "1"), cusp_band(0.25), {HoloFn::poly({cplx(0, 0), cplx(1, 0)})}},
        {scalar_op(2, "1"), curved_band(0.25), {HoloFn::poly({cplx(1, 0), cplx(1, 0)})}},
        {decoupled_2x2(), cusp_band(0.25),
         {HoloFn::constant(cplx(1, 0)), HoloFn::poly({cplx(0, 0), cplx(1, 0)})}},
        {decoupled_2x2(), curved_band(0.25),
         {HoloFn::poly({cplx(0, 0), cplx(1, 0)}), HoloFn::constant(cplx(1, 0))}},
    };
    for (auto& c : cases) {
        SolveReport rep = cover_and_solve(c.op, c.band, c.g, fast_opts());
        if (rep.verdict != SolveVerdict::solved) ok = false;
        for (const auto& pc : rep.pieces) {
            if (!pc.solved || pc.residual > rep.tol_residual * (1.0 + rep.sup_g)) ok = false;
            for (const auto& cert : pc.certs)
                if (cert.verdict != Verdict::tempered) ok = false;
        }
        g_reports.push_back(std::move(rep));
    }
    report(7, ok, "covering-solvability: solved on cusp and curved bands, all certs tempered");
}

void criterion_8() {
    bool ok = true;
    // wide band gives a multi-piece cover with genuine overlaps
    OperatorSpec op = scalar_op(2, "1");
    Band band = const_band(kPi - 1.2, kPi + 1.2, 0.25);
    std::vector<HoloFn> g = {HoloFn::constant(cplx(1, 0))};
    SolveReport rep = cover_and_solve(op, band, g, fast_opts());
    if (rep.verdict != SolveVerdict::solved) ok = false;
    int checked = 0;
    for (const auto& ov : rep.overlaps) {
        if (ov.skipped) continue;
        if (!ov.pass) ok = false;
        OverlapRecord twice =
            mayer_vietoris_check(rep, ov.piece_a, ov.piece_b, 64, 4242, fast_opts().tempered);
        if (twice.skipped) continue;
        if (twice.coeffs.size() != ov.coeffs.size()) {
            ok = false;
            continue;
        }
        for (std::size_t k = 0; k < ov.coeffs.size(); ++k)
            if (std::abs(twice.coeffs[k] - ov.coeffs[k]) > 1e-4) ok = false;
        ++checked;
    }
    for (const auto& old : g_reports)
        for (const auto& ov : old.overlaps)
            if (!ov.skipped && !ov.pass) ok = false;
    if (checked == 0) ok = false;  // the criterion must not pass vacuously
    g_reports.push_back(std::move(rep));
    report(8, ok, "Mayer-Vietoris: overlaps PASS, coefficients stable under sample doubling");
}

void criterion_9() {
    bool ok = true;
    std::vector<std::vector<HoloFn>> trials;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> uc(-1.0, 1.0);
    for (int t = 0; t < 10; ++t)
        trials.push_back({HoloFn::poly({cplx(uc(rng), uc(rng)), cplx(uc(rng), uc(rng))})});
    SolverOptions o = fast_opts();

    ExperimentReport irr =
        h1_comparison_experiment(scalar_op(2, "1"), curved_band(0.25), trials, o);
    if (irr.in_scope != 10 || irr.success_fraction != 1.0) ok = false;

    ExperimentReport reg =
        h1_comparison_experiment(scalar_op(1, "-0.5"), const_band(0.4, 1.2, 0.3), trials, o);
    if (reg.in_scope != 10 || reg.success_fraction != 1.0) ok = false;
    report(9, ok, "H1 experiment: success fraction 1.0 over 10 tempered trials (both fixtures)");
}

void criterion_10() {
    bool ok = true;
    OperatorSpec op = scalar_op(2, "1");
    ExponentialPart ep = exponential_parts(op);
    FormalFundamental ff = formal_fundamental(op, ep, 12);
    std::string a1 = analyze_to_json(op, ep, ff).dump(2);
    ExponentialPart ep2 = exponential_parts(op);
    FormalFundamental ff2 = formal_fundamental(op, ep2, 12);
    if (a1 != analyze_to_json(op, ep2, ff2).dump(2)) ok = false;

    Band band = curved_band(0.25);
    std::vector<HoloFn> g = {HoloFn::poly({cplx(0, 0), cplx(1, 0)})};
    std::string r1 = report_to_json(cover_and_solve(op, band, g, fast_opts())).dump(2);
    std::string r2 = report_to_json(cover_and_solve(op, band, g, fast_opts())).dump(2);
    if (r1 != r2) ok = false;
    report(10, ok, "determinism: identical seeds give byte-identical reports");
}

} // namespace

int main() {
    try {
        criterion_1();
        criterion_2();
        criterion_3();
        criterion_4();
        criterion_5();
        criterion_6();
        criterion_7();
        criterion_8();
        criterion_9();
        criterion_10();
    } catch (const std::exception& e) {
        std::printf("acceptance suite aborted: %s\n", e.what());
        return 1;
    }
    if (g_failures == 0) std::printf("acceptance: all 10 criteria PASS\n");
    return g_failures == 0 ? 0 : 1;
}
