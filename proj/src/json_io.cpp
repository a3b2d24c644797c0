#include "sectoria/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "sectoria/errors.hpp"
#include "sectoria/honda.hpp"

namespace sectoria {

namespace {

ojson cx(cplx z) { return ojson::array({z.real(), z.imag()}); }

cplx cx_from(const ojson& j) {
    if (j.is_number()) return cplx(j.get<double>(), 0.0);
    if (j.is_array() && j.size() == 2)
        return cplx(j[0].get<double>(), j[1].get<double>());
    fail(errc::parse_error, "expected a number or [re, im] pair");
}

ojson sector_to_json(const Sector& s) {
    return ojson{{"tau", s.tau}, {"eta", s.eta}, {"r", s.r}};
}

Sector sector_from_json(const ojson& j) {
    return Sector(j.at("tau").get<double>(), j.at("eta").get<double>(), j.at("r").get<double>());
}

ojson chart_to_json(const Chart& c) {
    ojson coeffs = ojson::array();
    for (cplx v : c.series().c) coeffs.push_back(cx(v));
    return ojson{{"coeffs", coeffs}, {"validity", sector_to_json(c.validity())}};
}

Chart chart_from_json(const ojson& j) {
    PowerSeries ps;
    for (const auto& v : j.at("coeffs")) ps.c.push_back(cx_from(v));
    return Chart(ps, sector_from_json(j.at("validity")));
}

ojson curve_to_json(const CurveSpec& c) {
    ojson terms = ojson::array();
    long d = c.poly.ramification();
    for (const auto& [num, coef] : c.poly.terms()) {
        long g = std::gcd(std::abs(num), d);
        if (g == 0) g = 1;
        terms.push_back(ojson{{"num", num / g}, {"den", d / g}, {"coef", coef.real()}});
    }
    return ojson{{"terms", terms}, {"R", c.R}};
}

CurveSpec curve_from_json(const ojson& j) {
    CurveSpec c;
    for (const auto& t : j.at("terms")) {
        c.poly = c.poly + PuiseuxPoly::monomial(cplx(t.at("coef").get<double>(), 0.0),
                                                t.at("num").get<long>(), t.at("den").get<long>());
    }
    c.R = j.at("R").get<double>();
    return c;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

} // namespace

ojson parse_json(const std::string& text, const std::string& origin) {
    try {
        return ojson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(errc::parse_error, origin + ": " + e.what());
    }
}

ojson operator_to_json(const OperatorSpec& op) {
    ojson A = ojson::array();
    for (const auto& row : op.A) {
        ojson r = ojson::array();
        for (const auto& p : row) r.push_back(p.to_string());
        A.push_back(r);
    }
    return ojson{{"schema", kSchemaTag},
                 {"m", op.m},
                 {"N", op.N},
                 {"A", A},
                 {"disc_radius", op.disc_radius}};
}

OperatorSpec operator_from_json(const ojson& j) {
    OperatorSpec op;
    op.m = j.at("m").get<int>();
    op.N = j.at("N").get<int>();
    if (j.contains("disc_radius")) op.disc_radius = j.at("disc_radius").get<double>();
    for (const auto& row : j.at("A")) {
        std::vector<Polynomial> r;
        for (const auto& entry : row) r.push_back(Polynomial::parse(entry.get<std::string>()));
        op.A.push_back(std::move(r));
    }
    op.validate();
    return op;
}

ojson band_to_json(const Band& b) {
    return ojson{{"schema", kSchemaTag},
                 {"lower", curve_to_json(b.lower)},
                 {"upper", curve_to_json(b.upper)},
                 {"R", b.R}};
}

Band band_from_json(const ojson& j) {
    Band b;
    b.lower = curve_from_json(j.at("lower"));
    b.upper = curve_from_json(j.at("upper"));
    b.R = j.at("R").get<double>();
    b.lower.R = b.R;
    b.upper.R = b.R;
    b.validate();
    return b;
}

ojson region_to_json(const Region& r) {
    switch (r.kind()) {
        case Region::Kind::raw_sector:
            return ojson{{"kind", "sector"}, {"sector", sector_to_json(r.sector())}};
        case Region::Kind::sector_image:
            return ojson{{"kind", "sector_image"},
                         {"chart", chart_to_json(r.chart())},
                         {"sector", sector_to_json(r.sector())}};
        case Region::Kind::disc:
            return ojson{{"kind", "disc"}, {"center", cx(r.disc_center())},
                         {"radius", r.disc_radius()}};
        case Region::Kind::union_node:
        case Region::Kind::intersect_node: {
            ojson children = ojson::array();
            for (const auto& c : r.children()) children.push_back(region_to_json(c));
            return ojson{{"op", r.kind() == Region::Kind::union_node ? "union" : "intersect"},
                         {"children", children}};
        }
    }
    fail(errc::parse_error, "unknown region kind");
}

Region region_from_json(const ojson& j) {
    if (j.contains("op")) {
        std::vector<Region> children;
        for (const auto& c : j.at("children")) children.push_back(region_from_json(c));
        std::string op = j.at("op").get<std::string>();
        if (op == "union") return Region::union_of(std::move(children));
        if (op == "intersect") return Region::intersect_of(std::move(children));
        fail(errc::parse_error, "region op must be union or intersect");
    }
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "sector") return Region::raw_sector(sector_from_json(j.at("sector")));
    if (kind == "sector_image")
        return Region::sector_image(chart_from_json(j.at("chart")),
                                    sector_from_json(j.at("sector")));
    if (kind == "disc") return Region::disc(cx_from(j.at("center")), j.at("radius").get<double>());
    fail(errc::parse_error, "unknown region leaf kind: " + kind);
}

ojson certificate_to_json(const TemperedCertificate& c) {
    ojson strata = ojson::array();
    for (const auto& s : c.strata)
        strata.push_back(ojson{{"k", s.k}, {"count", s.count}, {"max", s.max_abs}});
    return ojson{{"schema", kSchemaTag},
                 {"M", c.M},
                 {"sup", c.sup_value},
                 {"verdict", to_string(c.verdict)},
                 {"fitted_slope", c.fitted_slope},
                 {"fit_residual", c.fit_residual},
                 {"grid_size", c.grid_size},
                 {"seed", c.seed},
                 {"min_delta", c.min_delta},
                 {"strata", strata}};
}

TemperedCertificate certificate_from_json(const ojson& j) {
    TemperedCertificate c;
    c.M = j.at("M").get<double>();
    c.sup_value = j.at("sup").get<double>();
    c.fitted_slope = j.at("fitted_slope").get<double>();
    c.fit_residual = j.at("fit_residual").get<double>();
    c.grid_size = j.at("grid_size").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.min_delta = j.at("min_delta").get<double>();
    std::string v = j.at("verdict").get<std::string>();
    c.verdict = v == "tempered" ? Verdict::tempered
                : v == "not-tempered" ? Verdict::not_tempered
                                      : Verdict::inconclusive;
    for (const auto& s : j.at("strata"))
        c.strata.push_back({s.at("k").get<int>(), s.at("count").get<int>(),
                            s.at("max").get<double>()});
    return c;
}

ojson growth_cert_to_json(const GrowthCert& c) {
    return ojson{{"K", c.K},
                 {"M", c.M},
                 {"ok", c.ok},
                 {"n_samples", c.n_samples},
                 {"sector", sector_to_json(c.sector)}};
}

ojson analyze_to_json(const OperatorSpec& op, const ExponentialPart& ep,
                      const FormalFundamental& ff) {
    ojson lambdas = ojson::array();
    for (const auto& lam : ep.lambdas) lambdas.push_back(lam.to_string());
    return ojson{{"schema", kSchemaTag},
                 {"operator", operator_to_json(op)},
                 {"ramification", ep.l},
                 {"lambdas", lambdas},
                 {"order", ff.order},
                 {"growth", growth_cert_to_json(ff.cert)}};
}

ojson cover_to_json(const BandCover& cover) {
    ojson pieces = ojson::array();
    for (const auto& p : cover.pieces) pieces.push_back(region_to_json(p));
    return ojson{{"schema", kSchemaTag}, {"W_radius", cover.W_radius}, {"pieces", pieces}};
}

ojson report_to_json(const SolveReport& rep) {
    ojson pieces = ojson::array();
    for (const auto& p : rep.pieces) {
        ojson certs = ojson::array();
        for (const auto& c : p.certs) certs.push_back(certificate_to_json(c));
        pieces.push_back(ojson{{"id", p.id},
                               {"kind", p.kind},
                               {"region", region_to_json(p.region)},
                               {"residual", p.residual},
                               {"certificates", certs},
                               {"solved", p.solved},
                               {"note", p.note}});
    }
    ojson overlaps = ojson::array();
    for (const auto& o : rep.overlaps) {
        ojson coeffs = ojson::array();
        for (cplx c : o.coeffs) coeffs.push_back(cx(c));
        overlaps.push_back(ojson{{"pieces", {o.piece_a, o.piece_b}},
                                 {"n_samples", o.n_samples},
                                 {"coeffs", coeffs},
                                 {"fit_residual", o.fit_residual},
                                 {"scale", o.scale},
                                 {"pass", o.pass},
                                 {"skipped", o.skipped},
                                 {"note", o.note}});
    }
    return ojson{{"schema", kSchemaTag},
                 {"verdict", to_string(rep.verdict)},
                 {"seed", rep.seed},
                 {"tolerances", {{"residual", rep.tol_residual}, {"glue", rep.tol_glue}}},
                 {"sup_g", rep.sup_g},
                 {"W_radius", rep.cover.W_radius},
                 {"pieces", pieces},
                 {"overlaps", overlaps}};
}

ojson experiment_to_json(const ExperimentReport& rep) {
    ojson records = ojson::array();
    for (const auto& r : rep.records)
        records.push_back(ojson{{"verdict", to_string(r.verdict)},
                                {"in_scope", r.in_scope},
                                {"note", r.note}});
    return ojson{{"schema", kSchemaTag},
                 {"trials", rep.trials},
                 {"in_scope", rep.in_scope},
                 {"solved", rep.solved},
                 {"success_fraction", rep.success_fraction},
                 {"seed", rep.seed},
                 {"records", records}};
}

ojson pullback_report_to_json(const PullbackReport& rep) {
    return ojson{{"schema", kSchemaTag},
                 {"verdict", to_string(rep.verdict)},
                 {"consistent", rep.consistent},
                 {"direct", certificate_to_json(rep.direct)},
                 {"pulled", certificate_to_json(rep.pulled)},
                 {"lojasiewicz",
                  {{"forward", {{"c", rep.delta_fwd.c}, {"r", rep.delta_fwd.r}}},
                   {"backward", {{"c", rep.delta_bwd.c}, {"r", rep.delta_bwd.r}}}}}};
}

namespace {

HoloFn holo_from_puiseux(const PuiseuxPoly& p) {
    if (p.is_zero()) return HoloFn();
    if (p.ramification() == 1 && p.all_exponents_nonnegative()) {
        std::vector<cplx> coeffs;
        for (const auto& [num, c] : p.terms()) {
            if (static_cast<std::size_t>(num) >= coeffs.size())
                coeffs.resize(num + 1, cplx(0.0, 0.0));
            coeffs[num] = c;
        }
        return HoloFn::poly(std::move(coeffs));
    }
    std::vector<HoloFn> terms;
    for (const auto& [num, c] : p.terms()) {
        double e = static_cast<double>(num) / p.ramification();
        if (num == 0)
            terms.push_back(HoloFn::constant(c));
        else
            terms.push_back(HoloFn::scale(c, HoloFn::power_log(cplx(e, 0.0), 0)));
    }
    return HoloFn::sum(std::move(terms));
}

} // namespace

HoloFn parse_rhs(const std::string& text) {
    auto pos = text.find("exp(");
    if (pos == std::string::npos) return holo_from_puiseux(PuiseuxPoly::parse(text));

    int depth = 0;
    std::size_t close = std::string::npos;
    for (std::size_t i = pos + 3; i < text.size(); ++i) {
        if (text[i] == '(') ++depth;
        if (text[i] == ')' && --depth == 0) {
            close = i;
            break;
        }
    }
    if (close == std::string::npos) fail(errc::parse_error, "rhs: unbalanced parentheses in exp");
    for (std::size_t i = close + 1; i < text.size(); ++i)
        if (!std::isspace(static_cast<unsigned char>(text[i])))
            fail(errc::parse_error, "rhs: trailing input after exp factor");

    HoloFn efac = HoloFn::puiseux_exp(PuiseuxPoly::parse(text.substr(pos + 4, close - pos - 4)));
    std::string prefix = text.substr(0, pos);
    while (!prefix.empty() &&
           (std::isspace(static_cast<unsigned char>(prefix.back())) || prefix.back() == '*'))
        prefix.pop_back();
    if (prefix.empty()) return efac;
    return HoloFn::product({holo_from_puiseux(PuiseuxPoly::parse(prefix)), efac});
}

std::string solution_samples_csv(const SolveReport& rep, const std::vector<HoloFn>& g,
                                 int per_piece, std::uint64_t seed) {
    std::ostringstream os;
    os << "z_re,z_im,u_re,u_im,residual,delta\n";
    std::mt19937_64 rng(seed);
    for (const auto& piece : rep.pieces) {
        if (!piece.solved) continue;
        int written = 0;
        for (cplx z : sample_region(piece.region, 4 * per_piece, rng, 8)) {
            if (written >= per_piece) break;
            double delta = boundary_distance(piece.region, z, 96);
            if (delta <= 0.02 * std::abs(z)) continue;
            double rc = std::min(0.35 * delta, 0.3 * std::abs(z));
            cplx zN = std::pow(z, rep.op.N);
            for (int i = 0; i < rep.op.m; ++i) {
                const HoloFn& ui = piece.u[i];
                cplx uz = ui.eval(z);
                cplx du = cauchy_derivative([&](cplx w) { return ui.eval(w); }, z, rc);
                cplx res = zN * du - g[i].eval(z);
                for (int jj = 0; jj < rep.op.m; ++jj)
                    res += rep.op.A[i][jj].eval(z) * piece.u[jj].eval(z);
                os << fmt(z.real()) << ',' << fmt(z.imag()) << ',' << fmt(uz.real()) << ','
                   << fmt(uz.imag()) << ',' << fmt(std::abs(res)) << ',' << fmt(delta) << '\n';
            }
            ++written;
        }
    }
    return os.str();
}

std::string piece_summary_csv(const SolveReport& rep) {
    std::ostringstream os;
    os << "id,kind,residual,max_M,tempered,solved\n";
    for (const auto& p : rep.pieces) {
        double max_m = 0.0;
        bool tempered = !p.certs.empty();
        for (const auto& c : p.certs) {
            max_m = std::max(max_m, c.M);
            if (c.verdict != Verdict::tempered) tempered = false;
        }
        os << p.id << ',' << p.kind << ',' << fmt(p.residual) << ',' << fmt(max_m) << ','
           << (tempered ? "yes" : "no") << ',' << (p.solved ? "yes" : "no") << '\n';
    }
    return os.str();
}

} // namespace sectoria
