#include "sectoria/tempered.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sectoria/errors.hpp"

namespace sectoria {

namespace {
constexpr double kLog2 = 0.6931471805599453;
} // namespace

struct HoloFn::Node {
    enum class K {
        zero,
        constant,
        poly,
        puiseux_exp,
        power_log,
        trunc,
        sum,
        product,
        scale,
        pullback,
        pushforward,
        path_integral,
        matrix_entry
    };
    K k = K::zero;
    cplx c{0.0, 0.0};
    std::vector<cplx> coeffs;
    PuiseuxPoly p;
    TruncSeries ts;
    double branch = 0.0;
    cplx rho{0.0, 0.0};
    int log_power = 0;
    std::vector<HoloFn> parts;
    Chart chart;
    std::function<cplx(cplx)> fn;
    std::string label;
    int mi = 0, mj = 0;
};

namespace {

cplx branch_log(cplx z, double branch_center) {
    if (z == cplx(0.0, 0.0)) fail(errc::domain_error, "log of zero");
    constexpr double kPi = 3.14159265358979323846;
    double theta = std::arg(z);
    double k = std::round((branch_center - theta) / (2.0 * kPi));
    theta += 2.0 * kPi * k;
    if (theta <= branch_center - kPi) theta += 2.0 * kPi;
    if (theta > branch_center + kPi) theta -= 2.0 * kPi;
    return {std::log(std::abs(z)), theta};
}

} // namespace

HoloFn::HoloFn() : node_(std::make_shared<Node>()) {}

HoloFn HoloFn::constant(cplx c) {
    HoloFn f;
    auto n = std::make_shared<Node>();
    n->k = Node::K::constant;
    n->c = c;
    f.node_ = n;
    return f;
}

HoloFn HoloFn::poly(std::vector<cplx> coeffs) {
    HoloFn f;
    auto n = std::make_shared<Node>();
    n->k = Node::K::poly;
    n->coeffs = std::move(coeffs);
    f.node_ = n;
    return f;
}

HoloFn HoloFn::puiseux_exp(PuiseuxPoly p, double branch_center) {
    HoloFn f;
    auto n = std::make_shared<Node>();
    n->k = Node::K::puiseux_exp;
    n->p = std::move(p);
    n->branch = branch_center;
    f.node_ = n;
    return f;
}

HoloFn HoloFn::power_log(cplx rho, int log_power, double branch_center) {
    HoloFn f;
    auto n = std::make_shared<Node>();
    n->k = Node::K::power_log;
    n->rho = rho;
    n->log_power = log_power;
    n->branch = branch_center;
    f.node_ = n;
    return f;
}

HoloFn HoloFn::trunc_series(TruncSeries s, double branch_center) {
    HoloFn f;
    auto n = std::make_shared<Node>();
    n->k = Node::K::trunc;
    n->ts = std::move(s);
    n->branch = branch_center;
    f.node_ = n;
    return f;
}

HoloFn HoloFn::sum(std::vector<HoloFn> parts) {
    HoloFn f;
    auto n = std::make_shared<Node>();
    n->k = Node::K::sum;
    n->parts = std::move(parts);
    f.node_ = n;
    return f;
}

HoloFn HoloFn::product(std::vector<HoloFn> parts) {
    HoloFn f;
    auto n = std::make_shared<Node>();
    n->k = Node::K::product;
    n->parts = std::move(parts);
    f.node_ = n;
    return f;
}

HoloFn HoloFn::scale(cplx c, HoloFn inner) {
    HoloFn f;
    auto n = std::make_shared<Node>();
    n->k = Node::K::scale;
    n->c = c;
    n->parts = {std::move(inner)};
    f.node_ = n;
    return f;
}

HoloFn HoloFn::pullback(Chart chart, HoloFn inner) {
    HoloFn f;
    auto n = std::make_shared<Node>();
    n->k = Node::K::pullback;
    n->chart = std::move(chart);
    n->parts = {std::move(inner)};
    f.node_ = n;
    return f;
}

HoloFn HoloFn::pushforward(Chart chart, HoloFn inner) {
    HoloFn f;
    auto n = std::make_shared<Node>();
    n->k = Node::K::pushforward;
    n->chart = std::move(chart);
    n->parts = {std::move(inner)};
    f.node_ = n;
    return f;
}

HoloFn HoloFn::path_integral(std::function<cplx(cplx)> eval, std::string label) {
    HoloFn f;
    auto n = std::make_shared<Node>();
    n->k = Node::K::path_integral;
    n->fn = std::move(eval);
    n->label = std::move(label);
    f.node_ = n;
    return f;
}

HoloFn HoloFn::matrix_entry(int i, int j, HoloFn inner) {
    HoloFn f;
    auto n = std::make_shared<Node>();
    n->k = Node::K::matrix_entry;
    n->mi = i;
    n->mj = j;
    n->parts = {std::move(inner)};
    f.node_ = n;
    return f;
}

const std::string& HoloFn::label() const { return node_->label; }

HoloFn HoloFn::labeled(std::string label) const {
    HoloFn f;
    auto n = std::make_shared<Node>(*node_);
    n->label = std::move(label);
    f.node_ = n;
    return f;
}

namespace {

cplx eval_node(const HoloFn::Node& n, cplx z) {
    using K = HoloFn::Node::K;
    switch (n.k) {
        case K::zero:
            return {0.0, 0.0};
        case K::constant:
            return n.c;
        case K::poly: {
            cplx acc(0.0, 0.0);
            for (std::size_t k = n.coeffs.size(); k-- > 0;) acc = acc * z + n.coeffs[k];
            return acc;
        }
        case K::puiseux_exp:
            return std::exp(n.p.eval(z, n.branch));
        case K::power_log: {
            cplx L = branch_log(z, n.branch);
            cplx v = std::exp(n.rho * L);
            for (int i = 0; i < n.log_power; ++i) v *= L;
            return v;
        }
        case K::trunc:
            return n.ts.eval(z, n.branch);
        case K::sum: {
            cplx acc(0.0, 0.0);
            for (const auto& part : n.parts) acc += part.eval(z);
            return acc;
        }
        case K::product: {
            cplx acc(1.0, 0.0);
            for (const auto& part : n.parts) acc *= part.eval(z);
            return acc;
        }
        case K::scale:
            return n.c * n.parts[0].eval(z);
        case K::pullback:
            return n.parts[0].eval(n.chart.eval(z));
        case K::pushforward: {
            auto w = n.chart.invert(z);
            if (!w) fail(errc::numeric_failure, "HoloFn: chart inversion failed");
            return n.parts[0].eval(*w);
        }
        case K::path_integral:
            return n.fn(z);
        case K::matrix_entry:
            return n.parts[0].eval(z);
    }
    return {0.0, 0.0};
}

double log_abs_node(const HoloFn::Node& n, cplx z) {
    using K = HoloFn::Node::K;
    switch (n.k) {
        case K::puiseux_exp:
            return n.p.eval(z, n.branch).real();
        case K::power_log: {
            cplx L = branch_log(z, n.branch);
            double v = (n.rho * L).real();
            for (int i = 0; i < n.log_power; ++i) v += std::log(std::abs(L));
            return v;
        }
        case K::product: {
            double acc = 0.0;
            for (const auto& part : n.parts) acc += part.log_abs(z);
            return acc;
        }
        case K::scale:
            return std::log(std::abs(n.c)) + n.parts[0].log_abs(z);
        case K::pullback:
            return n.parts[0].log_abs(n.chart.eval(z));
        case K::pushforward: {
            auto w = n.chart.invert(z);
            if (!w) fail(errc::numeric_failure, "HoloFn: chart inversion failed");
            return n.parts[0].log_abs(*w);
        }
        case K::matrix_entry:
            return n.parts[0].log_abs(z);
        default: {
            double a = std::abs(eval_node(n, z));
            return a > 0.0 ? std::log(a) : -std::numeric_limits<double>::infinity();
        }
    }
}

} // namespace

cplx HoloFn::eval(cplx z) const { return eval_node(*node_, z); }

double HoloFn::log_abs(cplx z) const { return log_abs_node(*node_, z); }

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::tempered:
            return "tempered";
        case Verdict::not_tempered:
            return "not-tempered";
        case Verdict::inconclusive:
            return "inconclusive";
    }
    return "inconclusive";
}

namespace {

/// Boundary point cloud of a region, filtered to points not interior to it.
class BoundaryCloud {
public:
    BoundaryCloud(const Region& reg, int n_boundary) {
        // reuse boundary_distance's discretization through a probe-free path:
        // collect candidate points, keep non-members
        collect(reg, n_boundary);
    }

    double dist(cplx z) const {
        double best = std::numeric_limits<double>::infinity();
        for (cplx q : pts_) best = std::min(best, std::abs(z - q));
        return best;
    }

    cplx nearest(cplx z) const {
        double best = std::numeric_limits<double>::infinity();
        cplx arg = z;
        for (cplx q : pts_) {
            double d = std::abs(z - q);
            if (d < best) {
                best = d;
                arg = q;
            }
        }
        return arg;
    }

private:
    std::vector<cplx> pts_;

    void collect(const Region& reg, int n_boundary);
};

void append_sector_boundary(const Sector& s, int n, std::vector<cplx>& out) {
    // lateral edges carry both a uniform grid and a log-spaced grid; without
    // the latter, points deep in the sector see the vertex as their nearest
    // boundary point and the measured delta degrades to |z|
    const int n_log = std::max(n, 48);
    const double decades = 12.0;
    for (double edge : {s.alpha(), s.beta()}) {
        cplx dir = std::exp(cplx(0.0, edge));
        for (int i = 0; i <= n; ++i) out.push_back(s.r * i / static_cast<double>(n) * dir);
        for (int i = 1; i <= n_log; ++i)
            out.push_back(s.r * std::pow(10.0, -decades * i / n_log) * dir);
    }
    for (int i = 0; i <= n; ++i) {
        double t = s.alpha() + s.amplitude() * i / static_cast<double>(n);
        out.push_back(s.r * std::exp(cplx(0.0, t)));
    }
}

void append_leaf_boundary(const Region& reg, int n, std::vector<cplx>& out) {
    constexpr double kPi = 3.14159265358979323846;
    switch (reg.kind()) {
        case Region::Kind::raw_sector:
            append_sector_boundary(reg.sector(), n, out);
            break;
        case Region::Kind::disc:
            for (int i = 0; i < n; ++i) {
                double t = 2.0 * kPi * (i + 0.5) / n;
                out.push_back(reg.disc_center() + reg.disc_radius() * std::exp(cplx(0.0, t)));
            }
            break;
        case Region::Kind::sector_image: {
            std::vector<cplx> wpts;
            append_sector_boundary(reg.sector(), n, wpts);
            for (cplx w : wpts) out.push_back(reg.chart().eval(w));
            break;
        }
        case Region::Kind::union_node:
        case Region::Kind::intersect_node:
            for (const auto& c : reg.children()) append_leaf_boundary(c, n, out);
            break;
    }
}

void BoundaryCloud::collect(const Region& reg, int n_boundary) {
    std::vector<cplx> raw;
    append_leaf_boundary(reg, n_boundary, raw);
    for (cplx q : raw)
        if (!reg.contains(q)) pts_.push_back(q);
}

struct SampleSet {
    std::vector<StratumStat> strata;
    std::vector<std::pair<double, double>> points;  // (delta, log|f|)
    double min_delta = std::numeric_limits<double>::infinity();
    int total = 0;
};

SampleSet collect_samples(const HoloFn& f, const Region& reg, const TemperedOptions& opts,
                          int total_target) {
    std::mt19937_64 rng(opts.seed);
    BoundaryCloud cloud(reg, opts.n_boundary);
    SampleSet out;
    out.strata.resize(opts.strata + 1);
    for (int k = 0; k <= opts.strata; ++k) out.strata[k].k = k;

    auto pts = sample_region(reg, total_target, rng, opts.strata + 4);
    // boundary-anchored probes: walk from a spread of base samples toward the
    // nearest boundary point so every stratum's sup envelope sees every radius
    // scale; pure random sampling leaves deep strata dominated by whatever
    // radius happens to land there and the envelope turns jagged
    {
        std::size_t stride =
            std::max<std::size_t>(1, pts.size() / (4 * static_cast<std::size_t>(opts.strata + 1)));
        std::vector<cplx> aug;
        for (std::size_t i = 0; i < pts.size(); i += stride) {
            cplx z = pts[i];
            cplx q = cloud.nearest(z);
            double gap = std::abs(z - q);
            if (!(gap > 0.0)) continue;
            for (int k = 0; k <= opts.strata; ++k) {
                double t = std::exp2(-static_cast<double>(k)) / gap;
                if (!(t < 1.0)) continue;
                cplx zk = q + t * (z - q);
                if (reg.contains(zk)) aug.push_back(zk);
            }
        }
        pts.insert(pts.end(), aug.begin(), aug.end());
    }
    for (cplx z : pts) {
        double delta = cloud.dist(z);
        if (!(delta > 0.0)) continue;
        int k = static_cast<int>(std::floor(-std::log2(delta)));
        if (k < 0) k = 0;
        if (k > opts.strata) continue;  // deeper than the stated grid
        double la;
        try {
            la = f.log_abs(z);
        } catch (const error&) {
            continue;
        }
        if (std::isnan(la)) continue;
        auto& st = out.strata[k];
        if (st.count == 0 || la > st.max_abs) st.max_abs = la;  // stored in log units
        st.count += 1;
        out.points.emplace_back(delta, la);
        out.min_delta = std::min(out.min_delta, delta);
        out.total += 1;
    }
    return out;
}

} // namespace

double tempered_norm(const HoloFn& f, const Region& reg, double M, int grid_size,
                     const TemperedOptions& opts) {
    if (M < 0.0) fail(errc::domain_error, "tempered_norm: M must be >= 0");
    SampleSet s = collect_samples(f, reg, opts, grid_size);
    if (s.total == 0) fail(errc::domain_error, "tempered_norm: empty sampled region");
    double best = 0.0;
    for (auto [delta, la] : s.points) {
        double v = std::exp(std::min(700.0, la + M * std::log(delta)));
        best = std::max(best, v);
    }
    return best;
}

TemperedCertificate fit_growth_exponent(const HoloFn& f, const Region& reg,
                                        const TemperedOptions& opts) {
    TemperedCertificate cert;
    cert.seed = opts.seed;
    int total_target = opts.per_stratum * (opts.strata + 1);
    cert.grid_size = total_target;
    SampleSet s = collect_samples(f, reg, opts, total_target);
    cert.strata.clear();
    for (const auto& st : s.strata)
        if (st.count > 0) cert.strata.push_back(st);
    cert.min_delta = s.min_delta;

    std::vector<std::pair<double, double>> fitpts;  // (x = -log delta_k, y = log max|f|)
    for (const auto& st : s.strata) {
        if (st.count < 8) continue;
        double x = (st.k + 0.5) * kLog2;
        double y = std::max(st.max_abs, std::log(1e-300));
        fitpts.emplace_back(x, y);
    }
    if (fitpts.size() < 4) {
        cert.verdict = Verdict::inconclusive;
        return cert;
    }

    // least-squares line y = a + b x
    auto ls_fit = [](const std::vector<std::pair<double, double>>& pts) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (auto [x, y] : pts) {
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        double n = static_cast<double>(pts.size());
        double b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        return std::pair<double, double>{(sy - b * sx) / n, b};
    };
    auto [a, b] = ls_fit(fitpts);
    // the stratum statistic is a sampled sup envelope: an isolated stratum far
    // below the line marks an under-sampled stratum, not decay, so drop such
    // dips once and refit (growth always shows as positive deviations)
    {
        std::vector<std::pair<double, double>> kept;
        for (auto [x, y] : fitpts)
            if (y >= a + b * x - opts.fit_residual_tol * std::log(10.0)) kept.emplace_back(x, y);
        if (kept.size() >= 4 && kept.size() < fitpts.size()) {
            fitpts = std::move(kept);
            std::tie(a, b) = ls_fit(fitpts);
        }
    }
    double resid = 0.0;
    for (auto [x, y] : fitpts) resid = std::max(resid, std::abs(y - (a + b * x)));
    resid /= std::log(10.0);  // sup-norm residual in decades
    cert.fitted_slope = b;
    cert.fit_residual = resid;

    // divergence probe on the deepest strata
    double worst_inc = -std::numeric_limits<double>::infinity();
    for (std::size_t i = fitpts.size() >= 4 ? fitpts.size() - 3 : 1; i < fitpts.size(); ++i) {
        double inc = (fitpts[i].second - fitpts[i - 1].second) /
                     (fitpts[i].first - fitpts[i - 1].first);
        worst_inc = std::max(worst_inc, inc);
    }

    if (b > opts.m_max || worst_inc > opts.m_max) {
        cert.verdict = Verdict::not_tempered;
        cert.M = opts.m_max;
        return cert;
    }
    // non-increasing stratum maxima: bounded near the vertex, tempered with M = 0
    // (the line fit can be poor for rapidly decaying functions once log|f| clamps)
    if (b <= 0.25 && worst_inc <= 0.25) {
        cert.verdict = Verdict::tempered;
        cert.M = 0.0;
        double best = 0.0;
        for (auto [delta, la] : s.points) best = std::max(best, std::exp(std::min(700.0, la)));
        cert.sup_value = best;
        return cert;
    }
    if (resid < opts.fit_residual_tol) {
        cert.verdict = Verdict::tempered;
        cert.M = std::max(0.0, std::ceil(b / 0.25) * 0.25);
        double best = 0.0;
        for (auto [delta, la] : s.points)
            best = std::max(best, std::exp(std::min(700.0, la + cert.M * std::log(delta))));
        cert.sup_value = best;
        return cert;
    }
    cert.verdict = Verdict::inconclusive;
    return cert;
}

LojasiewiczFit lojasiewicz_exponents(const std::function<double(cplx)>& f,
                                     const std::function<double(cplx)>& g, const Region& K,
                                     int n_samples, std::uint64_t seed, double r_max) {
    std::mt19937_64 rng(seed);
    auto pts = sample_region(K, n_samples, rng, 18);
    if (pts.empty()) fail(errc::domain_error, "lojasiewicz_exponents: empty sampled region");

    std::vector<std::pair<double, double>> fg;  // (f, g), both >= 0
    for (cplx z : pts) {
        double fv = f(z), gv = g(z);
        if (fv < 0.0 || gv < 0.0)
            fail(errc::hypothesis_violation, "lojasiewicz_exponents: negative sample");
        if (fv < 1e-12 && gv > 1e-6)
            fail(errc::hypothesis_violation,
                 "lojasiewicz_exponents: zero-set inclusion violated on samples");
        fg.emplace_back(fv, gv);
    }
    std::sort(fg.begin(), fg.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });
    double g_median = fg[fg.size() / 2].second;

    auto c_over = [&](double r, bool deep_only, bool shallow_only) {
        double c = std::numeric_limits<double>::infinity();
        for (auto [fv, gv] : fg) {
            if (gv <= 0.0) continue;
            if (deep_only && gv >= g_median) continue;
            if (shallow_only && gv < g_median) continue;
            c = std::min(c, fv / std::pow(gv, r));
        }
        return c;
    };
    auto ok = [&](double r) {
        double deep = c_over(r, true, false);
        double shallow = c_over(r, false, true);
        if (!std::isfinite(shallow) || shallow <= 0.0) return false;
        return deep >= 0.25 * shallow;
    };

    double r_ok = -1.0;
    for (double r = 0.0; r <= r_max + 1e-9; r += 0.25) {
        if (ok(r)) {
            r_ok = r;
            break;
        }
    }
    if (r_ok < 0.0) r_ok = r_max;
    double lo = std::max(0.0, r_ok - 0.25), hi = r_ok;
    if (r_ok > 0.0 && !ok(lo)) {
        for (int i = 0; i < 20; ++i) {
            double mid = 0.5 * (lo + hi);
            (ok(mid) ? hi : lo) = mid;
        }
    } else {
        hi = r_ok;
    }
    LojasiewiczFit out;
    out.r = hi;
    out.c = c_over(hi, false, false);
    if (!std::isfinite(out.c)) out.c = 0.0;
    return out;
}

PullbackReport pullback_temperedness_check(const HoloFn& h, const Chart& chart,
                                           const Sector& sector, const TemperedOptions& opts) {
    if (!chart.check_injectivity(sector))
        fail(errc::domain_error, "pullback_temperedness_check: chart not injective on sector");
    Region image = Region::sector_image(chart, sector);
    Region base = Region::raw_sector(sector);

    PullbackReport rep;
    rep.direct = fit_growth_exponent(h, image, opts);
    rep.pulled = fit_growth_exponent(HoloFn::pullback(chart, h), base, opts);

    if (rep.direct.verdict == Verdict::inconclusive || rep.pulled.verdict == Verdict::inconclusive) {
        rep.verdict = Verdict::inconclusive;
        rep.consistent = false;
        return rep;
    }
    rep.consistent = rep.direct.verdict == rep.pulled.verdict;
    rep.verdict = rep.direct.verdict;

    BoundaryCloud image_cloud(image, opts.n_boundary);
    BoundaryCloud base_cloud(base, opts.n_boundary);
    auto delta_img = [&](cplx w) { return image_cloud.dist(chart.eval(w)); };
    auto delta_base = [&](cplx w) { return base_cloud.dist(w); };
    rep.delta_fwd = lojasiewicz_exponents(delta_img, delta_base, base, 1500, opts.seed + 1);
    rep.delta_bwd = lojasiewicz_exponents(delta_base, delta_img, base, 1500, opts.seed + 2);
    return rep;
}

} // namespace sectoria
