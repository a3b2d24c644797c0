#include "sectoria/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sectoria/errors.hpp"

namespace sectoria {

namespace {

constexpr double kPi = 3.14159265358979323846;

double wrap_pi(double x) {
    // wrap into (-pi, pi]
    x = std::fmod(x, 2.0 * kPi);
    if (x <= -kPi) x += 2.0 * kPi;
    if (x > kPi) x -= 2.0 * kPi;
    return x;
}

double uniform01(std::mt19937_64& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

} // namespace

Sector::Sector(double tau_, double eta_, double r_) : tau(tau_), eta(eta_), r(r_) {
    if (!(eta > 0.0) || !(eta < kPi)) fail(errc::domain_error, "Sector: need 0 < eta < pi");
    if (!(r > 0.0)) fail(errc::domain_error, "Sector: need r > 0");
}

Sector Sector::from_angles(double alpha, double beta, double r) {
    if (!(alpha < beta)) fail(errc::domain_error, "Sector: need alpha < beta");
    return Sector(0.5 * (alpha + beta), 0.5 * (beta - alpha), r);
}

bool Sector::contains(cplx z) const {
    double rho = std::abs(z);
    if (!(rho > 0.0 && rho < r)) return false;
    return std::abs(wrap_pi(std::arg(z) - tau)) < eta;
}

double Sector::boundary_distance_exact(cplx z) const {
    double best = r - std::abs(z);
    for (double edge : {alpha(), beta()}) {
        cplx w = z * std::exp(cplx(0.0, -edge));
        double dist;
        if (w.real() <= 0.0)
            dist = std::abs(z);
        else if (w.real() >= r)
            dist = std::abs(z - r * std::exp(cplx(0.0, edge)));
        else
            dist = std::abs(w.imag());
        best = std::min(best, dist);
    }
    best = std::min(best, std::abs(z));  // vertex
    return best;
}

double CurveSpec::value_at_0() const { return poly.coeff(0, 1).real(); }

double CurveSpec::eval(double rho) const { return poly.eval_real(rho); }

bool CurveSpec::is_constant() const {
    return poly.is_zero() || (poly.terms().size() == 1 && poly.terms().begin()->first == 0);
}

void CurveSpec::validate() const {
    if (!(R > 0.0)) fail(errc::domain_error, "CurveSpec: need R > 0");
    if (!poly.is_real()) fail(errc::domain_error, "CurveSpec: coefficients must be real");
    if (!poly.all_exponents_nonnegative())
        fail(errc::domain_error, "CurveSpec: exponents must be nonnegative");
    for (int i = 0; i <= 64; ++i) {
        double v = eval(R * i / 64.0);
        if (!(v > -kPi && v < 3.0 * kPi))
            fail(errc::domain_error, "CurveSpec: values must lie in (-pi, 3pi)");
    }
}

void Band::validate(int grid) const {
    lower.validate();
    upper.validate();
    if (!(R > 0.0 && R <= lower.R && R <= upper.R))
        fail(errc::domain_error, "Band: radius exceeds curve domains");
    if (lower.value_at_0() > upper.value_at_0())
        fail(errc::domain_error, "Band: lower(0) > upper(0)");
    for (int i = 1; i <= grid; ++i) {
        double rho = R * i / (grid + 1.0);
        if (!(lower.eval(rho) < upper.eval(rho)))
            fail(errc::unsupported_case, "Band: boundary curves touch at an interior radius");
    }
}

bool Band::contains_polar(double rho, double theta) const {
    if (!(rho > 0.0 && rho < R)) return false;
    return lower.eval(rho) < theta && theta < upper.eval(rho);
}

bool Band::contains_point(cplx z) const {
    double rho = std::abs(z);
    if (!(rho > 0.0 && rho < R)) return false;
    double theta0 = std::arg(z);
    for (double theta : {theta0, theta0 + 2.0 * kPi}) {
        if (theta > -kPi && theta < 3.0 * kPi && contains_polar(rho, theta)) return true;
    }
    return false;
}

cplx band_to_plane(const Band& b, double rho, double theta) {
    if (!b.contains_polar(rho, theta))
        fail(errc::domain_error, "band_to_plane: sample outside band");
    return rho * std::exp(cplx(0.0, theta));
}

Chart::Chart(PowerSeries series, Sector validity)
    : series_(std::move(series)), deriv_(series_.derivative()), validity_(validity) {
    order_ = series_.vanishing_order();
    if (order_ < 1) fail(errc::ill_posed_chart, "Chart: phi(0) must vanish to order >= 1");
    lead_ = series_.leading_coeff();
    if (lead_ == cplx(0.0, 0.0)) fail(errc::ill_posed_chart, "Chart: zero leading coefficient");
}

cplx Chart::eval(cplx w) const { return series_.eval(w); }
cplx Chart::deriv(cplx w) const { return deriv_.eval(w); }

std::optional<cplx> Chart::invert(cplx z, double tol) const {
    if (z == cplx(0.0, 0.0)) return cplx(0.0, 0.0);
    int c = order_;
    double r0 = std::pow(std::abs(z / lead_), 1.0 / c);
    double base_arg = std::arg(z / lead_) / c;
    std::optional<cplx> fallback;
    for (int k = 0; k < c; ++k) {
        cplx w = r0 * std::exp(cplx(0.0, base_arg + 2.0 * kPi * k / c));
        double fmag = std::abs(eval(w) - z);
        bool converged = false;
        for (int it = 0; it < 50; ++it) {
            cplx dphi = deriv(w);
            if (dphi == cplx(0.0, 0.0)) break;
            cplx step = (eval(w) - z) / dphi;
            double damp = 1.0;
            cplx w_next = w;
            double f_next = fmag;
            for (int h = 0; h < 8; ++h) {
                cplx cand = w - damp * step;
                double f = std::abs(eval(cand) - z);
                if (f < fmag) {
                    w_next = cand;
                    f_next = f;
                    break;
                }
                damp *= 0.5;
            }
            if (f_next >= fmag && it > 0) break;
            w = w_next;
            fmag = f_next;
            if (fmag <= tol * std::max(1.0, std::abs(z))) {
                converged = true;
                break;
            }
        }
        if (converged) {
            double slack = 1e-9;
            bool inside = std::abs(w) <= validity_.r * (1.0 + slack) &&
                          std::abs(wrap_pi(std::arg(w) - validity_.tau)) <= validity_.eta + slack;
            if (inside) return w;
            if (!fallback) fallback = w;
        }
    }
    return fallback;
}

bool Chart::check_injectivity(const Sector& sec, int n_pairs, std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    for (int i = 0; i < n_pairs; ++i) {
        double r1 = sec.r * std::sqrt(uniform01(rng));
        double r2 = sec.r * std::sqrt(uniform01(rng));
        double t1 = sec.alpha() + sec.amplitude() * uniform01(rng);
        double t2 = sec.alpha() + sec.amplitude() * uniform01(rng);
        cplx w1 = r1 * std::exp(cplx(0.0, t1));
        cplx w2 = r2 * std::exp(cplx(0.0, t2));
        double gap = std::abs(w1 - w2);
        if (gap < 1e-14) continue;
        if (std::abs(eval(w1) - eval(w2)) < 1e-12 * gap) return false;
    }
    return true;
}

Chart chart_from_arc(const CurveSpec& curve, long series_order) {
    curve.validate();
    long d = curve.poly.ramification();

    // P(t) := curve(t^d) is a polynomial in t with integer exponents
    std::vector<double> a;
    for (const auto& [num, c] : curve.poly.terms()) {
        if (static_cast<std::size_t>(num) >= a.size()) a.resize(num + 1, 0.0);
        a[num] += c.real();
    }
    if (a.empty()) a.push_back(0.0);
    double a0 = a[0];

    // exp(i Q(t)), Q = P - a0, via k f_k = sum_{j>=1} j (i q_j) f_{k-j}
    std::size_t L = static_cast<std::size_t>(series_order) + 1;
    std::vector<cplx> e(L, cplx(0.0, 0.0));
    e[0] = 1.0;
    for (std::size_t k = 1; k < L; ++k) {
        cplx acc(0.0, 0.0);
        for (std::size_t j = 1; j <= k && j < a.size(); ++j)
            acc += static_cast<double>(j) * cplx(0.0, a[j]) * e[k - j];
        e[k] = acc / static_cast<double>(k);
    }

    PowerSeries phi;
    phi.c.assign(static_cast<std::size_t>(d) + L, cplx(0.0, 0.0));
    cplx rot = std::exp(cplx(0.0, a0));
    for (std::size_t k = 0; k < L; ++k) phi.c[d + k] = rot * e[k];

    double eta_v = std::min(0.6, 0.8 * kPi / (2.0 * d));
    double r_t = std::min(std::pow(curve.R, 1.0 / d), 1.0);

    auto exact = [&](cplx t) {
        cplx P(0.0, 0.0);
        for (std::size_t j = a.size(); j-- > 0;) P = P * t + a[j];
        return std::pow(t, static_cast<double>(d)) * std::exp(cplx(0.0, 1.0) * P);
    };

    for (int shrink = 0; shrink < 60; ++shrink) {
        Sector validity(0.0, eta_v, r_t);
        double worst = 0.0;
        for (int i = 0; i < 64; ++i) {
            double frac = (i % 8 + 1) / 8.0;
            double ang = -eta_v + 2.0 * eta_v * ((i / 8) + 0.5) / 8.0;
            cplx t = frac * r_t * std::exp(cplx(0.0, ang));
            worst = std::max(worst, std::abs(phi.eval(t) - exact(t)));
        }
        Chart chart(phi, validity);
        if (worst <= 1e-10 && chart.check_injectivity(validity)) return chart;
        r_t *= 0.7;
    }
    fail(errc::precision_error, "chart_from_arc: expansion remainder not controllable");
}

struct Region::Node {
    Kind kind;
    std::vector<Region> children;
    Sector sec;
    Chart chart;
    cplx center{0.0, 0.0};
    double radius = 0.0;
};

Region Region::raw_sector(Sector s) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::raw_sector;
    n->sec = s;
    Region r;
    r.node_ = n;
    return r;
}

Region Region::sector_image(Chart chart, Sector s) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::sector_image;
    n->chart = std::move(chart);
    n->sec = s;
    Region r;
    r.node_ = n;
    return r;
}

Region Region::disc(cplx center, double radius) {
    if (!(radius > 0.0)) fail(errc::domain_error, "Region::disc: radius must be positive");
    auto n = std::make_shared<Node>();
    n->kind = Kind::disc;
    n->center = center;
    n->radius = radius;
    Region r;
    r.node_ = n;
    return r;
}

Region Region::union_of(std::vector<Region> children) {
    if (children.empty()) fail(errc::domain_error, "Region::union_of: empty");
    auto n = std::make_shared<Node>();
    n->kind = Kind::union_node;
    n->children = std::move(children);
    Region r;
    r.node_ = n;
    return r;
}

Region Region::intersect_of(std::vector<Region> children) {
    if (children.empty()) fail(errc::domain_error, "Region::intersect_of: empty");
    auto n = std::make_shared<Node>();
    n->kind = Kind::intersect_node;
    n->children = std::move(children);
    Region r;
    r.node_ = n;
    return r;
}

Region::Kind Region::kind() const { return node_->kind; }
const std::vector<Region>& Region::children() const { return node_->children; }
const Sector& Region::sector() const { return node_->sec; }
const Chart& Region::chart() const { return node_->chart; }
cplx Region::disc_center() const { return node_->center; }
double Region::disc_radius() const { return node_->radius; }

bool Region::contains(cplx z) const {
    switch (node_->kind) {
        case Kind::raw_sector:
            return node_->sec.contains(z);
        case Kind::disc:
            return std::abs(z - node_->center) < node_->radius;
        case Kind::sector_image: {
            auto w = node_->chart.invert(z);
            return w && node_->sec.contains(*w);
        }
        case Kind::union_node:
            for (const auto& c : node_->children)
                if (c.contains(z)) return true;
            return false;
        case Kind::intersect_node:
            for (const auto& c : node_->children)
                if (!c.contains(z)) return false;
            return true;
    }
    return false;
}

bool region_membership(const Region& reg, cplx z) { return reg.contains(z); }

namespace {

void sector_boundary_points(const Sector& s, int n, std::vector<cplx>& out) {
    for (double edge : {s.alpha(), s.beta()}) {
        cplx dir = std::exp(cplx(0.0, edge));
        for (int i = 0; i <= n; ++i) out.push_back(s.r * i / static_cast<double>(n) * dir);
    }
    for (int i = 0; i <= n; ++i) {
        double t = s.alpha() + s.amplitude() * i / static_cast<double>(n);
        out.push_back(s.r * std::exp(cplx(0.0, t)));
    }
}

void leaf_boundary_points(const Region& reg, int n, std::vector<cplx>& out) {
    switch (reg.kind()) {
        case Region::Kind::raw_sector:
            sector_boundary_points(reg.sector(), n, out);
            break;
        case Region::Kind::disc:
            for (int i = 0; i < n; ++i) {
                double t = 2.0 * kPi * (i + 0.5) / n;
                out.push_back(reg.disc_center() + reg.disc_radius() * std::exp(cplx(0.0, t)));
            }
            break;
        case Region::Kind::sector_image: {
            std::vector<cplx> wpts;
            sector_boundary_points(reg.sector(), n, wpts);
            for (cplx w : wpts) out.push_back(reg.chart().eval(w));
            break;
        }
        case Region::Kind::union_node:
        case Region::Kind::intersect_node:
            for (const auto& c : reg.children()) leaf_boundary_points(c, n, out);
            break;
    }
}

void collect_leaves(const Region& reg, std::vector<Region>& out) {
    switch (reg.kind()) {
        case Region::Kind::union_node:
        case Region::Kind::intersect_node:
            for (const auto& c : reg.children()) collect_leaves(c, out);
            break;
        default:
            out.push_back(reg);
    }
}

cplx propose_leaf_point(const Region& leaf, std::mt19937_64& rng, int decades) {
    switch (leaf.kind()) {
        case Region::Kind::raw_sector:
        case Region::Kind::sector_image: {
            const Sector& s = leaf.sector();
            double rho = s.r * std::exp2(-uniform01(rng) * decades);
            double th = s.alpha() + s.amplitude() * uniform01(rng);
            cplx w = rho * std::exp(cplx(0.0, th));
            return leaf.kind() == Region::Kind::sector_image ? leaf.chart().eval(w) : w;
        }
        case Region::Kind::disc: {
            double frac;
            double u = uniform01(rng);
            if (uniform01(rng) < 0.5)
                frac = std::sqrt(u);
            else
                frac = 1.0 - std::exp2(-u * 20.0);
            double th = 2.0 * kPi * uniform01(rng);
            return leaf.disc_center() + leaf.disc_radius() * frac * std::exp(cplx(0.0, th));
        }
        default:
            return {0.0, 0.0};
    }
}

} // namespace

namespace {

double point_segment_distance(cplx z, cplx a, cplx b) {
    cplx ab = b - a;
    double len2 = std::norm(ab);
    if (len2 == 0.0) return std::abs(z - a);
    double t = std::clamp(((z - a) * std::conj(ab)).real() / len2, 0.0, 1.0);
    return std::abs(z - (a + t * ab));
}

} // namespace

double boundary_distance(const Region& reg, cplx z, int n_boundary) {
    if (!reg.contains(z)) fail(errc::domain_error, "boundary_distance: point not in region");
    std::vector<Region> leaves;
    collect_leaves(reg, leaves);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& leaf : leaves) {
        std::vector<cplx> pts;
        leaf_boundary_points(leaf, n_boundary, pts);
        // pts holds per-edge runs of n_boundary + 1 points; walk consecutive pairs
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            cplx mid = 0.5 * (pts[i] + pts[i + 1]);
            cplx seg = pts[i + 1] - pts[i];
            double len = std::abs(seg);
            // interior edge (covered by another leaf) iff both sides are inside
            if (len > 0.0) {
                cplx nrm = cplx(0.0, 1.0) * seg / len;
                double off = std::max(1e-9, 0.05 * len);
                if (reg.contains(mid + off * nrm) && reg.contains(mid - off * nrm)) continue;
            } else if (reg.contains(mid)) {
                continue;
            }
            best = std::min(best, point_segment_distance(z, pts[i], pts[i + 1]));
        }
    }
    return best;
}

std::vector<cplx> sample_region(const Region& reg, int n, std::mt19937_64& rng,
                                int radius_decades) {
    std::vector<Region> leaves;
    collect_leaves(reg, leaves);
    std::vector<cplx> out;
    out.reserve(n);
    long attempts = 0, cap = 120L * n;
    while (static_cast<int>(out.size()) < n && attempts++ < cap) {
        const Region& leaf =
            leaves[std::uniform_int_distribution<std::size_t>(0, leaves.size() - 1)(rng)];
        cplx z = propose_leaf_point(leaf, rng, radius_decades);
        if (reg.contains(z)) out.push_back(z);
    }
    return out;
}

namespace {

struct StripSpec {
    Chart chart;
    long d;
    double tau;  // full amplitude of the w-side sector
};

StripSpec make_strip(const CurveSpec& curve, double max_amplitude, double gap_budget,
                     long chart_order) {
    StripSpec s;
    s.chart = chart_from_arc(curve, chart_order);
    s.d = curve.poly.ramification();
    double v0 = curve.value_at_0();
    double margin = std::min(kPi / 4.0, 0.5 * std::min(v0 + kPi, 3.0 * kPi - v0));
    s.tau = std::min({max_amplitude, margin / s.d, 0.95 * s.chart.validity().eta});
    if (gap_budget > 0.0) s.tau = std::min(s.tau, 0.5 * gap_budget / s.d);
    if (!(s.tau > 0.0)) fail(errc::numeric_failure, "cover_band: no admissible strip amplitude");
    return s;
}

} // namespace

BandCover cover_band(const Band& b, double max_amplitude, double max_radius,
                     const CoverOptions& opts) {
    b.validate();
    if (!(max_amplitude > 0.0 && max_amplitude < kPi))
        fail(errc::domain_error, "cover_band: need 0 < max_amplitude < pi");
    if (!(max_radius > 0.0 && max_radius <= b.R))
        fail(errc::domain_error, "cover_band: need 0 < max_radius <= band radius");

    double eta0 = b.lower.value_at_0();
    double xi0 = b.upper.value_at_0();
    double gap0 = xi0 - eta0;
    bool cusp = gap0 < 1e-12;
    bool both_const = b.lower.is_constant() && b.upper.is_constant();

    std::optional<StripSpec> low, up;
    if (!(both_const && !cusp && gap0 <= max_amplitude)) {
        low = make_strip(b.lower, max_amplitude, cusp ? 0.0 : gap0, opts.chart_order);
        up = make_strip(b.upper, max_amplitude, cusp ? 0.0 : gap0, opts.chart_order);
    }

    auto build = [&](double W) -> std::vector<Region> {
        double shrunk = 0.995 * W;
        std::vector<Region> pieces;
        if (both_const && !cusp && gap0 <= max_amplitude) {
            pieces.push_back(
                Region::raw_sector(Sector(0.5 * (eta0 + xi0), 0.5 * gap0, shrunk)));
            return pieces;
        }
        double r1 = std::min(low->chart.validity().r, std::pow(shrunk, 1.0 / low->d));
        double r2 = std::min(up->chart.validity().r, std::pow(shrunk, 1.0 / up->d));
        Sector s1(0.5 * low->tau, 0.5 * low->tau, r1);
        Sector s2(-0.5 * up->tau, 0.5 * up->tau, r2);
        if (cusp) {
            pieces.push_back(Region::intersect_of({Region::sector_image(low->chart, s1),
                                                   Region::sector_image(up->chart, s2)}));
            return pieces;
        }
        pieces.push_back(Region::sector_image(low->chart, s1));
        double alpha = eta0 + 0.6 * low->d * low->tau;
        double beta = xi0 - 0.6 * up->d * up->tau;
        if (beta > alpha) {
            int n_mid = static_cast<int>(std::ceil((beta - alpha) / (0.9 * max_amplitude)));
            double width = (beta - alpha) / n_mid;
            double ov = 0.05 * width;
            for (int i = 0; i < n_mid; ++i) {
                double lo = std::max(alpha, alpha + i * width - ov);
                double hi = std::min(beta, alpha + (i + 1) * width + ov);
                pieces.push_back(Region::raw_sector(Sector::from_angles(lo, hi, shrunk)));
            }
        }
        pieces.push_back(Region::sector_image(up->chart, s2));
        return pieces;
    };

    std::mt19937_64 rng(opts.seed);
    double W = std::min(max_radius, b.R);
    for (int halving = 0; halving <= opts.max_halvings; ++halving, W *= 0.5) {
        std::vector<Region> pieces = build(W);
        // coverage: band samples must be caught by some piece
        int covered = 0;
        for (int i = 0; i < opts.n_check; ++i) {
            double rho = W * std::exp2(-uniform01(rng) * 20.0);
            double lo = b.lower.eval(rho), hi = b.upper.eval(rho);
            if (!(hi > lo)) {
                ++covered;  // degenerate slice carries no open target
                continue;
            }
            double theta = lo + (hi - lo) * uniform01(rng);
            cplx z = rho * std::exp(cplx(0.0, theta));
            bool hit = false;
            for (const auto& p : pieces)
                if (p.contains(z)) {
                    hit = true;
                    break;
                }
            if (hit) ++covered;
        }
        double coverage = static_cast<double>(covered) / opts.n_check;
        // soundness: piece samples must lie in the band and inside the disc
        int sound = 0, total = 0;
        int per_piece = std::max(200, opts.n_check / static_cast<int>(pieces.size()));
        for (const auto& p : pieces) {
            auto pts = sample_region(p, per_piece, rng, 20);
            for (cplx z : pts) {
                ++total;
                if (b.contains_point(z) && std::abs(z) < W) ++sound;
            }
        }
        double soundness = total > 0 ? static_cast<double>(sound) / total : 0.0;
        if (coverage >= opts.min_agree && soundness >= opts.min_agree) {
            BandCover out;
            out.W_radius = W;
            out.pieces = std::move(pieces);
            return out;
        }
    }
    fail(errc::numeric_failure,
         "cover_band: membership agreement not reached after max halvings");
}

} // namespace sectoria
