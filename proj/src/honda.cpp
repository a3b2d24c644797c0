#include "sectoria/honda.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <queue>
#include <sstream>

#include "sectoria/errors.hpp"

namespace sectoria {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kPhaseTol = 1e-9;

double resolve_branch(const IntegralOptions& o, const Sector& S) {
    return std::isnan(o.branch_center) ? S.tau : o.branch_center;
}

double arg_on_branch(cplx z, double center) {
    double a = std::arg(z);
    while (a <= center - kPi) a += 2.0 * kPi;
    while (a > center + kPi) a -= 2.0 * kPi;
    return a;
}

// z^rho for complex rho on the branch centered at `center`
cplx powc(cplx z, cplx rho, double center) {
    if (rho == cplx(0.0, 0.0)) return cplx(1.0, 0.0);
    cplx lg(std::log(std::abs(z)), arg_on_branch(z, center));
    return std::exp(rho * lg);
}

// ---- Gauss7 / Kronrod15 pair --------------------------------------------

const double kXgk[8] = {0.991455371120813, 0.949107912342759, 0.864864423359769,
                        0.741531185599394, 0.586087235467691, 0.405845151377397,
                        0.207784955007898, 0.0};
const double kWgk[8] = {0.022935322010529, 0.063092092629979, 0.104790010322250,
                        0.140653259715525, 0.169004726639267, 0.190350578064785,
                        0.204432940075298, 0.209482141084728};
const double kWg[4] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                       0.417959183673469};

struct QuadPiece {
    double a = 0.0, b = 0.0;
    cplx val{0.0, 0.0};
    double err = 0.0;
};

QuadPiece gk15(const std::function<cplx(double)>& f, double a, double b) {
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    cplx fk(0.0, 0.0), fg(0.0, 0.0);
    cplx fc = f(c);
    fk += kWgk[7] * fc;
    fg += kWg[3] * fc;
    for (int i = 0; i < 7; ++i) {
        cplx lo = f(c - h * kXgk[i]);
        cplx hi = f(c + h * kXgk[i]);
        fk += kWgk[i] * (lo + hi);
        if (i % 2 == 1) fg += kWg[i / 2] * (lo + hi);
    }
    QuadPiece out;
    out.a = a;
    out.b = b;
    out.val = fk * h;
    out.err = std::abs(fk - fg) * std::abs(h);
    return out;
}

cplx adaptive_gk(const std::function<cplx(double)>& f, double a, double b,
                 const IntegralOptions& opts) {
    if (a == b) return cplx(0.0, 0.0);
    auto cmp = [](const QuadPiece& x, const QuadPiece& y) { return x.err < y.err; };
    std::priority_queue<QuadPiece, std::vector<QuadPiece>, decltype(cmp)> q(cmp);
    QuadPiece whole = gk15(f, a, b);
    cplx total = whole.val;
    double err = whole.err;
    q.push(whole);
    int n = 1;
    while (err > std::max(1e-14, opts.rel_tol * std::abs(total))) {
        if (n >= opts.max_intervals) {
            const QuadPiece& worst = q.top();
            std::ostringstream os;
            os << "quadrature did not converge; worst subinterval [" << worst.a << ", "
               << worst.b << "] error " << worst.err;
            fail(errc::integration_failure, os.str());
        }
        QuadPiece worst = q.top();
        q.pop();
        double mid = 0.5 * (worst.a + worst.b);
        if (mid == worst.a || mid == worst.b) {
            // interval at rounding resolution: accept its estimate
            err -= worst.err;
            continue;
        }
        QuadPiece l = gk15(f, worst.a, mid);
        QuadPiece r = gk15(f, mid, worst.b);
        total += l.val + r.val - worst.val;
        err += l.err + r.err - worst.err;
        q.push(l);
        q.push(r);
        ++n;
    }
    return total;
}

// adaptive_gk over a geometric pre-split toward both endpoints: boundary
// layers of the combined kernel sit at the path ends and can be narrower than
// the G7K15 node spacing, which makes the plain error estimate blind to them
cplx layered_gk(const std::function<cplx(double)>& f, double a, double b,
                const IntegralOptions& opts) {
    if (a == b) return cplx(0.0, 0.0);
    double len = b - a;
    std::vector<double> cuts;
    cuts.push_back(a);
    for (int j = 24; j >= 1; --j) cuts.push_back(a + len * std::pow(0.25, j));
    cuts.push_back(a + 0.5 * len);
    for (int j = 1; j <= 24; ++j) cuts.push_back(b - len * std::pow(0.25, j));
    cuts.push_back(b);
    cplx acc(0.0, 0.0);
    for (std::size_t i = 1; i < cuts.size(); ++i)
        if (cuts[i] != cuts[i - 1]) acc += adaptive_gk(f, cuts[i - 1], cuts[i], opts);
    return acc;
}

// ---- vertex rule ---------------------------------------------------------

// int_0^1 f(t) dt with geometric clustering at 0 and the tempered-exponent
// truncation test |f(t)| * |zeta(t)|^{mg+2} < 1e-14
cplx vertex_integral(const std::function<cplx(double)>& f, double zeta_scale, double mg,
                     const IntegralOptions& opts) {
    cplx acc(0.0, 0.0);
    double prev_mag = std::numeric_limits<double>::infinity();
    int growing = 0;
    for (int j = 0; j < 900; ++j) {
        double hi = std::exp2(-static_cast<double>(j));
        double lo = 0.5 * hi;
        // the window touching t = 1 holds the kernel layer at zeta = z
        cplx c = j == 0 ? layered_gk(f, lo, hi, opts) : adaptive_gk(f, lo, hi, opts);
        acc += c;
        double mag = std::abs(c);
        double delta = zeta_scale * lo;
        if (std::abs(f(lo)) * std::pow(delta, mg + 2.0) < 1e-14 &&
            mag < std::max(1e-16, 1e-12 * std::abs(acc)))
            return acc;
        if (mag <= std::max(1e-300, 1e-16 * std::abs(acc))) return acc;
        if (j > 40) {
            growing = (mag >= prev_mag) ? growing + 1 : 0;
            if (growing >= 8)
                fail(errc::integration_failure,
                     "vertex integral does not converge (integrand not integrable at 0)");
        }
        prev_mag = mag;
    }
    return acc;
}

// ---- path construction ---------------------------------------------------

struct Candidate {
    std::vector<PathSegment> segs;
    cplx z0;
};

Candidate cand_vertex(double theta, double rho) {
    return {{RadialSegment{theta, 0.0, rho}}, cplx(0.0, 0.0)};
}

// anchored at a fixed angle so the base point does not move with z (otherwise
// the resulting "solution" fails to be holomorphic)
Candidate cand_outer(double theta_anchor, double theta_z, double R, double rho) {
    Candidate c;
    c.z0 = std::polar(R, theta_anchor);
    if (theta_anchor != theta_z) c.segs.push_back(ArcSegment{R, theta_anchor, theta_z});
    c.segs.push_back(RadialSegment{theta_z, R, rho});
    return c;
}

Candidate cand_arc(double theta_b, bool boundary_vertex, double R, double rho,
                   double theta_z) {
    Candidate c =
        boundary_vertex ? cand_vertex(theta_b, rho) : cand_outer(theta_b, theta_b, R, rho);
    c.segs.push_back(ArcSegment{rho, theta_b, theta_z});
    return c;
}

} // namespace

bool PathSpec::starts_at_vertex() const {
    if (segments.empty()) return false;
    const auto* r = std::get_if<RadialSegment>(&segments.front());
    return r && r->rho_from == 0.0;
}

AmplitudeBound amplitude_bound(const PuiseuxPoly& p) {
    AmplitudeBound b;
    if (p.is_zero()) {
        b.alpha = kPi;
        b.rho_star = std::numeric_limits<double>::infinity();
        return b;
    }
    if (p.has_nonnegative_exponent())
        fail(errc::domain_error, "amplitude_bound: p must have strictly negative exponents");
    auto me = p.min_exponent().value();
    b.s_num = -me.first;
    b.s_den = me.second;
    double s = static_cast<double>(b.s_num) / b.s_den;
    b.alpha = kPi / (2.0 * s);
    b.leading_coeff = p.coeff(me.first, me.second);

    // dominance: |lead| rho^{-s} >= 2 * sum |c_k| rho^{e_k} for rho <= rho_star
    double rho = 1.0;
    for (int i = 0; i < 200; ++i) {
        double lead = std::abs(b.leading_coeff) * std::pow(rho, -s);
        double rest = 0.0;
        for (const auto& [num, coef] : p.terms()) {
            double e = static_cast<double>(num) / p.ramification();
            if (num == me.first * (p.ramification() / me.second)) continue;
            rest += std::abs(coef) * std::pow(rho, e);
        }
        if (lead >= 2.0 * rest) break;
        rho *= 0.5;
    }
    b.rho_star = rho;
    return b;
}

double max_phase_violation(const PuiseuxPoly& p, const PathSpec& path, cplx z,
                           double branch_center, int nodes_per_segment) {
    cplx pz = p.eval(z, branch_center);
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& seg : path.segments) {
        for (int j = 0; j < nodes_per_segment; ++j) {
            double t = (j + 0.5) / nodes_per_segment;
            cplx zeta;
            if (const auto* r = std::get_if<RadialSegment>(&seg)) {
                double rho;
                if (r->rho_from == 0.0)
                    rho = r->rho_to * std::exp2(-0.75 * j);  // geometric toward the vertex
                else
                    rho = r->rho_from + t * (r->rho_to - r->rho_from);
                zeta = std::polar(rho, r->angle);
            } else {
                const auto& a = std::get<ArcSegment>(seg);
                double th = a.theta_from + t * (a.theta_to - a.theta_from);
                zeta = std::polar(a.radius, th);
            }
            worst = std::max(worst, (pz - p.eval(zeta, branch_center)).real());
        }
    }
    return worst;
}

PathSpec build_path(const PuiseuxPoly& p, const Sector& S, cplx z,
                    const IntegralOptions& opts) {
    if (!S.contains(z)) fail(errc::domain_error, "build_path: z not in sector");
    AmplitudeBound ab = amplitude_bound(p);
    if (S.amplitude() > ab.alpha + 1e-12)
        fail(errc::domain_error, "build_path: sector amplitude exceeds alpha(p)");
    if (S.r > ab.rho_star * (1.0 + 1e-12))
        fail(errc::domain_error, "build_path: sector radius exceeds rho*(p)");

    double bc = resolve_branch(opts, S);
    double theta_z = arg_on_branch(z, bc);
    double rho_z = std::abs(z);
    double R = S.r * opts.outer_radius_scale;  // fixed base radius for the whole sector
    if (R < rho_z) R = S.r;
    double mg = opts.mg_hint >= 0.0 ? opts.mg_hint : 0.0;

    std::vector<Candidate> cands;
    if (p.is_zero()) {
        if (mg < 0.9) {
            cands.push_back(cand_vertex(theta_z, rho_z));
            cands.push_back(cand_outer(bc, theta_z, R, rho_z));
        } else {
            cands.push_back(cand_outer(bc, theta_z, R, rho_z));
        }
    } else {
        double s = static_cast<double>(ab.s_num) / ab.s_den;
        auto tval = [&](double th) {
            return (ab.leading_coeff * std::exp(cplx(0.0, -s * th))).real() /
                   std::abs(ab.leading_coeff);
        };
        // regime decided at the bisector: the candidate family (and hence the
        // base point) must be the same for every z in the sector
        double tz = tval(S.tau);
        // boundary ray where Re p is larger (z-independent choice)
        double rho_probe = 0.5 * S.r;
        cplx p_lo = p.eval(std::polar(rho_probe, S.alpha()), bc);
        cplx p_hi = p.eval(std::polar(rho_probe, S.beta()), bc);
        double theta_b = p_lo.real() >= p_hi.real() ? S.alpha() : S.beta();
        bool bvert = tval(theta_b) > 0.0;
        Candidate vert = cand_vertex(theta_z, rho_z);
        Candidate outer = cand_outer(theta_b, theta_z, R, rho_z);
        Candidate arc = cand_arc(theta_b, bvert, R, rho_z, theta_z);
        if (tz > 0.05) {
            cands = {vert, arc, outer};
        } else if (tz < -0.05) {
            cands = {outer, arc, vert};
        } else {
            cands = {arc, outer, vert};
        }
    }

    // prefer a strictly admissible path; otherwise accept a bounded phase
    // excess (the kernel stays bounded by e^slack and certification decides)
    constexpr double kPhaseSlack = 30.0;
    PathSpec best;
    double best_v = std::numeric_limits<double>::infinity();
    for (const auto& c : cands) {
        PathSpec path;
        path.segments = c.segs;
        path.z0 = c.z0;
        path.z = z;
        double v = max_phase_violation(p, path, z, bc);
        if (v <= kPhaseTol) return path;
        if (v < best_v) {
            best_v = v;
            best = path;
        }
    }
    if (best_v <= kPhaseSlack) return best;
    fail(errc::path_construction,
         "build_path: no admissible path satisfies the phase invariant "
         "(amplitude/radius preconditions too loose)");
}

namespace {

double estimate_vertex_growth(const std::function<cplx(cplx)>& g, cplx z) {
    // slope of log|g| vs log(1/rho) along the ray through z
    std::vector<double> xs, ys;
    for (int k = 2; k <= 9; ++k) {
        cplx zeta = z * std::exp2(-static_cast<double>(k));
        double v = std::abs(g(zeta));
        if (!(v > 0.0) || !std::isfinite(v)) continue;
        xs.push_back(-std::log(std::abs(zeta)));
        ys.push_back(std::log(v));
    }
    if (xs.size() < 3) return 0.0;
    double n = xs.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-12) return 0.0;
    return std::clamp((n * sxy - sx * sy) / denom, 0.0, 20.0);
}

cplx integrate_along(const PuiseuxPoly& p, const std::function<cplx(cplx)>& g, cplx z,
                     const PathSpec& path, double bc, double mg, const IntegralOptions& opts) {
    cplx pz = p.eval(z, bc);
    auto kernel_g = [&](cplx zeta) -> cplx {
        cplx w = pz - p.eval(zeta, bc);
        if (w.real() > 40.0) w = cplx(40.0, w.imag());  // bounded-slack paths stay below this
        return std::exp(w) * g(zeta);
    };
    cplx acc(0.0, 0.0);
    for (const auto& seg : path.segments) {
        if (const auto* r = std::get_if<RadialSegment>(&seg)) {
            cplx dir = std::exp(cplx(0.0, r->angle));
            if (r->rho_from == 0.0) {
                cplx zeta_end = std::polar(r->rho_to, r->angle);
                auto f = [&](double t) { return kernel_g(zeta_end * t); };
                acc += zeta_end * vertex_integral(f, r->rho_to, mg, opts);
            } else {
                auto f = [&](double rho) { return kernel_g(std::polar(rho, r->angle)) * dir; };
                acc += layered_gk(f, r->rho_from, r->rho_to, opts);
            }
        } else {
            const auto& a = std::get<ArcSegment>(seg);
            auto f = [&](double th) {
                cplx zeta = std::polar(a.radius, th);
                return kernel_g(zeta) * cplx(0.0, 1.0) * zeta;
            };
            acc += layered_gk(f, a.theta_from, a.theta_to, opts);
        }
    }
    return acc;
}

cplx integral_core(const PuiseuxPoly& p, const std::function<cplx(cplx)>& g, const Sector& S,
                   cplx z, const IntegralOptions& opts) {
    double bc = resolve_branch(opts, S);
    // cheap zero probe
    bool all_zero = true;
    for (int k = 0; k < 4 && all_zero; ++k)
        if (g(z * (0.3 + 0.17 * k)) != cplx(0.0, 0.0)) all_zero = false;
    if (all_zero && g(z) == cplx(0.0, 0.0)) return cplx(0.0, 0.0);

    IntegralOptions o = opts;
    if (o.mg_hint < 0.0) o.mg_hint = estimate_vertex_growth(g, z);
    PathSpec path = build_path(p, S, z, o);
    return integrate_along(p, g, z, path, bc, o.mg_hint, o);
}

} // namespace

cplx integral_op_fn(const PuiseuxPoly& p, const std::function<cplx(cplx)>& g, const Sector& S,
                    cplx z, const IntegralOptions& opts) {
    return integral_core(p, g, S, z, opts);
}

cplx integral_op(const PuiseuxPoly& p, const HoloFn& g, const Sector& S, cplx z,
                 const IntegralOptions& opts) {
    return integral_core(p, [&](cplx zeta) { return g.eval(zeta); }, S, z, opts);
}

HoloFn solve_scalar_sector(const PuiseuxPoly& p, int N, const Polynomial& a, const HoloFn& g,
                           const Sector& S, const IntegralOptions& opts) {
    ExponentSplit sp = split_exponent_integral(a.c, N);
    auto ctx = std::make_shared<std::tuple<PuiseuxPoly, ExponentSplit, HoloFn, Sector,
                                           IntegralOptions, int>>(p, sp, g, S, opts, N);
    auto eval = [ctx](cplx z) -> cplx {
        const auto& [p, sp, g, S, opts, N] = *ctx;
        double bc = std::isnan(opts.branch_center) ? S.tau : opts.branch_center;
        auto f_mod = [&](cplx w) {
            return powc(w, sp.rho, bc) * std::exp(sp.analytic.eval(w, bc));
        };
        auto integrand = [&](cplx zeta) {
            return g.eval(zeta) / f_mod(zeta) * powc(zeta, cplx(-N, 0.0), bc);
        };
        return f_mod(z) * integral_op_fn(p, integrand, S, z, opts);
    };
    return HoloFn::path_integral(eval, "scalar sector solution");
}

namespace {

struct SystemCtx {
    OperatorSpec op;
    FormalFundamental ff;
    ExponentialPart ep;
    std::vector<HoloFn> g;
    Sector S;
    IntegralOptions opts;
    double bc = 0.0;

    Eigen::MatrixXcd F_at(cplx z) const {
        Eigen::MatrixXcd F(op.m, op.m);
        for (int i = 0; i < op.m; ++i)
            for (int j = 0; j < op.m; ++j) F(i, j) = ff.F[i][j].eval(z);
        return F;
    }

    // F(zeta)^{-1} g(zeta) / zeta^N
    Eigen::VectorXcd weight_at(cplx zeta) const {
        Eigen::MatrixXcd F = F_at(zeta);
        if (std::abs(F.determinant()) < 1e-10)
            fail(errc::conditioning_error, "solve_system_sector: |det F| < 1e-10 at a node");
        Eigen::VectorXcd gv(op.m);
        for (int i = 0; i < op.m; ++i) gv(i) = g[i].eval(zeta);
        Eigen::VectorXcd w = F.partialPivLu().solve(gv);
        return w * powc(zeta, cplx(-op.N, 0.0), bc);
    }

    std::vector<cplx> solve_at(cplx z) const {
        Eigen::VectorXcd J(op.m);
        for (int k = 0; k < op.m; ++k) {
            auto integrand = [&](cplx zeta) { return weight_at(zeta)(k); };
            J(k) = integral_op_fn(ep.lambdas[k], integrand, S, z, opts);
        }
        Eigen::VectorXcd u = F_at(z) * J;
        return std::vector<cplx>(u.data(), u.data() + op.m);
    }
};

} // namespace

std::vector<HoloFn> solve_system_sector(const OperatorSpec& op, const FormalFundamental& ff,
                                        const ExponentialPart& ep, const std::vector<HoloFn>& g,
                                        const Sector& S, const IntegralOptions& opts) {
    op.validate();
    if (ff.m != op.m || static_cast<int>(ep.lambdas.size()) != op.m ||
        static_cast<int>(g.size()) != op.m)
        fail(errc::domain_error, "solve_system_sector: dimension mismatch");
    auto ctx = std::make_shared<SystemCtx>(SystemCtx{op, ff, ep, g, S, opts});
    ctx->bc = resolve_branch(opts, S);
    std::vector<HoloFn> out;
    for (int i = 0; i < op.m; ++i) {
        out.push_back(HoloFn::path_integral(
            [ctx, i](cplx z) { return ctx->solve_at(z)[i]; }, "system sector solution"));
    }
    return out;
}

namespace {

struct ChartCtx {
    SystemCtx sys;                    // F, g, op in the z-plane
    Chart chart;
    std::vector<PuiseuxPoly> p_tilde;
    std::vector<TruncSeries> psi;
    Sector S;                         // w-plane sector

    std::vector<cplx> solve_at_w(cplx w) const {
        Eigen::VectorXcd J(sys.op.m);
        for (int k = 0; k < sys.op.m; ++k) {
            auto integrand = [&](cplx omega) {
                cplx zeta = chart.eval(omega);
                return std::exp(-psi[k].eval(omega, sys.bc)) * sys.weight_at(zeta)(k) *
                       chart.deriv(omega);
            };
            J(k) = std::exp(psi[k].eval(w, sys.bc)) *
                   integral_op_fn(p_tilde[k], integrand, S, w, sys.opts);
        }
        Eigen::VectorXcd u = sys.F_at(chart.eval(w)) * J;
        return std::vector<cplx>(u.data(), u.data() + sys.op.m);
    }
};

} // namespace

std::vector<HoloFn> solve_on_chart_image(const OperatorSpec& op, const ExponentialPart& ep,
                                         const FormalFundamental& ff, const Chart& chart,
                                         const Sector& S, const std::vector<HoloFn>& g,
                                         const IntegralOptions& opts) {
    op.validate();
    if (ff.m != op.m || static_cast<int>(ep.lambdas.size()) != op.m ||
        static_cast<int>(g.size()) != op.m)
        fail(errc::domain_error, "solve_on_chart_image: dimension mismatch");

    auto ctx = std::make_shared<ChartCtx>();
    ctx->sys = SystemCtx{op, ff, ep, g, S, opts};
    ctx->sys.bc = resolve_branch(opts, S);
    ctx->chart = chart;
    ctx->S = S;
    for (const auto& lam : ep.lambdas) {
        ChartComposition cc = compose_chart(lam, chart.series(), S.r, 80);
        ctx->p_tilde.push_back(cc.principal);
        ctx->psi.push_back(cc.tail);
    }

    std::vector<HoloFn> out;
    for (int i = 0; i < op.m; ++i) {
        out.push_back(HoloFn::path_integral(
            [ctx, i](cplx z) {
                auto w = ctx->chart.invert(z);
                if (!w) fail(errc::numeric_failure, "solve_on_chart_image: chart inversion failed");
                return ctx->solve_at_w(*w)[i];
            },
            "chart image solution"));
    }
    return out;
}

cplx cauchy_derivative(const std::function<cplx(cplx)>& f, cplx z, double r, int n) {
    cplx acc(0.0, 0.0);
    for (int j = 0; j < n; ++j) {
        double th = 2.0 * kPi * j / n;
        cplx e = std::exp(cplx(0.0, th));
        acc += f(z + r * e) / e;
    }
    return acc / (static_cast<double>(n) * r);
}

double ode_residual_system(const OperatorSpec& op, const std::vector<HoloFn>& u,
                           const std::vector<HoloFn>& g, const Sector& S, int n) {
    int n_r = std::max(2, static_cast<int>(std::sqrt(n)));
    int n_t = std::max(2, n / n_r);
    double worst = 0.0;
    for (int a = 0; a < n_r; ++a) {
        double rho = S.r * 0.75 * std::exp2(-4.0 * (a + 0.5) / n_r);
        for (int b = 0; b < n_t; ++b) {
            double th = S.alpha() + S.amplitude() * (0.2 + 0.6 * (b + 0.5) / n_t);
            cplx z = std::polar(rho, th);
            double rc = 0.4 * S.boundary_distance_exact(z);
            cplx zN = std::pow(z, op.N);
            for (int i = 0; i < op.m; ++i) {
                const HoloFn& ui = u[i];
                cplx du = cauchy_derivative([&](cplx w) { return ui.eval(w); }, z, rc);
                cplx res = zN * du - g[i].eval(z);
                for (int j = 0; j < op.m; ++j) res += op.A[i][j].eval(z) * u[j].eval(z);
                worst = std::max(worst, std::abs(res));
            }
        }
    }
    return worst;
}

} // namespace sectoria
