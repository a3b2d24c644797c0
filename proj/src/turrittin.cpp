#include "sectoria/turrittin.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "sectoria/errors.hpp"

namespace sectoria {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

cplx Polynomial::eval(cplx z) const {
    cplx acc(0.0, 0.0);
    for (std::size_t k = c.size(); k-- > 0;) acc = acc * z + c[k];
    return acc;
}

int Polynomial::degree() const {
    for (std::size_t k = c.size(); k-- > 0;)
        if (c[k] != cplx(0.0, 0.0)) return static_cast<int>(k);
    return -1;
}

PuiseuxPoly Polynomial::to_puiseux() const {
    PuiseuxPoly p;
    for (std::size_t k = 0; k < c.size(); ++k)
        p = p + PuiseuxPoly::monomial(c[k], static_cast<long>(k), 1);
    return p;
}

std::string Polynomial::to_string() const { return to_puiseux().to_string(); }

Polynomial Polynomial::parse(const std::string& text) {
    PuiseuxPoly p = PuiseuxPoly::parse(text);
    if (p.ramification() != 1 || !p.all_exponents_nonnegative())
        fail(errc::parse_error, "polynomial: exponents must be nonnegative integers");
    Polynomial out;
    for (const auto& [num, coef] : p.terms()) {
        if (static_cast<std::size_t>(num) >= out.c.size()) out.c.resize(num + 1, cplx(0.0, 0.0));
        out.c[num] = coef;
    }
    return out;
}

void OperatorSpec::validate() const {
    if (m < 1) fail(errc::domain_error, "OperatorSpec: m must be >= 1");
    if (N < 0) fail(errc::domain_error, "OperatorSpec: N must be >= 0");
    if (!(disc_radius > 0.0)) fail(errc::domain_error, "OperatorSpec: disc_radius must be > 0");
    if (static_cast<int>(A.size()) != m)
        fail(errc::domain_error, "OperatorSpec: A must be m x m");
    for (const auto& row : A)
        if (static_cast<int>(row.size()) != m)
            fail(errc::domain_error, "OperatorSpec: A must be m x m");
}

cplx OperatorSpec::A_entry(int i, int j, cplx z) const { return A[i][j].eval(z); }

int ScalarOperator::order() const {
    for (std::size_t j = a.size(); j-- > 0;)
        if (!a[j].is_zero()) return static_cast<int>(j);
    return -1;
}

ScalarOperator ScalarOperator::from_operator(const OperatorSpec& op) {
    op.validate();
    if (op.m != 1) fail(errc::unsupported_case, "scalar encoding requires m = 1");
    ScalarOperator s;
    s.a.resize(2);
    s.a[0] = op.A[0][0].to_puiseux();
    s.a[1] = PuiseuxPoly::monomial(cplx(1.0, 0.0), op.N, 1);
    return s;
}

namespace {

struct Rational {
    long num = 0;
    long den = 1;

    static Rational make(long n, long d) {
        if (d < 0) {
            n = -n;
            d = -d;
        }
        long g = std::gcd(std::abs(n), d);
        if (g > 1) {
            n /= g;
            d /= g;
        }
        return {n, d == 0 ? 1 : d};
    }
    bool positive() const { return num > 0; }
    double value() const { return static_cast<double>(num) / den; }
    friend bool operator<(const Rational& a, const Rational& b) {
        return a.num * b.den < b.num * a.den;
    }
    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num * b.den == b.num * a.den;
    }
};

struct PolygonSegment {
    Rational slope;
    long j_left = 0, j_right = 0;
};

// Lower convex hull of the points (j, ord(a_j) - j); segment slopes listed
// left to right (increasing).
std::vector<PolygonSegment> polygon_segments(const ScalarOperator& op) {
    struct Pt {
        long j;
        long ynum;
        long yden;
    };
    std::vector<Pt> pts;
    for (std::size_t j = 0; j < op.a.size(); ++j) {
        if (op.a[j].is_zero()) continue;
        auto me = op.a[j].min_exponent().value();
        pts.push_back({static_cast<long>(j), me.first - static_cast<long>(j) * me.second,
                       me.second});
    }
    if (pts.empty()) fail(errc::domain_error, "newton_polygon: degenerate operator");

    auto cross_below = [](const Pt& a, const Pt& b, const Pt& c) {
        // true when b lies strictly above the segment ac (so b is dropped)
        // compare (yb - ya)/(jb - ja) >= (yc - ya)/(jc - ja)
        long long lhs = static_cast<long long>(b.ynum) * a.yden - static_cast<long long>(a.ynum) * b.yden;
        long long rhs = static_cast<long long>(c.ynum) * a.yden - static_cast<long long>(a.ynum) * c.yden;
        // lhs/(b.yden*a.yden*(jb-ja)) >= rhs/(c.yden*a.yden*(jc-ja))
        long long L = lhs * c.yden * (c.j - a.j);
        long long R = rhs * b.yden * (b.j - a.j);
        return L >= R;
    };

    std::vector<Pt> hull;
    for (const auto& p : pts) {
        while (hull.size() >= 2 && cross_below(hull[hull.size() - 2], hull.back(), p))
            hull.pop_back();
        hull.push_back(p);
    }

    std::vector<PolygonSegment> segs;
    for (std::size_t i = 1; i < hull.size(); ++i) {
        const Pt& a = hull[i - 1];
        const Pt& b = hull[i];
        long dn = b.ynum * a.yden - a.ynum * b.yden;
        long dd = a.yden * b.yden * (b.j - a.j);
        segs.push_back({Rational::make(dn, dd), a.j, b.j});
    }
    if (segs.empty()) segs.push_back({Rational{0, 1}, hull[0].j, hull[0].j});
    return segs;
}

struct RootCluster {
    cplx mu;
    long multiplicity;
};

std::vector<RootCluster> char_roots(const ScalarOperator& op, const PolygonSegment& seg) {
    // coefficient of mu^{j - j_left}: the coefficient of a_j at the exponent
    // lying on the segment line through (j_left, y_left)
    long deg = seg.j_right - seg.j_left;
    auto mel = op.a[seg.j_left].min_exponent().value();
    // y(j) = y_left + slope * (j - j_left); exponent of a_j on line = y(j) + j
    std::vector<cplx> coeffs(deg + 1, cplx(0.0, 0.0));
    for (long j = seg.j_left; j <= seg.j_right; ++j) {
        if (static_cast<std::size_t>(j) >= op.a.size() || op.a[j].is_zero()) continue;
        // exponent = mel + slope*(j - j_left) + (j - j_left) ... careful:
        // y_left = mel - j_left, y(j) = y_left + s (j - j_left),
        // exponent e(j) = y(j) + j = mel + (s.num/s.den + 1)(j - j_left)
        long dj = j - seg.j_left;
        long num = mel.first * seg.slope.den + (seg.slope.num + seg.slope.den) * dj * mel.second;
        long den = mel.second * seg.slope.den;
        long g = std::gcd(std::abs(num), den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
        coeffs[dj] = op.a[j].coeff(num, den);
    }
    while (coeffs.size() > 1 && coeffs.back() == cplx(0.0, 0.0)) coeffs.pop_back();
    long n = static_cast<long>(coeffs.size()) - 1;
    if (n < 1) fail(errc::numeric_failure, "newton_polygon: empty characteristic polynomial");

    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(n, n);
    for (long i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    for (long i = 0; i < n; ++i) comp(i, n - 1) = -coeffs[i] / coeffs[n];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp);
    std::vector<cplx> roots(es.eigenvalues().data(), es.eigenvalues().data() + n);

    double scale = 0.0;
    for (cplx r : roots) scale = std::max(scale, std::abs(r));
    double tol = std::max(1e-8 * scale, 1e-12);
    std::vector<RootCluster> clusters;
    for (cplx r : roots) {
        bool merged = false;
        for (auto& cl : clusters) {
            if (std::abs(cl.mu - r) < tol) {
                cl.mu = (cl.mu * static_cast<double>(cl.multiplicity) + r) /
                        static_cast<double>(cl.multiplicity + 1);
                cl.multiplicity += 1;
                merged = true;
                break;
            }
        }
        if (!merged) clusters.push_back({r, 1});
    }
    for (auto& cl : clusters)
        if (std::abs(cl.mu) < tol)
            fail(errc::numeric_failure, "newton_polygon: vanishing characteristic root on segment");
    return clusters;
}

// conjugation: coefficients of sum_j a_j (d/dz + q')^j
ScalarOperator conjugate(const ScalarOperator& op, const PuiseuxPoly& q) {
    PuiseuxPoly dq = q.derivative();
    int n = op.order();
    std::vector<PuiseuxPoly> acc(n + 1);
    // C_j = (d + q')^j, built incrementally
    std::vector<PuiseuxPoly> C{PuiseuxPoly::constant(cplx(1.0, 0.0))};
    for (int j = 0; j <= n; ++j) {
        if (j > 0) {
            std::vector<PuiseuxPoly> next(C.size() + 1);
            for (std::size_t i = 0; i < C.size(); ++i) {
                next[i] = next[i] + C[i].derivative() + dq * C[i];
                next[i + 1] = next[i + 1] + C[i];
            }
            C = std::move(next);
        }
        if (static_cast<std::size_t>(j) < op.a.size() && !op.a[j].is_zero())
            for (std::size_t i = 0; i < C.size(); ++i) acc[i] = acc[i] + op.a[j] * C[i];
    }
    ScalarOperator out;
    out.a = std::move(acc);
    return out;
}

// principal parts of `want` solutions of op whose exponential parts have pole
// order strictly below `cap` (cap.num < 0 means uncapped)
void peel(const ScalarOperator& op, const PuiseuxPoly& q_acc, Rational cap, long want,
          int depth, std::vector<PuiseuxPoly>& out) {
    if (depth > 40)
        fail(errc::unsupported_case, "exponential_parts: peeling recursion exceeded depth cap");
    if (want <= 0) return;
    auto segs = polygon_segments(op);
    long covered = 0;
    for (const auto& seg : segs) {
        if (!seg.slope.positive()) continue;
        if (cap.num >= 0 && !(seg.slope < cap)) continue;
        double s = seg.slope.value();
        for (const auto& cl : char_roots(op, seg)) {
            // leading term of q': mu z^{-s-1}; q = -mu/s z^{-s}
            PuiseuxPoly q =
                PuiseuxPoly::monomial(-cl.mu / s, -seg.slope.num, seg.slope.den);
            ScalarOperator conj = conjugate(op, q);
            peel(conj, q_acc + q, seg.slope, cl.multiplicity, depth + 1, out);
            covered += cl.multiplicity;
        }
    }
    long regular = want - covered;
    if (regular < 0)
        fail(errc::unsupported_case, "exponential_parts: inconsistent polygon multiplicities");
    for (long i = 0; i < regular; ++i) out.push_back(q_acc.principal_part());
}

bool lambda_less(const PuiseuxPoly& a, const PuiseuxPoly& b) {
    auto ea = a.min_exponent();
    auto eb = b.min_exponent();
    if (ea.has_value() != eb.has_value()) return eb.has_value();  // zero first
    if (ea && eb) {
        long lhs = ea->first * eb->second;
        long rhs = eb->first * ea->second;
        if (lhs != rhs) return lhs < rhs;
    }
    return PuiseuxPoly::compare(a, b) < 0;
}

// -\int b(z) z^{-N} dz for a truncated series b (integer exponents >= 0),
// split into (principal Lambda, log coefficient rho, analytic part h)
struct IntegratedExponent {
    PuiseuxPoly lambda;
    cplx rho{0.0, 0.0};
    PuiseuxPoly analytic;
};

IntegratedExponent integrate_exponent(const std::vector<cplx>& b, int N) {
    IntegratedExponent out;
    for (std::size_t k = 0; k < b.size(); ++k) {
        if (b[k] == cplx(0.0, 0.0)) continue;
        long e = static_cast<long>(k) - N;  // exponent of b_k z^{k-N}
        if (e == -1) {
            out.rho = -b[k];
            continue;
        }
        cplx coef = -b[k] / static_cast<double>(e + 1);
        auto mono = PuiseuxPoly::monomial(coef, e + 1, 1);
        if (e + 1 < 0)
            out.lambda = out.lambda + mono;
        else
            out.analytic = out.analytic + mono;
    }
    return out;
}

struct SplitResult {
    Eigen::MatrixXcd V;
    std::vector<Eigen::MatrixXcd> T;       // T_0 = I, T_k for k <= order
    std::vector<Eigen::VectorXcd> B;       // diagonal of B_k
};

// diagonalizing splitting: z^N T' + A~ T = T B in the eigenbasis of A(0)
SplitResult split_system(const OperatorSpec& op, long order) {
    int m = op.m;
    int degA = 0;
    for (const auto& row : op.A)
        for (const auto& p : row) degA = std::max(degA, p.degree());

    std::vector<Eigen::MatrixXcd> Ak(degA + 1, Eigen::MatrixXcd::Zero(m, m));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (std::size_t k = 0; k < op.A[i][j].c.size(); ++k) Ak[k](i, j) = op.A[i][j].c[k];

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(Ak[0]);
    if (es.info() != Eigen::Success)
        fail(errc::numeric_failure, "exponential_parts: eigensolver failed");
    Eigen::VectorXcd d = es.eigenvalues();
    Eigen::MatrixXcd V = es.eigenvectors();

    double scale = 0.0;
    for (int i = 0; i < m; ++i) scale = std::max(scale, std::abs(d(i)));
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
            if (std::abs(d(i) - d(j)) <= 1e-10 * std::max(scale, 1.0))
                fail(errc::unsupported_case,
                     "exponential_parts: repeated leading eigenvalues (turning point)");

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(V);
    std::vector<Eigen::MatrixXcd> At(degA + 1);
    for (int k = 0; k <= degA; ++k) At[k] = lu.solve(Ak[k]);

    SplitResult res;
    res.V = V;
    res.T.assign(order + 1, Eigen::MatrixXcd::Zero(m, m));
    res.B.assign(order + 1, Eigen::VectorXcd::Zero(m));
    res.T[0] = Eigen::MatrixXcd::Identity(m, m);
    res.B[0] = d;

    for (long k = 1; k <= order; ++k) {
        Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(m, m);
        for (long i = 1; i <= k; ++i)
            if (i <= degA) R -= At[i] * res.T[k - i];
        for (long i = 1; i <= k - 1; ++i) R += res.T[k - i] * res.B[i].asDiagonal().toDenseMatrix();
        if (op.N >= 2) {
            long idx = k - op.N + 1;
            if (idx >= 0 && idx < k) R -= static_cast<double>(idx) * res.T[idx];
        }
        for (int a = 0; a < m; ++a) {
            for (int b = 0; b < m; ++b) {
                if (a == b) continue;
                cplx div = d(a) - d(b);
                if (op.N == 1) div += static_cast<double>(k);
                if (std::abs(div) < 1e-10)
                    fail(errc::unsupported_case,
                         "formal reduction: resonance (near-zero divisor) in splitting recursion");
                res.T[k](a, b) = R(a, b) / div;
            }
            res.B[k](a) = -R(a, a) - (op.N == 1 ? static_cast<double>(k) * res.T[k](a, a) : 0.0);
        }
    }
    return res;
}

} // namespace

ExponentSplit split_exponent_integral(const std::vector<cplx>& b, int N) {
    auto ie = integrate_exponent(b, N);
    return {ie.lambda, ie.rho, ie.analytic};
}

std::vector<NewtonSlope> newton_polygon(const ScalarOperator& op) {
    auto segs = polygon_segments(op);
    std::vector<NewtonSlope> out;
    long regular = 0;
    long j_min = segs.front().j_left;
    if (j_min > 0) regular += j_min;  // mu = 0 roots: no exponential contribution
    for (const auto& seg : segs) {
        long len = seg.j_right - seg.j_left;
        if (len == 0) continue;
        if (seg.slope.positive())
            out.push_back({seg.slope.num, seg.slope.den, len});
        else
            regular += len;
    }
    if (regular > 0) out.insert(out.begin(), {0, 1, regular});
    return out;
}

ExponentialPart exponential_parts_scalar(const ScalarOperator& op) {
    int n = op.order();
    if (n < 0) fail(errc::domain_error, "exponential_parts: degenerate operator");
    std::vector<PuiseuxPoly> lambdas;
    peel(op, PuiseuxPoly::zero(), Rational{-1, 1}, n, 0, lambdas);
    // mu = 0 branches (points left of the polygon) are regular
    while (static_cast<int>(lambdas.size()) < n) lambdas.push_back(PuiseuxPoly::zero());
    std::sort(lambdas.begin(), lambdas.end(), lambda_less);
    ExponentialPart ep;
    ep.lambdas = std::move(lambdas);
    ep.l = lcm_ramification(ep.lambdas);
    return ep;
}

ExponentialPart exponential_parts(const OperatorSpec& op) {
    op.validate();
    ExponentialPart ep;
    if (op.N <= 1) {
        ep.l = 1;
        ep.lambdas.assign(op.m, PuiseuxPoly::zero());
        return ep;
    }
    if (op.m == 1) {
        auto ie = integrate_exponent(op.A[0][0].c, op.N);
        ep.lambdas = {ie.lambda};
        ep.l = lcm_ramification(ep.lambdas);
        return ep;
    }
    SplitResult sp = split_system(op, std::max<long>(op.N, 2));
    for (int a = 0; a < op.m; ++a) {
        std::vector<cplx> b(op.N + 1, cplx(0.0, 0.0));
        for (long k = 0; k <= op.N && k < static_cast<long>(sp.B.size()); ++k) b[k] = sp.B[k](a);
        ep.lambdas.push_back(integrate_exponent(b, op.N).lambda);
    }
    std::sort(ep.lambdas.begin(), ep.lambdas.end(), lambda_less);
    ep.l = lcm_ramification(ep.lambdas);
    return ep;
}

FormalFundamental formal_fundamental(const OperatorSpec& op, const ExponentialPart& ep,
                                     long order) {
    op.validate();
    if (order < 1) fail(errc::domain_error, "formal_fundamental: order must be >= 1");
    if (static_cast<int>(ep.lambdas.size()) != op.m)
        fail(errc::domain_error, "formal_fundamental: exponential part size mismatch");

    FormalFundamental ff;
    ff.m = op.m;
    ff.order = order;

    if (op.m == 1) {
        auto ie = integrate_exponent(op.A[0][0].c, op.N);
        std::vector<HoloFn> factors;
        if (ie.rho != cplx(0.0, 0.0)) factors.push_back(HoloFn::power_log(ie.rho, 0));
        if (!ie.analytic.is_zero()) factors.push_back(HoloFn::puiseux_exp(ie.analytic));
        if (factors.empty()) factors.push_back(HoloFn::constant(cplx(1.0, 0.0)));
        ff.F = {{HoloFn::product(factors)}};
    } else {
        SplitResult sp = split_system(op, order);
        // per-column exponent data from the diagonal system z^N v' + b v = 0
        struct Col {
            PuiseuxPoly lambda;
            cplx rho;
            PuiseuxPoly analytic;
            int index;
        };
        std::vector<Col> cols;
        for (int a = 0; a < op.m; ++a) {
            std::vector<cplx> b(order + 1, cplx(0.0, 0.0));
            for (long k = 0; k <= order; ++k) b[k] = sp.B[k](a);
            auto ie = integrate_exponent(b, op.N);
            cols.push_back({ie.lambda, ie.rho, ie.analytic, a});
        }
        std::sort(cols.begin(), cols.end(),
                  [](const Col& x, const Col& y) { return lambda_less(x.lambda, y.lambda); });

        // entries of V * (sum_k T_k z^k), column-scaled by z^rho e^{h}
        ff.F.assign(op.m, std::vector<HoloFn>(op.m));
        for (int jc = 0; jc < op.m; ++jc) {
            const Col& col = cols[jc];
            for (int i = 0; i < op.m; ++i) {
                std::vector<cplx> poly(order + 1, cplx(0.0, 0.0));
                for (long k = 0; k <= order; ++k) {
                    cplx v(0.0, 0.0);
                    for (int t = 0; t < op.m; ++t) v += sp.V(i, t) * sp.T[k](t, col.index);
                    poly[k] = v;
                }
                std::vector<HoloFn> factors{HoloFn::poly(std::move(poly))};
                if (col.rho != cplx(0.0, 0.0)) factors.push_back(HoloFn::power_log(col.rho, 0));
                if (!col.analytic.is_zero())
                    factors.push_back(HoloFn::puiseux_exp(col.analytic));
                ff.F[i][jc] = HoloFn::matrix_entry(i, jc, HoloFn::product(std::move(factors)));
            }
        }
    }
    ff.cert = verify_growth_bounds(ff, Sector(0.0, kPi / 4.0, std::min(0.5, op.disc_radius / 2.0)),
                                   64);
    return ff;
}

double fundamental_norm(const FormalFundamental& ff, cplx z) {
    double best = 0.0;
    for (int i = 0; i < ff.m; ++i)
        for (int j = 0; j < ff.m; ++j) best = std::max(best, std::abs(ff.F[i][j].eval(z)));
    return best;
}

GrowthCert verify_growth_bounds(const FormalFundamental& ff, const Sector& sector,
                                int n_samples, double m_max) {
    GrowthCert cert;
    cert.sector = sector;
    cert.n_samples = n_samples;

    int n_r = std::max(4, static_cast<int>(std::sqrt(n_samples)));
    int n_t = std::max(4, n_samples / n_r);
    std::vector<cplx> samples;
    for (int i = 0; i < n_r; ++i) {
        double rho = std::min(sector.r, 0.7) * std::exp2(-12.0 * (i + 0.5) / n_r);
        for (int j = 0; j < n_t; ++j) {
            double th = sector.alpha() + sector.amplitude() * (j + 0.5) / n_t;
            samples.push_back(rho * std::exp(cplx(0.0, th)));
        }
    }

    double m_req = 0.0;
    std::vector<std::pair<double, double>> vals;  // (|z|, norm)
    for (cplx z : samples) {
        Eigen::MatrixXcd Fz(ff.m, ff.m);
        double nrm = 0.0;
        for (int i = 0; i < ff.m; ++i)
            for (int j = 0; j < ff.m; ++j) {
                cplx v = ff.F[i][j].eval(z);
                Fz(i, j) = v;
                nrm = std::max(nrm, std::abs(v));
            }
        if (std::abs(Fz.determinant()) <= 1e-12) {
            cert.ok = false;
            cert.M = m_max;
            return cert;
        }
        double lg = std::log(nrm);
        double denom = -std::log(std::abs(z));
        if (denom > 0.0) m_req = std::max(m_req, std::abs(lg) / denom);
        vals.emplace_back(std::abs(z), nrm);
    }

    // coarse grid then bisection refinement of the smallest admissible M
    double M = m_max + 1.0;
    for (double g = 0.0; g <= m_max + 1e-9; g += 0.25) {
        if (g >= m_req - 1e-9) {
            M = g;
            break;
        }
    }
    if (M > m_max) {
        cert.ok = false;
        cert.M = m_max;
        return cert;
    }
    double lo = std::max(0.0, M - 0.25), hi = M;
    for (int i = 0; i < 20 && hi - lo > 1e-3; ++i) {
        double mid = 0.5 * (lo + hi);
        (mid >= m_req - 1e-9 ? hi : lo) = mid;
    }
    cert.M = hi;
    double K = 1.0;
    for (auto [r, nrm] : vals) {
        double pw = std::pow(r, cert.M);
        K = std::max({K, nrm * pw, pw / nrm});
    }
    cert.K = K;
    cert.ok = true;
    return cert;
}

} // namespace sectoria
