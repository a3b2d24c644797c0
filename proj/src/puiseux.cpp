#include "sectoria/puiseux.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <sstream>

#include "sectoria/errors.hpp"

namespace sectoria {

namespace {

constexpr double kPi = 3.14159265358979323846;

long gcd_nonneg(long a, long b) { return std::gcd(std::abs(a), std::abs(b)); }

} // namespace

cplx branch_pow(cplx z, double exponent, double branch_center) {
    if (z == cplx(0.0, 0.0)) {
        if (exponent > 0.0) return {0.0, 0.0};
        if (exponent == 0.0) return {1.0, 0.0};
        fail(errc::domain_error, "branch_pow: negative power of zero");
    }
    double theta = std::arg(z);
    double k = std::round((branch_center - theta) / (2.0 * kPi));
    theta += 2.0 * kPi * k;
    if (theta <= branch_center - kPi) theta += 2.0 * kPi;
    if (theta > branch_center + kPi) theta -= 2.0 * kPi;
    double lr = std::log(std::abs(z));
    return std::exp(cplx(exponent * lr, exponent * theta));
}

PuiseuxPoly::PuiseuxPoly(long d, std::map<long, cplx> terms) : d_(d), terms_(std::move(terms)) {
    if (d_ < 1) fail(errc::domain_error, "PuiseuxPoly: ramification must be >= 1");
    canonicalize();
}

PuiseuxPoly PuiseuxPoly::constant(cplx c) { return monomial(c, 0, 1); }

PuiseuxPoly PuiseuxPoly::monomial(cplx c, long num, long den) {
    if (den < 1) fail(errc::domain_error, "PuiseuxPoly: denominator must be >= 1");
    std::map<long, cplx> t;
    if (c != cplx(0.0, 0.0)) t[num] = c;
    return PuiseuxPoly(den, std::move(t));
}

void PuiseuxPoly::canonicalize() {
    for (auto it = terms_.begin(); it != terms_.end();) {
        if (it->second == cplx(0.0, 0.0))
            it = terms_.erase(it);
        else
            ++it;
    }
    if (terms_.empty()) {
        d_ = 1;
        return;
    }
    long g = d_;
    for (const auto& [num, c] : terms_) g = gcd_nonneg(g, num);
    if (g > 1) {
        std::map<long, cplx> reduced;
        for (const auto& [num, c] : terms_) reduced[num / g] = c;
        terms_ = std::move(reduced);
        d_ /= g;
    }
}

PuiseuxPoly PuiseuxPoly::with_denominator(long d) const {
    if (d % d_ != 0) fail(errc::domain_error, "with_denominator: incompatible ramification");
    long f = d / d_;
    PuiseuxPoly out;
    out.d_ = d;
    for (const auto& [num, c] : terms_) out.terms_[num * f] = c;
    return out;
}

std::optional<std::pair<long, long>> PuiseuxPoly::min_exponent() const {
    if (terms_.empty()) return std::nullopt;
    return std::make_pair(terms_.begin()->first, d_);
}

std::optional<std::pair<long, long>> PuiseuxPoly::max_exponent() const {
    if (terms_.empty()) return std::nullopt;
    return std::make_pair(terms_.rbegin()->first, d_);
}

cplx PuiseuxPoly::coeff(long num, long den) const {
    // exponent num/den, looked up after rescaling onto d_
    if ((num * d_) % den != 0) return {0.0, 0.0};
    auto it = terms_.find(num * d_ / den);
    return it == terms_.end() ? cplx(0.0, 0.0) : it->second;
}

bool PuiseuxPoly::has_negative_exponent() const {
    return !terms_.empty() && terms_.begin()->first < 0;
}

bool PuiseuxPoly::has_nonnegative_exponent() const {
    return !terms_.empty() && terms_.rbegin()->first >= 0;
}

bool PuiseuxPoly::all_exponents_negative() const {
    return terms_.empty() || terms_.rbegin()->first < 0;
}

bool PuiseuxPoly::all_exponents_nonnegative() const {
    return terms_.empty() || terms_.begin()->first >= 0;
}

bool PuiseuxPoly::is_real() const {
    for (const auto& [num, c] : terms_)
        if (c.imag() != 0.0) return false;
    return true;
}

PuiseuxPoly PuiseuxPoly::principal_part() const {
    std::map<long, cplx> t;
    for (const auto& [num, c] : terms_)
        if (num < 0) t[num] = c;
    return PuiseuxPoly(d_, std::move(t));
}

PuiseuxPoly PuiseuxPoly::nonnegative_part() const {
    std::map<long, cplx> t;
    for (const auto& [num, c] : terms_)
        if (num >= 0) t[num] = c;
    return PuiseuxPoly(d_, std::move(t));
}

PuiseuxPoly PuiseuxPoly::derivative() const {
    // d/dz of c z^(k/d) is c (k/d) z^((k-d)/d)
    std::map<long, cplx> t;
    for (const auto& [num, c] : terms_) {
        if (num == 0) continue;
        t[num - d_] = c * (static_cast<double>(num) / static_cast<double>(d_));
    }
    return PuiseuxPoly(d_, std::move(t));
}

PuiseuxPoly PuiseuxPoly::negate() const { return scale(cplx(-1.0, 0.0)); }

PuiseuxPoly PuiseuxPoly::scale(cplx s) const {
    std::map<long, cplx> t;
    if (s != cplx(0.0, 0.0))
        for (const auto& [num, c] : terms_) t[num] = c * s;
    return PuiseuxPoly(d_, std::move(t));
}

cplx PuiseuxPoly::eval(cplx z, double branch_center) const {
    if (z == cplx(0.0, 0.0)) {
        if (has_negative_exponent()) fail(errc::domain_error, "PuiseuxPoly::eval at z = 0");
        auto it = terms_.find(0);
        return it == terms_.end() ? cplx(0.0, 0.0) : it->second;
    }
    cplx acc(0.0, 0.0);
    for (const auto& [num, c] : terms_)
        acc += c * branch_pow(z, static_cast<double>(num) / static_cast<double>(d_), branch_center);
    return acc;
}

double PuiseuxPoly::eval_real(double rho) const {
    if (rho < 0.0) fail(errc::domain_error, "PuiseuxPoly::eval_real: negative argument");
    if (rho == 0.0) {
        if (has_negative_exponent()) fail(errc::domain_error, "PuiseuxPoly::eval_real at 0");
        auto it = terms_.find(0);
        return it == terms_.end() ? 0.0 : it->second.real();
    }
    double acc = 0.0;
    for (const auto& [num, c] : terms_)
        acc += c.real() * std::pow(rho, static_cast<double>(num) / static_cast<double>(d_));
    return acc;
}

PuiseuxPoly operator+(const PuiseuxPoly& p, const PuiseuxPoly& q) {
    long D = std::lcm(p.d_, q.d_);
    PuiseuxPoly a = p.with_denominator(D);
    PuiseuxPoly b = q.with_denominator(D);
    for (const auto& [num, c] : b.terms_) a.terms_[num] += c;
    return PuiseuxPoly(D, std::move(a.terms_));
}

PuiseuxPoly operator-(const PuiseuxPoly& p, const PuiseuxPoly& q) { return p + q.negate(); }

PuiseuxPoly operator*(const PuiseuxPoly& p, const PuiseuxPoly& q) {
    long D = std::lcm(p.d_, q.d_);
    PuiseuxPoly a = p.with_denominator(D);
    PuiseuxPoly b = q.with_denominator(D);
    std::map<long, cplx> t;
    for (const auto& [na, ca] : a.terms_)
        for (const auto& [nb, cb] : b.terms_) t[na + nb] += ca * cb;
    return PuiseuxPoly(D, std::move(t));
}

int PuiseuxPoly::compare(const PuiseuxPoly& a, const PuiseuxPoly& b) {
    auto ita = a.terms_.begin();
    auto itb = b.terms_.begin();
    while (ita != a.terms_.end() && itb != b.terms_.end()) {
        long lhs = ita->first * b.d_;
        long rhs = itb->first * a.d_;
        if (lhs != rhs) return lhs < rhs ? -1 : 1;
        cplx ca = ita->second, cb = itb->second;
        if (ca.real() != cb.real()) return ca.real() < cb.real() ? -1 : 1;
        if (ca.imag() != cb.imag()) return ca.imag() < cb.imag() ? -1 : 1;
        ++ita;
        ++itb;
    }
    if (ita != a.terms_.end()) return 1;
    if (itb != b.terms_.end()) return -1;
    return 0;
}

long lcm_ramification(std::span<const PuiseuxPoly> ps) {
    long l = 1;
    for (const auto& p : ps) l = std::lcm(l, p.ramification());
    return l;
}

namespace {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    // trim to the shortest representation that round-trips
    for (int prec = 1; prec < 17; ++prec) {
        char b2[40];
        std::snprintf(b2, sizeof(b2), "%.*g", prec, x);
        if (std::strtod(b2, nullptr) == x) return b2;
    }
    return buf;
}

std::string format_coeff(cplx c) {
    if (c.imag() == 0.0) return format_double(c.real());
    std::string s = "(" + format_double(c.real());
    s += c.imag() < 0.0 ? "-" : "+";
    s += format_double(std::abs(c.imag())) + "i)";
    return s;
}

} // namespace

std::string PuiseuxPoly::to_string() const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [num, c] : terms_) {
        if (!first) out += " + ";
        first = false;
        if (num == 0) {
            out += format_coeff(c);
            continue;
        }
        out += format_coeff(c);
        out += "*z^(";
        out += std::to_string(num);
        if (d_ != 1) out += "/" + std::to_string(d_);
        out += ")";
    }
    return out;
}

namespace {

struct Cursor {
    const char* p;
    const char* begin;

    void skip_ws() {
        while (*p && std::isspace(static_cast<unsigned char>(*p))) ++p;
    }
    bool eat(char c) {
        skip_ws();
        if (*p == c) {
            ++p;
            return true;
        }
        return false;
    }
    [[noreturn]] void err(const std::string& msg) const {
        fail(errc::parse_error,
             "puiseux parse error at offset " + std::to_string(p - begin) + ": " + msg);
    }
    double number() {
        skip_ws();
        char* end = nullptr;
        double v = std::strtod(p, &end);
        if (end == p) err("expected number");
        p = end;
        return v;
    }
    long integer() {
        skip_ws();
        char* end = nullptr;
        long v = std::strtol(p, &end, 10);
        if (end == p) err("expected integer");
        p = end;
        return v;
    }
};

// coefficient := number | '(' number ('+'|'-') number 'i' ')'
cplx parse_coeff(Cursor& cur) {
    cur.skip_ws();
    if (*cur.p == '(') {
        const char* save = cur.p;
        ++cur.p;
        double re = cur.number();
        cur.skip_ws();
        char sign = *cur.p;
        if (sign != '+' && sign != '-') {
            // not a complex literal; backtrack and let exponent parsing see it
            cur.p = save;
            cur.err("expected '+' or '-' in complex literal");
        }
        ++cur.p;
        double im = cur.number();
        if (!cur.eat('i')) cur.err("expected 'i'");
        if (!cur.eat(')')) cur.err("expected ')'");
        return {re, sign == '-' ? -im : im};
    }
    return {cur.number(), 0.0};
}

// exponent := integer | '(' integer ['/' integer] ')'
std::pair<long, long> parse_exponent(Cursor& cur) {
    if (cur.eat('(')) {
        long num = cur.integer();
        long den = 1;
        if (cur.eat('/')) den = cur.integer();
        if (!cur.eat(')')) cur.err("expected ')'");
        if (den < 1) cur.err("exponent denominator must be positive");
        return {num, den};
    }
    return {cur.integer(), 1};
}

} // namespace

PuiseuxPoly PuiseuxPoly::parse(const std::string& text) {
    Cursor cur{text.c_str(), text.c_str()};
    PuiseuxPoly acc;
    bool first = true;
    for (;;) {
        cur.skip_ws();
        if (*cur.p == '\0') {
            if (first) cur.err("empty expression");
            break;
        }
        double sign = 1.0;
        if (!first) {
            if (cur.eat('+')) {
                sign = 1.0;
            } else if (cur.eat('-')) {
                sign = -1.0;
            } else {
                cur.err("expected '+' or '-'");
            }
        } else if (cur.eat('-')) {
            sign = -1.0;
        }
        cur.skip_ws();
        cplx c(1.0, 0.0);
        bool have_coeff = false;
        if (*cur.p != 'z') {
            c = parse_coeff(cur);
            have_coeff = true;
        }
        long num = 0, den = 1;
        cur.skip_ws();
        bool star = have_coeff && cur.eat('*');
        if (star || *cur.p == 'z') {
            if (!cur.eat('z')) cur.err("expected 'z'");
            if (cur.eat('^')) {
                auto [n, d] = parse_exponent(cur);
                num = n;
                den = d;
            } else {
                num = 1;
                den = 1;
            }
        }
        acc = acc + PuiseuxPoly::monomial(c * sign, num, den);
        first = false;
    }
    return acc;
}

cplx TruncSeries::eval(cplx z, double branch_center) const {
    cplx acc(0.0, 0.0);
    for (const auto& [num, c] : terms) {
        if (num == 0) {
            acc += c;
        } else {
            acc += c * branch_pow(z, static_cast<double>(num) / static_cast<double>(d), branch_center);
        }
    }
    return acc;
}

cplx PowerSeries::eval(cplx w) const {
    cplx acc(0.0, 0.0);
    for (std::size_t k = c.size(); k-- > 0;) acc = acc * w + c[k];
    return acc;
}

PowerSeries PowerSeries::derivative() const {
    PowerSeries out;
    if (c.size() > 1) {
        out.c.resize(c.size() - 1);
        for (std::size_t k = 1; k < c.size(); ++k) out.c[k - 1] = c[k] * static_cast<double>(k);
    }
    return out;
}

int PowerSeries::vanishing_order() const {
    for (std::size_t k = 0; k < c.size(); ++k)
        if (c[k] != cplx(0.0, 0.0)) return static_cast<int>(k);
    return -1;
}

cplx PowerSeries::leading_coeff() const {
    int v = vanishing_order();
    return v < 0 ? cplx(0.0, 0.0) : c[static_cast<std::size_t>(v)];
}

PowerSeries PowerSeries::identity(std::size_t len) {
    PowerSeries s;
    s.c.assign(std::max<std::size_t>(len, 2), cplx(0.0, 0.0));
    s.c[1] = 1.0;
    return s;
}

namespace {

// u(w)^a truncated at length n, u(0) != 0, via the power recurrence
// u f' = a u' f  =>  k u0 f_k = sum_{j=1..k} ((a+1) j - k) u_j f_{k-j}.
std::vector<cplx> series_pow(const std::vector<cplx>& u, double a, std::size_t n) {
    std::vector<cplx> f(n, cplx(0.0, 0.0));
    cplx u0 = u[0];
    f[0] = std::pow(u0, cplx(a, 0.0));
    for (std::size_t k = 1; k < n; ++k) {
        cplx acc(0.0, 0.0);
        for (std::size_t j = 1; j <= k; ++j) {
            cplx uj = j < u.size() ? u[j] : cplx(0.0, 0.0);
            acc += ((a + 1.0) * static_cast<double>(j) - static_cast<double>(k)) * uj * f[k - j];
        }
        f[k] = acc / (static_cast<double>(k) * u0);
    }
    return f;
}

} // namespace

ChartComposition compose_chart(const PuiseuxPoly& p, const PowerSeries& phi,
                               double validity_radius, long order) {
    int c = phi.vanishing_order();
    if (c < 1 || phi.leading_coeff() == cplx(0.0, 0.0))
        fail(errc::ill_posed_chart, "compose_chart: chart must vanish at 0 with nonzero leading coefficient");
    if (validity_radius <= 0.0)
        fail(errc::domain_error, "compose_chart: validity radius must be positive");

    long d = p.ramification();
    const long guard = 12;

    // phi(w) = w^c u(w), u(0) != 0
    std::vector<cplx> u(phi.c.begin() + c, phi.c.end());
    if (u.empty()) u.push_back(cplx(0.0, 0.0));

    // composite exponents live on denominator d: term exponent = (c*k + j*d)/d
    std::map<long, cplx> comp;
    long keep = order * d;  // keep exponents <= order exactly (numerator <= order*d)
    long internal = keep + guard * d;

    for (const auto& [k, coef] : p.terms()) {
        double a = static_cast<double>(k) / static_cast<double>(d);
        long base = static_cast<long>(c) * k;  // numerator of w^(ck/d)
        if (base > internal) continue;
        std::size_t nterms = static_cast<std::size_t>((internal - base) / d) + 1;
        std::vector<cplx> upow = series_pow(u, a, nterms);
        for (std::size_t j = 0; j < nterms; ++j) {
            cplx t = coef * upow[j];
            if (t != cplx(0.0, 0.0)) comp[base + static_cast<long>(j) * d] += t;
        }
    }

    // split at exponent 0, truncate tail at `keep`, bound the dropped part
    std::map<long, cplx> principal_terms, tail_terms;
    double dropped = 0.0, last_band = 0.0, prev_band = 0.0;
    for (const auto& [num, coef] : comp) {
        if (coef == cplx(0.0, 0.0)) continue;
        if (num < 0) {
            principal_terms[num] = coef;
        } else if (num <= keep) {
            tail_terms[num] = coef;
        } else {
            double mag = std::abs(coef) *
                         std::pow(validity_radius, static_cast<double>(num) / static_cast<double>(d));
            dropped += mag;
            if (num > keep + (guard - 4) * d)
                last_band += mag;
            else if (num > keep + (guard - 8) * d)
                prev_band += mag;
        }
    }
    if (prev_band > 0.0 && last_band > 0.5 * prev_band)
        fail(errc::precision_error,
             "compose_chart: expansion remainder not controllable at the requested order");
    double q = prev_band > 0.0 ? std::min(0.5, last_band / prev_band) : 0.0;
    double tb = 2.0 * dropped + (q < 1.0 ? last_band * q / (1.0 - q) : 0.0) + 1e-15;

    ChartComposition out;
    out.principal = PuiseuxPoly(d, std::move(principal_terms));
    out.tail.d = d;
    out.tail.order = keep;
    out.tail.terms = std::move(tail_terms);
    out.tail.tail_bound = tb;
    return out;
}

} // namespace sectoria
