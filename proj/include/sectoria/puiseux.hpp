#ifndef SECTORIA_PUISEUX_HPP
#define SECTORIA_PUISEUX_HPP

#include <complex>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sectoria {

using cplx = std::complex<double>;

/// z^(1/d) on the branch with arg z taken in (center - pi, center + pi].
/// center = 0 reproduces the convention of positive real values on R_{>0}.
cplx branch_pow(cplx z, double exponent, double branch_center);

/// Finite sum of terms c * z^(k/d), k integer (negative allowed), with a
/// canonical representation: gcd of d with all numerators is 1 and no stored
/// coefficient is zero. The zero polynomial has empty terms and d = 1.
class PuiseuxPoly {
public:
    PuiseuxPoly() : d_(1) {}
    PuiseuxPoly(long d, std::map<long, cplx> terms);

    static PuiseuxPoly zero() { return PuiseuxPoly(); }
    static PuiseuxPoly constant(cplx c);
    static PuiseuxPoly monomial(cplx c, long num, long den);

    long ramification() const { return d_; }
    const std::map<long, cplx>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    /// Smallest exponent (num, den) present; nullopt for the zero polynomial.
    std::optional<std::pair<long, long>> min_exponent() const;
    std::optional<std::pair<long, long>> max_exponent() const;
    cplx coeff(long num, long den) const;

    bool has_negative_exponent() const;
    bool has_nonnegative_exponent() const;
    bool all_exponents_negative() const;
    bool all_exponents_nonnegative() const;
    bool is_real() const;

    PuiseuxPoly principal_part() const;    // exponents < 0
    PuiseuxPoly nonnegative_part() const;  // exponents >= 0
    PuiseuxPoly derivative() const;
    PuiseuxPoly negate() const;
    PuiseuxPoly scale(cplx c) const;

    cplx eval(cplx z, double branch_center = 0.0) const;
    /// Evaluation at real rho >= 0 for real-coefficient curves with
    /// nonnegative exponents (rho = 0 allowed when no negative exponents).
    double eval_real(double rho) const;

    friend PuiseuxPoly operator+(const PuiseuxPoly&, const PuiseuxPoly&);
    friend PuiseuxPoly operator-(const PuiseuxPoly&, const PuiseuxPoly&);
    friend PuiseuxPoly operator*(const PuiseuxPoly&, const PuiseuxPoly&);
    bool operator==(const PuiseuxPoly& o) const { return d_ == o.d_ && terms_ == o.terms_; }
    bool operator!=(const PuiseuxPoly& o) const { return !(*this == o); }

    /// Deterministic total order (leading exponent, then coefficients).
    static int compare(const PuiseuxPoly& a, const PuiseuxPoly& b);

    std::string to_string() const;
    static PuiseuxPoly parse(const std::string& text);

private:
    long d_;                     // ramification denominator, >= 1
    std::map<long, cplx> terms_; // numerator -> nonzero coefficient
    void canonicalize();
    PuiseuxPoly with_denominator(long d) const;
};

long lcm_ramification(std::span<const PuiseuxPoly> ps);

/// Truncated power series with fractional exponents: terms with exponent
/// <= order/d kept, plus an optional bound on the discarded remainder over
/// the validity domain stated at construction time.
struct TruncSeries {
    long d = 1;
    long order = 0;               // truncation bound T, exponents kept are <= T/d
    std::map<long, cplx> terms;   // numerator -> coefficient
    std::optional<double> tail_bound;

    cplx eval(cplx z, double branch_center = 0.0) const;
    bool empty() const { return terms.empty(); }
};

/// Truncated power series in integer powers of w, c[k] the coefficient of w^k.
struct PowerSeries {
    std::vector<cplx> c;

    cplx eval(cplx w) const;
    PowerSeries derivative() const;
    int vanishing_order() const;  // smallest k with c[k] != 0; -1 if all zero
    cplx leading_coeff() const;

    static PowerSeries identity(std::size_t len = 2);
};

struct ChartComposition {
    PuiseuxPoly principal;  // strictly negative exponents
    TruncSeries tail;       // exponents >= 0
};

/// Splits p(phi(w)) = principal(w) + tail(w) with phi = the chart series,
/// phi(0) = 0 of vanishing order c >= 1 and nonzero leading coefficient.
/// `order` bounds the tail exponents kept (in units of 1/d of the composite);
/// the remainder over |w| <= validity_radius is bounded by tail.tail_bound.
ChartComposition compose_chart(const PuiseuxPoly& p, const PowerSeries& phi,
                               double validity_radius, long order);

} // namespace sectoria

#endif
