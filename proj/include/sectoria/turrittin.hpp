#ifndef SECTORIA_TURRITTIN_HPP
#define SECTORIA_TURRITTIN_HPP

#include <string>
#include <vector>

#include "sectoria/geometry.hpp"
#include "sectoria/puiseux.hpp"
#include "sectoria/tempered.hpp"

namespace sectoria {

/// Polynomial in z with complex coefficients, c[k] the coefficient of z^k.
struct Polynomial {
    std::vector<cplx> c;

    cplx eval(cplx z) const;
    int degree() const;  // -1 for the zero polynomial
    bool is_zero() const { return degree() < 0; }
    PuiseuxPoly to_puiseux() const;
    std::string to_string() const;
    static Polynomial parse(const std::string& text);
};

/// The system P = z^N (d/dz) I_m + A(z) on a disc around the origin.
struct OperatorSpec {
    int m = 1;
    int N = 0;
    std::vector<std::vector<Polynomial>> A;  // m x m
    double disc_radius = 1.0;

    void validate() const;
    cplx A_entry(int i, int j, cplx z) const;
};

/// Scalar operator sum_j a[j] (d/dz)^j with Puiseux coefficients.
struct ScalarOperator {
    std::vector<PuiseuxPoly> a;

    int order() const;
    /// m = 1 encoding of OperatorSpec: a1 = z^N, a0 = A[0][0].
    static ScalarOperator from_operator(const OperatorSpec& op);
};

struct NewtonSlope {
    long num = 0;       // slope num/den >= 0; positive slope s means an
    long den = 1;       // exponential term of pole order s
    long multiplicity = 0;
};

std::vector<NewtonSlope> newton_polygon(const ScalarOperator& op);

struct ExponentialPart {
    long l = 1;                        // ramification
    std::vector<PuiseuxPoly> lambdas;  // strictly negative exponents, sorted canonically
};

ExponentialPart exponential_parts(const OperatorSpec& op);
/// Exponential parts of a scalar operator of any order via Newton polygon
/// iteration (distinct leading roots at every stage).
ExponentialPart exponential_parts_scalar(const ScalarOperator& op);

/// -int b(z) z^{-N} dz for a polynomial b, split into the principal part, the
/// log coefficient rho (z^rho factor after exponentiation) and the analytic part.
struct ExponentSplit {
    PuiseuxPoly lambda;
    cplx rho{0.0, 0.0};
    PuiseuxPoly analytic;
};

ExponentSplit split_exponent_integral(const std::vector<cplx>& b, int N);

struct GrowthCert {
    double K = 0.0;
    double M = 0.0;
    Sector sector;
    int n_samples = 0;
    bool ok = false;  // false when no M <= m_max certifies the bounds
};

struct FormalFundamental {
    int m = 1;
    std::vector<std::vector<HoloFn>> F;  // m x m entries
    long order = 0;
    GrowthCert cert;

    cplx entry(int i, int j, cplx z) const { return F[i][j].eval(z); }
};

FormalFundamental formal_fundamental(const OperatorSpec& op, const ExponentialPart& ep,
                                     long order);

GrowthCert verify_growth_bounds(const FormalFundamental& ff, const Sector& sector,
                                int n_samples, double m_max = 10.0);

/// Max-entry modulus of F(z); the norm used by growth certificates.
double fundamental_norm(const FormalFundamental& ff, cplx z);

} // namespace sectoria

#endif
