#ifndef SECTORIA_TEMPERED_HPP
#define SECTORIA_TEMPERED_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sectoria/geometry.hpp"
#include "sectoria/puiseux.hpp"

namespace sectoria {

/// Evaluable holomorphic expression: polynomials, exp of Puiseux polynomials,
/// power/log factors, products, sums, chart pullbacks/pushforwards and opaque
/// path-integral evaluators. Immutable; evaluation is pure.
class HoloFn {
public:
    HoloFn();  // the zero function

    static HoloFn constant(cplx c);
    static HoloFn poly(std::vector<cplx> coeffs);                 // sum c_k z^k
    static HoloFn puiseux_exp(PuiseuxPoly p, double branch_center = 0.0);  // exp(p(z))
    static HoloFn power_log(cplx rho, int log_power, double branch_center = 0.0);  // z^rho log^k z
    static HoloFn trunc_series(TruncSeries s, double branch_center = 0.0);
    static HoloFn sum(std::vector<HoloFn> parts);
    static HoloFn product(std::vector<HoloFn> parts);
    static HoloFn scale(cplx c, HoloFn inner);
    static HoloFn pullback(Chart chart, HoloFn inner);      // w -> inner(phi(w))
    static HoloFn pushforward(Chart chart, HoloFn inner);   // z -> inner(phi^{-1}(z))
    static HoloFn path_integral(std::function<cplx(cplx)> eval, std::string label);
    static HoloFn matrix_entry(int i, int j, HoloFn inner);

    cplx eval(cplx z) const;
    /// log |f(z)|, computed structurally where the plain value would overflow.
    double log_abs(cplx z) const;
    const std::string& label() const;
    HoloFn labeled(std::string label) const;

    struct Node;

private:
    std::shared_ptr<const Node> node_;
};

enum class Verdict { tempered, not_tempered, inconclusive };

std::string to_string(Verdict v);

struct StratumStat {
    int k = 0;          // dyadic stratum: delta in [2^-k-1, 2^-k]
    int count = 0;
    double max_abs = 0.0;
};

/// Result of fitting delta^M |f| growth on a region.
struct TemperedCertificate {
    double M = 0.0;
    double sup_value = 0.0;
    double fitted_slope = 0.0;
    double fit_residual = 0.0;
    std::vector<StratumStat> strata;
    int grid_size = 0;
    std::uint64_t seed = 0;
    double min_delta = 0.0;
    Verdict verdict = Verdict::inconclusive;
};

struct TemperedOptions {
    int strata = 20;            // dyadic strata k = 0 .. strata
    int per_stratum = 512;
    std::uint64_t seed = 31415;
    int n_boundary = 192;
    double fit_residual_tol = 0.5;  // sup-norm tolerance in log10 units
    double m_max = 20.0;
};

/// sup over a delta-stratified grid of delta^M |f|.
double tempered_norm(const HoloFn& f, const Region& reg, double M, int grid_size,
                     const TemperedOptions& opts = {});

TemperedCertificate fit_growth_exponent(const HoloFn& f, const Region& reg,
                                        const TemperedOptions& opts = {});

struct LojasiewiczFit {
    double c = 0.0;
    double r = 0.0;
};

/// Sample-certified pair (c, r) with f >= c g^r on the sampled closure of K.
LojasiewiczFit lojasiewicz_exponents(const std::function<double(cplx)>& f,
                                     const std::function<double(cplx)>& g, const Region& K,
                                     int n_samples = 2000, std::uint64_t seed = 99,
                                     double r_max = 10.0);

struct PullbackReport {
    TemperedCertificate direct;   // h on phi(S)
    TemperedCertificate pulled;   // h o phi on S
    Verdict verdict = Verdict::inconclusive;
    bool consistent = false;
    LojasiewiczFit delta_fwd;     // delta_{phi(S)} o phi vs delta_S
    LojasiewiczFit delta_bwd;
};

PullbackReport pullback_temperedness_check(const HoloFn& h, const Chart& chart,
                                           const Sector& sector,
                                           const TemperedOptions& opts = {});

} // namespace sectoria

#endif
