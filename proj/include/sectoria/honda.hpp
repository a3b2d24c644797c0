#ifndef SECTORIA_HONDA_HPP
#define SECTORIA_HONDA_HPP

#include <functional>
#include <limits>
#include <variant>
#include <vector>

#include "sectoria/geometry.hpp"
#include "sectoria/puiseux.hpp"
#include "sectoria/tempered.hpp"
#include "sectoria/turrittin.hpp"

namespace sectoria {

struct RadialSegment {
    double angle = 0.0;
    double rho_from = 0.0;  // 0 marks the improper vertex endpoint
    double rho_to = 0.0;
};

struct ArcSegment {
    double radius = 0.0;
    double theta_from = 0.0;
    double theta_to = 0.0;
};

using PathSegment = std::variant<RadialSegment, ArcSegment>;

struct PathSpec {
    std::vector<PathSegment> segments;  // contiguous, z0 to z
    cplx z0{0.0, 0.0};
    cplx z{0.0, 0.0};

    bool starts_at_vertex() const;
};

struct AmplitudeBound {
    double alpha = 0.0;     // pi/(2s); pi when p = 0
    long s_num = 0;         // leading pole order s = s_num/s_den (0 for p = 0)
    long s_den = 1;
    cplx leading_coeff{0.0, 0.0};
    double rho_star = 0.0;  // leading term dominates the rest by >= 2 below this
};

AmplitudeBound amplitude_bound(const PuiseuxPoly& p);

struct IntegralOptions {
    double branch_center = std::numeric_limits<double>::quiet_NaN();  // NaN: sector bisector
    double mg_hint = -1.0;           // vertex growth exponent of the integrand; < 0: estimate
    double outer_radius_scale = 1.0; // shrink factor for the outer base point (ambiguity tests)
    double rel_tol = 1e-10;
    int max_intervals = 1 << 14;
};

PathSpec build_path(const PuiseuxPoly& p, const Sector& S, cplx z,
                    const IntegralOptions& opts = {});

/// Worst Re(p(z) - p(zeta)) over discretized path nodes (the phase invariant
/// demands this stays <= 1e-9).
double max_phase_violation(const PuiseuxPoly& p, const PathSpec& path, cplx z,
                           double branch_center, int nodes_per_segment = 64);

/// exp(p(z)) * int_Gamma exp(-p(zeta)) g(zeta) dzeta with the kernel and g
/// evaluated jointly (never exp(p) alone).
cplx integral_op(const PuiseuxPoly& p, const HoloFn& g, const Sector& S, cplx z,
                 const IntegralOptions& opts = {});
cplx integral_op_fn(const PuiseuxPoly& p, const std::function<cplx(cplx)>& g, const Sector& S,
                    cplx z, const IntegralOptions& opts = {});

/// Particular solution of z^N u' + a(z) u = g on S via the weighted operator
/// u = f e^Lambda int e^{-Lambda} f^{-1} g zeta^{-N}, f the moderate factor of
/// the homogeneous solution exp(-int a zeta^{-N}).
HoloFn solve_scalar_sector(const PuiseuxPoly& p, int N, const Polynomial& a, const HoloFn& g,
                           const Sector& S, const IntegralOptions& opts = {});

/// Variation of parameters u = F e^Lambda int e^{-Lambda} F^{-1} g / zeta^N,
/// componentwise paths per Lambda_k.
std::vector<HoloFn> solve_system_sector(const OperatorSpec& op, const FormalFundamental& ff,
                                        const ExponentialPart& ep, const std::vector<HoloFn>& g,
                                        const Sector& S, const IntegralOptions& opts = {});

/// Solves on phi(S) through the w-plane: Lambda_k o phi = p~_k + psi_k,
/// h_k = exp(psi_k), I_{p,z0}(g) o phi = h * I_{p~,w0}(h^{-1} (g o phi) phi').
std::vector<HoloFn> solve_on_chart_image(const OperatorSpec& op, const ExponentialPart& ep,
                                         const FormalFundamental& ff, const Chart& chart,
                                         const Sector& S, const std::vector<HoloFn>& g,
                                         const IntegralOptions& opts = {});

/// Derivative by the Cauchy integral on a circle of radius r around z.
cplx cauchy_derivative(const std::function<cplx(cplx)>& f, cplx z, double r, int n = 32);

/// sup over n sector samples of |z^N u' + A u - g| (the solver residual).
double ode_residual_system(const OperatorSpec& op, const std::vector<HoloFn>& u,
                           const std::vector<HoloFn>& g, const Sector& S, int n = 64);

} // namespace sectoria

#endif
