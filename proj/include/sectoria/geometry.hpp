#ifndef SECTORIA_GEOMETRY_HPP
#define SECTORIA_GEOMETRY_HPP

#include <complex>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "sectoria/puiseux.hpp"

namespace sectoria {

/// Open sector S(tau, eta, r) = { rho e^{i theta} : 0 < rho < r, |theta - tau| < eta }.
struct Sector {
    double tau = 0.0;  // bisector angle
    double eta = 0.0;  // half-amplitude, 0 < eta < pi
    double r = 0.0;    // radius

    Sector() = default;
    Sector(double tau_, double eta_, double r_);
    static Sector from_angles(double alpha, double beta, double r);

    double alpha() const { return tau - eta; }
    double beta() const { return tau + eta; }
    double amplitude() const { return 2.0 * eta; }
    bool contains(cplx z) const;
    /// Distance from an interior point to the sector boundary (exact formula).
    double boundary_distance_exact(cplx z) const;
};

/// Boundary curve theta = curve(rho) of a polar band; real Puiseux data with
/// nonnegative exponents, values in (-pi, 3pi) on [0, R].
struct CurveSpec {
    PuiseuxPoly poly;
    double R = 0.0;

    double value_at_0() const;
    double eval(double rho) const;
    bool is_constant() const;
    void validate() const;
};

/// B(lower, upper) = { (rho, theta) : 0 < rho < R, lower(rho) < theta < upper(rho) }.
struct Band {
    CurveSpec lower;
    CurveSpec upper;
    double R = 0.0;

    void validate(int grid = 256) const;
    bool contains_polar(double rho, double theta) const;
    bool contains_point(cplx z) const;  // membership of pi~(B) as a planar set
};

/// pi~(rho, theta) = rho e^{i theta}, defined on band members.
cplx band_to_plane(const Band& b, double rho, double theta);

/// Holomorphic chart phi with phi(0) = 0, given as a truncated power series,
/// injective on the closure of its validity sector.
class Chart {
public:
    Chart() = default;
    Chart(PowerSeries series, Sector validity);

    cplx eval(cplx w) const;
    cplx deriv(cplx w) const;
    const PowerSeries& series() const { return series_; }
    const Sector& validity() const { return validity_; }
    int vanishing_order() const { return order_; }
    cplx leading_coeff() const { return lead_; }

    /// Numeric inverse by damped Newton; nullopt on non-convergence.
    std::optional<cplx> invert(cplx z, double tol = 1e-10) const;
    /// Sampled injectivity certificate on the closure of `sec`.
    bool check_injectivity(const Sector& sec, int n_pairs = 1000, std::uint64_t seed = 7) const;

private:
    PowerSeries series_;
    PowerSeries deriv_;
    Sector validity_;
    int order_ = 1;
    cplx lead_{1.0, 0.0};
};

/// phi(t) = t^d e^{i curve(t^d)} expanded as a power series in t, mapping the
/// real segment onto the arc { rho e^{i curve(rho)} }.
Chart chart_from_arc(const CurveSpec& curve, long series_order = 40);

/// Region tree over sector / chart-image / disc leaves with union and
/// intersection nodes.
class Region {
public:
    enum class Kind { raw_sector, sector_image, disc, union_node, intersect_node };

    static Region raw_sector(Sector s);
    static Region sector_image(Chart chart, Sector s);
    static Region disc(cplx center, double radius);
    static Region union_of(std::vector<Region> children);
    static Region intersect_of(std::vector<Region> children);

    Kind kind() const;
    const std::vector<Region>& children() const;
    const Sector& sector() const;          // raw_sector / sector_image leaves
    const Chart& chart() const;            // sector_image leaves
    cplx disc_center() const;
    double disc_radius() const;

    bool contains(cplx z) const;

private:
    struct Node;
    std::shared_ptr<const Node> node_;
};

bool region_membership(const Region& reg, cplx z);

/// Min distance from an interior point to a polyline discretization of the
/// region boundary, n_boundary points per leaf edge.
double boundary_distance(const Region& reg, cplx z, int n_boundary);

/// Member points of the region, radius sampled log-uniformly over
/// `radius_decades` dyadic decades so the vertex neighborhood is probed.
std::vector<cplx> sample_region(const Region& reg, int n, std::mt19937_64& rng,
                                int radius_decades = 24);

struct CoverOptions {
    std::uint64_t seed = 20240901;
    int n_check = 10000;
    double min_agree = 0.999;
    int max_halvings = 20;
    long chart_order = 40;
};

struct BandCover {
    double W_radius = 0.0;
    std::vector<Region> pieces;
};

/// Covering of the band germ by chart images of sectors and raw sectors, with
/// W_radius found by bisection until membership sampling passes two-sided.
BandCover cover_band(const Band& b, double max_amplitude, double max_radius,
                     const CoverOptions& opts = {});

} // namespace sectoria

#endif
