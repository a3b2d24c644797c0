#ifndef SECTORIA_SOLVER_HPP
#define SECTORIA_SOLVER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "sectoria/geometry.hpp"
#include "sectoria/honda.hpp"
#include "sectoria/tempered.hpp"
#include "sectoria/turrittin.hpp"

namespace sectoria {

enum class SolveVerdict { solved, partial, failed };

std::string to_string(SolveVerdict v);

struct PieceRecord {
    int id = 0;
    Region region;
    std::string kind;  // raw_sector | sector_image | intersection
    std::vector<HoloFn> u;
    double residual = 0.0;
    std::vector<TemperedCertificate> certs;
    bool solved = false;
    std::string note;
};

struct OverlapRecord {
    int piece_a = 0;
    int piece_b = 0;
    int n_samples = 0;
    std::vector<cplx> coeffs;  // fitted homogeneous coefficients
    double fit_residual = 0.0;
    double scale = 1.0;
    bool pass = false;
    bool skipped = false;
    std::string note;
};

struct SolveReport {
    OperatorSpec op;
    ExponentialPart ep;
    FormalFundamental ff;
    BandCover cover;
    std::vector<PieceRecord> pieces;
    std::vector<OverlapRecord> overlaps;
    SolveVerdict verdict = SolveVerdict::failed;
    std::uint64_t seed = 0;
    double tol_residual = 1e-6;
    double tol_glue = 1e-6;
    double sup_g = 0.0;
};

struct SolverOptions {
    std::uint64_t seed = 20240901;
    double tol_residual = 1e-6;
    double tol_glue = 1e-6;
    int residual_samples = 64;
    int cauchy_nodes = 24;
    long ff_order = 12;
    TemperedOptions tempered{12, 48, 31415, 96, 0.5, 20.0};
    CoverOptions cover;
    IntegralOptions integral;
    bool run_overlaps = true;
};

/// Residual sup over region samples of |z^N u' + A u - g|, derivatives by the
/// Cauchy integral.
double ode_residual_region(const OperatorSpec& op, const std::vector<HoloFn>& u,
                           const std::vector<HoloFn>& g, const Region& reg, int n,
                           std::uint64_t seed, int cauchy_nodes = 24);

SolveReport cover_and_solve(const OperatorSpec& op, const Band& band,
                            const std::vector<HoloFn>& g, const SolverOptions& opts = {});

/// Fits u_a - u_b on the sampled overlap against the homogeneous columns
/// (F e^Lambda); PASS when the fit residual is <= tol_glue * scale and the
/// difference is tempered on the overlap.
OverlapRecord mayer_vietoris_check(const SolveReport& report, int piece_a, int piece_b,
                                   int n_samples = 32, std::uint64_t seed = 4242,
                                   const TemperedOptions& topts = {12, 48, 31415, 96, 0.5, 20.0});

struct TrialRecord {
    SolveVerdict verdict = SolveVerdict::failed;
    bool in_scope = true;  // false: g not tempered, excluded from the fraction
    std::string note;
};

struct ExperimentReport {
    int trials = 0;
    int in_scope = 0;
    int solved = 0;
    double success_fraction = 0.0;  // over in-scope trials
    std::vector<TrialRecord> records;
    std::uint64_t seed = 0;
};

ExperimentReport h1_comparison_experiment(const OperatorSpec& op, const Band& band,
                                          const std::vector<std::vector<HoloFn>>& trials,
                                          const SolverOptions& opts = {});

} // namespace sectoria

#endif
