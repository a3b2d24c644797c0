#ifndef SECTORIA_JSON_IO_HPP
#define SECTORIA_JSON_IO_HPP

#include <string>

#include "json.hpp"
#include "sectoria/geometry.hpp"
#include "sectoria/solver.hpp"
#include "sectoria/tempered.hpp"
#include "sectoria/turrittin.hpp"

namespace sectoria {

using ojson = nlohmann::ordered_json;

inline constexpr const char* kSchemaTag = "sectoria/1";

/// Parse with diagnostics mapped to errc::parse_error.
ojson parse_json(const std::string& text, const std::string& origin = "<input>");

ojson operator_to_json(const OperatorSpec& op);
OperatorSpec operator_from_json(const ojson& j);

ojson band_to_json(const Band& b);
Band band_from_json(const ojson& j);

ojson region_to_json(const Region& r);
Region region_from_json(const ojson& j);

ojson certificate_to_json(const TemperedCertificate& c);
TemperedCertificate certificate_from_json(const ojson& j);

ojson growth_cert_to_json(const GrowthCert& c);

/// analyze output: ramification, canonical Lambda strings, growth data.
ojson analyze_to_json(const OperatorSpec& op, const ExponentialPart& ep,
                      const FormalFundamental& ff);

ojson cover_to_json(const BandCover& cover);

ojson report_to_json(const SolveReport& rep);
ojson experiment_to_json(const ExperimentReport& rep);
ojson pullback_report_to_json(const PullbackReport& rep);

/// RHS grammar: a Puiseux polynomial, optionally times an exponential factor:
/// "<puiseux>", "exp(<puiseux>)" or "<puiseux>*exp(<puiseux>)".
HoloFn parse_rhs(const std::string& text);

/// CSV with header z_re,z_im,u_re,u_im,residual,delta; one row per sampled
/// point and solution component over the solved pieces.
std::string solution_samples_csv(const SolveReport& rep, const std::vector<HoloFn>& g,
                                 int per_piece = 24, std::uint64_t seed = 7);

/// CSV per-piece summary: id,kind,residual,max_M,tempered,solved.
std::string piece_summary_csv(const SolveReport& rep);

} // namespace sectoria

#endif
