#include "sectoria.h"

#include <cstdlib>
#include <cstring>
#include <map>
#include <string>

#include "sectoria/errors.hpp"
#include "sectoria/json_io.hpp"
#include "sectoria/solver.hpp"

using namespace sectoria;

struct sectoria_job {
    ojson spec;
    std::map<std::string, std::string> artifacts;
};

namespace {

thread_local std::string t_last_error;

sectoria_status classify(const error& e) {
    switch (e.code()) {
        case errc::parse_error:
            return SECTORIA_E_PARSE;
        case errc::domain_error:
        case errc::unsupported_case:
        case errc::hypothesis_violation:
        case errc::ill_posed_chart:
            return SECTORIA_E_UNSUPPORTED;
        default:
            return SECTORIA_E_NUMERIC;
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

SolverOptions solver_options_from(const ojson& spec) {
    SolverOptions o;
    if (spec.contains("seed")) o.seed = spec.at("seed").get<std::uint64_t>();
    if (spec.contains("order")) o.ff_order = spec.at("order").get<long>();
    if (spec.contains("tolerances")) {
        const ojson& t = spec.at("tolerances");
        if (t.contains("residual")) o.tol_residual = t.at("residual").get<double>();
        if (t.contains("glue")) o.tol_glue = t.at("glue").get<double>();
    }
    return o;
}

std::vector<HoloFn> rhs_from(const ojson& spec, const char* key, int m) {
    std::vector<HoloFn> g;
    for (const auto& expr : spec.at(key)) g.push_back(parse_rhs(expr.get<std::string>()));
    if (static_cast<int>(g.size()) != m)
        fail(errc::parse_error, "rhs list length does not match operator dimension");
    return g;
}

sectoria_status run_impl(sectoria_job* job, const std::string& cmd, ojson& out) {
    const ojson& spec = job->spec;
    job->artifacts.clear();
    SolverOptions opts = solver_options_from(spec);

    if (cmd == "analyze") {
        OperatorSpec op = operator_from_json(spec.at("operator"));
        ExponentialPart ep = exponential_parts(op);
        FormalFundamental ff = formal_fundamental(op, ep, opts.ff_order);
        out = analyze_to_json(op, ep, ff);
        return SECTORIA_OK;
    }
    if (cmd == "cover") {
        OperatorSpec op = operator_from_json(spec.at("operator"));
        Band band = band_from_json(spec.at("band"));
        ExponentialPart ep = exponential_parts(op);
        double max_amp = 0.999 * 3.14159265358979323846;
        double max_rad = std::min(op.disc_radius, band.R);
        for (const auto& lam : ep.lambdas) {
            AmplitudeBound ab = amplitude_bound(lam);
            max_amp = std::min(max_amp, ab.alpha);
            max_rad = std::min(max_rad, ab.rho_star);
        }
        CoverOptions co = opts.cover;
        co.seed = opts.seed;
        BandCover cover = cover_band(band, max_amp, max_rad, co);
        out = cover_to_json(cover);
        return SECTORIA_OK;
    }
    if (cmd == "solve") {
        OperatorSpec op = operator_from_json(spec.at("operator"));
        Band band = band_from_json(spec.at("band"));
        std::vector<HoloFn> g = rhs_from(spec, "rhs", op.m);
        SolveReport rep = cover_and_solve(op, band, g, opts);
        out = report_to_json(rep);
        job->artifacts["samples.csv"] = solution_samples_csv(rep, g, 24, opts.seed);
        job->artifacts["pieces.csv"] = piece_summary_csv(rep);
        if (rep.verdict == SolveVerdict::solved) return SECTORIA_OK;
        if (rep.verdict == SolveVerdict::partial) return SECTORIA_E_PARTIAL;
        return SECTORIA_E_NUMERIC;
    }
    if (cmd == "check-pullback") {
        HoloFn h = parse_rhs(spec.at("h").get<std::string>());
        ojson cj = spec.at("chart");
        Region probe = region_from_json(
            ojson{{"kind", "sector_image"}, {"chart", cj}, {"sector", spec.at("sector")}});
        TemperedOptions topts;
        topts.seed = opts.seed;
        PullbackReport rep =
            pullback_temperedness_check(h, probe.chart(), probe.sector(), topts);
        out = pullback_report_to_json(rep);
        return rep.consistent ? SECTORIA_OK : SECTORIA_E_PARTIAL;
    }
    if (cmd == "experiment") {
        OperatorSpec op = operator_from_json(spec.at("operator"));
        Band band = band_from_json(spec.at("band"));
        std::vector<std::vector<HoloFn>> trials;
        for (const auto& trial : spec.at("trials")) {
            std::vector<HoloFn> g;
            for (const auto& expr : trial) g.push_back(parse_rhs(expr.get<std::string>()));
            trials.push_back(std::move(g));
        }
        ExperimentReport rep = h1_comparison_experiment(op, band, trials, opts);
        out = experiment_to_json(rep);
        return (rep.in_scope == 0 || rep.solved == rep.in_scope) ? SECTORIA_OK
                                                                 : SECTORIA_E_PARTIAL;
    }
    fail(errc::parse_error, "unknown command: " + cmd);
}

} // namespace

extern "C" {

sectoria_status sectoria_job_create(const char* spec_json, sectoria_job** out) {
    t_last_error.clear();
    if (!spec_json || !out) {
        t_last_error = "null argument";
        return SECTORIA_E_PARSE;
    }
    *out = nullptr;
    try {
        ojson spec = parse_json(spec_json, "job spec");
        if (!spec.contains("schema") || spec.at("schema").get<std::string>() != kSchemaTag)
            fail(errc::parse_error, "job spec missing schema \"sectoria/1\"");
        *out = new sectoria_job{std::move(spec), {}};
        return SECTORIA_OK;
    } catch (const error& e) {
        t_last_error = e.what();
        return classify(e);
    } catch (const std::exception& e) {
        t_last_error = e.what();
        return SECTORIA_E_NUMERIC;
    }
}

void sectoria_job_destroy(sectoria_job* job) { delete job; }

sectoria_status sectoria_job_set_seed(sectoria_job* job, unsigned long long seed) {
    t_last_error.clear();
    if (!job) {
        t_last_error = "null argument";
        return SECTORIA_E_PARSE;
    }
    job->spec["seed"] = static_cast<std::uint64_t>(seed);
    return SECTORIA_OK;
}

sectoria_status sectoria_job_run(sectoria_job* job, const char* command, char** result_json) {
    t_last_error.clear();
    if (!job || !command) {
        t_last_error = "null argument";
        return SECTORIA_E_PARSE;
    }
    try {
        ojson out;
        sectoria_status st = run_impl(job, command, out);
        if (result_json) *result_json = dup_string(out.dump(2) + "\n");
        return st;
    } catch (const error& e) {
        t_last_error = e.what();
        return classify(e);
    } catch (const std::exception& e) {
        t_last_error = e.what();
        return SECTORIA_E_NUMERIC;
    }
}

sectoria_status sectoria_job_artifact(sectoria_job* job, const char* name, char** out) {
    t_last_error.clear();
    if (!job || !name || !out) {
        t_last_error = "null argument";
        return SECTORIA_E_PARSE;
    }
    auto it = job->artifacts.find(name);
    if (it == job->artifacts.end()) {
        t_last_error = std::string("no artifact named ") + name;
        return SECTORIA_E_PARSE;
    }
    *out = dup_string(it->second);
    return SECTORIA_OK;
}

const char* sectoria_last_error(void) { return t_last_error.c_str(); }

void sectoria_string_free(char* s) { std::free(s); }

const char* sectoria_version(void) { return "sectoria 1.0.0 (schema sectoria/1)"; }

} // extern "C"
