#include "redd/report.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "redd/rng.hpp"
#include "redd/version.hpp"

namespace redd {

namespace {

// >= 12 significant digits in CSV for cross-language diffing
std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

}  // namespace

std::string metadata_line(std::uint64_t seed) {
    std::ostringstream out;
    out << "# " << kToolName << " " << kVersion << " rng=" << kRngName << " seed=" << seed << " "
        << kSeedMixDoc;
    return out.str();
}

std::string bounds_report_json(const BoundReport& rep, const ServiceSpec& spec, std::uint64_t seed) {
    nlohmann::json j;
    j["tool"] = kToolName;
    j["version"] = kVersion;
    j["K"] = rep.K;
    j["d"] = rep.d;
    j["service_kind"] = spec.kind_name();
    j["time_scaling_ok"] = rep.time_scaling_ok;
    j["min_moment_d"] = rep.min_moment_d;
    j["p_m"] = rep.p_m_double;
    {
        std::vector<std::string> rat;
        rat.reserve(rep.p_m.size());
        for (const auto& r : rep.p_m) rat.push_back(r.str());
        j["p_m_rational"] = rat;
    }
    j["lambda_lb"] = rep.lambda_lb;
    j["known_bound"] = rep.known_bound;
    j["best_bound"] = rep.best_bound;
    if (rep.lambda_m) {
        nlohmann::json lm;
        lm["value"] = rep.lambda_m->value;
        lm["delta"] = rep.lambda_m->delta;
        lm["method"] = method_name(rep.lambda_m->method);
        if (rep.lambda_m->method == Method::MonteCarlo) {
            lm["std_error"] = rep.lambda_m->std_error;
            lm["rng"] = kRngName;
            lm["seed"] = seed;
        }
        j["lambda_m"] = lm;
    }
    return j.dump(2) + "\n";
}

std::string bounds_csv(const ConfigFile& cfg) {
    std::ostringstream out;
    out << metadata_line(cfg.simulation.seed) << "\n";
    out << "d,lambda_lb,known_bound,best_bound\n";
    for (const int d : cfg.system.ds) {
        const auto rep = make_bound_report(cfg.service, cfg.system.K, d);
        out << d << "," << num(rep.lambda_lb) << "," << num(rep.known_bound) << ","
            << num(rep.best_bound) << "\n";
    }
    return out.str();
}

std::string trace_json(const Trace& trace, Verdict verdict) {
    nlohmann::json j;
    j["tool"] = kToolName;
    j["version"] = kVersion;
    j["K"] = trace.K;
    j["d"] = trace.d;
    j["lambda"] = trace.lambda;
    j["slots"] = trace.slots;
    j["burn_in"] = trace.burn_in;
    j["seed"] = trace.seed;
    j["rng"] = trace.rng_name;
    j["stride"] = trace.stride;
    j["jobs"] = trace.jobs;
    j["mean_total_workload"] = trace.mean_total_workload;
    j["max_total_workload"] = trace.max_total_workload;
    j["per_server_mean"] = trace.per_server_mean;
    j["mean_sojourn"] = trace.mean_sojourn;
    j["verdict"] = to_string(verdict);
    return j.dump(2) + "\n";
}

std::string trace_series_csv(const Trace& trace) {
    std::ostringstream out;
    out << metadata_line(trace.seed) << "\n";
    out << "slot,total_workload\n";
    for (std::size_t i = 0; i < trace.series.size(); ++i) {
        out << (i + 1) * static_cast<std::uint64_t>(trace.stride) << "," << num(trace.series[i]) << "\n";
    }
    return out.str();
}

std::string sweep_csv(const SweepResult& result) {
    std::ostringstream out;
    out << metadata_line(result.base_seed) << "\n";
    out << "d,lambda,mean_workload,slope,verdict,slots,seed\n";
    for (const auto& r : result.rows) {
        out << r.d << "," << num(r.lambda) << "," << num(r.mean_workload) << "," << num(r.slope) << ","
            << to_string(r.verdict) << "," << r.slots << "," << r.seed << "\n";
    }
    return out.str();
}

}  // namespace redd
