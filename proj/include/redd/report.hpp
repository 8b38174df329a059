#pragma once

#include <string>

#include "redd/bounds.hpp"
#include "redd/config.hpp"
#include "redd/simulator.hpp"

namespace redd {

// Comment line carried at the top of every output file: tool version, seed,
// RNG algorithm, cell-seed derivation.
std::string metadata_line(std::uint64_t seed);

// Structured key/value report for one (K, d).
std::string bounds_report_json(const BoundReport& rep, const ServiceSpec& spec, std::uint64_t seed);

// bounds.csv: header `d,lambda_lb,known_bound,best_bound`, one row per d.
std::string bounds_csv(const ConfigFile& cfg);

std::string trace_json(const Trace& trace, Verdict verdict);

// trace.csv: header `slot,total_workload`, thinned series.
std::string trace_series_csv(const Trace& trace);

// sweep.csv: header `d,lambda,mean_workload,slope,verdict,slots,seed`.
std::string sweep_csv(const SweepResult& result);

}  // namespace redd
