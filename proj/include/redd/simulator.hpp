#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "redd/distributions.hpp"
#include "redd/model.hpp"

namespace redd {

struct RunConfig {
    int K = 1;
    int d = 1;
    double lambda = 0.5;
    std::uint64_t slots = 1000000;
    std::uint64_t burn_in = 100000;
    std::uint64_t seed = 1;
    int stride = 100;  // series thinning
    ServiceSpec spec;

    void validate() const;
};

enum class Verdict { Stable, Unstable, Inconclusive };
const char* to_string(Verdict v);

struct Trace {
    int K = 0;
    int d = 0;
    double lambda = 0.0;
    std::uint64_t slots = 0;
    std::uint64_t burn_in = 0;
    std::uint64_t seed = 0;
    int stride = 1;

    double mean_total_workload = 0.0;  // over slots > burn_in
    double max_total_workload = 0.0;
    std::vector<double> per_server_mean;
    std::uint64_t jobs = 0;      // arrivals over the whole run
    double mean_sojourn = 0.0;   // over arrivals with slot > burn_in

    std::vector<double> series;  // total workload at slots stride, 2*stride, ...
    std::string rng_name;
};

// Simulates cfg.slots slots from the empty state; Bernoulli(lambda) arrivals,
// uniform d-subsets, services from the spec. Deterministic given the seed.
// Asserts the balance property every slot.
Trace run(const RunConfig& cfg);

// Least-squares slope (work units per slot) of the trailing window of the
// post-burn-in series.
double trailing_slope(const Trace& trace, double window_fraction = 0.5);

// slope < tol: stable; slope > 10*tol: unstable; else inconclusive.
Verdict stability_verdict(const Trace& trace, double window_fraction = 0.5, double slope_tol = 0.01);

struct SweepRow {
    int d = 0;
    double lambda = 0.0;
    double mean_workload = 0.0;
    double slope = 0.0;
    Verdict verdict = Verdict::Inconclusive;
    std::uint64_t slots = 0;
    std::uint64_t seed = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows;  // d-major, lambda-minor, deterministic order
    std::uint64_t base_seed = 0;
};

// One run per (d, lambda) cell; per-cell seeds derived via cell_seed().
// Row order and content are independent of the worker count.
SweepResult sweep(const RunConfig& base, std::span<const int> ds, std::span<const double> lambdas,
                  int parallelism);

struct DriftEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t samples = 0;
};

// Monte-Carlo estimate of E[L(W(1)) - L(W(0)) | W(0) = state] with the
// quadratic Lyapunov function L(w) = sum w_i^2.
DriftEstimate drift_estimate(const WorkloadState& state, double lambda, const ServiceSpec& spec,
                             int d, std::uint64_t samples, std::uint64_t seed);

// Perturbs the recursion state after a step; test fixture for the validator.
using StepMutator = std::function<void(std::uint64_t slot, std::vector<std::int64_t>& w)>;

struct EquivalenceOptions {
    int oracle_cap = 6;
    std::uint64_t max_slots = 10000000;
    StepMutator mutator;  // empty in normal use
};

struct EquivalenceReport {
    bool passed = false;
    std::uint64_t slots_checked = 0;
    std::uint64_t jobs_checked = 0;
    std::uint64_t first_divergence_slot = 0;
    std::string divergence;  // empty when passed
};

// Co-simulates the workload recursion and the task-level oracle on identical
// input streams; checks drain times, departure slots, completing servers and
// balance every slot. Divergence is a report, not an exception.
EquivalenceReport validate_equivalence(const RunConfig& cfg, const EquivalenceOptions& opts = {});

struct ArrivalStatsReport {
    std::uint64_t arrivals = 0;
    std::uint64_t classified = 0;  // arrivals with an unambiguous top-d set
    std::vector<double> p_m;       // expected overlap probabilities
    std::vector<std::uint64_t> counts;
    std::vector<double> z;         // per-m z-scores
    bool omega_passed = false;

    std::vector<double> rank_mean_work;  // mean incoming work by workload rank (ascending)
    std::vector<double> rank_diff_mean;  // adjacent-rank differences
    std::vector<double> rank_diff_se;
    bool rank_passed = false;
};

// Runs the chain until `arrivals` arrivals and checks (a) overlap-event
// frequencies against P_m and (b) monotone per-rank incoming work, both at 3
// standard errors.
ArrivalStatsReport arrival_stats(const RunConfig& cfg, std::uint64_t arrivals);

}  // namespace redd
