#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "redd/distributions.hpp"
#include "redd/rational.hpp"

namespace redd {

// P_m: probability that a uniform d-subset hits exactly m of the d
// largest-workload servers. Exact rational.
Rational overlap_prob(int K, int d, int m);
std::vector<Rational> overlap_probs(int K, int d);  // m = 0..d

// Closed-form stability lower bound. g[j-1] = E[min of j coordinates],
// j = 1..d. Empty-sum convention applies at m = d.
double lambda_lb(int K, int d, std::span<const double> g);
double lambda_lb_denominator(int K, int d, std::span<const double> g);

// d = 2 specialization: K / ((1-P2) m1 + (1+P2) m2).
double lambda_lb_d2(int K, double m1, double m2);

// Previously known bound 1/E[min of d coordinates].
double known_bound(double g_d);

// Gaps between consecutive ordered workloads; last d-1 entries zero by the
// balance property.
struct GapVector {
    std::vector<std::int64_t> delta;  // K-1 entries

    static GapVector zeros(int K);
    void validate(int K, int d) const;
    // c[i] = ordered workload level i relative to the smallest; c[0] = 0.
    std::vector<std::int64_t> cumulative() const;
};

enum class Method { Exact, MonteCarlo };
const char* method_name(Method m);

struct WorkEstimate {
    double value = 0.0;
    double std_error = 0.0;  // 0 for exact
    std::uint64_t samples = 0;
};

struct ExpectationOptions {
    std::uint64_t mc_samples = 100000;
    std::uint64_t seed = 1;
    std::uint64_t atom_cap = (1u << 22);
    std::uint64_t subset_cap = 2000000;
};

// Expected total incoming work per arrival at the ordered state described by
// delta: sum_i E[1_i * min_{j in G} [B_j + delta_{i,j}]^+]. Exact mode
// enumerates routing subsets with survival-sum / atom kernels; MC mode
// averages over sampled (G, B) pairs and reports a standard error.
WorkEstimate expected_incoming_work(const GapVector& delta, const ServiceSpec& spec, int K, int d,
                                    Method method, const ExpectationOptions& opts = {});

struct LambdaMOptions {
    std::uint64_t grid_cell_cap = 1000000;
    std::uint64_t mc_samples = 100000;
    std::uint64_t seed = 1;
    int parallelism = 1;
    std::uint64_t atom_cap = (1u << 22);
    std::uint64_t subset_cap = 2000000;
};

struct LambdaMResult {
    double value = 0.0;       // K / max expected incoming work over the gap grid
    GapVector argmax_delta;   // maximizer of the expected work
    Method method = Method::Exact;
    double std_error = 0.0;   // of the work estimate at the maximizer (MC)
    std::uint64_t grid_cells = 0;
};

// Grid search for the optimization-based bound. The per-coordinate grid cap
// at B_max is lossless for finite supports (saturation), and the grid is a
// superset of the reachable gap set, so the result is a valid lower bound
// with lambda_lb <= value <= true lambda_m.
LambdaMResult lambda_m_search(const ServiceSpec& spec, int K, int d, Method method,
                              const LambdaMOptions& opts = {});

struct MonotoneFiReport {
    bool passed = false;
    std::vector<double> f;   // E[1_i * min ...] per server, state order
    std::vector<double> se;  // standard errors (zeros for exact)
};

// Checks f_1 >= ... >= f_K on an ordered (non-decreasing) workload state,
// exactly or within 3 standard errors for MC.
MonotoneFiReport monotone_fi_check(std::span<const std::int64_t> ordered_w, const ServiceSpec& spec,
                                   int d, Method method, std::uint64_t samples = 100000,
                                   std::uint64_t seed = 1);

struct LambdaMEstimate {
    double value = 0.0;
    std::vector<std::int64_t> delta;
    Method method = Method::Exact;
    double std_error = 0.0;
};

struct BoundReport {
    int K = 0;
    int d = 0;
    std::vector<Rational> p_m;      // m = 0..d, exact
    std::vector<double> p_m_double;
    double min_moment_d = 0.0;
    double lambda_lb = 0.0;
    double known_bound = 0.0;
    double best_bound = 0.0;
    bool time_scaling_ok = false;
    std::optional<LambdaMEstimate> lambda_m;
};

BoundReport make_bound_report(const ServiceSpec& spec, int K, int d, bool with_lambda_m = false,
                              Method method = Method::Exact, const LambdaMOptions& opts = {});

}  // namespace redd
