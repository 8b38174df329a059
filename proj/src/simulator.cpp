#include "redd/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "redd/bounds.hpp"
#include "redd/errors.hpp"
#include "redd/rng.hpp"

namespace redd {

void RunConfig::validate() const {
    if (K < 1) throw ConfigError("K must be >= 1");
    if (d < 1 || d > K) throw ConfigError("need 1 <= d <= K");
    if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigError("need 0 < lambda < 1");
    if (slots < 1) throw ConfigError("slots must be >= 1");
    if (burn_in >= slots) throw ConfigError("burn_in must be < slots");
    if (stride < 1) throw ConfigError("stride must be >= 1");
    if (spec.kind() == SpecKind::JointFinite && spec.joint_K() != K)
        throw ConfigError("joint_finite law dimension must equal K");
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Stable: return "stable";
        case Verdict::Unstable: return "unstable";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

namespace {

// Per-slot draw shared by run(), validate_equivalence() and arrival_stats():
// one u01 for the arrival flag; on arrival d bounded draws for the subset,
// then services in ascending routed order (iid: one draw per routed server;
// identical/joint: a single draw).
struct SlotDraw {
    std::vector<int> subset_scratch;
    std::vector<int> g;                  // sorted routed servers
    std::vector<std::int64_t> b_routed;  // aligned with g
    std::int64_t shared_value = 0;       // identical_replicas draw
    std::vector<std::int64_t> atom;      // joint_finite draw (full K)

    bool draw(Rng& rng, const RunConfig& cfg) {
        if (!bernoulli(rng, cfg.lambda)) return false;
        draw_subset(rng, cfg.K, cfg.d, subset_scratch, g);
        b_routed.resize(g.size());
        switch (cfg.spec.kind()) {
            case SpecKind::IidFinite:
                for (std::size_t k = 0; k < g.size(); ++k) b_routed[k] = cfg.spec.sample_scalar(rng);
                break;
            case SpecKind::IdenticalReplicas:
                shared_value = cfg.spec.sample_scalar(rng);
                std::fill(b_routed.begin(), b_routed.end(), shared_value);
                break;
            case SpecKind::JointFinite: {
                cfg.spec.sample_vector(rng, cfg.K, atom);
                for (std::size_t k = 0; k < g.size(); ++k)
                    b_routed[k] = atom[static_cast<std::size_t>(g[k])];
                break;
            }
            case SpecKind::MomentProfile:
                throw CapabilityError("moment profile is not samplable");
        }
        return true;
    }

    // Full-vector services for SlotInput consumers; non-routed entries are a
    // placeholder (never read by the model; 1 keeps the input valid).
    std::vector<std::int64_t> full_services(const RunConfig& cfg) const {
        switch (cfg.spec.kind()) {
            case SpecKind::IdenticalReplicas:
                return std::vector<std::int64_t>(static_cast<std::size_t>(cfg.K), shared_value);
            case SpecKind::JointFinite:
                return atom;
            default: {
                std::vector<std::int64_t> b(static_cast<std::size_t>(cfg.K), 1);
                for (std::size_t k = 0; k < g.size(); ++k) b[static_cast<std::size_t>(g[k])] = b_routed[k];
                return b;
            }
        }
    }
};

std::int64_t max_count_check(std::span<const std::int64_t> w, int d, std::uint64_t slot) {
    std::int64_t mx = w[0];
    for (auto v : w) mx = std::max(mx, v);
    int at_max = 0;
    for (auto v : w)
        if (v == mx) ++at_max;
    if (at_max < d)
        throw std::logic_error("balance property violated at slot " + std::to_string(slot));
    return mx;
}

}  // namespace

Trace run(const RunConfig& cfg) {
    cfg.validate();
    if (!cfg.spec.samplable()) throw CapabilityError("simulation needs a samplable service law");

    Trace tr;
    tr.K = cfg.K;
    tr.d = cfg.d;
    tr.lambda = cfg.lambda;
    tr.slots = cfg.slots;
    tr.burn_in = cfg.burn_in;
    tr.seed = cfg.seed;
    tr.stride = cfg.stride;
    tr.rng_name = kRngName;
    tr.per_server_mean.assign(static_cast<std::size_t>(cfg.K), 0.0);
    tr.series.reserve(static_cast<std::size_t>(cfg.slots / static_cast<std::uint64_t>(cfg.stride)) + 1);

    Rng rng(cfg.seed);
    SlotDraw draw;
    std::vector<std::int64_t> w(static_cast<std::size_t>(cfg.K), 0);

    double mean_acc = 0.0;
    double sojourn_acc = 0.0;
    std::uint64_t sojourn_n = 0;
    std::uint64_t stat_slots = 0;

    for (std::uint64_t slot = 1; slot <= cfg.slots; ++slot) {
        const bool arrival = draw.draw(rng, cfg);
        if (arrival) {
            ++tr.jobs;
            if (slot > cfg.burn_in) {
                std::int64_t m = w[static_cast<std::size_t>(draw.g[0])] + draw.b_routed[0];
                for (std::size_t k = 1; k < draw.g.size(); ++k)
                    m = std::min(m, w[static_cast<std::size_t>(draw.g[k])] + draw.b_routed[k]);
                sojourn_acc += static_cast<double>(m);
                ++sojourn_n;
            }
            apply_slot(w, true, draw.g, draw.b_routed);
        } else {
            apply_slot(w, false, {}, {});
        }

        max_count_check(w, cfg.d, slot);

        std::int64_t total = 0;
        for (auto v : w) total += v;
        if (slot > cfg.burn_in) {
            ++stat_slots;
            mean_acc += static_cast<double>(total);
            tr.max_total_workload = std::max(tr.max_total_workload, static_cast<double>(total));
            for (int i = 0; i < cfg.K; ++i)
                tr.per_server_mean[static_cast<std::size_t>(i)] += static_cast<double>(w[static_cast<std::size_t>(i)]);
        }
        if (slot % static_cast<std::uint64_t>(cfg.stride) == 0)
            tr.series.push_back(static_cast<double>(total));
    }

    if (stat_slots > 0) {
        tr.mean_total_workload = mean_acc / static_cast<double>(stat_slots);
        for (auto& v : tr.per_server_mean) v /= static_cast<double>(stat_slots);
    }
    if (sojourn_n > 0) tr.mean_sojourn = sojourn_acc / static_cast<double>(sojourn_n);
    return tr;
}

double trailing_slope(const Trace& trace, double window_fraction) {
    if (!(window_fraction > 0.0 && window_fraction <= 1.0))
        throw std::invalid_argument("window_fraction must be in (0, 1]");
    // series index i corresponds to slot (i+1)*stride
    const std::uint64_t stride = static_cast<std::uint64_t>(trace.stride);
    std::size_t first = 0;
    if (trace.burn_in > 0) first = static_cast<std::size_t>(trace.burn_in / stride);
    if (first >= trace.series.size()) throw std::invalid_argument("window too short: no post-burn-in series points");
    const std::size_t avail = trace.series.size() - first;
    const std::size_t n = std::max<std::size_t>(static_cast<std::size_t>(std::ceil(window_fraction * static_cast<double>(avail))), 1);
    const std::size_t begin = trace.series.size() - n;
    if (n < 10) throw std::invalid_argument("window too short: need >= 10 points, have " + std::to_string(n));

    // least squares on (slot, total workload)
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = begin; i < trace.series.size(); ++i) {
        const double x = static_cast<double>((i + 1) * stride);
        const double y = trace.series[i];
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double nn = static_cast<double>(n);
    const double den = nn * sxx - sx * sx;
    if (den == 0.0) return 0.0;
    return (nn * sxy - sx * sy) / den;
}

Verdict stability_verdict(const Trace& trace, double window_fraction, double slope_tol) {
    if (!(slope_tol > 0.0)) throw std::invalid_argument("slope_tol must be positive");
    const double slope = trailing_slope(trace, window_fraction);
    if (slope < slope_tol) return Verdict::Stable;
    if (slope > 10.0 * slope_tol) return Verdict::Unstable;
    return Verdict::Inconclusive;
}

SweepResult sweep(const RunConfig& base, std::span<const int> ds, std::span<const double> lambdas,
                  int parallelism) {
    if (ds.empty()) throw ConfigError("sweep needs a non-empty d list");
    if (lambdas.empty()) throw ConfigError("sweep needs a non-empty lambda list");
    if (parallelism < 1) throw ConfigError("parallelism must be >= 1");

    const std::size_t cells = ds.size() * lambdas.size();
    SweepResult res;
    res.base_seed = base.seed;
    res.rows.resize(cells);

    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t cell = next.fetch_add(1);
            if (cell >= cells) break;
            const std::size_t di = cell / lambdas.size();
            const std::size_t li = cell % lambdas.size();
            RunConfig cfg = base;
            cfg.d = ds[di];
            cfg.lambda = lambdas[li];
            cfg.seed = cell_seed(base.seed, di, li);
            cfg.validate();
            const Trace tr = run(cfg);
            SweepRow row;
            row.d = cfg.d;
            row.lambda = cfg.lambda;
            row.mean_workload = tr.mean_total_workload;
            row.slope = trailing_slope(tr);
            row.verdict = stability_verdict(tr);
            row.slots = cfg.slots;
            row.seed = cfg.seed;
            res.rows[cell] = row;
        }
    };

    const int workers = std::max(1, std::min<int>(parallelism, static_cast<int>(cells)));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    return res;
}

DriftEstimate drift_estimate(const WorkloadState& state, double lambda, const ServiceSpec& spec,
                             int d, std::uint64_t samples, std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("samples must be >= 1");
    const int K = state.K();
    if (d < 1 || d > K) throw std::invalid_argument("need 1 <= d <= K");
    if (!(lambda >= 0.0 && lambda < 1.0)) throw std::invalid_argument("need 0 <= lambda < 1");

    RunConfig cfg;  // carries (K, d, lambda, spec) for the slot draw
    cfg.K = K;
    cfg.d = d;
    cfg.lambda = lambda;
    cfg.spec = spec;

    double l0 = 0.0;
    for (auto v : state.w) l0 += static_cast<double>(v) * static_cast<double>(v);

    Rng rng(seed);
    SlotDraw draw;
    std::vector<std::int64_t> w;
    double sum = 0.0, sumsq = 0.0;
    for (std::uint64_t n = 0; n < samples; ++n) {
        w = state.w;
        const bool arrival = draw.draw(rng, cfg);
        if (arrival)
            apply_slot(w, true, draw.g, draw.b_routed);
        else
            apply_slot(w, false, {}, {});
        double l1 = 0.0;
        for (auto v : w) l1 += static_cast<double>(v) * static_cast<double>(v);
        const double x = l1 - l0;
        sum += x;
        sumsq += x * x;
    }
    const double n = static_cast<double>(samples);
    const double mean = sum / n;
    const double var = std::max(0.0, sumsq / n - mean * mean);
    return DriftEstimate{mean, samples > 1 ? std::sqrt(var / (n - 1.0)) : 0.0, samples};
}

EquivalenceReport validate_equivalence(const RunConfig& cfg, const EquivalenceOptions& opts) {
    cfg.validate();
    if (cfg.K > opts.oracle_cap)
        throw std::invalid_argument("equivalence check capped at K <= " + std::to_string(opts.oracle_cap));
    if (cfg.slots > opts.max_slots)
        throw std::invalid_argument("equivalence check capped at " + std::to_string(opts.max_slots) + " slots");
    if (!cfg.spec.samplable()) throw CapabilityError("equivalence check needs a samplable service law");

    EquivalenceReport rep;
    Rng rng(cfg.seed);
    SlotDraw draw;
    WorkloadState state = WorkloadState::empty(cfg.K);
    OracleState oracle = OracleState::empty(cfg.K);
    DrainScratch scratch;
    std::vector<std::int64_t> drains;
    std::vector<Departure> predicted;  // indexed by job id

    auto fail = [&](std::uint64_t slot, std::string what) {
        rep.passed = false;
        rep.first_divergence_slot = slot;
        rep.divergence = std::move(what);
    };

    for (std::uint64_t slot = 1; slot <= cfg.slots; ++slot) {
        const bool arrival = draw.draw(rng, cfg);
        SlotInput input;
        if (arrival) {
            input = SlotInput::job(RoutingDraw{draw.g}, draw.full_services(cfg));
            predicted.push_back(departure(state, *input.routing, *input.services));
        }

        state = step(std::move(state), input);
        if (opts.mutator) opts.mutator(slot, state.w);

        std::vector<std::uint64_t> departed;
        std::tie(oracle, departed) = oracle_step(std::move(oracle), input);

        for (const auto id : departed) {
            const auto& job = oracle.jobs.at(id);
            const auto& pred = predicted[static_cast<std::size_t>(id)];
            if (static_cast<std::uint64_t>(job.departure_slot) != pred.slot) {
                fail(slot, "job " + std::to_string(id) + " departed at slot " +
                               std::to_string(job.departure_slot) + ", recursion predicted " +
                               std::to_string(pred.slot));
                return rep;
            }
            if (job.completing_server != pred.server) {
                fail(slot, "job " + std::to_string(id) + " completed at server " +
                               std::to_string(job.completing_server) + ", recursion predicted " +
                               std::to_string(pred.server));
                return rep;
            }
            ++rep.jobs_checked;
        }

        oracle_drain_times(oracle, scratch, drains);
        if (drains != state.w) {
            std::string what = "workload vectors diverged at slot " + std::to_string(slot) + ": oracle (";
            for (std::size_t i = 0; i < drains.size(); ++i)
                what += (i ? "," : "") + std::to_string(drains[i]);
            what += ") vs recursion (";
            for (std::size_t i = 0; i < state.w.size(); ++i)
                what += (i ? "," : "") + std::to_string(state.w[i]);
            what += ")";
            fail(slot, std::move(what));
            return rep;
        }
        if (!balance_check(state, cfg.d)) {
            fail(slot, "balance property violated at slot " + std::to_string(slot));
            return rep;
        }
        ++rep.slots_checked;
    }
    rep.passed = true;
    return rep;
}

ArrivalStatsReport arrival_stats(const RunConfig& cfg, std::uint64_t arrivals) {
    cfg.validate();
    if (arrivals < 1) throw std::invalid_argument("arrivals must be >= 1");

    ArrivalStatsReport rep;
    {
        const auto pm = overlap_probs(cfg.K, cfg.d);
        rep.p_m.reserve(pm.size());
        for (const auto& r : pm) rep.p_m.push_back(r.to_double());
    }
    rep.counts.assign(static_cast<std::size_t>(cfg.d) + 1, 0);

    Rng rng(cfg.seed);
    SlotDraw draw;
    std::vector<std::int64_t> w(static_cast<std::size_t>(cfg.K), 0);
    std::vector<int> order(static_cast<std::size_t>(cfg.K));
    const std::size_t pairs = static_cast<std::size_t>(cfg.K) - 1;
    std::vector<double> rank_sum(static_cast<std::size_t>(cfg.K), 0.0);
    std::vector<double> diff_sum(pairs, 0.0), diff_sumsq(pairs, 0.0);
    std::vector<double> a_rank(static_cast<std::size_t>(cfg.K));

    std::uint64_t seen = 0;
    std::uint64_t slot = 0;
    while (seen < arrivals) {
        ++slot;
        const bool arrival = draw.draw(rng, cfg);
        if (!arrival) {
            apply_slot(w, false, {}, {});
            continue;
        }
        ++seen;

        // overlap classification against the current top-d set (skip when the
        // max is shared by more than d servers: the top-d set is ambiguous)
        std::int64_t mx = w[0];
        for (auto v : w) mx = std::max(mx, v);
        int ties = 0;
        for (auto v : w)
            if (v == mx) ++ties;
        if (ties == cfg.d) {
            int m = 0;
            for (int s : draw.g)
                if (w[static_cast<std::size_t>(s)] == mx) ++m;
            ++rep.counts[static_cast<std::size_t>(m)];
            ++rep.classified;
        }

        // incoming work by workload rank (ascending, ties by index)
        std::int64_t fin = w[static_cast<std::size_t>(draw.g[0])] + draw.b_routed[0];
        for (std::size_t k = 1; k < draw.g.size(); ++k)
            fin = std::min(fin, w[static_cast<std::size_t>(draw.g[k])] + draw.b_routed[k]);
        for (int i = 0; i < cfg.K; ++i) order[static_cast<std::size_t>(i)] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](int x, int y) { return w[static_cast<std::size_t>(x)] < w[static_cast<std::size_t>(y)]; });
        for (int r = 0; r < cfg.K; ++r) {
            const int srv = order[static_cast<std::size_t>(r)];
            double a = 0.0;
            if (std::binary_search(draw.g.begin(), draw.g.end(), srv))
                a = static_cast<double>(std::max<std::int64_t>(fin - w[static_cast<std::size_t>(srv)], 0));
            a_rank[static_cast<std::size_t>(r)] = a;
            rank_sum[static_cast<std::size_t>(r)] += a;
        }
        for (std::size_t r = 0; r + 1 < static_cast<std::size_t>(cfg.K); ++r) {
            const double x = a_rank[r] - a_rank[r + 1];
            diff_sum[r] += x;
            diff_sumsq[r] += x * x;
        }

        apply_slot(w, true, draw.g, draw.b_routed);
        max_count_check(w, cfg.d, slot);
    }
    rep.arrivals = seen;

    rep.omega_passed = true;
    rep.z.assign(rep.counts.size(), 0.0);
    const double n = static_cast<double>(rep.classified);
    for (std::size_t m = 0; m < rep.counts.size(); ++m) {
        const double p = rep.p_m[m];
        const double c = static_cast<double>(rep.counts[m]);
        if (p <= 0.0 || p >= 1.0) {
            const double expected = p * n;
            rep.z[m] = (c == expected) ? 0.0 : std::numeric_limits<double>::infinity();
        } else {
            rep.z[m] = (c - n * p) / std::sqrt(n * p * (1.0 - p));
        }
        if (std::abs(rep.z[m]) > 3.0) rep.omega_passed = false;
    }

    rep.rank_passed = true;
    const double na = static_cast<double>(seen);
    rep.rank_mean_work.assign(static_cast<std::size_t>(cfg.K), 0.0);
    for (int r = 0; r < cfg.K; ++r)
        rep.rank_mean_work[static_cast<std::size_t>(r)] = rank_sum[static_cast<std::size_t>(r)] / na;
    rep.rank_diff_mean.assign(pairs, 0.0);
    rep.rank_diff_se.assign(pairs, 0.0);
    for (std::size_t r = 0; r < pairs; ++r) {
        const double mean = diff_sum[r] / na;
        const double var = std::max(0.0, diff_sumsq[r] / na - mean * mean);
        const double se = seen > 1 ? std::sqrt(var / (na - 1.0)) : 0.0;
        rep.rank_diff_mean[r] = mean;
        rep.rank_diff_se[r] = se;
        if (mean < -3.0 * se - 1e-12) rep.rank_passed = false;
    }
    return rep;
}

}  // namespace redd
