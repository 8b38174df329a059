#include "redd/validation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "redd/bounds.hpp"
#include "redd/errors.hpp"
#include "redd/rng.hpp"
#include "redd/simulator.hpp"

namespace redd {

namespace {

constexpr int kOracleCap = 6;
constexpr std::uint64_t kEquivalenceSlots = 20000;
constexpr std::uint64_t kStatArrivals = 100000;
constexpr std::uint64_t kDriftSamples = 10000;
constexpr int kDriftStates = 20;

double lambda_lb_of(const ServiceSpec& spec, int K, int d) {
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(d));
    for (int j = 1; j <= d; ++j) g.push_back(spec.min_moment(j));
    return lambda_lb(K, d, g);
}

}  // namespace

ValidationOutcome run_validation(const ConfigFile& cfg, bool inject_step_fault) {
    if (!cfg.service.samplable())
        throw CapabilityError("validation needs a samplable service law (moment profiles carry no law)");

    ValidationOutcome out;
    std::ostringstream rep;
    const int d0 = cfg.system.ds.front();
    const double cfg_lambda = cfg.system.lambdas.empty() ? 0.5 : cfg.system.lambdas.front();

    auto fail = [&](const std::string& what) {
        out.passed = false;
        out.first_failure = what;
        rep << "FAIL " << what << "\n";
        out.report = rep.str();
    };

    // 1. recursion vs task-level oracle on a small-K family. Lambda is pulled
    //    inside the per-pair stability region so the co-simulation stays in a
    //    recurrent regime.
    const int k_hi = std::min(cfg.system.K, kOracleCap);
    const int k_lo = std::min(2, k_hi);
    for (int K = k_lo; K <= k_hi; ++K) {
        for (int d = 1; d <= K; ++d) {
            RunConfig rc;
            rc.K = K;
            rc.d = d;
            rc.lambda = std::min(cfg_lambda, 0.7 * std::min(lambda_lb_of(cfg.service, K, d), 1.0));
            rc.slots = std::min<std::uint64_t>(cfg.simulation.slots, kEquivalenceSlots);
            rc.burn_in = 0;
            rc.seed = splitmix64(cfg.simulation.seed ^ (static_cast<std::uint64_t>(K) << 8) ^
                                 static_cast<std::uint64_t>(d));
            rc.stride = 1;
            rc.spec = cfg.service;
            if (cfg.service.kind() == SpecKind::JointFinite && cfg.service.joint_K() != K)
                continue;  // joint laws are tied to one K; the configured-K leg below covers them

            EquivalenceOptions opts;
            if (inject_step_fault && K == k_lo && d == 1) {
                opts.mutator = [](std::uint64_t slot, std::vector<std::int64_t>& w) {
                    if (slot == 1000) w[0] += 1;
                };
            }
            const auto eq = validate_equivalence(rc, opts);
            if (!eq.passed) {
                fail("equivalence K=" + std::to_string(K) + " d=" + std::to_string(d) + ": " + eq.divergence);
                return out;
            }
            rep << "ok equivalence K=" << K << " d=" << d << " (" << eq.slots_checked << " slots, "
                << eq.jobs_checked << " departures)\n";
        }
    }

    // 2. balance invariant at the configured K (run() throws on violation)
    {
        RunConfig rc = cfg.run_config(d0, std::min(cfg_lambda, 0.95));
        rc.slots = std::min<std::uint64_t>(rc.slots, 1000000);
        rc.burn_in = 0;
        try {
            run(rc);
        } catch (const std::logic_error& e) {
            fail(std::string("balance: ") + e.what());
            return out;
        }
        rep << "ok balance K=" << rc.K << " d=" << rc.d << " (" << rc.slots << " slots)\n";
    }

    // 3. overlap frequencies vs P_m and monotone rank work
    {
        RunConfig rc = cfg.run_config(d0, std::min(cfg_lambda, 0.95));
        const auto stats = arrival_stats(rc, kStatArrivals);
        if (!stats.omega_passed) {
            std::ostringstream o;
            o << "overlap frequency: z = [";
            for (std::size_t m = 0; m < stats.z.size(); ++m) o << (m ? ", " : "") << stats.z[m];
            o << "] exceeds 3 sigma over " << stats.classified << " classified arrivals";
            fail(o.str());
            return out;
        }
        rep << "ok overlap frequency (" << stats.classified << "/" << stats.arrivals
            << " classified arrivals)\n";
        if (!stats.rank_passed) {
            fail("rank work: mean incoming work increases with workload rank beyond 3 sigma");
            return out;
        }
        rep << "ok rank work monotone (" << stats.arrivals << " arrivals)\n";
    }

    // 4. drift negativity below lambda_lb at far-out balanced states
    {
        const double lb = lambda_lb_of(cfg.service, cfg.system.K, d0);
        const double lam = std::min(0.95 * std::min(lb, 1.0), 0.99);
        const std::int64_t bmax = cfg.service.max_value();
        Rng rng(splitmix64(cfg.simulation.seed ^ 0xD1F7ull));
        for (int s = 0; s < kDriftStates; ++s) {
            // random ordered state: gaps in [0, bmax] with the last d-1 zero
            // (balance), one gap stretched so the max reaches 10*bmax, and an
            // occasional uniform lift of the whole vector
            const int K = cfg.system.K;
            std::vector<std::int64_t> gaps(static_cast<std::size_t>(K - 1), 0);
            std::int64_t total = 0;
            for (int q = 0; q < K - d0; ++q) {
                gaps[static_cast<std::size_t>(q)] =
                    static_cast<std::int64_t>(uniform_below(rng, static_cast<std::uint64_t>(bmax) + 1));
                total += gaps[static_cast<std::size_t>(q)];
            }
            if (K - d0 > 0 && total < 10 * bmax) {
                const int q = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(K - d0)));
                gaps[static_cast<std::size_t>(q)] += 10 * bmax - total;
            }
            std::int64_t lift = 0;
            if (K - d0 == 0 || bernoulli(rng, 0.5))
                lift = 10 * bmax + static_cast<std::int64_t>(uniform_below(rng, static_cast<std::uint64_t>(bmax)));
            WorkloadState st = WorkloadState::empty(K);
            st.w[0] = lift;
            for (int i = 1; i < K; ++i)
                st.w[static_cast<std::size_t>(i)] = st.w[static_cast<std::size_t>(i - 1)] + gaps[static_cast<std::size_t>(i - 1)];
            const auto est = drift_estimate(st, lam, cfg.service, d0, kDriftSamples,
                                            splitmix64(cfg.simulation.seed ^ static_cast<std::uint64_t>(s)));
            if (!(est.mean + 3.0 * est.std_error < 0.0)) {
                std::ostringstream o;
                o << "drift: state " << s << " has mean " << est.mean << " +- " << est.std_error
                  << " at lambda " << lam << " (expected negative with 3 sigma separation)";
                fail(o.str());
                return out;
            }
        }
        rep << "ok drift negative at lambda=" << lam << " (" << kDriftStates << " states, "
            << kDriftSamples << " samples each)\n";
    }

    rep << "all checks passed\n";
    out.passed = true;
    out.report = rep.str();
    return out;
}

}  // namespace redd
