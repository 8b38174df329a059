// Acceptance suite: every criterion prints one [PASS]/[FAIL] line; the exit
// code is the number of failures. Heavier criteria report their runtime.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "redd/bounds.hpp"
#include "redd/config.hpp"
#include "redd/report.hpp"
#include "redd/rng.hpp"
#include "redd/simulator.hpp"
#include "testutil.hpp"

using namespace redd;

namespace {

int g_failures = 0;

struct Criterion {
    std::string name;
    std::function<void(std::ostringstream&)> body;  // throws on failure
};

void require(bool cond, const std::string& what) {
    if (!cond) throw std::runtime_error(what);
}

void require_close(double got, double want, double tol, const std::string& what) {
    if (!(std::abs(got - want) <= tol * std::max(1.0, std::abs(want)))) {
        std::ostringstream o;
        o << what << ": got " << got << ", want " << want << " (rel tol " << tol << ")";
        throw std::runtime_error(o.str());
    }
}

void run_criterion(int index, const Criterion& c) {
    const auto t0 = std::chrono::steady_clock::now();
    std::ostringstream note;
    bool ok = true;
    std::string err;
    try {
        c.body(note);
    } catch (const std::exception& e) {
        ok = false;
        err = e.what();
    }
    const auto ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
    if (ok) {
        std::printf("[PASS] %2d. %s (%lld ms)%s%s\n", index, c.name.c_str(),
                    static_cast<long long>(ms), note.str().empty() ? "" : " ", note.str().c_str());
    } else {
        ++g_failures;
        std::printf("[FAIL] %2d. %s (%lld ms): %s\n", index, c.name.c_str(),
                    static_cast<long long>(ms), err.c_str());
    }
    std::fflush(stdout);
}

std::vector<double> min_moments(const ServiceSpec& spec, int d) {
    std::vector<double> g;
    for (int j = 1; j <= d; ++j) g.push_back(spec.min_moment(j));
    return g;
}

// ---- criteria -------------------------------------------------------------

void c1_exact_combinatorics(std::ostringstream&) {
    require(overlap_prob(3, 2, 0) == Rational(0), "P_0(3,2) != 0");
    require(overlap_prob(3, 2, 1) == Rational(2, 3), "P_1(3,2) != 2/3");
    require(overlap_prob(3, 2, 2) == Rational(1, 3), "P_2(3,2) != 1/3");
    require(overlap_prob(5, 2, 2) == Rational(1, 10), "P_2(5,2) != 0.1");
}

void c2_closed_form_consistency(std::ostringstream&) {
    Rng rng(2026);
    for (int trial = 0; trial < 100; ++trial) {
        const double a = 1.0 + static_cast<double>(uniform_below(rng, 60));
        const double b = a + 1.0 + static_cast<double>(uniform_below(rng, 200));
        const double p = 0.02 + 0.96 * uniform_u01(rng);
        const double q = 1.0 - p;
        const std::vector<double> g{a * p + b * q, a * (1.0 - q * q) + b * q * q};
        const double general = lambda_lb(3, 2, g);
        const double closed = 9.0 / (2.0 * a * p * (5.0 - 2.0 * p) + 2.0 * b * q * (3.0 - 2.0 * p));
        require(std::abs(general - closed) <= 1e-12 * closed, "Eq.(12) vs closed form");

        const int K = 2 + static_cast<int>(uniform_below(rng, 20));
        const double d2 = lambda_lb_d2(K, g[0], g[1]);
        require(std::abs(lambda_lb(K, 2, g) - d2) <= 1e-12 * d2, "Eq.(12) vs d=2 specialization");
    }
}

void c3_specialization_identities(std::ostringstream&) {
    const auto spec = testutil::two_point();

    // d = 1: K / E[B1], exactly
    const auto g1 = min_moments(spec, 1);
    require(lambda_lb(7, 1, g1) == 7.0 / spec.min_moment(1), "lambda_lb(d=1) != K/E[B1]");

    // d = K: 1 / E[min_K]
    const auto gK = min_moments(spec, 10);
    require_close(lambda_lb(10, 10, gK), 1.0 / spec.min_moment(10), 1e-12, "lambda_lb(d=K)");

    // lambda_m(K=2, d=2): exactly the known bound
    const auto lm = lambda_m_search(spec, 2, 2, Method::Exact);
    require(lm.value == 1.0 / spec.min_moment(2), "lambda_m(K=2,d=2) != 1/E[min_2] exactly");
}

void c4_bound_crossing(std::ostringstream&) {
    const double m2 = 5.0, m1 = 20.0;  // E[B1] = 4 E[B1^B2]
    require(lambda_lb_d2(5, m1, m2) > known_bound(m2), "K=5: lambda_lb should beat the known bound");
    require(lambda_lb_d2(3, m1, m2) < known_bound(m2), "K=3: known bound should beat lambda_lb");
}

void c5_oracle_equivalence(std::ostringstream& note) {
    const auto laws = {testutil::two_point(),
                       ServiceSpec::identical_replicas({{2, 0.5}, {5, 0.5}})};
    std::uint64_t slots_total = 0, jobs_total = 0;
    for (const auto& law : laws) {
        for (int K = 2; K <= 5; ++K) {
            for (int d = 1; d <= K; ++d) {
                for (std::uint64_t seed = 1; seed <= 5; ++seed) {
                    RunConfig cfg;
                    cfg.K = K;
                    cfg.d = d;
                    cfg.spec = law;
                    cfg.lambda = 0.7 * std::min(lambda_lb(K, d, min_moments(law, d)), 1.0);
                    cfg.slots = 100000;
                    cfg.burn_in = 0;
                    cfg.stride = 100;
                    cfg.seed = splitmix64(seed * 1000003ull + static_cast<std::uint64_t>(K * 16 + d));
                    const auto rep = validate_equivalence(cfg);
                    require(rep.passed, "divergence: K=" + std::to_string(K) + " d=" + std::to_string(d) +
                                            " seed=" + std::to_string(seed) + ": " + rep.divergence);
                    slots_total += rep.slots_checked;
                    jobs_total += rep.jobs_checked;
                }
            }
        }
    }
    note << "(" << slots_total << " slots, " << jobs_total << " departures, zero divergences)";
}

void c6_balance_invariant(std::ostringstream& note) {
    RunConfig cfg;
    cfg.K = 10;
    cfg.d = 2;
    cfg.lambda = 0.5;
    cfg.slots = 1000000;
    cfg.burn_in = 0;
    cfg.seed = 6;
    cfg.spec = testutil::two_point();
    const auto tr = run(cfg);  // run() throws on any balance violation
    note << "(" << cfg.slots << " slots, mean workload " << tr.mean_total_workload << ")";
}

void c7_theorem1_chain(std::ostringstream& note) {
    Rng rng(789);
    int done = 0;
    while (done < 20) {
        const int K = 2 + static_cast<int>(uniform_below(rng, 5));  // 2..6
        int d = 1 + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(K)));
        if (d > 1 && K - d > 3) continue;  // keep exact grids at desk scale

        ServiceSpec spec;
        const int kind = static_cast<int>(uniform_below(rng, 3));
        const std::int64_t v1 = 8 + static_cast<std::int64_t>(uniform_below(rng, 5));
        const std::int64_t v2 = v1 + 1 + static_cast<std::int64_t>(uniform_below(rng, 8));
        const double p = 0.15 + 0.7 * uniform_u01(rng);
        if (kind == 0) {
            spec = ServiceSpec::iid_finite({{v1, p}, {v2, 1.0 - p}});
        } else if (kind == 1) {
            spec = ServiceSpec::identical_replicas({{v1, p}, {v2, 1.0 - p}});
        } else {
            std::vector<JointAtom> atoms;
            const int natoms = 2 + static_cast<int>(uniform_below(rng, 2));
            double rest = 1.0;
            for (int a = 0; a < natoms; ++a) {
                std::vector<std::int64_t> vals(static_cast<std::size_t>(K));
                for (auto& v : vals) v = 8 + static_cast<std::int64_t>(uniform_below(rng, 12));
                const double prob = (a + 1 == natoms) ? rest : rest * (0.3 + 0.4 * uniform_u01(rng));
                atoms.push_back({vals, prob});
                rest -= prob;
            }
            spec = ServiceSpec::joint_finite(K, atoms);
        }
        require(time_scaling_check(spec, K, d), "sampled spec must pass time scaling (support >= 8 > K)");

        const double lb = lambda_lb(K, d, min_moments(spec, d));
        LambdaMOptions opts;
        opts.grid_cell_cap = 1000000;
        opts.parallelism = 8;
        const auto lm = lambda_m_search(spec, K, d, Method::Exact, opts);
        require(lb > 0.0, "lambda_lb must be positive");
        require(lb <= lm.value + 1e-12, "lambda_lb must not exceed lambda_m");
        require(lm.value < 1.0, "lambda_m must stay below 1 under time scaling");
        ++done;
    }
    note << "(20 specs: iid / identical / joint, exact grids)";
}

struct SweepOutcome {
    SweepResult result;
    std::vector<double> lambdas;
    std::vector<int> ds;
};

SweepOutcome fig1_sweep() {
    RunConfig base;
    base.K = 10;
    base.spec = testutil::two_point();
    base.slots = 1000000;
    base.burn_in = 100000;
    base.stride = 100;
    base.seed = 20250809;
    base.d = 1;
    base.lambda = 0.5;

    SweepOutcome out;
    for (int d = 1; d <= 10; ++d) out.ds.push_back(d);
    for (int i = 1; i <= 49; ++i) out.lambdas.push_back(0.02 * i);
    out.result = sweep(base, out.ds, out.lambdas, 8);
    return out;
}

double empirical_edge(const SweepOutcome& sw, int d) {
    double edge = 0.0;
    for (const auto& row : sw.result.rows)
        if (row.d == d && row.verdict == Verdict::Stable) edge = std::max(edge, row.lambda);
    return edge;
}

void c8_fig1_reproduction(std::ostringstream& note) {
    const auto sw = fig1_sweep();
    const double e1 = empirical_edge(sw, 1);
    const double e2 = empirical_edge(sw, 2);
    const double e3 = empirical_edge(sw, 3);
    const double e10 = empirical_edge(sw, 10);
    double emax = 0.0;
    int dmax = 0;
    for (int d = 1; d <= 10; ++d) {
        const double e = empirical_edge(sw, d);
        if (e > emax) {
            emax = e;
            dmax = d;
        }
    }
    std::ostringstream edges;
    edges << "(edges: d1=" << e1 << " d2=" << e2 << " d3=" << e3 << " d10=" << e10 << ", max at d=" << dmax
          << ")";
    note << edges.str();
    require(e1 >= 0.50 && e1 <= 0.55, "d=1 edge outside [0.50, 0.55]: " + std::to_string(e1));
    require(e2 >= 0.55 && e2 <= 0.65, "d=2 edge outside [0.55, 0.65]: " + std::to_string(e2));
    require(e2 >= emax, "d=2 edge must be the maximum over all d " + edges.str());
    require(e3 >= 0.51 && e3 <= 0.60, "d=3 edge outside [0.51, 0.60]: " + std::to_string(e3));
    require(e10 >= 0.08 && e10 <= 0.12, "d=10 edge outside [0.08, 0.12]: " + std::to_string(e10));
}

void c9_guarantee_check(std::ostringstream& note) {
    const auto spec = testutil::two_point();
    for (int d : {1, 2, 3, 5, 10}) {
        RunConfig cfg;
        cfg.K = 10;
        cfg.d = d;
        cfg.spec = spec;
        cfg.lambda = 0.9 * lambda_lb(10, d, min_moments(spec, d));
        cfg.slots = 1000000;
        cfg.burn_in = 100000;
        cfg.stride = 100;
        cfg.seed = 90 + static_cast<std::uint64_t>(d);
        const auto verdict = stability_verdict(run(cfg));
        require(verdict == Verdict::Stable,
                "d=" + std::to_string(d) + " at 0.9*lambda_lb not stable: " + to_string(verdict));
    }
    note << "(d in {1,2,3,5,10} at 0.9*lambda_lb)";
}

void c10_drift_negativity(std::ostringstream& note) {
    const auto spec = testutil::two_point();
    const int K = 10, d = 2;
    const std::int64_t bmax = spec.max_value();
    const double lam = 0.95 * lambda_lb(K, d, min_moments(spec, d));
    Rng rng(1010);
    double worst_sep = -1e300;
    for (int s = 0; s < 20; ++s) {
        std::vector<std::int64_t> gaps(static_cast<std::size_t>(K - 1), 0);
        std::int64_t total = 0;
        for (int q = 0; q < K - d; ++q) {
            gaps[static_cast<std::size_t>(q)] =
                static_cast<std::int64_t>(uniform_below(rng, static_cast<std::uint64_t>(bmax) + 1));
            total += gaps[static_cast<std::size_t>(q)];
        }
        std::int64_t lift = 0;
        if (bernoulli(rng, 0.5))
            lift = static_cast<std::int64_t>(uniform_below(rng, static_cast<std::uint64_t>(5 * bmax)));
        if (total + lift < 10 * bmax) {
            const int q = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(K - d)));
            gaps[static_cast<std::size_t>(q)] += 10 * bmax - total - lift;
        }
        WorkloadState st = WorkloadState::empty(K);
        st.w[0] = lift;
        for (int i = 1; i < K; ++i)
            st.w[static_cast<std::size_t>(i)] =
                st.w[static_cast<std::size_t>(i - 1)] + gaps[static_cast<std::size_t>(i - 1)];
        require(st.w.back() >= 10 * bmax, "state max below 10*B_max");

        const auto est = drift_estimate(st, lam, spec, d, 10000, 4242 + static_cast<std::uint64_t>(s));
        const double sep = est.mean + 3.0 * est.std_error;
        worst_sep = std::max(worst_sep, sep);
        require(sep < 0.0, "state " + std::to_string(s) + ": drift " + std::to_string(est.mean) +
                               " +- " + std::to_string(est.std_error) + " not 3-sigma negative");
    }
    std::ostringstream o;
    o << "(lambda=" << lam << ", worst mean+3se=" << worst_sep << ")";
    note << o.str();
}

void c11_statistical_checks(std::ostringstream& note) {
    RunConfig cfg;
    cfg.K = 10;
    cfg.d = 2;
    cfg.lambda = 0.5;
    cfg.slots = 1u << 31;
    cfg.burn_in = 0;
    cfg.seed = 1111;
    cfg.spec = testutil::two_point();
    const auto rep = arrival_stats(cfg, 100000);
    require(rep.omega_passed, "overlap frequencies off by more than 3 sigma");
    require(rep.rank_passed, "rank-ordered incoming work not monotone within 3 sigma");
    note << "(" << rep.arrivals << " arrivals, " << rep.classified << " classified)";
}

void c12_fig2_data(std::ostringstream& note) {
    const int K = 30;
    for (int profile_id : {1, 2}) {
        std::vector<double> g;
        for (int d = 1; d <= K; ++d)
            g.push_back(profile_id == 1 ? static_cast<double>(K) / std::sqrt(static_cast<double>(d))
                                        : 2.0 * K / std::pow(static_cast<double>(d), 1.1));
        ConfigFile cfg;
        cfg.system.K = K;
        cfg.system.d_is_list = true;
        for (int d = 1; d <= K; ++d) cfg.system.ds.push_back(d);
        cfg.service = ServiceSpec::moment_profile(g);

        const std::string csv = bounds_csv(cfg);
        // header + metadata + 30 rows
        require(std::count(csv.begin(), csv.end(), '\n') == 32,
                "profile " + std::to_string(profile_id) + ": expected 30 data rows");

        // parse the CSV back and spot-check the identities
        std::istringstream in(csv);
        std::string line;
        std::getline(in, line);  // metadata
        require(line.rfind("# redd", 0) == 0, "metadata line missing");
        std::getline(in, line);  // header
        double lb1 = -1, lb30 = -1, known30 = -1;
        while (std::getline(in, line)) {
            std::istringstream row(line);
            std::string tok;
            std::getline(row, tok, ',');
            const int d = std::stoi(tok);
            std::getline(row, tok, ',');
            const double lb = std::stod(tok);
            std::getline(row, tok, ',');
            const double kb = std::stod(tok);
            if (d == 1) lb1 = lb;
            if (d == 30) {
                lb30 = lb;
                known30 = kb;
            }
        }
        if (profile_id == 1)
            require(std::abs(lb1 - 1.0) <= 1e-9, "profile 1: lambda_lb(d=1) != 1");
        require(std::abs(lb30 - 1.0 / g.back()) <= 1e-9 * (1.0 / g.back()),
                "profile " + std::to_string(profile_id) + ": lambda_lb(d=30) != 1/g(30)");
        require(std::abs(known30 - 1.0 / g.back()) <= 1e-9 * (1.0 / g.back()),
                "profile " + std::to_string(profile_id) + ": known bound at d=30");
    }
    note << "(two moment profiles, d = 1..30)";
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"exact combinatorics: P_m for K=3,d=2 and K=5,d=2", c1_exact_combinatorics},
        {"closed-form consistency on random two-point laws", c2_closed_form_consistency},
        {"specialization identities at d=1, d=K, K=2", c3_specialization_identities},
        {"bound crossing vs the known bound at K=5 / K=3", c4_bound_crossing},
        {"oracle equivalence: 140 co-simulations of 1e5 slots", c5_oracle_equivalence},
        {"balance invariant over 1e6 slots (K=10, d=2)", c6_balance_invariant},
        {"theorem-1 chain on 20 random finite-support specs", c7_theorem1_chain},
        {"fig.-1 stability edges (K=10, 490-cell sweep)", c8_fig1_reproduction},
        {"stability at 0.9*lambda_lb for d in {1,2,3,5,10}", c9_guarantee_check},
        {"drift negativity at 0.95*lambda_lb, 20 far-out states", c10_drift_negativity},
        {"overlap frequencies and rank work over 1e5 arrivals", c11_statistical_checks},
        {"fig.-2 bounds CSVs for K=30 moment profiles", c12_fig2_data},
    };
    for (std::size_t i = 0; i < criteria.size(); ++i) run_criterion(static_cast<int>(i) + 1, criteria[i]);
    if (g_failures == 0)
        std::printf("acceptance: all %zu criteria passed\n", criteria.size());
    else
        std::printf("acceptance: %d criterion(s) FAILED\n", g_failures);
    return g_failures;
}
