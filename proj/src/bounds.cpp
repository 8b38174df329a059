#include "redd/bounds.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "redd/errors.hpp"
#include "redd/rng.hpp"

namespace redd {

Rational overlap_prob(int K, int d, int m) {
    if (d < 1 || d > K) throw std::invalid_argument("overlap_prob: need 1 <= d <= K");
    if (m < 0 || m > d) throw std::invalid_argument("overlap_prob: need 0 <= m <= d");
    return Rational(binomial(K - d, d - m) * binomial(d, m), binomial(K, d));
}

std::vector<Rational> overlap_probs(int K, int d) {
    std::vector<Rational> out;
    out.reserve(static_cast<std::size_t>(d) + 1);
    for (int m = 0; m <= d; ++m) out.push_back(overlap_prob(K, d, m));
    return out;
}

static void check_profile(int d, std::span<const double> g) {
    if (static_cast<int>(g.size()) < d) throw std::invalid_argument("min-moment profile shorter than d");
    for (int j = 0; j < d; ++j) {
        if (!(g[static_cast<std::size_t>(j)] > 0.0))
            throw std::invalid_argument("min-moment profile must be positive");
        if (j > 0 && g[static_cast<std::size_t>(j)] > g[static_cast<std::size_t>(j - 1)] + 1e-9)
            throw std::invalid_argument("min-moment profile must be non-increasing");
    }
}

double lambda_lb_denominator(int K, int d, std::span<const double> g) {
    check_profile(d, g);
    const auto pm = overlap_probs(K, d);
    double den = 0.0;
    for (int m = 0; m <= d; ++m) {
        if (pm[static_cast<std::size_t>(m)].num == 0) continue;
        double term = 0.0;
        for (int j = 1; j <= d - m; ++j) term += g[static_cast<std::size_t>(j - 1)];
        term += static_cast<double>(m) * g[static_cast<std::size_t>(d - 1)];
        den += term * pm[static_cast<std::size_t>(m)].to_double();
    }
    return den;
}

double lambda_lb(int K, int d, std::span<const double> g) {
    if (d == 1) return static_cast<double>(K) / g[0];  // K mu, exactly
    return static_cast<double>(K) / lambda_lb_denominator(K, d, g);
}

double lambda_lb_d2(int K, double m1, double m2) {
    if (!(m2 > 0.0) || m2 > m1) throw std::invalid_argument("need 0 < m2 <= m1");
    const double p2 = overlap_prob(K, 2, 2).to_double();
    return static_cast<double>(K) / ((1.0 - p2) * m1 + (1.0 + p2) * m2);
}

double known_bound(double g_d) {
    if (!(g_d > 0.0)) throw std::invalid_argument("known_bound: need positive moment");
    return 1.0 / g_d;
}

GapVector GapVector::zeros(int K) { return GapVector{std::vector<std::int64_t>(static_cast<std::size_t>(K - 1), 0)}; }

void GapVector::validate(int K, int d) const {
    if (static_cast<int>(delta.size()) != K - 1)
        throw std::invalid_argument("gap vector must have K-1 entries");
    for (auto v : delta)
        if (v < 0) throw std::invalid_argument("gap entries must be nonnegative");
    for (int i = K - d; i < K - 1; ++i)
        if (delta[static_cast<std::size_t>(i)] != 0)
            throw std::invalid_argument("last d-1 gap entries must be zero (balance)");
}

std::vector<std::int64_t> GapVector::cumulative() const {
    std::vector<std::int64_t> c(delta.size() + 1, 0);
    for (std::size_t i = 0; i < delta.size(); ++i) c[i + 1] = c[i] + delta[i];
    return c;
}

const char* method_name(Method m) { return m == Method::Exact ? "exact" : "mc"; }

namespace {

// ---- exact kernels -------------------------------------------------------
// All compute E[min_{j=1..d} [B_(j) + a_j]^+] for one routed server, where
// a_j is the signed workload difference toward routed position j and the
// position holding the server itself has a_j = 0.

// i.i.d. coordinates: sum_t prod_j S(t - a_j), truncated where any factor
// hits zero.
double kernel_iid(const ServiceSpec& spec, std::span<const std::int64_t> a) {
    const std::int64_t bmax = spec.max_value();
    std::int64_t limit = bmax + a[0];
    for (std::size_t j = 1; j < a.size(); ++j) limit = std::min(limit, bmax + a[j]);
    double sum = 0.0;
    for (std::int64_t t = 0; t < limit; ++t) {
        double prod = 1.0;
        for (const auto aj : a) {
            prod *= spec.survival(t - aj);
            if (prod == 0.0) break;
        }
        sum += prod;
    }
    return sum;
}

// identical replicas: min_j [B + a_j]^+ = [B + min_j a_j]^+.
double kernel_identical(const ServiceSpec& spec, std::span<const std::int64_t> a) {
    std::int64_t amin = a[0];
    for (const auto aj : a) amin = std::min(amin, aj);
    double sum = 0.0;
    for (const auto& e : spec.pmf())
        sum += e.prob * static_cast<double>(std::max<std::int64_t>(e.value + amin, 0));
    return sum;
}

// explicit joint law over the first d coordinates.
double kernel_atoms(const std::vector<JointAtom>& law, std::span<const std::int64_t> a) {
    double sum = 0.0;
    for (const auto& atom : law) {
        std::int64_t mn = -1;
        for (std::size_t j = 0; j < a.size(); ++j) {
            const std::int64_t term = std::max<std::int64_t>(atom.values[j] + a[j], 0);
            if (mn < 0 || term < mn) mn = term;
        }
        sum += atom.prob * static_cast<double>(mn);
    }
    return sum;
}

struct ExactContext {
    const ServiceSpec* spec;
    std::vector<JointAtom> law;  // joint_finite only

    double eval(std::span<const std::int64_t> a) const {
        switch (spec->kind()) {
            case SpecKind::IidFinite: return kernel_iid(*spec, a);
            case SpecKind::IdenticalReplicas: return kernel_identical(*spec, a);
            case SpecKind::JointFinite: return kernel_atoms(law, a);
            default: throw CapabilityError("exact expectations need an enumerable law");
        }
    }
};

ExactContext make_exact_context(const ServiceSpec& spec, int d, std::uint64_t atom_cap) {
    if (!spec.enumerable())
        throw CapabilityError("exact expectations requested on a non-enumerable service law");
    ExactContext ctx{&spec, {}};
    if (spec.kind() == SpecKind::JointFinite) ctx.law = spec.first_coords_law(d, atom_cap);
    return ctx;
}

// Enumerates d-subsets of [0,K); calls fn(subset) for each.
template <typename Fn>
void for_each_subset(int K, int d, Fn&& fn) {
    std::vector<int> g(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) g[static_cast<std::size_t>(i)] = i;
    for (;;) {
        fn(std::span<const int>(g));
        int i = d - 1;
        while (i >= 0 && g[static_cast<std::size_t>(i)] == K - d + i) --i;
        if (i < 0) break;
        ++g[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < d; ++j)
            g[static_cast<std::size_t>(j)] = g[static_cast<std::size_t>(j - 1)] + 1;
    }
}

// Sum over routed servers of the exact kernel, at ordered levels c.
double exact_subset_sum(const ExactContext& ctx, std::span<const std::int64_t> c, int K, int d,
                        std::uint64_t subset_cap, std::vector<double>* per_server) {
    const BigInt total = binomial(K, d);
    if (total > BigInt(subset_cap))
        throw CapabilityError("exact expectation needs " + total.str() + " routing subsets, cap is " +
                              std::to_string(subset_cap));
    double sum = 0.0;
    std::vector<std::int64_t> a(static_cast<std::size_t>(d));
    for_each_subset(K, d, [&](std::span<const int> g) {
        for (int k = 0; k < d; ++k) {
            const std::int64_t ck = c[static_cast<std::size_t>(g[static_cast<std::size_t>(k)])];
            for (int j = 0; j < d; ++j)
                a[static_cast<std::size_t>(j)] =
                    c[static_cast<std::size_t>(g[static_cast<std::size_t>(j)])] - ck;
            const double v = ctx.eval(a);
            sum += v;
            if (per_server) (*per_server)[static_cast<std::size_t>(g[static_cast<std::size_t>(k)])] += v;
        }
    });
    const double n = total.convert_to<double>();
    if (per_server)
        for (auto& v : *per_server) v /= n;
    return sum / n;
}

// One MC draw of total incoming work at ordered levels c.
struct McScratch {
    std::vector<int> scratch, g;
    std::vector<std::int64_t> b;
};

double mc_total_work(Rng& rng, const ServiceSpec& spec, int K, int d,
                     std::span<const std::int64_t> c, McScratch& ws, std::vector<double>* per_server) {
    draw_subset(rng, K, d, ws.scratch, ws.g);
    spec.sample_vector(rng, K, ws.b);
    double total = 0.0;
    for (int k = 0; k < d; ++k) {
        const int i = ws.g[static_cast<std::size_t>(k)];
        const std::int64_t ci = c[static_cast<std::size_t>(i)];
        std::int64_t mn = -1;
        for (int j = 0; j < d; ++j) {
            const int sj = ws.g[static_cast<std::size_t>(j)];
            const std::int64_t term = std::max<std::int64_t>(
                ws.b[static_cast<std::size_t>(sj)] + c[static_cast<std::size_t>(sj)] - ci, 0);
            if (mn < 0 || term < mn) mn = term;
        }
        total += static_cast<double>(mn);
        if (per_server) (*per_server)[static_cast<std::size_t>(i)] += static_cast<double>(mn);
    }
    return total;
}

}  // namespace

WorkEstimate expected_incoming_work(const GapVector& delta, const ServiceSpec& spec, int K, int d,
                                    Method method, const ExpectationOptions& opts) {
    if (d < 1 || d > K) throw std::invalid_argument("need 1 <= d <= K");
    delta.validate(K, d);
    const auto c = delta.cumulative();
    if (method == Method::Exact) {
        const auto ctx = make_exact_context(spec, d, opts.atom_cap);
        const double v = exact_subset_sum(ctx, c, K, d, opts.subset_cap, nullptr);
        return WorkEstimate{v, 0.0, 0};
    }
    if (!spec.samplable()) throw CapabilityError("Monte-Carlo expectation needs a samplable law");
    if (opts.mc_samples < 1) throw std::invalid_argument("mc_samples must be >= 1");
    Rng rng(opts.seed);
    McScratch ws;
    double sum = 0.0, sumsq = 0.0;
    for (std::uint64_t n = 0; n < opts.mc_samples; ++n) {
        const double x = mc_total_work(rng, spec, K, d, c, ws, nullptr);
        sum += x;
        sumsq += x * x;
    }
    const double n = static_cast<double>(opts.mc_samples);
    const double mean = sum / n;
    const double var = std::max(0.0, sumsq / n - mean * mean);
    const double se = opts.mc_samples > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    return WorkEstimate{mean, se, opts.mc_samples};
}

LambdaMResult lambda_m_search(const ServiceSpec& spec, int K, int d, Method method,
                              const LambdaMOptions& opts) {
    if (d < 1 || d > K) throw std::invalid_argument("need 1 <= d <= K");
    if (!spec.enumerable())
        throw CapabilityError("lambda_m needs a finite-support law (moment profiles carry no joint law)");

    LambdaMResult res;
    res.method = method;
    res.argmax_delta = GapVector::zeros(K);

    // d = 1: the routing minimum degenerates to the routed server's own B,
    // so the objective is E[B_1] at every gap vector.
    if (d == 1) {
        res.value = static_cast<double>(K) / spec.min_moment(1);
        res.grid_cells = 1;
        return res;
    }

    const int free_coords = K - d;
    const std::int64_t bmax = spec.max_value();
    const std::uint64_t base = static_cast<std::uint64_t>(bmax) + 1;
    BigInt cells_big = 1;
    for (int q = 0; q < free_coords; ++q) cells_big *= base;
    if (cells_big > BigInt(opts.grid_cell_cap))
        throw CapabilityError("lambda_m grid needs " + cells_big.str() + " cells (cap " +
                              std::to_string(opts.grid_cell_cap) +
                              "); raise bounds.grid_cell_cap or use the mc method");
    const std::uint64_t cells = cells_big.convert_to<std::uint64_t>();

    ExpectationOptions eopts;
    eopts.mc_samples = opts.mc_samples;
    eopts.atom_cap = opts.atom_cap;
    eopts.subset_cap = opts.subset_cap;

    struct Best {
        double value = -1.0;
        double se = 0.0;
        std::vector<std::int64_t> delta;
    };
    auto better = [](const Best& a, const Best& b) {
        if (a.value != b.value) return a.value > b.value;
        return a.delta < b.delta;  // deterministic tie-break
    };

    const int workers = std::max(1, std::min<int>(opts.parallelism, static_cast<int>(std::min<std::uint64_t>(cells, 64))));
    std::vector<Best> bests(static_cast<std::size_t>(workers));
    std::atomic<std::uint64_t> next{0};
    constexpr std::uint64_t kChunk = 64;

    auto work = [&](int widx) {
        GapVector delta = GapVector::zeros(K);
        Best best;
        for (;;) {
            const std::uint64_t begin = next.fetch_add(kChunk);
            if (begin >= cells) break;
            const std::uint64_t end = std::min(cells, begin + kChunk);
            for (std::uint64_t cell = begin; cell < end; ++cell) {
                std::uint64_t rest = cell;
                for (int q = 0; q < free_coords; ++q) {
                    delta.delta[static_cast<std::size_t>(q)] = static_cast<std::int64_t>(rest % base);
                    rest /= base;
                }
                ExpectationOptions cell_opts = eopts;
                cell_opts.seed = splitmix64(opts.seed ^ cell);
                const auto est = expected_incoming_work(delta, spec, K, d, method, cell_opts);
                Best cand{est.value, est.std_error, delta.delta};
                if (best.value < 0.0 || better(cand, best)) best = std::move(cand);
            }
        }
        bests[static_cast<std::size_t>(widx)] = std::move(best);
    };

    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int t = 0; t < workers; ++t) pool.emplace_back(work, t);
        for (auto& t : pool) t.join();
    }

    Best best;
    for (const auto& b : bests) {
        if (b.value < 0.0) continue;
        if (best.value < 0.0 || better(b, best)) best = b;
    }

    res.value = static_cast<double>(K) / best.value;
    res.argmax_delta.delta = best.delta;
    res.std_error = best.se;
    res.grid_cells = cells;
    return res;
}

MonotoneFiReport monotone_fi_check(std::span<const std::int64_t> ordered_w, const ServiceSpec& spec,
                                   int d, Method method, std::uint64_t samples, std::uint64_t seed) {
    const int K = static_cast<int>(ordered_w.size());
    if (d < 1 || d > K) throw std::invalid_argument("need 1 <= d <= K");
    for (int i = 1; i < K; ++i)
        if (ordered_w[static_cast<std::size_t>(i)] < ordered_w[static_cast<std::size_t>(i - 1)])
            throw std::invalid_argument("monotone_fi_check needs a non-decreasing workload state");

    std::vector<std::int64_t> c(ordered_w.begin(), ordered_w.end());
    MonotoneFiReport rep;
    rep.f.assign(static_cast<std::size_t>(K), 0.0);
    rep.se.assign(static_cast<std::size_t>(K), 0.0);

    if (method == Method::Exact) {
        const auto ctx = make_exact_context(spec, d, ExpectationOptions{}.atom_cap);
        exact_subset_sum(ctx, c, K, d, ExpectationOptions{}.subset_cap, &rep.f);
        rep.passed = true;
        for (int i = 0; i + 1 < K; ++i)
            if (rep.f[static_cast<std::size_t>(i)] + 1e-12 < rep.f[static_cast<std::size_t>(i + 1)])
                rep.passed = false;
        return rep;
    }

    if (!spec.samplable()) throw CapabilityError("Monte-Carlo check needs a samplable law");
    Rng rng(seed);
    McScratch ws;
    std::vector<double> a(static_cast<std::size_t>(K));
    std::vector<double> diff_sum(static_cast<std::size_t>(K - 1), 0.0);
    std::vector<double> diff_sumsq(static_cast<std::size_t>(K - 1), 0.0);
    std::vector<double> f_sum(static_cast<std::size_t>(K), 0.0);
    for (std::uint64_t n = 0; n < samples; ++n) {
        std::fill(a.begin(), a.end(), 0.0);
        mc_total_work(rng, spec, K, d, c, ws, &a);
        for (int i = 0; i < K; ++i) f_sum[static_cast<std::size_t>(i)] += a[static_cast<std::size_t>(i)];
        for (int i = 0; i + 1 < K; ++i) {
            const double x = a[static_cast<std::size_t>(i)] - a[static_cast<std::size_t>(i + 1)];
            diff_sum[static_cast<std::size_t>(i)] += x;
            diff_sumsq[static_cast<std::size_t>(i)] += x * x;
        }
    }
    const double n = static_cast<double>(samples);
    for (int i = 0; i < K; ++i) rep.f[static_cast<std::size_t>(i)] = f_sum[static_cast<std::size_t>(i)] / n;
    rep.passed = true;
    for (int i = 0; i + 1 < K; ++i) {
        const double mean = diff_sum[static_cast<std::size_t>(i)] / n;
        const double var = std::max(0.0, diff_sumsq[static_cast<std::size_t>(i)] / n - mean * mean);
        const double se = samples > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
        rep.se[static_cast<std::size_t>(i)] = se;
        if (mean < -3.0 * se - 1e-12) rep.passed = false;
    }
    return rep;
}

BoundReport make_bound_report(const ServiceSpec& spec, int K, int d, bool with_lambda_m,
                              Method method, const LambdaMOptions& opts) {
    if (d < 1 || d > K) throw std::invalid_argument("need 1 <= d <= K");
    if (d > spec.max_moment_order())
        throw ConfigError("service law provides min-moments up to order " +
                          std::to_string(spec.max_moment_order()) + ", need d = " + std::to_string(d));
    BoundReport rep;
    rep.K = K;
    rep.d = d;
    rep.p_m = overlap_probs(K, d);
    rep.p_m_double.reserve(rep.p_m.size());
    for (const auto& r : rep.p_m) rep.p_m_double.push_back(r.to_double());
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(d));
    for (int j = 1; j <= d; ++j) g.push_back(spec.min_moment(j));
    rep.min_moment_d = g.back();
    rep.lambda_lb = lambda_lb(K, d, g);
    rep.known_bound = known_bound(g.back());
    rep.best_bound = std::max(rep.lambda_lb, rep.known_bound);
    rep.time_scaling_ok = rep.min_moment_d > static_cast<double>(K);
    if (with_lambda_m) {
        const auto lm = lambda_m_search(spec, K, d, method, opts);
        rep.lambda_m = LambdaMEstimate{lm.value, lm.argmax_delta.delta, lm.method, lm.std_error};
        if (method == Method::Exact && rep.lambda_m->value + 1e-9 < rep.lambda_lb)
            throw std::logic_error("lambda_m fell below lambda_lb; bound computation inconsistent");
    }
    return rep;
}

}  // namespace redd
