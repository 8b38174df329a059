#include "redd/model.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace redd {

namespace {

void check_routing(const RoutingDraw& g, int K) {
    if (g.servers.empty()) throw std::invalid_argument("routing set is empty");
    int prev = -1;
    for (int s : g.servers) {
        if (s < 0 || s >= K) throw std::invalid_argument("routed server index out of range");
        if (s <= prev) throw std::invalid_argument("routed servers must be sorted and distinct");
        prev = s;
    }
}

void check_services(const RoutingDraw& g, std::span<const std::int64_t> b) {
    for (int s : g.servers) {
        if (static_cast<std::size_t>(s) >= b.size() || b[static_cast<std::size_t>(s)] < 1)
            throw std::invalid_argument("service entry for routed server must be >= 1");
    }
}

// min over routed servers of w[j] + b[j]; ties resolved to the smallest index.
std::pair<std::int64_t, int> min_finish(std::span<const std::int64_t> w, const RoutingDraw& g,
                                        std::span<const std::int64_t> b) {
    std::int64_t best = 0;
    int best_server = -1;
    for (int j : g.servers) {
        const std::int64_t v = w[static_cast<std::size_t>(j)] + b[static_cast<std::size_t>(j)];
        if (best_server < 0 || v < best) {
            best = v;
            best_server = j;
        }
    }
    return {best, best_server};
}

}  // namespace

std::int64_t incoming_work(const WorkloadState& state, int i, const RoutingDraw& g,
                           std::span<const std::int64_t> b) {
    const int K = state.K();
    if (i < 0 || i >= K) throw std::invalid_argument("server index out of range");
    check_routing(g, K);
    check_services(g, b);
    if (!std::binary_search(g.servers.begin(), g.servers.end(), i)) return 0;
    const std::int64_t wi = state.w[static_cast<std::size_t>(i)];
    std::int64_t best = -1;
    for (int j : g.servers) {
        const std::int64_t delta = state.w[static_cast<std::size_t>(j)] - wi;
        const std::int64_t term = std::max<std::int64_t>(b[static_cast<std::size_t>(j)] + delta, 0);
        if (best < 0 || term < best) best = term;
    }
    return best;
}

void apply_slot(std::span<std::int64_t> w, bool arrival, std::span<const int> g,
                std::span<const std::int64_t> b_routed) {
    if (arrival) {
        // A_i = [M - w_i]^+ for routed i, with M = min_j (w_j + b_j); adding it
        // lifts w_i to max(w_i, M).
        std::int64_t m = 0;
        bool first = true;
        for (std::size_t k = 0; k < g.size(); ++k) {
            const std::int64_t v = w[static_cast<std::size_t>(g[k])] + b_routed[k];
            if (first || v < m) m = v;
            first = false;
        }
        for (std::size_t k = 0; k < g.size(); ++k) {
            auto& wi = w[static_cast<std::size_t>(g[k])];
            if (m > wi) wi = m;
        }
    }
    for (auto& wi : w)
        if (wi > 0) --wi;
}

WorkloadState step(WorkloadState state, const SlotInput& input) {
    if (input.arrival) {
        if (!input.routing || !input.services)
            throw std::invalid_argument("arrival slot must carry routing and services");
        check_routing(*input.routing, state.K());
        check_services(*input.routing, *input.services);
        std::vector<std::int64_t> b_routed;
        b_routed.reserve(input.routing->servers.size());
        for (int j : input.routing->servers) b_routed.push_back((*input.services)[static_cast<std::size_t>(j)]);
        apply_slot(state.w, true, input.routing->servers, b_routed);
    } else {
        if (input.routing || input.services)
            throw std::invalid_argument("idle slot must not carry routing or services");
        apply_slot(state.w, false, {}, {});
    }
    state.slot += 1;
    return state;
}

Departure departure(const WorkloadState& state, const RoutingDraw& g,
                    std::span<const std::int64_t> b) {
    check_routing(g, state.K());
    check_services(g, b);
    const auto [m, server] = min_finish(state.w, g, b);
    // arrival at slot+1, sojourn m slots -> departs at the end of slot+m
    return Departure{state.slot + static_cast<std::uint64_t>(m), server};
}

bool balance_check(std::span<const std::int64_t> w, int d) {
    const int K = static_cast<int>(w.size());
    if (d < 1 || d > K) throw std::invalid_argument("balance_check: d out of range");
    std::int64_t mx = w[0];
    for (auto v : w) mx = std::max(mx, v);
    int at_max = 0;
    for (auto v : w)
        if (v == mx) ++at_max;
    return at_max >= d;
}

// --------------------------------------------------------------------------
// Oracle

namespace {

// One forward slot on bare queues: unit service, completions by ascending
// server index, cancellation sweep.
void oracle_slot_kernel(std::vector<std::vector<OracleTask>>& queues,
                        std::vector<std::uint64_t>& departed_jobs, std::uint64_t slot,
                        std::unordered_map<std::uint64_t, OracleJob>* registry) {
    departed_jobs.clear();
    for (auto& q : queues)
        if (!q.empty()) q.front().remaining -= 1;
    for (std::size_t i = 0; i < queues.size(); ++i) {
        auto& q = queues[i];
        if (q.empty() || q.front().remaining != 0) continue;
        const std::uint64_t job = q.front().job;
        if (std::find(departed_jobs.begin(), departed_jobs.end(), job) != departed_jobs.end())
            continue;  // sibling completed at a smaller index this slot: cancelled
        departed_jobs.push_back(job);
        if (registry) {
            auto it = registry->find(job);
            it->second.departure_slot = static_cast<std::int64_t>(slot);
            it->second.completing_server = static_cast<int>(i);
        }
    }
    if (!departed_jobs.empty()) {
        for (auto& q : queues) {
            q.erase(std::remove_if(q.begin(), q.end(),
                                   [&](const OracleTask& t) {
                                       return std::find(departed_jobs.begin(), departed_jobs.end(),
                                                        t.job) != departed_jobs.end();
                                   }),
                    q.end());
        }
    }
}

}  // namespace

std::pair<OracleState, std::vector<std::uint64_t>> oracle_step(OracleState o, const SlotInput& input) {
    o.slot += 1;
    if (input.arrival) {
        if (!input.routing || !input.services)
            throw std::invalid_argument("arrival slot must carry routing and services");
        check_routing(*input.routing, o.K());
        check_services(*input.routing, *input.services);
        const std::uint64_t id = o.next_job_id++;
        OracleJob job;
        job.arrival_slot = o.slot;
        job.servers = input.routing->servers;
        for (int s : input.routing->servers)
            o.queues[static_cast<std::size_t>(s)].push_back(
                OracleTask{id, (*input.services)[static_cast<std::size_t>(s)]});
        o.jobs.emplace(id, std::move(job));
    }
    std::vector<std::uint64_t> departed;
    oracle_slot_kernel(o.queues, departed, o.slot, &o.jobs);
    return {std::move(o), std::move(departed)};
}

void oracle_drain_times(const OracleState& o, DrainScratch& scratch, std::vector<std::int64_t>& out) {
    const int K = o.K();
    scratch.queues.resize(static_cast<std::size_t>(K));
    for (int i = 0; i < K; ++i) scratch.queues[static_cast<std::size_t>(i)] = o.queues[static_cast<std::size_t>(i)];
    out.assign(static_cast<std::size_t>(K), 0);
    int nonempty = 0;
    for (const auto& q : scratch.queues)
        if (!q.empty()) ++nonempty;
    std::int64_t t = 0;
    while (nonempty > 0) {
        ++t;
        oracle_slot_kernel(scratch.queues, scratch.departed, 0, nullptr);
        for (int i = 0; i < K; ++i) {
            if (out[static_cast<std::size_t>(i)] == 0 && scratch.queues[static_cast<std::size_t>(i)].empty() &&
                !o.queues[static_cast<std::size_t>(i)].empty()) {
                out[static_cast<std::size_t>(i)] = t;
                --nonempty;
            }
        }
    }
}

std::vector<std::int64_t> oracle_drain_times(const OracleState& o) {
    DrainScratch scratch;
    std::vector<std::int64_t> out;
    oracle_drain_times(o, scratch, out);
    return out;
}

}  // namespace redd
