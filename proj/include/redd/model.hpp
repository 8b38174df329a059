#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

namespace redd {

// Workload vector W(t): remaining drain time per server, in slots, measured
// at the end of slot `slot` (after arrival and service).
struct WorkloadState {
    std::vector<std::int64_t> w;
    std::uint64_t slot = 0;

    static WorkloadState empty(int K) { return WorkloadState{std::vector<std::int64_t>(static_cast<std::size_t>(K), 0), 0}; }
    int K() const { return static_cast<int>(w.size()); }
};

// d distinct servers chosen uniformly at random; 0-based, sorted.
struct RoutingDraw {
    std::vector<int> servers;
};

// Everything random about one slot, injected from outside so the recursion
// and the task-level oracle can consume identical draws.
struct SlotInput {
    bool arrival = false;
    std::optional<RoutingDraw> routing;               // present iff arrival
    std::optional<std::vector<std::int64_t>> services;  // full K-vector; only routed entries are read

    static SlotInput idle() { return SlotInput{}; }
    static SlotInput job(RoutingDraw g, std::vector<std::int64_t> b) {
        return SlotInput{true, std::move(g), std::move(b)};
    }
};

// A_i: work server i receives if a job with routing g and services b arrives
// while the system is in `state`. Zero when i is not routed.
std::int64_t incoming_work(const WorkloadState& state, int i, const RoutingDraw& g,
                           std::span<const std::int64_t> b);

// One slot of the workload recursion: w_i <- [w_i + 1{arrival} A_i - 1]^+,
// slot counter +1. Pure function of (state, input).
WorkloadState step(WorkloadState state, const SlotInput& input);

// In-place slot kernel used by step() and the simulator hot loop.
// b_routed is aligned with g (b_routed[k] belongs to server g[k]).
void apply_slot(std::span<std::int64_t> w, bool arrival, std::span<const int> g,
                std::span<const std::int64_t> b_routed);

struct Departure {
    std::uint64_t slot;  // slot at whose end the job departs
    int server;          // completing server (smallest index on ties)
};

// Departure of a job arriving at slot state.slot+1 with routing g, services b.
Departure departure(const WorkloadState& state, const RoutingDraw& g,
                    std::span<const std::int64_t> b);

// True iff the d largest entries of w are all equal (balance property).
bool balance_check(std::span<const std::int64_t> w, int d);
inline bool balance_check(const WorkloadState& state, int d) { return balance_check(state.w, d); }

// ---------------------------------------------------------------------------
// Task-level oracle: FIFO queues of task records plus a job registry.
// Ground truth for the recursion; dynamics follow the verbal model directly
// (enqueue d copies, unit service per busy server, first completion departs
// the job and cancels every sibling, smallest server index wins ties).

struct OracleTask {
    std::uint64_t job;
    std::int64_t remaining;  // > 0
};

struct OracleJob {
    std::uint64_t arrival_slot = 0;
    std::vector<int> servers;
    std::int64_t departure_slot = -1;  // -1 while pending
    int completing_server = -1;
};

struct OracleState {
    std::vector<std::vector<OracleTask>> queues;  // front = position 0
    std::unordered_map<std::uint64_t, OracleJob> jobs;
    std::uint64_t slot = 0;
    std::uint64_t next_job_id = 0;

    static OracleState empty(int K) {
        OracleState o;
        o.queues.resize(static_cast<std::size_t>(K));
        return o;
    }
    int K() const { return static_cast<int>(queues.size()); }
};

// One slot of the task-level system. Returns (new state, job ids departed
// this slot, in completing-server order). Pure function of (state, input).
std::pair<OracleState, std::vector<std::uint64_t>> oracle_step(OracleState o, const SlotInput& input);

// Reusable buffers for drain-time computation.
struct DrainScratch {
    std::vector<std::vector<OracleTask>> queues;
    std::vector<std::uint64_t> departed;
};

// Per-server slots until the queue empties when the clone runs forward with
// no further arrivals (cancellations included). Equals the recursion's W for
// the same input history.
std::vector<std::int64_t> oracle_drain_times(const OracleState& o);
void oracle_drain_times(const OracleState& o, DrainScratch& scratch, std::vector<std::int64_t>& out);

}  // namespace redd
