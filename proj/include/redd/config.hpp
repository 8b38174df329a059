#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "redd/bounds.hpp"
#include "redd/distributions.hpp"
#include "redd/simulator.hpp"

namespace redd {

// Flat key-value config with sections. Unknown sections or keys are
// rejected; values are validated against module preconditions at load time.
//
//   [system]      K, d | d_list, lambda | lambda_list
//   [service]     kind, pmf | atom (repeatable) | profile
//   [simulation]  slots, burn_in, seed, stride, parallelism
//   [bounds]      lambda_m, method, mc_samples, grid_cell_cap
//
// Lists are comma separated; numeric tokens may use start:stop:step ranges.

struct SystemConfig {
    int K = 0;
    std::vector<int> ds;
    bool d_is_list = false;
    std::vector<double> lambdas;  // may be empty (bounds-only configs)
    bool lambda_is_list = false;
};

struct SimulationConfig {
    std::uint64_t slots = 1000000;
    std::optional<std::uint64_t> burn_in;  // default: slots / 10
    std::uint64_t seed = 1;
    int stride = 100;
    int parallelism = 1;
};

struct BoundsConfig {
    bool lambda_m = false;
    Method method = Method::Exact;
    std::uint64_t mc_samples = 100000;
    std::uint64_t grid_cell_cap = 1000000;
};

struct ConfigFile {
    SystemConfig system;
    ServiceSpec service;
    SimulationConfig simulation;
    BoundsConfig bounds;

    std::uint64_t burn_in_effective() const {
        return simulation.burn_in ? *simulation.burn_in : simulation.slots / 10;
    }

    RunConfig run_config(int d, double lambda) const;

    static ConfigFile parse(const std::string& text);  // throws ConfigError
    static ConfigFile load(const std::string& path);   // throws ConfigError
    std::string serialize() const;                     // canonical form; parse(serialize(x)) == x
};

}  // namespace redd
