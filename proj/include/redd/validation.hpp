#pragma once

#include <string>

#include "redd/config.hpp"

namespace redd {

struct ValidationOutcome {
    bool passed = false;
    std::string report;         // full multi-line text
    std::string first_failure;  // empty when passed
};

// Runs the model validation battery for a config: recursion-vs-oracle
// equivalence on a small-K family, the balance invariant at the configured K,
// overlap-frequency and rank-work statistics, and drift negativity below
// lambda_lb. `inject_step_fault` perturbs the recursion inside the
// equivalence check; the validator is then expected to report the divergence
// (test fixture for the failure path).
ValidationOutcome run_validation(const ConfigFile& cfg, bool inject_step_fault = false);

}  // namespace redd
