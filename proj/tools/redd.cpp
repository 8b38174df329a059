// redd CLI: bounds / simulate / sweep / lambda-m / validate over the libredd
// C API. Exit codes: 0 ok, 1 usage, 2 config, 3 capability, 4 I/O,
// 5 validation failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "redd.h"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_out = true) {
    cmd->add_option("--config", opts.config_path, "config file (default: $REDD_CONFIG)");
    if (with_out) cmd->add_option("--out", opts.out_dir, "output directory for CSV files");
    cmd->add_option("--seed", opts.seed, "override [simulation] seed")->each([&](const std::string&) {
        opts.seed_set = true;
    });
    cmd->add_option("--workers", opts.workers, "override [simulation] parallelism");
}

int fail(redd_status st) {
    std::cerr << "error: " << redd_last_error() << "\n";
    return static_cast<int>(st);
}

// Loads the config and applies --seed/--workers overrides. Returns nullptr
// and sets *exit_code on failure.
redd_config* load_config(const CommonOpts& opts, int* exit_code) {
    std::string path = opts.config_path;
    if (path.empty()) {
        if (const char* env = std::getenv("REDD_CONFIG")) path = env;
    }
    if (path.empty()) {
        std::cerr << "error: no config file (use --config or set REDD_CONFIG)\n";
        *exit_code = static_cast<int>(REDD_ERR_CONFIG);
        return nullptr;
    }
    redd_config* cfg = nullptr;
    if (const auto st = redd_config_load(path.c_str(), &cfg); st != REDD_OK) {
        *exit_code = fail(st);
        return nullptr;
    }
    if (opts.seed_set) redd_config_set_seed(cfg, opts.seed);
    if (opts.workers > 0) {
        if (const auto st = redd_config_set_workers(cfg, opts.workers); st != REDD_OK) {
            *exit_code = fail(st);
            redd_config_free(cfg);
            return nullptr;
        }
    }
    *exit_code = 0;
    return cfg;
}

int write_file(const std::string& dir, const std::string& name, const char* content) {
    std::error_code ec;
    if (!dir.empty()) {
        std::filesystem::create_directories(dir, ec);
        if (ec) {
            std::cerr << "error: cannot create output directory '" << dir << "': " << ec.message() << "\n";
            return static_cast<int>(REDD_ERR_IO);
        }
    }
    const auto path = dir.empty() ? name : dir + "/" + name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        std::cerr << "error: cannot open '" << path << "' for writing\n";
        return static_cast<int>(REDD_ERR_IO);
    }
    out << content;
    out.flush();
    if (!out) {
        std::cerr << "error: write to '" << path << "' failed\n";
        return static_cast<int>(REDD_ERR_IO);
    }
    std::cerr << "wrote " << path << "\n";
    return 0;
}

// Prints per-d reports: a single object, or a JSON array for d lists.
int print_bounds(redd_config* cfg, bool with_lambda_m) {
    const int nd = redd_config_d_count(cfg);
    std::vector<std::string> reports;
    for (int i = 0; i < nd; ++i) {
        redd_bounds* b = nullptr;
        const auto st = redd_bounds_compute(cfg, redd_config_d_at(cfg, i), with_lambda_m ? 1 : 0, &b);
        if (st != REDD_OK) return fail(st);
        char* json = redd_bounds_json(b);
        reports.emplace_back(json);
        redd_string_free(json);
        redd_bounds_free(b);
    }
    if (nd == 1) {
        std::cout << reports.front();
    } else {
        std::cout << "[\n";
        for (int i = 0; i < nd; ++i) {
            std::string r = reports[static_cast<std::size_t>(i)];
            if (!r.empty() && r.back() == '\n') r.pop_back();
            std::cout << r << (i + 1 < nd ? ",\n" : "\n");
        }
        std::cout << "]\n";
    }
    return 0;
}

int cmd_bounds(const CommonOpts& opts, bool force_lambda_m) {
    int code = 0;
    redd_config* cfg = load_config(opts, &code);
    if (!cfg) return code;

    // lambda-m subcommand forces the search on; plain bounds follows [bounds]
    const bool with_lm = force_lambda_m || redd_config_lambda_m_enabled(cfg) != 0;

    code = print_bounds(cfg, with_lm);
    if (code == 0 && !opts.out_dir.empty()) {
        char* csv = redd_bounds_csv(cfg);
        if (!csv) {
            code = fail(REDD_ERR_ARGUMENT);
        } else {
            code = write_file(opts.out_dir, "bounds.csv", csv);
            redd_string_free(csv);
        }
    }
    redd_config_free(cfg);
    return code;
}

int cmd_simulate(const CommonOpts& opts) {
    int code = 0;
    redd_config* cfg = load_config(opts, &code);
    if (!cfg) return code;
    redd_trace* trace = nullptr;
    if (const auto st = redd_simulate(cfg, &trace); st != REDD_OK) {
        redd_config_free(cfg);
        return fail(st);
    }
    char* json = redd_trace_json(trace);
    std::cout << json;
    redd_string_free(json);
    if (!opts.out_dir.empty()) {
        char* csv = redd_trace_series_csv(trace);
        code = write_file(opts.out_dir, "trace.csv", csv);
        redd_string_free(csv);
    }
    redd_trace_free(trace);
    redd_config_free(cfg);
    return code;
}

int cmd_sweep(const CommonOpts& opts) {
    int code = 0;
    redd_config* cfg = load_config(opts, &code);
    if (!cfg) return code;
    redd_sweep* sweep = nullptr;
    if (const auto st = redd_sweep_run(cfg, &sweep); st != REDD_OK) {
        redd_config_free(cfg);
        return fail(st);
    }
    const std::string dir = opts.out_dir.empty() ? "." : opts.out_dir;
    char* csv = redd_sweep_csv(sweep);
    code = write_file(dir, "sweep.csv", csv);
    redd_string_free(csv);
    if (code == 0) {
        char* bcsv = redd_bounds_csv(cfg);
        if (!bcsv) {
            code = fail(REDD_ERR_ARGUMENT);
        } else {
            code = write_file(dir, "bounds.csv", bcsv);
            redd_string_free(bcsv);
        }
    }
    redd_sweep_free(sweep);
    redd_config_free(cfg);
    return code;
}

int cmd_validate(const CommonOpts& opts, bool self_test_fault) {
    int code = 0;
    redd_config* cfg = load_config(opts, &code);
    if (!cfg) return code;
    redd_validation* v = nullptr;
    if (const auto st = redd_validate_run(cfg, self_test_fault ? 1 : 0, &v); st != REDD_OK) {
        redd_config_free(cfg);
        return fail(st);
    }
    char* report = redd_validation_report(v);
    std::cout << report;
    redd_string_free(report);
    const bool passed = redd_validation_passed(v) != 0;
    redd_validation_free(v);
    redd_config_free(cfg);
    return passed ? 0 : static_cast<int>(REDD_ERR_VALIDATION);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Redundancy-d (R(d)) FIFO stability toolkit"};
    app.set_version_flag("--version", std::string("redd ") + redd_version());
    app.require_subcommand(1);

    CommonOpts opts;
    bool self_test_fault = false;

    auto* bounds = app.add_subcommand("bounds", "P_m table, lambda_lb, known bound, best bound");
    add_common(bounds, opts);
    auto* simulate = app.add_subcommand("simulate", "single long run with steady-state statistics");
    add_common(simulate, opts);
    auto* sweep = app.add_subcommand("sweep", "grid of (d, lambda) runs; writes sweep.csv and bounds.csv");
    add_common(sweep, opts);
    auto* lambda_m = app.add_subcommand("lambda-m", "gap-grid search for the optimization-based bound");
    add_common(lambda_m, opts);
    auto* validate = app.add_subcommand("validate", "recursion-vs-oracle and statistical validation battery");
    add_common(validate, opts);
    validate->add_flag("--self-test-fault", self_test_fault,
                       "perturb the recursion to verify the validator catches divergence");

    CLI11_PARSE(app, argc, argv);

    if (bounds->parsed()) return cmd_bounds(opts, false);
    if (simulate->parsed()) return cmd_simulate(opts);
    if (sweep->parsed()) return cmd_sweep(opts);
    if (lambda_m->parsed()) return cmd_bounds(opts, true);
    if (validate->parsed()) return cmd_validate(opts, self_test_fault);
    return 1;
}
