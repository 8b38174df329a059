#include "redd.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "redd/bounds.hpp"
#include "redd/config.hpp"
#include "redd/errors.hpp"
#include "redd/report.hpp"
#include "redd/simulator.hpp"
#include "redd/validation.hpp"
#include "redd/version.hpp"

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = new (std::nothrow) char[s.size() + 1];
    if (!out) return nullptr;
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

redd_status set_error(redd_status st, const char* what) {
    g_last_error = what ? what : "";
    return st;
}

// Maps the core error taxonomy onto status codes.
redd_status translate_current_exception() {
    try {
        throw;
    } catch (const redd::ConfigError& e) {
        return set_error(REDD_ERR_CONFIG, e.what());
    } catch (const redd::CapabilityError& e) {
        return set_error(REDD_ERR_CAPABILITY, e.what());
    } catch (const std::exception& e) {
        return set_error(REDD_ERR_ARGUMENT, e.what());
    } catch (...) {
        return set_error(REDD_ERR_ARGUMENT, "unknown error");
    }
}

template <typename Fn>
redd_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return REDD_OK;
    } catch (...) {
        return translate_current_exception();
    }
}

}  // namespace

struct redd_config {
    redd::ConfigFile cfg;
    int workers_override = 0;  // 0: use config parallelism

    int workers() const { return workers_override > 0 ? workers_override : cfg.simulation.parallelism; }
};

struct redd_bounds {
    redd::BoundReport rep;
    redd::ServiceSpec spec;
    std::uint64_t seed = 0;
};

struct redd_trace {
    redd::Trace trace;
    redd::Verdict verdict;
};

struct redd_sweep {
    redd::SweepResult result;
};

struct redd_validation {
    redd::ValidationOutcome outcome;
};

extern "C" {

const char* redd_version(void) { return redd::kVersion; }

const char* redd_last_error(void) { return g_last_error.c_str(); }

void redd_string_free(char* s) { delete[] s; }

redd_status redd_config_load(const char* path, redd_config** out) {
    if (!path || !out) return set_error(REDD_ERR_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] { *out = new redd_config{redd::ConfigFile::load(path), 0}; });
}

redd_status redd_config_parse(const char* text, redd_config** out) {
    if (!text || !out) return set_error(REDD_ERR_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] { *out = new redd_config{redd::ConfigFile::parse(text), 0}; });
}

void redd_config_free(redd_config* cfg) { delete cfg; }

char* redd_config_serialize(const redd_config* cfg) {
    if (!cfg) return nullptr;
    return dup_string(cfg->cfg.serialize());
}

redd_status redd_config_set_seed(redd_config* cfg, uint64_t seed) {
    if (!cfg) return set_error(REDD_ERR_ARGUMENT, "null config");
    cfg->cfg.simulation.seed = seed;
    return REDD_OK;
}

redd_status redd_config_set_workers(redd_config* cfg, int workers) {
    if (!cfg) return set_error(REDD_ERR_ARGUMENT, "null config");
    if (workers < 1) return set_error(REDD_ERR_ARGUMENT, "workers must be >= 1");
    cfg->workers_override = workers;
    return REDD_OK;
}

int redd_config_K(const redd_config* cfg) { return cfg ? cfg->cfg.system.K : 0; }

int redd_config_d_count(const redd_config* cfg) {
    return cfg ? static_cast<int>(cfg->cfg.system.ds.size()) : 0;
}

int redd_config_d_at(const redd_config* cfg, int i) {
    if (!cfg || i < 0 || i >= static_cast<int>(cfg->cfg.system.ds.size())) return 0;
    return cfg->cfg.system.ds[static_cast<std::size_t>(i)];
}

int redd_config_lambda_count(const redd_config* cfg) {
    return cfg ? static_cast<int>(cfg->cfg.system.lambdas.size()) : 0;
}

double redd_config_lambda_at(const redd_config* cfg, int i) {
    if (!cfg || i < 0 || i >= static_cast<int>(cfg->cfg.system.lambdas.size())) return 0.0;
    return cfg->cfg.system.lambdas[static_cast<std::size_t>(i)];
}

uint64_t redd_config_seed(const redd_config* cfg) { return cfg ? cfg->cfg.simulation.seed : 0; }

int redd_config_lambda_m_enabled(const redd_config* cfg) {
    return cfg && cfg->cfg.bounds.lambda_m ? 1 : 0;
}

redd_status redd_bounds_compute(const redd_config* cfg, int d, int with_lambda_m, redd_bounds** out) {
    if (!cfg || !out) return set_error(REDD_ERR_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        redd::LambdaMOptions opts;
        opts.grid_cell_cap = cfg->cfg.bounds.grid_cell_cap;
        opts.mc_samples = cfg->cfg.bounds.mc_samples;
        opts.seed = cfg->cfg.simulation.seed;
        opts.parallelism = cfg->workers();
        auto rep = redd::make_bound_report(cfg->cfg.service, cfg->cfg.system.K, d, with_lambda_m != 0,
                                           cfg->cfg.bounds.method, opts);
        *out = new redd_bounds{std::move(rep), cfg->cfg.service, cfg->cfg.simulation.seed};
    });
}

void redd_bounds_free(redd_bounds* b) { delete b; }

int redd_bounds_K(const redd_bounds* b) { return b ? b->rep.K : 0; }
int redd_bounds_d(const redd_bounds* b) { return b ? b->rep.d : 0; }

double redd_bounds_pm(const redd_bounds* b, int m) {
    if (!b || m < 0 || m > b->rep.d) return -1.0;
    return b->rep.p_m_double[static_cast<std::size_t>(m)];
}

char* redd_bounds_pm_rational(const redd_bounds* b, int m) {
    if (!b || m < 0 || m > b->rep.d) return nullptr;
    return dup_string(b->rep.p_m[static_cast<std::size_t>(m)].str());
}

double redd_bounds_lambda_lb(const redd_bounds* b) { return b ? b->rep.lambda_lb : 0.0; }
double redd_bounds_known_bound(const redd_bounds* b) { return b ? b->rep.known_bound : 0.0; }
double redd_bounds_best_bound(const redd_bounds* b) { return b ? b->rep.best_bound : 0.0; }
int redd_bounds_time_scaling_ok(const redd_bounds* b) { return b && b->rep.time_scaling_ok ? 1 : 0; }
int redd_bounds_has_lambda_m(const redd_bounds* b) { return b && b->rep.lambda_m ? 1 : 0; }

double redd_bounds_lambda_m(const redd_bounds* b) {
    return b && b->rep.lambda_m ? b->rep.lambda_m->value : 0.0;
}

double redd_bounds_lambda_m_std_error(const redd_bounds* b) {
    return b && b->rep.lambda_m ? b->rep.lambda_m->std_error : 0.0;
}

int redd_bounds_gap_len(const redd_bounds* b) {
    return b && b->rep.lambda_m ? static_cast<int>(b->rep.lambda_m->delta.size()) : 0;
}

redd_status redd_bounds_gap(const redd_bounds* b, int64_t* buf, size_t cap) {
    if (!b || !buf) return set_error(REDD_ERR_ARGUMENT, "null argument");
    if (!b->rep.lambda_m) return set_error(REDD_ERR_ARGUMENT, "no lambda_m estimate in this report");
    const auto& delta = b->rep.lambda_m->delta;
    if (cap < delta.size()) return set_error(REDD_ERR_ARGUMENT, "buffer too small");
    for (std::size_t i = 0; i < delta.size(); ++i) buf[i] = delta[i];
    return REDD_OK;
}

char* redd_bounds_json(const redd_bounds* b) {
    if (!b) return nullptr;
    return dup_string(redd::bounds_report_json(b->rep, b->spec, b->seed));
}

char* redd_bounds_csv(const redd_config* cfg) {
    if (!cfg) return nullptr;
    try {
        return dup_string(redd::bounds_csv(cfg->cfg));
    } catch (...) {
        translate_current_exception();
        return nullptr;
    }
}

redd_status redd_simulate(const redd_config* cfg, redd_trace** out) {
    if (!cfg || !out) return set_error(REDD_ERR_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        if (cfg->cfg.system.d_is_list || cfg->cfg.system.ds.size() != 1)
            throw redd::ConfigError("simulate needs a scalar d (got a list)");
        if (cfg->cfg.system.lambda_is_list || cfg->cfg.system.lambdas.size() != 1)
            throw redd::ConfigError("simulate needs a scalar lambda");
        const auto rc = cfg->cfg.run_config(cfg->cfg.system.ds.front(), cfg->cfg.system.lambdas.front());
        auto trace = redd::run(rc);
        const auto verdict = redd::stability_verdict(trace);
        *out = new redd_trace{std::move(trace), verdict};
    });
}

void redd_trace_free(redd_trace* t) { delete t; }

double redd_trace_mean_total_workload(const redd_trace* t) { return t ? t->trace.mean_total_workload : 0.0; }
double redd_trace_max_total_workload(const redd_trace* t) { return t ? t->trace.max_total_workload : 0.0; }
uint64_t redd_trace_jobs(const redd_trace* t) { return t ? t->trace.jobs : 0; }
double redd_trace_mean_sojourn(const redd_trace* t) { return t ? t->trace.mean_sojourn : 0.0; }

const char* redd_trace_verdict(const redd_trace* t) {
    return t ? redd::to_string(t->verdict) : "?";
}

char* redd_trace_json(const redd_trace* t) {
    if (!t) return nullptr;
    return dup_string(redd::trace_json(t->trace, t->verdict));
}

char* redd_trace_series_csv(const redd_trace* t) {
    if (!t) return nullptr;
    return dup_string(redd::trace_series_csv(t->trace));
}

redd_status redd_sweep_run(const redd_config* cfg, redd_sweep** out) {
    if (!cfg || !out) return set_error(REDD_ERR_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        if (cfg->cfg.system.lambdas.empty())
            throw redd::ConfigError("sweep needs lambda or lambda_list in [system]");
        const auto base = cfg->cfg.run_config(cfg->cfg.system.ds.front(), cfg->cfg.system.lambdas.front());
        auto result = redd::sweep(base, cfg->cfg.system.ds, cfg->cfg.system.lambdas, cfg->workers());
        *out = new redd_sweep{std::move(result)};
    });
}

void redd_sweep_free(redd_sweep* s) { delete s; }

int redd_sweep_rows(const redd_sweep* s) { return s ? static_cast<int>(s->result.rows.size()) : 0; }

char* redd_sweep_csv(const redd_sweep* s) {
    if (!s) return nullptr;
    return dup_string(redd::sweep_csv(s->result));
}

redd_status redd_validate_run(const redd_config* cfg, int inject_step_fault, redd_validation** out) {
    if (!cfg || !out) return set_error(REDD_ERR_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        auto outcome = redd::run_validation(cfg->cfg, inject_step_fault != 0);
        *out = new redd_validation{std::move(outcome)};
    });
}

void redd_validation_free(redd_validation* v) { delete v; }

int redd_validation_passed(const redd_validation* v) { return v && v->outcome.passed ? 1 : 0; }

char* redd_validation_report(const redd_validation* v) {
    if (!v) return nullptr;
    return dup_string(v->outcome.report);
}

}  // extern "C"
