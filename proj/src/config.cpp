#include "redd/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "redd/errors.hpp"

namespace redd {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

[[noreturn]] void fail(int line, const std::string& what) {
    throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

struct RawEntry {
    std::string value;
    int line;
};

struct RawSection {
    // ordered (key, value, line); repeated keys only allowed for "atom"
    std::vector<std::pair<std::string, RawEntry>> entries;

    const RawEntry* find(const std::string& key) const {
        for (const auto& [k, v] : entries)
            if (k == key) return &v;
        return nullptr;
    }
};

long long parse_int(const std::string& s, int line) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(trim(s), &pos);
        if (pos != trim(s).size()) fail(line, "trailing characters in integer '" + s + "'");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        fail(line, "expected integer, got '" + s + "'");
    }
}

std::uint64_t parse_u64(const std::string& s, int line) {
    const long long v = parse_int(s, line);
    if (v < 0) fail(line, "expected nonnegative integer, got '" + s + "'");
    return static_cast<std::uint64_t>(v);
}

double parse_double(const std::string& s, int line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(trim(s), &pos);
        if (pos != trim(s).size()) fail(line, "trailing characters in number '" + s + "'");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        fail(line, "expected number, got '" + s + "'");
    }
}

bool parse_bool(const std::string& s, int line) {
    const std::string v = trim(s);
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    fail(line, "expected on/off, got '" + s + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

// token: scalar or start:stop[:step] range (inclusive stop, within 1e-9)
void expand_double_token(const std::string& tok, int line, std::vector<double>& out) {
    const auto parts = split(tok, ':');
    if (parts.size() == 1) {
        out.push_back(parse_double(parts[0], line));
    } else if (parts.size() == 2 || parts.size() == 3) {
        const double start = parse_double(parts[0], line);
        const double stop = parse_double(parts[1], line);
        const double step = parts.size() == 3 ? parse_double(parts[2], line) : 1.0;
        if (!(step > 0.0)) fail(line, "range step must be positive");
        if (stop < start - 1e-9) fail(line, "range stop below start");
        const long long n = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
        for (long long i = 0; i <= n; ++i) out.push_back(start + static_cast<double>(i) * step);
    } else {
        fail(line, "bad range '" + tok + "'");
    }
}

std::vector<double> parse_double_list(const std::string& s, int line) {
    std::vector<double> out;
    for (const auto& tok : split(s, ',')) {
        if (trim(tok).empty()) fail(line, "empty list element");
        expand_double_token(trim(tok), line, out);
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& s, int line) {
    std::vector<int> out;
    for (const auto& tok : split(s, ',')) {
        const std::string t = trim(tok);
        if (t.empty()) fail(line, "empty list element");
        const auto parts = split(t, ':');
        if (parts.size() == 1) {
            out.push_back(static_cast<int>(parse_int(parts[0], line)));
        } else if (parts.size() == 2 || parts.size() == 3) {
            const int start = static_cast<int>(parse_int(parts[0], line));
            const int stop = static_cast<int>(parse_int(parts[1], line));
            const int step = parts.size() == 3 ? static_cast<int>(parse_int(parts[2], line)) : 1;
            if (step < 1) fail(line, "range step must be >= 1");
            for (int v = start; v <= stop; v += step) out.push_back(v);
        } else {
            fail(line, "bad range '" + t + "'");
        }
    }
    return out;
}

std::vector<PmfEntry> parse_pmf(const std::string& s, int line) {
    std::vector<PmfEntry> out;
    for (const auto& tok : split(s, ',')) {
        const auto parts = split(trim(tok), ':');
        if (parts.size() != 2) fail(line, "pmf entries are value:prob, got '" + tok + "'");
        out.push_back(PmfEntry{parse_int(parts[0], line), parse_double(parts[1], line)});
    }
    return out;
}

JointAtom parse_atom(const std::string& s, int line) {
    const auto parts = split(s, ':');
    if (parts.size() != 2) fail(line, "atom entries are v1,...,vK : prob, got '" + s + "'");
    JointAtom a;
    for (const auto& tok : split(parts[0], ',')) a.values.push_back(parse_int(tok, line));
    a.prob = parse_double(parts[1], line);
    return a;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void check_known_keys(const RawSection& sec, const std::set<std::string>& known,
                      const std::string& section_name) {
    std::set<std::string> seen;
    for (const auto& [k, v] : sec.entries) {
        if (!known.count(k)) fail(v.line, "unknown key '" + k + "' in [" + section_name + "]");
        if (k != "atom" && !seen.insert(k).second) fail(v.line, "duplicate key '" + k + "'");
    }
}

}  // namespace

RunConfig ConfigFile::run_config(int d, double lambda) const {
    RunConfig rc;
    rc.K = system.K;
    rc.d = d;
    rc.lambda = lambda;
    rc.slots = simulation.slots;
    rc.burn_in = burn_in_effective();
    rc.seed = simulation.seed;
    rc.stride = simulation.stride;
    rc.spec = service;
    return rc;
}

ConfigFile ConfigFile::parse(const std::string& text) {
    std::map<std::string, RawSection> sections;
    std::vector<std::string> section_order;
    {
        std::istringstream in(text);
        std::string raw;
        std::string current;
        int line = 0;
        while (std::getline(in, raw)) {
            ++line;
            std::string s = raw;
            const auto hash = s.find('#');
            if (hash != std::string::npos) s = s.substr(0, hash);
            s = trim(s);
            if (s.empty()) continue;
            if (s.front() == '[') {
                if (s.back() != ']') fail(line, "malformed section header '" + raw + "'");
                current = trim(s.substr(1, s.size() - 2));
                if (current != "system" && current != "service" && current != "simulation" && current != "bounds")
                    fail(line, "unknown section [" + current + "]");
                if (!sections.count(current)) section_order.push_back(current);
                sections[current];  // create
                continue;
            }
            const auto eq = s.find('=');
            if (eq == std::string::npos) fail(line, "expected key = value, got '" + raw + "'");
            if (current.empty()) fail(line, "key outside any section");
            const std::string key = trim(s.substr(0, eq));
            const std::string value = trim(s.substr(eq + 1));
            if (key.empty()) fail(line, "empty key");
            sections[current].entries.emplace_back(key, RawEntry{value, line});
        }
    }

    if (!sections.count("system")) throw ConfigError("config: missing [system] section");
    if (!sections.count("service")) throw ConfigError("config: missing [service] section");

    ConfigFile cfg;

    // [system]
    {
        const auto& sec = sections["system"];
        check_known_keys(sec, {"K", "d", "d_list", "lambda", "lambda_list"}, "system");
        const auto* k = sec.find("K");
        if (!k) throw ConfigError("config: [system] K is required");
        cfg.system.K = static_cast<int>(parse_int(k->value, k->line));
        if (cfg.system.K < 1) fail(k->line, "K must be >= 1");

        const auto* d = sec.find("d");
        const auto* dl = sec.find("d_list");
        if ((d == nullptr) == (dl == nullptr))
            throw ConfigError("config: [system] needs exactly one of d / d_list");
        if (d) {
            cfg.system.ds = {static_cast<int>(parse_int(d->value, d->line))};
        } else {
            cfg.system.ds = parse_int_list(dl->value, dl->line);
            cfg.system.d_is_list = true;
            if (cfg.system.ds.empty()) fail(dl->line, "d_list must be non-empty");
        }
        for (int dv : cfg.system.ds)
            if (dv < 1 || dv > cfg.system.K)
                throw ConfigError("config: d values must satisfy 1 <= d <= K");

        const auto* l = sec.find("lambda");
        const auto* ll = sec.find("lambda_list");
        if (l && ll) throw ConfigError("config: [system] takes at most one of lambda / lambda_list");
        if (l) {
            cfg.system.lambdas = {parse_double(l->value, l->line)};
        } else if (ll) {
            cfg.system.lambdas = parse_double_list(ll->value, ll->line);
            cfg.system.lambda_is_list = true;
            if (cfg.system.lambdas.empty()) fail(ll->line, "lambda_list must be non-empty");
        }
        for (double lv : cfg.system.lambdas)
            if (!(lv > 0.0 && lv < 1.0)) throw ConfigError("config: lambda values must lie in (0, 1)");
    }

    // [service]
    {
        const auto& sec = sections["service"];
        check_known_keys(sec, {"kind", "pmf", "atom", "profile"}, "service");
        const auto* kind = sec.find("kind");
        if (!kind) throw ConfigError("config: [service] kind is required");
        const std::string kn = trim(kind->value);
        const auto* pmf = sec.find("pmf");
        const auto* profile = sec.find("profile");
        std::vector<JointAtom> atoms;
        for (const auto& [k, v] : sec.entries)
            if (k == "atom") atoms.push_back(parse_atom(v.value, v.line));

        if (kn == "iid_finite" || kn == "identical_replicas") {
            if (!pmf) throw ConfigError("config: [service] kind " + kn + " needs pmf");
            if (!atoms.empty() || profile) throw ConfigError("config: [service] kind " + kn + " takes only pmf");
            cfg.service = kn == "iid_finite" ? ServiceSpec::iid_finite(parse_pmf(pmf->value, pmf->line))
                                             : ServiceSpec::identical_replicas(parse_pmf(pmf->value, pmf->line));
        } else if (kn == "joint_finite") {
            if (atoms.empty()) throw ConfigError("config: [service] kind joint_finite needs atom entries");
            if (pmf || profile) throw ConfigError("config: [service] kind joint_finite takes only atom entries");
            cfg.service = ServiceSpec::joint_finite(cfg.system.K, std::move(atoms));
        } else if (kn == "moment_profile") {
            if (!profile) throw ConfigError("config: [service] kind moment_profile needs profile");
            if (pmf || !atoms.empty()) throw ConfigError("config: [service] kind moment_profile takes only profile");
            cfg.service = ServiceSpec::moment_profile(parse_double_list(profile->value, profile->line));
        } else {
            fail(kind->line, "unknown service kind '" + kn + "'");
        }
    }

    // [simulation]
    if (sections.count("simulation")) {
        const auto& sec = sections["simulation"];
        check_known_keys(sec, {"slots", "burn_in", "seed", "stride", "parallelism"}, "simulation");
        if (const auto* e = sec.find("slots")) cfg.simulation.slots = parse_u64(e->value, e->line);
        if (const auto* e = sec.find("burn_in")) cfg.simulation.burn_in = parse_u64(e->value, e->line);
        if (const auto* e = sec.find("seed")) cfg.simulation.seed = parse_u64(e->value, e->line);
        if (const auto* e = sec.find("stride")) {
            cfg.simulation.stride = static_cast<int>(parse_int(e->value, e->line));
            if (cfg.simulation.stride < 1) fail(e->line, "stride must be >= 1");
        }
        if (const auto* e = sec.find("parallelism")) {
            cfg.simulation.parallelism = static_cast<int>(parse_int(e->value, e->line));
            if (cfg.simulation.parallelism < 1) fail(e->line, "parallelism must be >= 1");
        }
        if (cfg.simulation.slots < 1) throw ConfigError("config: slots must be >= 1");
        if (cfg.burn_in_effective() >= cfg.simulation.slots)
            throw ConfigError("config: burn_in must be < slots");
    }

    // [bounds]
    if (sections.count("bounds")) {
        const auto& sec = sections["bounds"];
        check_known_keys(sec, {"lambda_m", "method", "mc_samples", "grid_cell_cap"}, "bounds");
        if (const auto* e = sec.find("lambda_m")) cfg.bounds.lambda_m = parse_bool(e->value, e->line);
        if (const auto* e = sec.find("method")) {
            const std::string m = trim(e->value);
            if (m == "exact")
                cfg.bounds.method = Method::Exact;
            else if (m == "mc")
                cfg.bounds.method = Method::MonteCarlo;
            else
                fail(e->line, "method must be exact or mc");
        }
        if (const auto* e = sec.find("mc_samples")) {
            cfg.bounds.mc_samples = parse_u64(e->value, e->line);
            if (cfg.bounds.mc_samples < 1) fail(e->line, "mc_samples must be >= 1");
        }
        if (const auto* e = sec.find("grid_cell_cap")) cfg.bounds.grid_cell_cap = parse_u64(e->value, e->line);
    }

    // cross-checks against module preconditions
    const int max_order = cfg.service.max_moment_order();
    for (int dv : cfg.system.ds)
        if (dv > max_order)
            throw ConfigError("config: service law provides min-moments up to order " +
                              std::to_string(max_order) + ", d = " + std::to_string(dv) + " requested");
    return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string ConfigFile::serialize() const {
    std::ostringstream out;
    out << "[system]\n";
    out << "K = " << system.K << "\n";
    if (system.d_is_list) {
        out << "d_list = ";
        for (std::size_t i = 0; i < system.ds.size(); ++i) out << (i ? "," : "") << system.ds[i];
        out << "\n";
    } else {
        out << "d = " << system.ds.front() << "\n";
    }
    if (!system.lambdas.empty()) {
        if (system.lambda_is_list) {
            out << "lambda_list = ";
            for (std::size_t i = 0; i < system.lambdas.size(); ++i)
                out << (i ? "," : "") << fmt_double(system.lambdas[i]);
            out << "\n";
        } else {
            out << "lambda = " << fmt_double(system.lambdas.front()) << "\n";
        }
    }

    out << "\n[service]\n";
    out << "kind = " << service.kind_name() << "\n";
    switch (service.kind()) {
        case SpecKind::IidFinite:
        case SpecKind::IdenticalReplicas:
            out << "pmf = ";
            for (std::size_t i = 0; i < service.pmf().size(); ++i)
                out << (i ? ", " : "") << service.pmf()[i].value << ":" << fmt_double(service.pmf()[i].prob);
            out << "\n";
            break;
        case SpecKind::JointFinite:
            for (const auto& a : service.atoms()) {
                out << "atom = ";
                for (std::size_t i = 0; i < a.values.size(); ++i) out << (i ? "," : "") << a.values[i];
                out << " : " << fmt_double(a.prob) << "\n";
            }
            break;
        case SpecKind::MomentProfile:
            out << "profile = ";
            for (std::size_t i = 0; i < service.profile().size(); ++i)
                out << (i ? ", " : "") << fmt_double(service.profile()[i]);
            out << "\n";
            break;
    }

    out << "\n[simulation]\n";
    out << "slots = " << simulation.slots << "\n";
    out << "burn_in = " << burn_in_effective() << "\n";
    out << "seed = " << simulation.seed << "\n";
    out << "stride = " << simulation.stride << "\n";
    out << "parallelism = " << simulation.parallelism << "\n";

    out << "\n[bounds]\n";
    out << "lambda_m = " << (bounds.lambda_m ? "on" : "off") << "\n";
    out << "method = " << method_name(bounds.method) << "\n";
    out << "mc_samples = " << bounds.mc_samples << "\n";
    out << "grid_cell_cap = " << bounds.grid_cell_cap << "\n";
    return out.str();
}

}  // namespace redd
