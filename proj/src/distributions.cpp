#include "redd/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>

#include "redd/errors.hpp"

namespace redd {

namespace {

constexpr double kProbTol = 1e-12;
constexpr int kJointSymmetrizeCap = 8;  // K! permutations per atom beyond this is not desk-scale

// Sort by value, merge duplicates, validate. Inputs outside the normalization
// tolerance are rejected, not renormalized.
std::vector<PmfEntry> canonicalize_pmf(std::vector<PmfEntry> pmf) {
    if (pmf.empty()) throw ConfigError("pmf must be non-empty");
    for (const auto& e : pmf) {
        if (e.value < 1) throw ConfigError("pmf support values must be >= 1");
        if (!(e.prob >= 0.0)) throw ConfigError("pmf probabilities must be >= 0");
    }
    std::sort(pmf.begin(), pmf.end(), [](const PmfEntry& a, const PmfEntry& b) { return a.value < b.value; });
    std::vector<PmfEntry> out;
    for (const auto& e : pmf) {
        if (!out.empty() && out.back().value == e.value)
            out.back().prob += e.prob;
        else
            out.push_back(e);
    }
    double total = 0.0;
    for (const auto& e : out) total += e.prob;
    if (std::abs(total - 1.0) > kProbTol)
        throw ConfigError("pmf probabilities must sum to 1 within 1e-12 (got " + std::to_string(total) + ")");
    return out;
}

std::vector<double> cumulative(const std::vector<PmfEntry>& pmf) {
    std::vector<double> cum;
    cum.reserve(pmf.size());
    double acc = 0.0;
    for (const auto& e : pmf) {
        acc += e.prob;
        cum.push_back(acc);
    }
    cum.back() = 1.0;
    return cum;
}

}  // namespace

ServiceSpec ServiceSpec::iid_finite(std::vector<PmfEntry> pmf) {
    ServiceSpec s;
    s.kind_ = SpecKind::IidFinite;
    s.pmf_ = canonicalize_pmf(std::move(pmf));
    s.cum_ = cumulative(s.pmf_);
    return s;
}

ServiceSpec ServiceSpec::identical_replicas(std::vector<PmfEntry> pmf) {
    ServiceSpec s;
    s.kind_ = SpecKind::IdenticalReplicas;
    s.pmf_ = canonicalize_pmf(std::move(pmf));
    s.cum_ = cumulative(s.pmf_);
    return s;
}

ServiceSpec ServiceSpec::joint_finite(int K, std::vector<JointAtom> atoms) {
    if (K < 1) throw ConfigError("joint_finite needs K >= 1");
    if (K > kJointSymmetrizeCap)
        throw CapabilityError("joint_finite symmetrization supports K <= " +
                              std::to_string(kJointSymmetrizeCap) + " (asked for K=" + std::to_string(K) + ")");
    if (atoms.empty()) throw ConfigError("joint_finite needs at least one atom");
    double total = 0.0;
    for (const auto& a : atoms) {
        if (static_cast<int>(a.values.size()) != K)
            throw ConfigError("joint_finite atom length must equal K");
        for (auto v : a.values)
            if (v < 1) throw ConfigError("joint_finite support values must be >= 1");
        if (!(a.prob >= 0.0)) throw ConfigError("joint_finite probabilities must be >= 0");
        total += a.prob;
    }
    if (std::abs(total - 1.0) > kProbTol)
        throw ConfigError("joint_finite probabilities must sum to 1 within 1e-12");

    // Symmetrize: average over all coordinate permutations so Assumption-1
    // homogeneity holds exactly.
    std::uint64_t fact = 1;
    for (int i = 2; i <= K; ++i) fact *= static_cast<std::uint64_t>(i);
    std::map<std::vector<std::int64_t>, double> sym;
    std::vector<int> perm(static_cast<std::size_t>(K));
    for (const auto& a : atoms) {
        const double share = a.prob / static_cast<double>(fact);
        for (int i = 0; i < K; ++i) perm[static_cast<std::size_t>(i)] = i;
        std::vector<std::int64_t> permuted(static_cast<std::size_t>(K));
        do {
            for (int i = 0; i < K; ++i)
                permuted[static_cast<std::size_t>(i)] = a.values[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
            sym[permuted] += share;
        } while (std::next_permutation(perm.begin(), perm.end()));
    }

    ServiceSpec s;
    s.kind_ = SpecKind::JointFinite;
    s.joint_K_ = K;
    s.atoms_.reserve(sym.size());
    double acc = 0.0;
    for (auto& [v, p] : sym) {
        s.atoms_.push_back(JointAtom{v, p});
        acc += p;
    }
    s.cum_.reserve(s.atoms_.size());
    double run = 0.0;
    for (const auto& a : s.atoms_) {
        run += a.prob;
        s.cum_.push_back(run / acc);
    }
    s.cum_.back() = 1.0;
    return s;
}

ServiceSpec ServiceSpec::moment_profile(std::vector<double> g) {
    if (g.empty()) throw ConfigError("moment profile must be non-empty");
    for (std::size_t j = 0; j < g.size(); ++j) {
        if (!(g[j] > 0.0)) throw ConfigError("moment profile entries must be positive");
        if (j > 0 && g[j] > g[j - 1] + 1e-12)
            throw ConfigError("moment profile must be non-increasing in j");
    }
    ServiceSpec s;
    s.kind_ = SpecKind::MomentProfile;
    s.profile_ = std::move(g);
    return s;
}

std::string ServiceSpec::kind_name() const {
    switch (kind_) {
        case SpecKind::IidFinite: return "iid_finite";
        case SpecKind::IdenticalReplicas: return "identical_replicas";
        case SpecKind::JointFinite: return "joint_finite";
        case SpecKind::MomentProfile: return "moment_profile";
    }
    return "?";
}

std::int64_t ServiceSpec::max_value() const {
    switch (kind_) {
        case SpecKind::IidFinite:
        case SpecKind::IdenticalReplicas:
            return pmf_.back().value;
        case SpecKind::JointFinite: {
            std::int64_t mx = 1;
            for (const auto& a : atoms_)
                for (auto v : a.values) mx = std::max(mx, v);
            return mx;
        }
        case SpecKind::MomentProfile:
            throw CapabilityError("moment profile has no support");
    }
    return 0;
}

int ServiceSpec::max_moment_order() const {
    if (kind_ == SpecKind::MomentProfile) return static_cast<int>(profile_.size());
    return std::numeric_limits<int>::max();
}

double ServiceSpec::survival(std::int64_t t) const {
    switch (kind_) {
        case SpecKind::IidFinite:
        case SpecKind::IdenticalReplicas: {
            if (t < pmf_.front().value) return 1.0;
            if (t >= pmf_.back().value) return 0.0;
            double tail = 0.0;
            for (auto it = pmf_.rbegin(); it != pmf_.rend() && it->value > t; ++it) tail += it->prob;
            return tail;
        }
        case SpecKind::JointFinite: {
            double tail = 0.0;
            for (const auto& a : atoms_)
                if (a.values.front() > t) tail += a.prob;
            return tail;
        }
        case SpecKind::MomentProfile:
            throw CapabilityError("moment profile has no pointwise law");
    }
    return 0.0;
}

std::int64_t ServiceSpec::draw_scalar(Rng& rng) const {
    const double u = uniform_u01(rng);
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
    const std::size_t idx = std::min(static_cast<std::size_t>(it - cum_.begin()), pmf_.size() - 1);
    return pmf_[idx].value;
}

std::int64_t ServiceSpec::sample_scalar(Rng& rng) const {
    if (kind_ != SpecKind::IidFinite && kind_ != SpecKind::IdenticalReplicas)
        throw std::invalid_argument("sample_scalar needs a scalar pmf kind");
    return draw_scalar(rng);
}

std::size_t ServiceSpec::draw_atom(Rng& rng) const {
    const double u = uniform_u01(rng);
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
    return std::min(static_cast<std::size_t>(it - cum_.begin()), atoms_.size() - 1);
}

void ServiceSpec::sample_vector(Rng& rng, int K, std::vector<std::int64_t>& out) const {
    if (K < 1) throw std::invalid_argument("K must be >= 1");
    out.resize(static_cast<std::size_t>(K));
    switch (kind_) {
        case SpecKind::IidFinite:
            for (auto& v : out) v = draw_scalar(rng);
            return;
        case SpecKind::IdenticalReplicas: {
            const std::int64_t v = draw_scalar(rng);
            std::fill(out.begin(), out.end(), v);
            return;
        }
        case SpecKind::JointFinite: {
            if (K != joint_K_)
                throw std::invalid_argument("joint_finite defined for K=" + std::to_string(joint_K_));
            out = atoms_[draw_atom(rng)].values;
            return;
        }
        case SpecKind::MomentProfile:
            throw CapabilityError("moment profile is not samplable");
    }
}

std::vector<std::int64_t> ServiceSpec::sample_vector(Rng& rng, int K) const {
    std::vector<std::int64_t> out;
    sample_vector(rng, K, out);
    return out;
}

double ServiceSpec::min_moment(int j) const {
    if (j < 1) throw std::invalid_argument("min_moment order must be >= 1");
    switch (kind_) {
        case SpecKind::IidFinite: {
            // E[min_j] = sum_{t>=0} P(B > t)^j over the finite support.
            // Powers taken by repeated multiplication so this accumulation is
            // bit-identical to the survival-product expectation kernel.
            double sum = 0.0;
            const std::int64_t top = pmf_.back().value;
            for (std::int64_t t = 0; t < top; ++t) {
                const double s = survival(t);
                double prod = 1.0;
                for (int k = 0; k < j; ++k) prod *= s;
                sum += prod;
            }
            return sum;
        }
        case SpecKind::IdenticalReplicas:
            return moments().mean;  // min of identical values
        case SpecKind::JointFinite: {
            if (j > joint_K_)
                throw std::invalid_argument("min_moment order exceeds joint dimension");
            double sum = 0.0;
            for (const auto& a : atoms_) {
                std::int64_t m = a.values[0];
                for (int k = 1; k < j; ++k) m = std::min(m, a.values[static_cast<std::size_t>(k)]);
                sum += a.prob * static_cast<double>(m);
            }
            return sum;
        }
        case SpecKind::MomentProfile:
            if (j > static_cast<int>(profile_.size()))
                throw std::invalid_argument("min_moment order exceeds profile length");
            return profile_[static_cast<std::size_t>(j - 1)];
    }
    return 0.0;
}

Moments ServiceSpec::moments() const {
    switch (kind_) {
        case SpecKind::IidFinite:
        case SpecKind::IdenticalReplicas: {
            double m1 = 0.0, m2 = 0.0;
            for (const auto& e : pmf_) {
                m1 += e.prob * static_cast<double>(e.value);
                m2 += e.prob * static_cast<double>(e.value) * static_cast<double>(e.value);
            }
            return {m1, m2};
        }
        case SpecKind::JointFinite: {
            double m1 = 0.0, m2 = 0.0;
            for (const auto& a : atoms_) {
                const double v = static_cast<double>(a.values[0]);
                m1 += a.prob * v;
                m2 += a.prob * v * v;
            }
            return {m1, m2};
        }
        case SpecKind::MomentProfile:
            return {profile_[0], std::nullopt};
    }
    return {0.0, std::nullopt};
}

std::vector<JointAtom> ServiceSpec::first_coords_law(int m, std::uint64_t atom_cap) const {
    if (m < 1) throw std::invalid_argument("first_coords_law order must be >= 1");
    switch (kind_) {
        case SpecKind::IidFinite: {
            const std::size_t s = pmf_.size();
            double cells = 1.0;
            for (int k = 0; k < m; ++k) cells *= static_cast<double>(s);
            if (cells > static_cast<double>(atom_cap))
                throw CapabilityError("iid joint support needs " + std::to_string(cells) +
                                      " atoms, cap is " + std::to_string(atom_cap));
            std::vector<JointAtom> out;
            out.reserve(static_cast<std::size_t>(cells));
            std::vector<std::size_t> idx(static_cast<std::size_t>(m), 0);
            for (;;) {
                JointAtom a;
                a.values.resize(static_cast<std::size_t>(m));
                a.prob = 1.0;
                for (int k = 0; k < m; ++k) {
                    a.values[static_cast<std::size_t>(k)] = pmf_[idx[static_cast<std::size_t>(k)]].value;
                    a.prob *= pmf_[idx[static_cast<std::size_t>(k)]].prob;
                }
                out.push_back(std::move(a));
                int k = m - 1;
                while (k >= 0 && ++idx[static_cast<std::size_t>(k)] == s) {
                    idx[static_cast<std::size_t>(k)] = 0;
                    --k;
                }
                if (k < 0) break;
            }
            return out;
        }
        case SpecKind::IdenticalReplicas: {
            std::vector<JointAtom> out;
            out.reserve(pmf_.size());
            for (const auto& e : pmf_)
                out.push_back(JointAtom{std::vector<std::int64_t>(static_cast<std::size_t>(m), e.value), e.prob});
            return out;
        }
        case SpecKind::JointFinite: {
            if (m > joint_K_)
                throw std::invalid_argument("first_coords_law order exceeds joint dimension");
            std::map<std::vector<std::int64_t>, double> grouped;
            for (const auto& a : atoms_) {
                std::vector<std::int64_t> prefix(a.values.begin(), a.values.begin() + m);
                grouped[prefix] += a.prob;
            }
            std::vector<JointAtom> out;
            out.reserve(grouped.size());
            for (auto& [v, p] : grouped) out.push_back(JointAtom{v, p});
            return out;
        }
        case SpecKind::MomentProfile:
            throw CapabilityError("moment profile is not enumerable");
    }
    return {};
}

bool time_scaling_check(const ServiceSpec& spec, int K, int d) {
    if (d < 1 || d > K) throw std::invalid_argument("time_scaling_check: need 1 <= d <= K");
    return spec.min_moment(d) > static_cast<double>(K);
}

}  // namespace redd
