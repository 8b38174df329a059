#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "redd/rng.hpp"

namespace redd {

enum class SpecKind { IidFinite, IdenticalReplicas, JointFinite, MomentProfile };

struct PmfEntry {
    std::int64_t value;  // >= 1
    double prob;
};

struct JointAtom {
    std::vector<std::int64_t> values;
    double prob;
};

struct Moments {
    double mean;
    std::optional<double> second;  // absent for moment profiles
};

// Exchangeable joint law of the task service-time vector. Immutable after
// construction; sampling takes an externally supplied stream.
//
// Kinds:
//   iid_finite         coordinates i.i.d. with a finite integer pmf
//   identical_replicas one draw shared by all coordinates (B_1 = ... = B_K)
//   joint_finite       explicit pmf over K-vectors, symmetrized at load time
//   moment_profile     bare g[j] = E[min of j coordinates]; bounds-only
class ServiceSpec {
public:
    ServiceSpec() = default;

    static ServiceSpec iid_finite(std::vector<PmfEntry> pmf);
    static ServiceSpec identical_replicas(std::vector<PmfEntry> pmf);
    static ServiceSpec joint_finite(int K, std::vector<JointAtom> atoms);
    static ServiceSpec moment_profile(std::vector<double> g);

    SpecKind kind() const { return kind_; }
    std::string kind_name() const;
    bool samplable() const { return kind_ != SpecKind::MomentProfile; }
    bool enumerable() const { return kind_ != SpecKind::MomentProfile; }

    // Largest support value (finite kinds only).
    std::int64_t max_value() const;

    // Largest j for which min_moment(j) is defined; INT32_MAX for finite kinds.
    int max_moment_order() const;

    const std::vector<PmfEntry>& pmf() const { return pmf_; }
    const std::vector<JointAtom>& atoms() const { return atoms_; }
    int joint_K() const { return joint_K_; }
    const std::vector<double>& profile() const { return profile_; }

    // P(B_1 > t); 1 for t < 1, 0 beyond the support.
    double survival(std::int64_t t) const;

    // One draw of the K-vector.
    std::vector<std::int64_t> sample_vector(Rng& rng, int K) const;
    void sample_vector(Rng& rng, int K, std::vector<std::int64_t>& out) const;

    // One draw of B_1 (iid_finite / identical_replicas only).
    std::int64_t sample_scalar(Rng& rng) const;

    // Exact E[min of the first j coordinates].
    double min_moment(int j) const;

    // Exact mean and second moment of B_1 (second absent for profiles).
    Moments moments() const;

    // Joint law of the first m coordinates as explicit atoms (enumerable
    // kinds). Throws CapabilityError when the atom count would exceed the cap.
    std::vector<JointAtom> first_coords_law(int m, std::uint64_t atom_cap = (1u << 22)) const;

private:
    SpecKind kind_ = SpecKind::IidFinite;
    std::vector<PmfEntry> pmf_;       // iid / identical; sorted by value, deduplicated
    std::vector<double> cum_;         // cumulative probs aligned with pmf_
    std::vector<JointAtom> atoms_;    // joint, symmetrized, sorted
    int joint_K_ = 0;
    std::vector<double> profile_;

    std::int64_t draw_scalar(Rng& rng) const;
    std::size_t draw_atom(Rng& rng) const;
};

// Eq.-style time-scaling condition: E[min of d coordinates] > K.
bool time_scaling_check(const ServiceSpec& spec, int K, int d);

}  // namespace redd
