#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "redd/config.hpp"
#include "redd/errors.hpp"

using namespace redd;
using doctest::Approx;

namespace {

const char* kBasic = R"(
# example config
[system]
K = 10
d = 2
lambda = 0.3

[service]
kind = iid_finite
pmf = 10:0.9, 100:0.1

[simulation]
slots = 200000
seed = 42
stride = 50
parallelism = 4

[bounds]
lambda_m = on
method = mc
mc_samples = 5000
grid_cell_cap = 1234
)";

}  // namespace

TEST_CASE("parses a full config") {
    const auto cfg = ConfigFile::parse(kBasic);
    CHECK(cfg.system.K == 10);
    CHECK(cfg.system.ds == std::vector<int>{2});
    CHECK_FALSE(cfg.system.d_is_list);
    CHECK(cfg.system.lambdas == std::vector<double>{0.3});
    CHECK(cfg.service.kind() == SpecKind::IidFinite);
    CHECK(cfg.simulation.slots == 200000);
    CHECK(cfg.simulation.seed == 42);
    CHECK(cfg.burn_in_effective() == 20000);  // default: slots / 10
    CHECK(cfg.bounds.lambda_m);
    CHECK(cfg.bounds.method == Method::MonteCarlo);
    CHECK(cfg.bounds.mc_samples == 5000);
    CHECK(cfg.bounds.grid_cell_cap == 1234);

    const auto rc = cfg.run_config(2, 0.3);
    CHECK(rc.K == 10);
    CHECK(rc.burn_in == 20000);
    CHECK(rc.stride == 50);
    CHECK(rc.spec.kind() == SpecKind::IidFinite);
}

TEST_CASE("lists and ranges expand") {
    const auto cfg = ConfigFile::parse(R"(
[system]
K = 10
d_list = 1:3, 10
lambda_list = 0.02:0.06:0.02, 0.5

[service]
kind = identical_replicas
pmf = 4:1.0
)");
    CHECK(cfg.system.ds == std::vector<int>{1, 2, 3, 10});
    REQUIRE(cfg.system.lambdas.size() == 4);
    CHECK(cfg.system.lambdas[0] == Approx(0.02));
    CHECK(cfg.system.lambdas[2] == Approx(0.06));
    CHECK(cfg.system.lambdas[3] == Approx(0.5));
    CHECK(cfg.system.d_is_list);
    CHECK(cfg.system.lambda_is_list);
}

TEST_CASE("joint and profile service kinds") {
    const auto joint = ConfigFile::parse(R"(
[system]
K = 3
d = 2
[service]
kind = joint_finite
atom = 2,5,9 : 0.5
atom = 4,4,4 : 0.5
)");
    CHECK(joint.service.kind() == SpecKind::JointFinite);
    CHECK(joint.service.joint_K() == 3);

    const auto profile = ConfigFile::parse(R"(
[system]
K = 30
d_list = 1,2,3
[service]
kind = moment_profile
profile = 30, 21.2, 17.3
)");
    CHECK(profile.service.kind() == SpecKind::MomentProfile);
    CHECK(profile.service.min_moment(2) == Approx(21.2));
}

TEST_CASE("serialization round-trips to a fixed point") {
    const auto cfg = ConfigFile::parse(kBasic);
    const auto text1 = cfg.serialize();
    const auto cfg2 = ConfigFile::parse(text1);
    const auto text2 = cfg2.serialize();
    CHECK(text1 == text2);
    CHECK(cfg2.system.K == cfg.system.K);
    CHECK(cfg2.bounds.grid_cell_cap == cfg.bounds.grid_cell_cap);
    CHECK(cfg2.system.lambdas == cfg.system.lambdas);

    // joint laws round-trip through their symmetrized atoms
    const auto joint = ConfigFile::parse(R"(
[system]
K = 3
d = 2
[service]
kind = joint_finite
atom = 2,5,9 : 1.0
)");
    const auto jtext = joint.serialize();
    const auto joint2 = ConfigFile::parse(jtext);
    CHECK(joint2.serialize() == jtext);
    CHECK(joint2.service.atoms().size() == joint.service.atoms().size());
}

TEST_CASE("rejects malformed configs") {
    // unknown key
    CHECK_THROWS_WITH_AS(ConfigFile::parse("[system]\nK = 3\nd = 1\nfoo = 1\n[service]\nkind = iid_finite\npmf = 5:1.0\n"),
                         doctest::Contains("unknown key"), ConfigError);
    // unknown section
    CHECK_THROWS_WITH_AS(ConfigFile::parse("[system]\nK = 3\nd = 1\n[extra]\nx = 1\n[service]\nkind = iid_finite\npmf = 5:1.0\n"),
                         doctest::Contains("unknown section"), ConfigError);
    // duplicate key
    CHECK_THROWS_WITH_AS(ConfigFile::parse("[system]\nK = 3\nK = 4\nd = 1\n[service]\nkind = iid_finite\npmf = 5:1.0\n"),
                         doctest::Contains("duplicate"), ConfigError);
    // both d and d_list
    CHECK_THROWS_AS(ConfigFile::parse("[system]\nK = 3\nd = 1\nd_list = 1,2\n[service]\nkind = iid_finite\npmf = 5:1.0\n"),
                    ConfigError);
    // lambda out of range
    CHECK_THROWS_AS(ConfigFile::parse("[system]\nK = 3\nd = 1\nlambda = 1.0\n[service]\nkind = iid_finite\npmf = 5:1.0\n"),
                    ConfigError);
    // d out of range
    CHECK_THROWS_AS(ConfigFile::parse("[system]\nK = 3\nd = 4\n[service]\nkind = iid_finite\npmf = 5:1.0\n"),
                    ConfigError);
    // missing sections
    CHECK_THROWS_AS(ConfigFile::parse("[system]\nK = 3\nd = 1\n"), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse("[service]\nkind = iid_finite\npmf = 5:1.0\n"), ConfigError);
    // bad pmf sum surfaces as a config error
    CHECK_THROWS_AS(ConfigFile::parse("[system]\nK = 3\nd = 1\n[service]\nkind = iid_finite\npmf = 5:0.7\n"),
                    ConfigError);
    // unknown kind
    CHECK_THROWS_AS(ConfigFile::parse("[system]\nK = 3\nd = 1\n[service]\nkind = exotic\npmf = 5:1.0\n"),
                    ConfigError);
    // atom length mismatch
    CHECK_THROWS_AS(ConfigFile::parse("[system]\nK = 3\nd = 1\n[service]\nkind = joint_finite\natom = 1,2 : 1.0\n"),
                    ConfigError);
    // profile shorter than requested d
    CHECK_THROWS_WITH_AS(ConfigFile::parse("[system]\nK = 30\nd = 5\n[service]\nkind = moment_profile\nprofile = 30, 21\n"),
                         doctest::Contains("min-moments"), ConfigError);
    // burn_in >= slots
    CHECK_THROWS_AS(ConfigFile::parse("[system]\nK = 3\nd = 1\n[service]\nkind = iid_finite\npmf = 5:1.0\n"
                                      "[simulation]\nslots = 100\nburn_in = 100\n"),
                    ConfigError);
    // key outside a section / malformed lines
    CHECK_THROWS_AS(ConfigFile::parse("K = 3\n"), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse("[system\nK = 3\n"), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse("[system]\nK 3\n"), ConfigError);
    // missing file
    CHECK_THROWS_AS(ConfigFile::load("/nonexistent/path.ini"), ConfigError);
}

TEST_CASE("error messages carry line numbers") {
    try {
        ConfigFile::parse("[system]\nK = zebra\nd = 1\n[service]\nkind = iid_finite\npmf = 5:1.0\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}
