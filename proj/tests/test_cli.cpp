// End-to-end checks of the redd binary: subcommands, exit-code contract,
// output files. The binary path comes from the build via REDD_CLI_BIN.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct CmdResult {
    int exit_code;
    std::string output;  // stdout + stderr
};

CmdResult run_cli(const std::string& args) {
    const std::string cmd = std::string(REDD_CLI_BIN) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("redd_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int counter;
};
int TempDir::counter = 0;

fs::path write_config(const TempDir& dir, const std::string& name, const std::string& text) {
    const auto p = dir.path / name;
    std::ofstream(p) << text;
    return p;
}

const char* kSmall = R"([system]
K = 3
d = 2
lambda = 0.1

[service]
kind = iid_finite
pmf = 10:0.9, 100:0.1

[simulation]
slots = 20000
seed = 1
)";

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return s;
}

}  // namespace

TEST_CASE("bounds prints the report and exits 0") {
    TempDir dir;
    const auto cfg = write_config(dir, "c.ini", kSmall);
    const auto res = run_cli("bounds --config " + cfg.string());
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("\"lambda_lb\"") != std::string::npos);
    CHECK(res.output.find("2/3") != std::string::npos);
}

TEST_CASE("config errors exit 2") {
    TempDir dir;
    const auto res = run_cli("bounds --config " + (dir.path / "missing.ini").string());
    CHECK(res.exit_code == 2);

    const auto bad = write_config(dir, "bad.ini", "[system]\nK = \n");
    CHECK(run_cli("bounds --config " + bad.string()).exit_code == 2);

    // no config at all
    CHECK(run_cli("bounds").exit_code == 2);
}

TEST_CASE("REDD_CONFIG provides the default config path") {
    TempDir dir;
    const auto cfg = write_config(dir, "c.ini", kSmall);
    const std::string cmd = "REDD_CONFIG=" + cfg.string() + " " + std::string(REDD_CLI_BIN) + " bounds 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
    const int status = pclose(pipe);
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(out.find("lambda_lb") != std::string::npos);
}

TEST_CASE("lambda-m on a moment profile exits 3") {
    TempDir dir;
    const auto cfg = write_config(dir, "p.ini", R"([system]
K = 30
d = 2
[service]
kind = moment_profile
profile = 60, 40
)");
    const auto res = run_cli("lambda-m --config " + cfg.string());
    CHECK(res.exit_code == 3);
    CHECK(res.output.find("error:") != std::string::npos);

    // plain bounds on the same profile works
    CHECK(run_cli("bounds --config " + cfg.string()).exit_code == 0);
}

TEST_CASE("unwritable output directory exits 4") {
    TempDir dir;
    const auto cfg = write_config(dir, "c.ini", kSmall);
    // a path through an existing regular file cannot become a directory
    const auto blocker = write_config(dir, "blocker", "x");
    const auto res = run_cli("bounds --config " + cfg.string() + " --out " + (blocker / "sub").string());
    CHECK(res.exit_code == 4);
}

TEST_CASE("validate exits 0 normally and 5 with an injected fault") {
    TempDir dir;
    const auto cfg = write_config(dir, "c.ini", kSmall);
    const auto ok = run_cli("validate --config " + cfg.string());
    CHECK(ok.exit_code == 0);
    CHECK(ok.output.find("all checks passed") != std::string::npos);

    const auto fault = run_cli("validate --config " + cfg.string() + " --self-test-fault");
    CHECK(fault.exit_code == 5);
    CHECK(fault.output.find("slot 1000") != std::string::npos);
}

TEST_CASE("simulate writes a trace with metadata") {
    TempDir dir;
    const auto cfg = write_config(dir, "c.ini", kSmall);
    const auto res = run_cli("simulate --config " + cfg.string() + " --out " + dir.path.string());
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("\"verdict\"") != std::string::npos);
    const auto csv = slurp(dir.path / "trace.csv");
    CHECK(csv.rfind("# redd 0.1.0 rng=mt19937_64 seed=1", 0) == 0);
    CHECK(csv.find("slot,total_workload") != std::string::npos);
}

TEST_CASE("sweep writes both CSVs, identically for any worker count") {
    TempDir dir;
    const auto cfg = write_config(dir, "s.ini", R"([system]
K = 4
d_list = 1,2
lambda_list = 0.1,0.2

[service]
kind = iid_finite
pmf = 10:0.9, 100:0.1

[simulation]
slots = 20000
seed = 3
)");
    const auto w1 = dir.path / "w1";
    const auto w8 = dir.path / "w8";
    CHECK(run_cli("sweep --config " + cfg.string() + " --out " + w1.string() + " --workers 1").exit_code == 0);
    CHECK(run_cli("sweep --config " + cfg.string() + " --out " + w8.string() + " --workers 8").exit_code == 0);
    CHECK(slurp(w1 / "sweep.csv") == slurp(w8 / "sweep.csv"));
    CHECK(slurp(w1 / "bounds.csv") == slurp(w8 / "bounds.csv"));

    const auto sweep_text = slurp(w1 / "sweep.csv");
    CHECK(sweep_text.find("d,lambda,mean_workload,slope,verdict,slots,seed") != std::string::npos);
    // 4 cells + metadata + header
    CHECK(std::count(sweep_text.begin(), sweep_text.end(), '\n') == 6);

    // empty lambda list is a config error
    const auto empty = write_config(dir, "empty.ini", R"([system]
K = 4
d_list = 1,2
lambda_list =
[service]
kind = iid_finite
pmf = 10:0.9, 100:0.1
)");
    CHECK(run_cli("sweep --config " + empty.string()).exit_code == 2);
}

TEST_CASE("seed override changes the stream") {
    TempDir dir;
    const auto cfg = write_config(dir, "c.ini", kSmall);
    const auto a = run_cli("simulate --config " + cfg.string());
    const auto b = run_cli("simulate --config " + cfg.string() + " --seed 9");
    const auto c = run_cli("simulate --config " + cfg.string());
    CHECK(a.exit_code == 0);
    CHECK(a.output != b.output);
    CHECK(a.output == c.output);
}

TEST_CASE("usage errors exit 1") {
    CHECK(run_cli("frobnicate").exit_code == 1);
    CHECK(run_cli("").exit_code == 1);
}
