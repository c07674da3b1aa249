#include <doctest.h>

#include <fogbandit/cli.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fogbandit;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result cli(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("fogbandit_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}

std::size_t lines(const fs::path& p)
{
    const std::string s = slurp(p);
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

} // namespace

TEST_CASE("run writes the per-policy output set")
{
    const auto dir = scratch("run");
    const auto r = cli({"run", "--policies", "mix-aalto,eps-greedy:0.2", "--seeds", "2", "--out", dir.string(),
                        "--jobs", "2"});
    REQUIRE(r.code == 0);
    for (const char* sub : {"mix-aalto", "eps-greedy_0.2"}) {
        const auto d = dir / sub;
        for (const char* f : {"regret.csv", "decomposition.csv", "costs.csv", "seeds.csv"})
            CHECK(lines(d / f) == 3001);
        const auto summary = nlohmann::json::parse(slurp(d / "summary.json"));
        CHECK(summary["seeds"].size() == 2);
        CHECK(summary["rounds"] == 3000);
    }
    CHECK(slurp(dir / "mix-aalto" / "regret.csv").rfind("round,mean,std,bound\n", 0) == 0);
}

TEST_CASE("run is byte-identical across invocations and worker counts")
{
    const auto a = scratch("det_a"), b = scratch("det_b");
    REQUIRE(cli({"run", "--seeds", "3", "--out", a.string(), "--jobs", "1"}).code == 0);
    REQUIRE(cli({"run", "--seeds", "3", "--out", b.string(), "--jobs", "3"}).code == 0);
    for (const char* f : {"regret.csv", "decomposition.csv", "costs.csv", "seeds.csv"})
        CHECK(slurp(a / "mix-aalto" / f) == slurp(b / "mix-aalto" / f));
}

TEST_CASE("unknown policy is a usage error naming the token")
{
    const auto r = cli({"run", "--policies", "mix-aalto,thompson", "--seeds", "1", "--out",
                        scratch("bad").string()});
    CHECK(r.code == 2);
    const auto j = nlohmann::json::parse(r.err);
    CHECK(j["token"] == "thompson");
}

TEST_CASE("validate prints the normalized builtin scenario")
{
    const auto r = cli({"validate"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["horizon"] == 3000);
}

TEST_CASE("trace with an empty candidate set is rejected with the sample time")
{
    const auto dir = scratch("trace");
    std::ofstream(dir / "t.csv") << "time_s,vehicle_id,x_m,y_m,speed_mps,heading_flag\n"
                                    "0,0,0,0,10,1\n0,1,100,0,10,1\n"
                                    "30.5,0,0,0,10,1\n30.5,1,900,0,10,1\n";
    const auto r = cli({"validate", "--trace", (dir / "t.csv").string(), "--client-id", "0"});
    CHECK(r.code == 2);
    CHECK(r.err.find("30.5") != std::string::npos);
}

TEST_CASE("config with a constant exploration rule is rejected")
{
    const auto dir = scratch("cfg");
    std::ofstream(dir / "s.json") << R"({"base": "synthetic", "schedule": {"gamma_rule": "constant"}})";
    const auto r = cli({"validate", "--scenario", (dir / "s.json").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("ratio") != std::string::npos);
}

TEST_CASE("sweep writes one row per value and policy")
{
    const auto dir = scratch("sweep");
    const auto r = cli({"sweep", "--axis", "xi", "--values", "0,1", "--policies", "mix-aalto,ucb1", "--seeds", "1",
                        "--out", dir.string()});
    REQUIRE(r.code == 0);
    CHECK(lines(dir / "sweep_xi.csv") == 5);
    CHECK(r.out == slurp(dir / "sweep_xi.csv"));
    CHECK(cli({"sweep", "--axis", "colour", "--out", dir.string()}).code == 2);
}
