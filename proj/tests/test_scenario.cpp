#include <doctest.h>

#include <fogbandit/scenario.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fogbandit;
using nlohmann::json;

namespace {

// Client 0 drives along x; vehicle 1 follows, vehicle 2 falls behind then
// catches up, vehicle 3 turns into the client's direction at t = 180.
const char* kHandTrace =
    "time_s,vehicle_id,x_m,y_m,speed_mps,heading_flag\n"
    "0,0,0,0,20,1\n0,1,50,0,20,1\n0,2,-300,0,20,1\n0,3,10,0,20,0\n"
    "60,0,100,0,20,1\n60,1,150,0,20,1\n60,2,-350,0,20,1\n60,3,120,0,20,0\n"
    "120,0,200,0,20,1\n120,1,600,0,20,1\n120,2,-250,0,20,1\n120,3,210,0,20,0\n"
    "180,0,300,0,20,1\n180,1,650,0,20,1\n180,2,700,0,20,1\n180,3,310,0,20,1\n"
    "240,0,400,0,20,1\n240,1,700,0,20,1\n240,2,850,0,20,1\n240,3,410,0,20,1\n";

MobilityTrace parse(const std::string& text, ArmId client = 0, double range = 400.0)
{
    std::istringstream in(text);
    return parse_trace_csv(in, client, range);
}

} // namespace

TEST_CASE("synthetic scenario structure")
{
    Scenario s = build_synthetic();
    CHECK_NOTHROW(s.validate());
    CHECK(s.horizon == 3000);
    CHECK(s.candidates(1) == std::vector<ArmId>{1, 2, 3, 4, 5});
    CHECK(s.candidates(1000) == std::vector<ArmId>{1, 2, 3, 4, 5});
    CHECK(s.candidates(1001) == std::vector<ArmId>{1, 2, 3, 4, 6, 7});
    CHECK(s.candidates(2001) == std::vector<ArmId>{1, 2, 3, 5, 6, 7});
    CHECK(s.candidates(3000).size() == 6);
    CHECK(s.vfn(1).max_cpu_hz == 6e9);
    CHECK(s.vfn(5).max_cpu_hz == 1.5e9);
    CHECK(s.vfn(7).max_cpu_hz == 4e9);
    for (const auto& v : s.vfns) {
        CHECK(v.distance_km > 0.0);
        CHECK(v.distance_km <= 0.4);
        CHECK(v.fraction_lo == 0.2);
        CHECK(v.fraction_hi == 0.5);
    }
    CHECK(s.channel.tx_power_dbm == 24.0);
    CHECK(s.task_stream.intensity == 1000.0);
    CHECK(s.q_min == 0.2e6);
    CHECK(s.q_max == 1e6);
    CHECK_THROWS(s.candidates(0));
    CHECK_THROWS(s.candidates(3001));

    std::vector<std::vector<ArmId>> per_round;
    for (std::int64_t t = 1; t <= s.horizon; ++t)
        per_round.push_back(s.candidates(t));
    const auto iv = intervals_of(per_round);
    REQUIRE(iv.size() == 3);
    CHECK(iv[1].first == 1001);
    CHECK(iv[2].second == 3000);
}

TEST_CASE("appearing-arms variant")
{
    Scenario s = build_appearing_arms(3);
    CHECK_NOTHROW(s.validate());
    CHECK(s.horizon == 2000);
    CHECK(s.candidates(1001) == std::vector<ArmId>{1, 2, 3, 4, 8, 9, 10});
    CHECK_THROWS_AS(build_appearing_arms(0), ConfigError);
}

TEST_CASE("scenario validation")
{
    Scenario s = build_synthetic();
    s.epochs[1].start_round = 999;
    s.epochs[0].arms = {1, 2, 3, 4, 5};
    CHECK_NOTHROW(s.validate());
    s.epochs[1].start_round = 1;
    CHECK_THROWS_AS(s.validate(), ConfigError);

    Scenario missing = build_synthetic();
    missing.epochs[0].arms.push_back(42);
    CHECK_THROWS_AS(missing.validate(), ConfigError);

    Scenario empty = build_synthetic();
    empty.epochs[2].arms.clear();
    CHECK_THROWS_AS(empty.validate(), ConfigError);

    Scenario sizes = build_synthetic();
    sizes.task_stream.hi_bits = 2e6;
    CHECK_THROWS_AS(sizes.validate(), ConfigError);
}

TEST_CASE("trace: hand-built schedule")
{
    const auto trace = parse(kHandTrace);
    CHECK(trace.rows.size() == 20);
    const auto sched = candidate_sets_from_trace(trace);
    REQUIRE(sched.candidates.size() == 5);
    CHECK(sched.candidates[0] == std::vector<ArmId>{1, 2});
    CHECK(sched.candidates[1] == std::vector<ArmId>{1});
    CHECK(sched.candidates[2] == std::vector<ArmId>{1});  // vehicle 1 at exactly 400 m
    CHECK(sched.candidates[3] == std::vector<ArmId>{1, 2, 3});
    CHECK(sched.candidates[4] == std::vector<ArmId>{1, 3});
    CHECK(sched.distance_km[0].at(2) == doctest::Approx(0.3));
    CHECK(sched.distance_km[3].at(3) == doctest::Approx(0.01));

    const auto doubled = candidate_sets_from_trace(trace, 2);
    CHECK(doubled.candidates.size() == 10);
    CHECK(doubled.candidates[7] == std::vector<ArmId>{1, 2, 3});

    TraceScenarioOptions opts;
    Scenario s = build_trace_scenario(trace, opts);
    CHECK_NOTHROW(s.validate());
    CHECK(s.horizon == 5);
    REQUIRE(s.epochs.size() == 4);
    CHECK(s.epochs[1].start_round == 2);
    CHECK(s.epochs[2].start_round == 4);
    CHECK(s.distance_km(2, 1) == doctest::Approx(0.3));
    for (const auto& v : s.vfns) {
        CHECK(v.max_cpu_hz >= 1e9);
        CHECK(v.max_cpu_hz <= 5e9);
    }
    // Re-ingestion is identical.
    CHECK(candidate_sets_from_trace(parse(kHandTrace)).candidates == sched.candidates);
}

TEST_CASE("trace: co-located vehicles and the range threshold")
{
    const auto all = candidate_sets_from_trace(parse("time_s,vehicle_id,x_m,y_m,speed_mps,heading_flag\n"
                                                     "0,7,5,5,1,0\n0,8,5,5,1,0\n0,9,5,5,1,0\n",
                                                     7));
    CHECK(all.candidates[0] == std::vector<ArmId>{8, 9});

    const auto edge = candidate_sets_from_trace(parse("time_s,vehicle_id,x_m,y_m,speed_mps,heading_flag\n"
                                                      "0,1,0,0,0,1\n0,2,399,0,0,1\n0,3,0,401,0,1\n",
                                                      1));
    CHECK(edge.candidates[0] == std::vector<ArmId>{2});
}

TEST_CASE("trace: empty candidate set names the time")
{
    const auto trace = parse("time_s,vehicle_id,x_m,y_m,speed_mps,heading_flag\n"
                             "0,1,0,0,0,1\n0,2,10,0,0,1\n"
                             "30.5,1,0,0,0,1\n30.5,2,10,0,0,0\n",
                             1);
    try {
        candidate_sets_from_trace(trace);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("30.5") != std::string::npos);
    }
}

TEST_CASE("trace: parse errors carry line numbers")
{
    auto line_of = [](const std::string& text) -> std::size_t {
        try {
            parse(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    CHECK(line_of("time,vehicle,x,y,speed,heading\n0,1,0,0,0,1\n") == 1);
    CHECK(line_of("time_s,vehicle_id,x_m,y_m,speed_mps,heading_flag\n0,1,0,0,0,1\n0,2,abc,0,0,1\n") == 3);
    CHECK(line_of("time_s,vehicle_id,x_m,y_m,speed_mps,heading_flag\n5,1,0,0,0,1\n4,2,0,0,0,1\n") == 3);
    CHECK(line_of("time_s,vehicle_id,x_m,y_m,speed_mps,heading_flag\n0,1,0,0,0\n") == 2);
    CHECK(line_of("time_s,vehicle_id,x_m,y_m,speed_mps,heading_flag\n0,1,0,0,0,2\n") == 2);
    CHECK(line_of("time_s,vehicle_id,x_m,y_m,speed_mps,heading_flag\n0,1,0,0,0,1\n0,1,3,0,0,1\n") == 3);
    CHECK(line_of(kHandTrace) == 0);
}

TEST_CASE("task streams")
{
    TaskStreamConfig fixed;
    fixed.kind = TaskStreamConfig::Kind::fixed;
    fixed.size_bits = 0.6e6;
    TaskStream fs(fixed, 1);
    for (int i = 0; i < 100; ++i)
        CHECK(fs.next_task().size_bits == 0.6e6);

    TaskStreamConfig uni;
    TaskStream us(uni, 2);
    double total = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double q = us.next_task().size_bits;
        REQUIRE(q >= 0.2e6);
        REQUIRE(q <= 1e6);
        total += q;
    }
    CHECK(total / n == doctest::Approx(0.6e6).epsilon(0.01));

    TaskStreamConfig tn;
    tn.kind = TaskStreamConfig::Kind::truncated_normal;
    tn.mean_bits = 0.3e6;
    tn.sd_bits = 0.4e6;
    TaskStream ts(tn, 3);
    for (int i = 0; i < n; ++i) {
        const double q = ts.next_task().size_bits;
        REQUIRE(q >= tn.lo_bits);
        REQUIRE(q <= tn.hi_bits);
    }
    // Pure function of (key, round).
    TaskStream again(tn, 3);
    CHECK(again.at(77).size_bits == TaskStream(tn, 3).at(77).size_bits);
}

TEST_CASE("config documents")
{
    const Scenario base = scenario_from_json(json{{"base", "synthetic"}});
    CHECK(scenario_to_json(base) == scenario_to_json(build_synthetic()));

    // Round trip of every effective field.
    json doc = scenario_to_json(build_synthetic(4));
    doc["xi"] = 0.5;
    doc["adversary"]["phase_length_mean"] = 80.0;
    const Scenario s = scenario_from_json(doc);
    CHECK(s.xi == 0.5);
    CHECK(s.adversary.phase_length_mean == 80.0);
    CHECK(scenario_to_json(s) == doc);

    json bad = {{"base", "synthetic"}, {"xii", 1}};
    try {
        scenario_from_json(bad);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("xii") != std::string::npos);
    }
    CHECK_THROWS_AS(scenario_from_json(json{{"channel", {{"bandwidth", 1}}}}), ConfigError);

    json constant = {{"base", "synthetic"}, {"schedule", {{"gamma_rule", "constant"}, {"gamma_constant", 0.1}}}};
    try {
        scenario_from_json(constant);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("ratio") != std::string::npos);
    }
}

TEST_CASE("config files: syntax errors report a line; trace paths resolve relative to the file")
{
    const auto dir = std::filesystem::temp_directory_path() / "fogbandit_cfg_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir / "broken.json");
        f << "{\n  \"xi\": 0.5,\n  \"horizon\": ,\n}\n";
    }
    try {
        load_scenario_file((dir / "broken.json").string());
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    {
        std::ofstream t(dir / "hand.csv");
        t << kHandTrace;
        std::ofstream f(dir / "trace.json");
        f << R"({"trace": {"path": "hand.csv", "client_id": 0, "comm_range_m": 400}})";
    }
    const Scenario s = load_scenario_file((dir / "trace.json").string());
    CHECK(s.horizon == 5);
    CHECK(s.trace_source.has_value());
    CHECK_THROWS_AS(load_scenario_file((dir / "missing.json").string()), ConfigError);
    std::filesystem::remove_all(dir);
}
