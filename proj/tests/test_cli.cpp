#include "kvlu/sim.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "kvlu_test_cli";

int run_cli(const std::string& args)
{
    const std::string cmd = std::string("\"") + KVLU_CLI_PATH + "\" " + args + " 2>/dev/null";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

// Short session with every activity kind, written once.
fs::path simulated(const std::string& name, std::uint64_t seed)
{
    const fs::path dir = kRoot / name;
    if (fs::exists(dir / "manifest.json"))
        return dir / "manifest.json";
    fs::create_directories(kRoot);
    kvlu::sim::SimConfig c;
    c.seed = seed;
    c.subject_id = name;
    c.noise = {2, 2, 5};
    c.drift = {0.05, 5, 60, 0, 0.2};
    c.script = {kvlu::sim::Stand{10}, kvlu::sim::Walk{20, kvlu::sim::Speed::Normal},
                kvlu::sim::Stand{5}, kvlu::sim::LiftSet{"knee", 50.8, 1},
                kvlu::sim::LiftSet{"shoulder", 139.7, 1}};
    std::ofstream(kRoot / (name + ".json")) << kvlu::sim::config_to_json(c);
    const std::string args = "simulate --config \"" + (kRoot / (name + ".json")).string() +
                             "\" --out \"" + dir.string() + "\"";
    REQUIRE(run_cli(args) == 0);
    return dir / "manifest.json";
}

}  // namespace

TEST_CASE("simulate writes a loadable session")
{
    const auto m = simulated("s1", 1);
    const auto dir = m.parent_path();
    CHECK(fs::exists(dir / "wrist.csv"));
    CHECK(fs::exists(dir / "insole.csv"));
    CHECK(fs::exists(dir / "truth.csv"));
    CHECK(fs::exists(dir / "sim_config.json"));
}

TEST_CASE("all produces a report with the overall MAE")
{
    const auto m = simulated("s1", 1);
    const auto out = kRoot / "r_all";
    fs::remove_all(out);
    REQUIRE(run_cli("all --manifest \"" + m.string() + "\" --out \"" + out.string() + "\"") == 0);
    const auto j = nlohmann::json::parse(slurp(out / "report.json"));
    REQUIRE(j.contains("overall_mae_cm"));
    CHECK(j["overall_mae_cm"].is_number());
    CHECK(fs::exists(out / "detection_rates.csv"));
    for (const char* f : {"kvlu_points.csv", "activities.csv", "lvl_L.csv", "lvl_R.csv",
                          "provenance.json", "trace_compare_L.csv", "session_report.json"})
        CHECK_MESSAGE(fs::exists(out / "s1" / f), f);
}

TEST_CASE("all equals the subcommands run in sequence")
{
    const auto m1 = simulated("s1", 1);
    const auto m2 = simulated("s2", 2);
    const std::string ms = "--manifest \"" + m1.string() + "\" --manifest \"" + m2.string() + "\"";
    const auto a = kRoot / "seq_all";
    const auto b = kRoot / "seq_steps";
    fs::remove_all(a);
    fs::remove_all(b);
    REQUIRE(run_cli("all " + ms + " --jobs 2 --out \"" + a.string() + "\"") == 0);
    for (const char* step : {"detect-kvlu", "estimate-lvl", "evaluate"})
        REQUIRE(run_cli(std::string(step) + " " + ms + " --out \"" + b.string() + "\"") == 0);
    REQUIRE(run_cli("report --out \"" + b.string() + "\"") == 0);

    std::size_t compared = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file())
            continue;
        const auto rel = fs::relative(e.path(), a);
        CHECK_MESSAGE(slurp(e.path()) == slurp(b / rel), rel.string());
        ++compared;
    }
    CHECK(compared >= 17);
}

TEST_CASE("overrides are echoed in provenance")
{
    const auto m = simulated("s1", 1);
    const auto out = kRoot / "r_override";
    fs::remove_all(out);
    REQUIRE(run_cli("estimate-lvl --manifest \"" + m.string() + "\" --out \"" + out.string() +
                 "\" --ratio 0.495 --angle-threshold 58.5 --smooth-window 21") == 0);
    const auto p = nlohmann::json::parse(slurp(out / "s1" / "provenance.json"));
    CHECK(p["wrist_ratio"] == 0.495);
    CHECK(p["angle_threshold_deg"] == 58.5);
    CHECK(p["smooth_window"] == 21);
    CHECK(p.contains("model_a_cm_per_pa"));
    CHECK(p.contains("max_anchor_jump_cm"));
}

TEST_CASE("config file sits between defaults and flags")
{
    const auto m = simulated("s1", 1);
    const auto cfg = kRoot / "pipeline.json";
    std::ofstream(cfg) << R"({"smooth_window": 11, "angle_threshold_deg": 60})";
    const auto out = kRoot / "r_cfg";
    fs::remove_all(out);
    REQUIRE(run_cli("estimate-lvl --manifest \"" + m.string() + "\" --config \"" + cfg.string() +
                 "\" --smooth-window 15 --out \"" + out.string() + "\"") == 0);
    const auto p = nlohmann::json::parse(slurp(out / "s1" / "provenance.json"));
    CHECK(p["smooth_window"] == 15);
    CHECK(p["angle_threshold_deg"] == 60);
}

TEST_CASE("exit codes")
{
    const auto m = simulated("s1", 1);
    const auto out = (kRoot / "r_err").string();
    CHECK(run_cli("") == 2);
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("all --bogus-flag") == 2);
    CHECK(run_cli("estimate-lvl --manifest \"" + m.string() + "\" --ratio abc") == 2);
    CHECK(run_cli("estimate-lvl --manifest \"" + m.string() + "\" --smooth-window 4 --out \"" + out +
               "\"") == 2);
    CHECK(run_cli("estimate-lvl --out \"" + out + "\"") == 2);
    CHECK(run_cli("all --manifest \"" + (kRoot / "missing.json").string() + "\" --out \"" + out +
               "\"") == 1);
    CHECK(run_cli("report --out \"" + (kRoot / "nothing_here").string() + "\"") == 1);

    // A manifest whose wrist file is corrupt fails in ingest.
    const fs::path bad = kRoot / "bad";
    fs::create_directories(bad);
    std::ofstream(bad / "w.csv") << "t,pressure_pa,pitch_deg,side\n0,abc,1,L\n";
    fs::copy_file(m.parent_path() / "insole.csv", bad / "i.csv", fs::copy_options::overwrite_existing);
    std::ofstream(bad / "m.json") << R"({"body_height_cm":170,"wrist":"w.csv","insole":"i.csv"})";
    CHECK(run_cli("detect-kvlu --manifest \"" + (bad / "m.json").string() + "\" --out \"" + out +
               "\"") == 1);
}
