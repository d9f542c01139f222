// kvlu: simulate sessions and run the LVL pipeline over session manifests.
//
// Exit codes: 0 success, 1 pipeline error, 2 usage error.

#include "kvlu/error.hpp"
#include "kvlu/pipeline.hpp"
#include "kvlu/sim.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace kvlu;

namespace {

struct Options {
    std::vector<std::string> manifests;
    std::string config;
    std::string out = "out";
    std::optional<double> ratio;
    std::optional<double> angle_threshold;
    std::optional<std::size_t> smooth_window;
    std::optional<double> model_a;
    std::optional<double> model_b;
    std::optional<std::uint64_t> seed;
    unsigned jobs = 1;
};

enum class Stage { DetectKvlu, EstimateLvl, Evaluate };

std::string read_file(const fs::path& p)
{
    std::ifstream in(p);
    if (!in)
        throw Error(Errc::Io, "cli::read_file", "cannot read " + p.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& p, const std::string& text)
{
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out)
        throw Error(Errc::Io, "cli::write_file", "cannot write " + p.string());
    out << text;
}

// Shipped defaults, then the config file, then flags.
pipeline::PipelineConfig effective_config(const Options& o)
{
    pipeline::PipelineConfig c;
    if (!o.config.empty()) {
        try {
            const auto j = nlohmann::json::parse(read_file(o.config));
            if (j.contains("wrist_ratio"))
                c.wrist_ratio = j.at("wrist_ratio").get<double>();
            if (j.contains("angle_threshold_deg"))
                c.angle_threshold_deg = j.at("angle_threshold_deg").get<double>();
            c.smooth_window = j.value("smooth_window", c.smooth_window);
            c.max_gap_s = j.value("max_gap_s", c.max_gap_s);
            c.model.a_cm_per_pa = j.value("model_a_cm_per_pa", c.model.a_cm_per_pa);
            c.model.b_cm = j.value("model_b_cm", c.model.b_cm);
            c.lvl.max_anchor_jump_cm = j.value("max_anchor_jump_cm", c.lvl.max_anchor_jump_cm);
            c.lvl.drift_allowance_cm_per_s =
                j.value("drift_allowance_cm_per_s", c.lvl.drift_allowance_cm_per_s);
            c.lvl.gate_enabled = j.value("anchor_gate_enabled", c.lvl.gate_enabled);
            if (j.contains("gait")) {
                const auto& g = j.at("gait");
                auto& d = c.gait;
                d.swing_fraction = g.value("swing_fraction", d.swing_fraction);
                d.peak_window_s = g.value("peak_window_s", d.peak_window_s);
                d.min_swing_s = g.value("min_swing_s", d.min_swing_s);
                d.min_foot_flat_s = g.value("min_foot_flat_s", d.min_foot_flat_s);
                d.min_stream_s = g.value("min_stream_s", d.min_stream_s);
                d.min_swing_samples = g.value("min_swing_samples", d.min_swing_samples);
                d.standing_load_min_n = g.value("standing_load_min_n", d.standing_load_min_n);
                d.standing_min_s = g.value("standing_min_s", d.standing_min_s);
                d.cycle_min_s = g.value("cycle_min_s", d.cycle_min_s);
                d.cycle_max_s = g.value("cycle_max_s", d.cycle_max_s);
                d.max_gap_s = g.value("max_gap_s", d.max_gap_s);
            }
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::InvalidConfig, "cli::config", o.config + ": " + e.what());
        }
    }
    if (o.ratio)
        c.wrist_ratio = *o.ratio;
    if (o.angle_threshold)
        c.angle_threshold_deg = *o.angle_threshold;
    if (o.smooth_window)
        c.smooth_window = *o.smooth_window;
    if (o.model_a)
        c.model.a_cm_per_pa = *o.model_a;
    if (o.model_b)
        c.model.b_cm = *o.model_b;
    c.validate();
    return c;
}

ordered_json provenance(const Options& o, const pipeline::PipelineConfig& c)
{
    ordered_json p = c.provenance();
    p["seed"] = o.seed ? ordered_json(*o.seed) : ordered_json(nullptr);
    p["config_file"] = o.config.empty() ? ordered_json(nullptr) : ordered_json(o.config);
    return p;
}

std::string session_dir_name(const ingest::SessionManifest& m) { return m.subject_id; }

void run_stages(const fs::path& manifest, const fs::path& out, const Options& o,
                const pipeline::PipelineConfig& cfg, const std::vector<Stage>& stages)
{
    spdlog::info("session {}", manifest.string());
    const auto ls = ingest::load_session(manifest);
    for (const auto& w : ls.session.warnings)
        spdlog::warn("{}: {}", ls.manifest.subject_id, w);
    const auto r = pipeline::run_session(ls.session, ls.manifest, cfg);
    for (const auto& w : r.warnings)
        spdlog::warn("{}: {}", r.subject_id, w);
    spdlog::info("{}: threshold {} deg ({}), {} cycles, {} KVLU points", r.subject_id,
                 r.threshold.value, r.threshold_source, r.cycles.size(), r.points.size());
    const fs::path dir = out / session_dir_name(ls.manifest);
    for (Stage s : stages) {
        switch (s) {
        case Stage::DetectKvlu: {
            std::ostringstream pts;
            pipeline::write_kvlu_points_csv(pts, r.points);
            write_file(dir / "kvlu_points.csv", pts.str());
            std::ostringstream act;
            act << "start,end,side,label\n";
            for (const auto& a : r.activities)
                act << ingest::format_number(a.start) << ',' << ingest::format_number(a.end)
                    << ',' << to_string(a.side) << ',' << to_string(a.label) << '\n';
            write_file(dir / "activities.csv", act.str());
            break;
        }
        case Stage::EstimateLvl:
            for (const auto& w : r.wrists) {
                std::ostringstream s;
                pipeline::write_lvl_csv(s, w);
                write_file(dir / ("lvl_" + std::string(side_code(w.side)) + ".csv"), s.str());
            }
            write_file(dir / "provenance.json", provenance(o, cfg).dump(2) + "\n");
            break;
        case Stage::Evaluate: {
            for (const auto& w : r.wrists) {
                std::ostringstream s;
                pipeline::write_trace_compare_csv(s, w, ls.truth);
                write_file(dir / ("trace_compare_" + std::string(side_code(w.side)) + ".csv"),
                           s.str());
            }
            ordered_json j = eval::to_json(pipeline::evaluate_session(r, ls.truth, ls.manifest.levels));
            j["provenance"] = provenance(o, cfg);
            write_file(dir / "session_report.json", j.dump(2) + "\n");
            break;
        }
        }
    }
}

// Bounded worker pool over manifests; each session is processed in order.
int for_each_manifest(const Options& o, const std::vector<Stage>& stages)
{
    if (o.manifests.empty()) {
        spdlog::error("at least one --manifest is required");
        return 2;
    }
    const auto cfg = effective_config(o);
    spdlog::info("effective config: {}", provenance(o, cfg).dump());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex log_mutex;
    auto worker = [&] {
        for (std::size_t i; (i = next++) < o.manifests.size();) {
            try {
                run_stages(o.manifests[i], o.out, o, cfg, stages);
            } catch (const std::exception& e) {
                std::lock_guard lock(log_mutex);
                spdlog::error("{}: {}", o.manifests[i], e.what());
                failed = true;
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(o.jobs, static_cast<unsigned>(o.manifests.size())));
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < n; ++k)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    return failed ? 1 : 0;
}

int build_report(const Options& o)
{
    const fs::path out(o.out);
    std::vector<eval::SessionReport> sessions;
    ordered_json prov = ordered_json::object();
    if (fs::exists(out)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(out))
            if (e.is_directory() && fs::exists(e.path() / "session_report.json"))
                files.push_back(e.path() / "session_report.json");
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            ordered_json j;
            try {
                j = ordered_json::parse(read_file(f));
            } catch (const nlohmann::json::exception& e) {
                throw Error(Errc::InvalidConfig, "eval::build_report", f.string() + ": " + e.what());
            }
            if (prov.empty() && j.contains("provenance"))
                prov = j.at("provenance");
            sessions.push_back(eval::session_from_json(j));
        }
    }
    if (sessions.empty()) {
        spdlog::error("no session_report.json under {}; run evaluate first", out.string());
        return 1;
    }
    const auto report = eval::build_report(std::move(sessions), prov);
    write_file(out / "report.json", eval::to_json(report).dump(2) + "\n");
    write_file(out / "detection_rates.csv", eval::detection_csv(report.detection));
    if (const auto it = report.pooled.find("corrected"); it != report.pooled.end() && it->second.lvl)
        spdlog::info("overall corrected LVL MAE {:.3f} cm over {} samples", it->second.lvl->mae(),
                     it->second.lvl->n);
    return 0;
}

int simulate(const Options& o)
{
    sim::SimConfig cfg = o.config.empty() ? sim::default_protocol()
                                          : sim::config_from_json(read_file(o.config));
    if (o.seed)
        cfg.seed = *o.seed;
    spdlog::debug("simulator config: {}", sim::config_to_json(cfg));
    const auto s = sim::generate_session(cfg);
    const auto manifest = sim::write_session(s, cfg, o.out);
    write_file(fs::path(o.out) / "sim_config.json", sim::config_to_json(cfg) + "\n");
    spdlog::info("wrote {}", manifest.string());
    return 0;
}

void configure_logging()
{
    auto logger = spdlog::stderr_color_mt("kvlu");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::info);
    if (const char* lvl = std::getenv("KVLU_LOG"))
        spdlog::set_level(spdlog::level::from_str(lvl));
}

}  // namespace

int main(int argc, char** argv)
{
    configure_logging();
    CLI::App app{"Load vertical location estimation from wrist pressure and insoles"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--manifest", o.manifests, "Session manifest JSON (repeatable)");
        sub->add_option("--config", o.config, "Config JSON (simulator config for simulate)");
        sub->add_option("--out", o.out, "Output directory");
        sub->add_option("--ratio", o.ratio, "Wrist-to-body height ratio")->check(CLI::Range(0.0, 1.0));
        sub->add_option("--angle-threshold", o.angle_threshold, "Wrist pitch threshold (deg)");
        sub->add_option("--smooth-window", o.smooth_window, "Pressure smoothing window (odd samples)");
        sub->add_option("--model-a", o.model_a, "Model slope a (cm/Pa, negative)");
        sub->add_option("--model-b", o.model_b, "Model offset b (cm)");
        sub->add_option("--seed", o.seed, "Simulator seed");
        sub->add_option("--jobs", o.jobs, "Concurrent sessions")->check(CLI::PositiveNumber);
    };
    const std::vector<std::pair<const char*, const char*>> commands = {
        {"simulate", "Generate a synthetic session with ground truth"},
        {"detect-kvlu", "Detect KVLU reference points"},
        {"estimate-lvl", "Estimate real-time and drift-corrected LVL traces"},
        {"evaluate", "Evaluate traces against ground truth"},
        {"report", "Pool session evaluations into report.json"},
        {"all", "detect-kvlu, estimate-lvl, evaluate and report in sequence"},
    };
    for (auto [name, help] : commands)
        add_common(app.add_subcommand(name, help));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        if (cmd == "simulate")
            return simulate(o);
        if (cmd == "detect-kvlu")
            return for_each_manifest(o, {Stage::DetectKvlu});
        if (cmd == "estimate-lvl")
            return for_each_manifest(o, {Stage::EstimateLvl});
        if (cmd == "evaluate")
            return for_each_manifest(o, {Stage::Evaluate});
        if (cmd == "report")
            return build_report(o);
        const int rc = for_each_manifest(o, {Stage::DetectKvlu, Stage::EstimateLvl, Stage::Evaluate});
        return rc != 0 ? rc : build_report(o);
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return e.code() == Errc::InvalidConfig || e.code() == Errc::EvenWindow ? 2 : 1;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
}
