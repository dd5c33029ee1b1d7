#include "liver/output.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include <unistd.h>

#include "json.hpp"

#ifndef LIVER_VERSION
#define LIVER_VERSION "0.0.0"
#endif

namespace liver {

namespace fs = std::filesystem;

const char* version() { return LIVER_VERSION; }

void write_atomic(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp" + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write '" + tmp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw Error("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error("cannot move output into place at '" + path.string() + "': " + ec.message());
    }
}

OutputSet::OutputSet(fs::path dir) : dir_(std::move(dir)) {}

void OutputSet::write(const std::string& name, std::string_view content) {
    write_atomic(dir_ / name, content);
    hashes_[name] = hex64(fnv1a64(content));
}

std::string run_hash(const std::string& command, const RunConfig& config) {
    RunConfig c = config;
    c.output_dir = "-";
    return hex64(fnv1a64(std::string(version()) + '\n' + command + '\n' + dump_config(c)));
}

std::string manifest_json(const std::string& command, const RunConfig& config,
                          const std::map<std::string, std::string>& outputs) {
    nlohmann::ordered_json j;
    j["manifest_version"] = 1;
    j["tool"] = "liver";
    j["version"] = version();
    j["command"] = command;
    j["run_hash"] = run_hash(command, config);
    j["seeds"] = config.seeds;
    j["config"] = dump_config(config);
    nlohmann::ordered_json files = nlohmann::ordered_json::object();
    for (const auto& [name, hash] : outputs) files[name] = hash;
    j["outputs"] = files;
    return j.dump(2) + "\n";
}

namespace {

std::string point_name(const SweepResult& r, const SweepRecord& rec) {
    std::string s = "points/" + to_string(r.axis) + "_" + rec.value;
    if (!rec.group.empty()) s += "_" + rec.group;
    return s + "_seed" + std::to_string(rec.seed) + ".csv";
}

} // namespace

SweepRun run_sweep_to_dir(const RunConfig& config, int jobs, std::ostream* progress) {
    config.validate();
    OutputSet out(config.output_dir);
    const std::string axis = to_string(config.sweep.axis);

    SweepRun run;
    // run_sweep serialises the callback, so the output set needs no lock.
    run.result = run_sweep(config, jobs, [&](const SweepRecord& rec) {
        SweepResult one;
        one.axis = config.sweep.axis;
        one.metric_names = sweep_metric_names(config.sweep.axis);
        one.records = {rec};
        std::ostringstream s;
        write_sweep_csv(s, one);
        out.write(point_name(one, rec), s.str());
        if (progress)
            *progress << axis << ' ' << rec.value << (rec.group.empty() ? "" : " " + rec.group) << " seed " << rec.seed
                      << " done\n";
    });

    std::ostringstream metrics;
    write_sweep_csv(metrics, run.result);
    out.write(axis + "_metrics.csv", metrics.str());
    run.summary = summarize(run.result);
    std::ostringstream summary;
    write_summary_csv(summary, run.result, run.summary);
    out.write(axis + "_summary.csv", summary.str());

    for (const auto& d : run.result.data) {
        std::ostringstream f;
        write_features_csv(f, d.features);
        out.write("data/" + d.tag + "_features.csv", f.str());
        for (std::size_t k = 0; k < d.traces.size(); ++k) {
            std::ostringstream t, g;
            write_trace_csv(t, d.traces[k]);
            write_ground_truth_csv(g, d.truths[k]);
            out.write("data/" + d.tag + "_mp" + std::to_string(k) + "_trace.csv", t.str());
            out.write("data/" + d.tag + "_mp" + std::to_string(k) + "_truth.csv", g.str());
        }
    }
    run.outputs = out.hashes();
    write_atomic(out.dir() / "manifest.json", manifest_json("sweep", config, run.outputs));
    return run;
}

} // namespace liver
