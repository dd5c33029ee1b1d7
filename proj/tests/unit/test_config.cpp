#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "doctest.h"
#include "liver/config.hpp"
#include "liver/output.hpp"

using namespace liver;
namespace fs = std::filesystem;

namespace {

int error_line(const std::string& text, bool strict = true) {
    try {
        parse_config(text, "t.yaml", strict);
    } catch (const ConfigError& e) {
        return e.line;
    }
    return -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("liver_unit_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    return p;
}

RunConfig small_gp_sweep() {
    RunConfig rc = parse_config(R"(
schedule:
  strategy: pg
run:
  periods: 60
  label_scope: period
traffic:
  mean_headway_s: 2
sweep:
  axis: gp
  values: [0.5, 1]
seeds: [1, 2]
)");
    return rc;
}

} // namespace

TEST_CASE("defaults round-trip through YAML") {
    const RunConfig def;
    const auto text = dump_config(def);
    CHECK(dump_config(parse_config(text)) == text);
    const auto wide = parse_config("preset: wide-area\nsweep:\n  axis: mp_count\n  values: [10, 20]\n");
    CHECK(wide.experiment.schedule.gp == 1000 * kMillis);
    CHECK(dump_config(parse_config(dump_config(wide))) == dump_config(wide));
}

TEST_CASE("overrides land in the right fields") {
    const auto rc = parse_config(R"(
schedule:
  gp_ms: 600
  t_sc_ms: 40
  t_sc_gap_ms: 560
  strategy: mpg
traffic:
  mean_headway_s: 1.5
  class_mix: [1, 0, 0]
channel:
  attenuation_db: {S: 8, M: 18, L: 30}
sweep:
  axis: txp
  values: {from: 5, to: 31, step: 2}
seeds: [3, 4]
output: results
)");
    CHECK(rc.experiment.schedule.gp == 600 * kMillis);
    CHECK(rc.experiment.schedule.strategy == Strategy::MPG);
    CHECK(rc.experiment.traffic.mean_headway_s == 1.5);
    CHECK(rc.experiment.obstruction.attenuation_db[0] == 8);
    CHECK(rc.sweep.axis == SweepAxis::Txp);
    CHECK(rc.sweep.values.size() == 14);
    CHECK(rc.sweep.values.back() == 31);
    CHECK(rc.seeds == std::vector<std::uint64_t>{3, 4});
    CHECK(rc.output_dir == "results");
    CHECK(dump_config(parse_config(dump_config(rc))) == dump_config(rc));
}

TEST_CASE("errors point at the offending line") {
    CHECK(error_line("schedule:\n  gp_mss: 5\n") == 2);
    CHECK(error_line("seeds: [1]\nbogus: 1\n") == 2);
    CHECK(error_line("sweep:\n  axis: txp\n  values: [3,\n    40]\n") == 4);
    CHECK(error_line("sweep:\n  axis: warp\n") == 2);
    CHECK(error_line("traffic:\n  mean_headway_s: abc\n") == 2);
    CHECK(error_line("schedule:\n  strategy: dmpg\n  t_scdc_gap_ms: 150\n") >= 1);
    CHECK(error_line("seeds: []\n") >= 1);
    CHECK(error_line("schedule: [\n") >= 1);
    try {
        parse_config("schedule:\n  gp_mss: 5\n", "t.yaml");
        FAIL("no error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).rfind("t.yaml:2:", 0) == 0);
    }
}

TEST_CASE("non-strict parsing tolerates a broken timing chain") {
    const std::string text = "schedule:\n  t_dc_gap_ms: 300\n  d_x_ms: 150\n";
    CHECK(error_line(text) > 0);
    const auto rc = parse_config(text, "t.yaml", false);
    CHECK_FALSE(validate(rc.experiment.schedule).ok());
}

TEST_CASE("manifests reload as configs") {
    auto rc = small_gp_sweep();
    rc.output_dir = "elsewhere";
    const auto m = manifest_json("sweep", rc, {{"a.csv", "00"}});
    const auto back = parse_config(m, "manifest.json");
    CHECK(dump_config(back) == dump_config(rc));
    CHECK(run_hash("sweep", back) == run_hash("sweep", rc));
    auto other = rc;
    other.output_dir = "x";
    CHECK(run_hash("sweep", other) == run_hash("sweep", rc));
    other.seeds = {9};
    CHECK(run_hash("sweep", other) != run_hash("sweep", rc));
}

TEST_CASE("FNV-1a reference values") {
    CHECK(hex64(fnv1a64("")) == "cbf29ce484222325");
    CHECK(hex64(fnv1a64("a")) == "af63dc4c8601ec8c");
    CHECK(hex64(fnv1a64("foobar")) == "85944171f73967e8");
}

TEST_CASE("sweep records do not depend on the worker count") {
    const auto rc = small_gp_sweep();
    const auto one = run_sweep(rc, 1);
    const auto four = run_sweep(rc, 4);
    std::ostringstream a, b;
    write_sweep_csv(a, one);
    write_sweep_csv(b, four);
    CHECK(a.str() == b.str());
    REQUIRE(one.records.size() == 4);
    CHECK(one.records[0].value == "0.5");
    CHECK(one.records[0].seed == 1);
    CHECK(one.records[1].seed == 2);
}

TEST_CASE("summary uses the sample standard deviation") {
    SweepResult r;
    r.axis = SweepAxis::Gp;
    r.metric_names = {"m"};
    r.records = {{"1", "", 1, {1.0}}, {"1", "", 2, {3.0}}, {"2", "", 1, {5.0}}};
    const auto s = summarize(r);
    REQUIRE(s.size() == 2);
    CHECK(s[0].n == 2);
    CHECK(s[0].mean[0] == 2.0);
    CHECK(s[0].stddev[0] == doctest::Approx(std::sqrt(2.0)));
    CHECK(s[1].stddev[0] == 0.0);
}

TEST_CASE("point configs follow the axis") {
    RunConfig rc;
    rc.sweep.axis = SweepAxis::Gp;
    const auto e = point_config(rc, 1.0, 7);
    CHECK(e.schedule.gp == kSeconds);
    CHECK(e.schedule.t_sc_gap == kSeconds - e.schedule.t_sc);
    CHECK(e.seed == 7);
    rc.sweep.axis = SweepAxis::Headway;
    CHECK(point_config(rc, 0.5, 1).traffic.mean_headway_s == 0.5);
}

TEST_CASE("sweep output directory and manifest rerun are byte-identical") {
    auto rc = small_gp_sweep();
    rc.emit_data = true;
    rc.output_dir = scratch("a").string();
    const auto first = run_sweep_to_dir(rc, 2);
    CHECK(fs::exists(fs::path(rc.output_dir) / "gp_metrics.csv"));
    CHECK(fs::exists(fs::path(rc.output_dir) / "gp_summary.csv"));
    CHECK(fs::exists(fs::path(rc.output_dir) / "points" / "gp_0.5_seed1.csv"));
    const auto manifest = slurp(fs::path(rc.output_dir) / "manifest.json");

    auto again = parse_config(manifest, "manifest.json");
    again.output_dir = scratch("b").string();
    const auto second = run_sweep_to_dir(again, 1);
    CHECK(first.outputs == second.outputs);
    for (const auto& [name, hash] : first.outputs) {
        CHECK(slurp(fs::path(rc.output_dir) / name) == slurp(fs::path(again.output_dir) / name));
        CHECK(hex64(fnv1a64(slurp(fs::path(rc.output_dir) / name))) == hash);
    }
    fs::remove_all(rc.output_dir);
    fs::remove_all(again.output_dir);
}
