// Command-line front end: sweeps, train / eval, replay, schedule checks.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "liver/config.hpp"
#include "liver/output.hpp"

namespace {

using namespace liver;

struct Common {
    std::string config;
    std::vector<std::uint64_t> seeds;
    std::string out;
    std::string strategy;
    int jobs = 1;
};

RunConfig resolve(const Common& c) {
    RunConfig rc = c.config.empty() ? RunConfig{} : load_config(c.config);
    if (!c.seeds.empty()) rc.seeds = c.seeds;
    if (!c.out.empty()) rc.output_dir = c.out;
    if (!c.strategy.empty()) rc.experiment.schedule.strategy = parse_strategy(c.strategy);
    return rc;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<FeatureVector> read_rows(const std::vector<std::string>& paths) {
    std::vector<FeatureVector> rows;
    for (const auto& p : paths) {
        std::istringstream in(slurp(p));
        std::vector<FeatureVector> part;
        try {
            part = read_features_csv(in);
        } catch (const Error& e) {
            throw Error(p + ": " + e.what());
        }
        if (part.empty()) throw Error(p + ": no data rows");
        for (const auto& r : part)
            if (!r.label) throw Error(p + ": unlabeled row in period " + std::to_string(r.period));
        rows.insert(rows.end(), part.begin(), part.end());
    }
    return rows;
}

/// Label view a model was trained with, judged by its classes.
LabelView infer_view(const SvmModel& m) {
    const auto has = [&](const char* c) { return std::find(m.classes.begin(), m.classes.end(), c) != m.classes.end(); };
    if (has("V")) return LabelView::Detection;
    if (has("S-mix") || has("M-mix") || has("L-mix")) return LabelView::SevenClass;
    return LabelView::FourClass;
}

void report(OutputSet& out, const std::string& stem, const ConfusionMatrix& cm) {
    std::ostringstream csv;
    cm.write_csv(csv);
    out.write(stem + ".csv", csv.str());
    out.write(stem + ".txt", cm.to_text());
    std::cout << cm.to_text();
}

int cmd_sweep(const Common& c) {
    const RunConfig rc = resolve(c);
    const auto run = run_sweep_to_dir(rc, c.jobs, &std::cerr);
    std::ostringstream s;
    write_summary_csv(s, run.result, run.summary);
    std::cout << s.str();
    std::cerr << "wrote " << run.outputs.size() << " files and manifest.json to " << rc.output_dir << "\n";
    return 0;
}

int cmd_train(const Common& c, const std::vector<std::string>& data, const std::vector<std::string>& test,
              const std::string& view, bool no_split) {
    RunConfig rc = resolve(c);
    if (!view.empty()) rc.classifier.view = parse_label_view(view);
    const auto& cl = rc.classifier;
    const auto rows = read_rows(data);
    const Dataset all = make_dataset(rows, cl.features, cl.view);
    OutputSet out(rc.output_dir);

    Dataset train_set = all;
    Dataset test_set;
    if (!test.empty()) {
        test_set = make_dataset(read_rows(test), cl.features, cl.view);
    } else if (!no_split) {
        std::tie(train_set, test_set) = split(all, cl.train_fraction, derive_seed(rc.seeds.front(), 0x73706c6974ULL));
    }
    std::cerr << "training on " << train_set.size() << " rows (" << to_string(cl.view) << ")\n";
    const SvmModel model = train(train_set, cl.svm);
    std::ostringstream m;
    save_model(m, model);
    out.write("model.json", m.str());
    if (test_set.size() > 0) report(out, "confusion", evaluate(model, test_set, cl.scoring));
    write_atomic(out.dir() / "manifest.json", manifest_json("train", rc, out.hashes()));
    return 0;
}

int cmd_eval(const Common& c, const std::string& model_path, const std::vector<std::string>& data,
             const std::string& view, const std::string& scoring) {
    RunConfig rc = resolve(c);
    std::istringstream mi(slurp(model_path));
    const SvmModel model = load_model(mi);
    const LabelView v = view.empty() ? infer_view(model) : parse_label_view(view);
    const Scoring sc = scoring.empty() ? rc.classifier.scoring : parse_scoring(scoring);
    rc.classifier.view = v;
    rc.classifier.scoring = sc;
    const Dataset test = make_dataset(read_rows(data), model.features, v);
    if (test.size() == 0) throw Error("no rows left to evaluate under the " + to_string(v) + " view");
    OutputSet out(rc.output_dir);
    report(out, sc == Scoring::FourClass ? "confusion_four_class" : "confusion", evaluate(model, test, sc));
    write_atomic(out.dir() / "manifest.json", manifest_json("eval", rc, out.hashes()));
    return 0;
}

int cmd_replay(const Common& c, const std::string& trace_path, const std::string& truth_path,
               const std::string& out_path) {
    const RunConfig rc = resolve(c);
    const auto& e = rc.experiment;
    std::istringstream ti(slurp(trace_path));
    std::vector<TraceRow> trace;
    try {
        trace = read_trace_csv(ti);
    } catch (const Error& err) {
        throw Error(trace_path + ": " + err.what());
    }
    std::istringstream gi(slurp(truth_path));
    GroundTruthLog truth;
    try {
        truth = read_ground_truth_csv(gi, e.traffic.config.corridor_width_m, e.traffic.mean_headway_s);
    } catch (const Error& err) {
        throw Error(truth_path + ": " + err.what());
    }
    const auto rows = replay_trace(trace, truth, e.schedule.gp, e.session);
    std::ostringstream s;
    write_features_csv(s, rows);
    if (out_path.empty() || out_path == "-")
        std::cout << s.str();
    else
        write_atomic(out_path, s.str());
    std::cerr << "replayed " << trace.size() << " instances into " << rows.size() << " rows\n";
    return 0;
}

int cmd_validate(const Common& c) {
    PhaseSchedule s = c.config.empty() ? RunConfig{}.experiment.schedule : load_config(c.config, false).experiment.schedule;
    if (!c.strategy.empty()) s.strategy = parse_strategy(c.strategy);
    s.check();
    const auto r = validate(s);
    std::cout << "strategy " << to_string(s.strategy) << ", ni " << s.effective_ni() << "\n";
    std::cout << (r.ok() ? "timing constraints satisfied\n" : r.to_text());
    if (r.ok()) std::cout << "max uncovered gap " << max_uncovered_gap(s) << " us\n";
    return r.ok() ? 0 : 2;
}

int cmd_config(const Common& c, bool defaults, const std::string& preset) {
    RunConfig rc;
    if (defaults) {
        if (preset == "wide-area") rc = parse_config("preset: wide-area\nsweep:\n  axis: mp_count\n  values: [10, 20, 30, 40]\n");
        else if (preset != "roadside") throw Error("unknown preset '" + preset + "'");
    } else {
        rc = resolve(c);
    }
    std::cout << dump_config(rc);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Vehicle detection over synchronous-transmission floods: simulation, sweeps and classifier tools"};
    app.set_version_flag("--version", std::string(liver::version()));
    app.require_subcommand(1);

    Common common;
    const auto add_common = [&](CLI::App* sub, bool with_jobs) {
        sub->add_option("--config", common.config, "YAML run configuration or a manifest.json")->check(CLI::ExistingFile);
        sub->add_option("--seed", common.seeds, "seed(s); replaces the configured list");
        sub->add_option("--out", common.out, "output directory");
        sub->add_option("--strategy", common.strategy, "measurement layout")
            ->check(CLI::IsMember({"pg", "mpg", "dmpg"}));
        if (with_jobs) sub->add_option("--jobs,-j", common.jobs, "parallel workers")->check(CLI::Range(1, 1024));
    };

    auto* sweep = app.add_subcommand("sweep", "run a parameter sweep and write metrics and summary CSVs");
    add_common(sweep, true);

    std::vector<std::string> data, test;
    std::string view, scoring, model_path, trace_path, truth_path, out_file, preset = "roadside";
    bool no_split = false, defaults = false;

    auto* trainc = app.add_subcommand("train", "train a classifier on feature CSVs");
    add_common(trainc, false);
    trainc->add_option("--data", data, "feature CSV(s), pooled")->required()->check(CLI::ExistingFile);
    trainc->add_option("--test", test, "held-out feature CSV(s); disables the split")->check(CLI::ExistingFile);
    trainc->add_option("--view", view, "label view")->check(CLI::IsMember({"detection", "four", "seven"}));
    trainc->add_flag("--no-split", no_split, "train on all rows");

    auto* evalc = app.add_subcommand("eval", "score a model on feature CSVs");
    add_common(evalc, false);
    evalc->add_option("--model", model_path, "model.json from train")->required()->check(CLI::ExistingFile);
    evalc->add_option("--data", data, "feature CSV(s)")->required()->check(CLI::ExistingFile);
    evalc->add_option("--view", view, "label view (default: from the model classes)")
        ->check(CLI::IsMember({"detection", "four", "seven"}));
    evalc->add_option("--scoring", scoring, "exact or four-class")->check(CLI::IsMember({"exact", "four-class"}));

    auto* replay = app.add_subcommand("replay", "rebuild feature rows from a measurement trace and ground truth");
    add_common(replay, false);
    replay->add_option("--trace", trace_path, "trace CSV")->required()->check(CLI::ExistingFile);
    replay->add_option("--truth", truth_path, "ground-truth CSV")->required()->check(CLI::ExistingFile);
    replay->add_option("--output,-o", out_file, "feature CSV to write (default stdout)");

    auto* vs = app.add_subcommand("validate-schedule", "check the schedule timing constraints");
    add_common(vs, false);

    auto* cfg = app.add_subcommand("config", "print the resolved configuration");
    add_common(cfg, false);
    cfg->add_flag("--print-defaults", defaults, "print every setting with its default");
    cfg->add_option("--preset", preset, "defaults of this preset")->check(CLI::IsMember({"roadside", "wide-area"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep->parsed()) return cmd_sweep(common);
        if (trainc->parsed()) return cmd_train(common, data, test, view, no_split);
        if (evalc->parsed()) return cmd_eval(common, model_path, data, view, scoring);
        if (replay->parsed()) return cmd_replay(common, trace_path, truth_path, out_file);
        if (vs->parsed()) return cmd_validate(common);
        if (cfg->parsed()) return cmd_config(common, defaults, preset);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
