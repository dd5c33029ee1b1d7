// Python bindings: schedules, traffic, floods, sweeps and the classifier.

#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "liver/config.hpp"
#include "liver/output.hpp"

namespace py = pybind11;
using namespace liver;

namespace {

py::dict sweep_dict(const SweepResult& r) {
    py::list records;
    for (const auto& rec : r.records) {
        py::dict m;
        for (std::size_t i = 0; i < rec.metrics.size(); ++i) m[py::str(r.metric_names[i])] = rec.metrics[i];
        py::dict d;
        d["value"] = rec.value;
        d["group"] = rec.group;
        d["seed"] = rec.seed;
        d["metrics"] = m;
        records.append(d);
    }
    py::dict out;
    out["axis"] = to_string(r.axis);
    out["metrics"] = r.metric_names;
    out["records"] = records;
    return out;
}

Dataset to_dataset(const Matrix& x, const std::vector<std::string>& y, std::vector<std::string> names) {
    if (x.size() != y.size()) throw Error("x has " + std::to_string(x.size()) + " rows but y has " + std::to_string(y.size()));
    if (names.empty() && !x.empty())
        for (std::size_t i = 0; i < x.front().size(); ++i) names.push_back("f" + std::to_string(i));
    Dataset d;
    d.feature_names = std::move(names);
    for (std::size_t i = 0; i < x.size(); ++i) d.push(x[i], y[i]);
    return d;
}

py::dict confusion_dict(const ConfusionMatrix& cm) {
    py::dict d;
    d["labels"] = cm.labels;
    d["counts"] = cm.counts;
    d["mean_accuracy"] = cm.mean_accuracy();
    d["overall_accuracy"] = cm.overall_accuracy();
    d["text"] = cm.to_text();
    return d;
}

py::dict feature_dict(const FeatureVector& f) {
    py::dict d;
    const auto& names = feature_names();
    const auto values = feature_values(f, names);
    for (std::size_t i = 0; i < names.size(); ++i) d[py::str(names[i])] = values[i];
    d["period"] = f.period;
    d["t_start_us"] = f.t_start_us;
    d["label"] = f.label ? py::object(py::str(to_string(*f.label))) : py::object(py::none());
    return d;
}

} // namespace

PYBIND11_MODULE(_liver, m) {
    m.doc() = "Vehicle detection over synchronous-transmission floods";
    // Translators run newest first, so the subclass goes last.
    const auto& base = py::register_exception<Error>(m, "LiverError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

    m.def("version", &version);
    m.def("feature_names", &feature_names);

    py::class_<PhaseSchedule>(m, "Schedule", "Measurement-point timeline; all durations in microseconds.")
        .def(py::init<>())
        .def_readwrite("gp", &PhaseSchedule::gp)
        .def_readwrite("t_sc", &PhaseSchedule::t_sc)
        .def_readwrite("t_sc_gap", &PhaseSchedule::t_sc_gap)
        .def_readwrite("t_dc", &PhaseSchedule::t_dc)
        .def_readwrite("t_dc_gap", &PhaseSchedule::t_dc_gap)
        .def_readwrite("t_scdc_gap", &PhaseSchedule::t_scdc_gap)
        .def_readwrite("ni", &PhaseSchedule::ni)
        .def_readwrite("d_x", &PhaseSchedule::d_x)
        .def_readwrite("txp_sc", &PhaseSchedule::txp_sc)
        .def_readwrite("txp_dc", &PhaseSchedule::txp_dc)
        .def_readwrite("t_cp_min", &PhaseSchedule::t_cp_min)
        .def_property(
            "strategy", [](const PhaseSchedule& s) { return to_string(s.strategy); },
            [](PhaseSchedule& s, const std::string& v) { s.strategy = parse_strategy(v); })
        .def("effective_ni", &PhaseSchedule::effective_ni)
        .def(
            "validate",
            [](const PhaseSchedule& s) {
                py::list out;
                for (const auto& v : validate(s).violations) out.append(py::make_tuple(v.name, v.expression, v.lhs, v.rhs));
                return out;
            },
            "Violated timing inequalities as (name, expression, lhs, rhs); empty when valid.")
        .def("max_uncovered_gap", [](const PhaseSchedule& s) { return max_uncovered_gap(s); })
        .def(
            "timeline",
            [](const PhaseSchedule& s, std::int64_t period) {
                py::list out;
                for (const auto& w : build_timeline(s, period))
                    out.append(py::make_tuple(to_string(w.phase), w.start, w.duration, w.txp));
                return out;
            },
            py::arg("period") = 0);

    m.def(
        "generate_traffic",
        [](double duration_s, double mean_headway_s, std::array<double, 3> mix, std::uint64_t seed) {
            Rng rng(seed);
            const auto log = generate_traffic(duration_s, mean_headway_s, mix, rng);
            py::list out;
            for (std::size_t i = 0; i < log.size(); ++i) {
                const auto& v = log.vehicles()[i];
                py::dict d;
                d["id"] = v.id;
                d["class"] = to_string(v.size);
                d["arrival_us"] = v.arrival;
                d["contact_us"] = log.contact(i);
                d["speed_mps"] = v.speed_mps;
                d["length_m"] = v.length_m;
                out.append(d);
            }
            return out;
        },
        py::arg("duration_s"), py::arg("mean_headway_s"), py::arg("class_mix") = std::array<double, 3>{0.5, 0.3, 0.2},
        py::arg("seed") = 1);

    m.def(
        "flood_disc",
        [](const std::vector<std::pair<double, double>>& xy, double range_m, NodeId initiator, int ntx, Micros slot_us,
           int slots, double success_probability, std::uint64_t seed) {
            std::vector<DiscChannel::Point> pos;
            for (auto [x, y] : xy) pos.push_back({x, y});
            DiscChannel channel(pos, range_m, success_probability);
            std::vector<NodeId> ids(pos.size());
            for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<NodeId>(i);
            GlossyConfig g;
            g.ntx = ntx;
            g.slot_duration = slot_us;
            g.initiator_timeout = 3 * slot_us;
            g.max_duration = static_cast<Micros>(slots) * slot_us;
            Rng rng(seed);
            const auto res = run_flood(ids, initiator, g, channel, 0, rng);
            py::list out;
            for (const auto& n : res.nodes) {
                py::dict d;
                d["id"] = n.id;
                d["received"] = n.received;
                d["relay_count"] = n.first_rx_relay_count ? py::object(py::int_(*n.first_rx_relay_count)) : py::none();
                d["rx_count"] = n.rx_count;
                d["tx_count"] = n.tx_count;
                d["radio_on_us"] = n.radio_on;
                d["latency_us"] = n.latency ? py::object(py::int_(*n.latency)) : py::none();
                out.append(d);
            }
            return out;
        },
        "Glossy flood over a lossless (or uniformly lossy) unit-disc graph.", py::arg("positions"), py::arg("range_m"),
        py::arg("initiator") = 0, py::arg("ntx") = 3, py::arg("slot_us") = 1000, py::arg("slots") = 200,
        py::arg("success_probability") = 1.0, py::arg("seed") = 1);

    py::class_<RunConfig>(m, "Config")
        .def(py::init<>())
        .def_static("parse", &parse_config, py::arg("text"), py::arg("source") = "<config>", py::arg("strict") = true)
        .def_static("load", &load_config, py::arg("path"), py::arg("strict") = true)
        .def("dump", [](const RunConfig& c) { return dump_config(c); })
        .def("validate", &RunConfig::validate)
        .def_readwrite("seeds", &RunConfig::seeds)
        .def_readwrite("output_dir", &RunConfig::output_dir)
        .def_readwrite("emit_data", &RunConfig::emit_data)
        .def_property(
            "periods", [](const RunConfig& c) { return c.experiment.periods; },
            [](RunConfig& c, std::int64_t p) { c.experiment.periods = p; })
        .def_property(
            "schedule", [](const RunConfig& c) { return c.experiment.schedule; },
            [](RunConfig& c, const PhaseSchedule& s) { c.experiment.schedule = s; })
        .def_property(
            "sweep_values", [](const RunConfig& c) { return c.sweep.values; },
            [](RunConfig& c, const std::vector<double>& v) { c.sweep.values = v; })
        .def_property_readonly("sweep_axis", [](const RunConfig& c) { return to_string(c.sweep.axis); });

    m.def(
        "run_sweep",
        [](const RunConfig& c, int jobs) {
            SweepResult r;
            {
                py::gil_scoped_release release;
                r = run_sweep(c, jobs);
            }
            return sweep_dict(r);
        },
        py::arg("config"), py::arg("jobs") = 1);
    m.def(
        "run_sweep_to_dir",
        [](const RunConfig& c, int jobs) {
            py::gil_scoped_release release;
            return run_sweep_to_dir(c, jobs).outputs;
        },
        "Writes the sweep CSVs and manifest.json; returns {file: hash}.", py::arg("config"), py::arg("jobs") = 1);
    m.def(
        "experiment_rows",
        [](const RunConfig& c) {
            c.validate();
            ExperimentConfig e = c.experiment;
            e.seed = c.seeds.front();
            std::vector<FeatureVector> rows;
            {
                py::gil_scoped_release release;
                rows = collect_rows(run_experiment(e));
            }
            py::list out;
            for (const auto& r : rows) out.append(feature_dict(r));
            return out;
        },
        "Feature rows of one experiment with the config's base settings and first seed.");

    py::class_<SvmModel>(m, "Model")
        .def_readonly("classes", &SvmModel::classes)
        .def_readonly("features", &SvmModel::features)
        .def("predict", [](const SvmModel& mdl, const std::vector<double>& row) { return predict(mdl, row).label; })
        .def("decision", [](const SvmModel& mdl, const std::vector<double>& row) { return predict(mdl, row).decision; })
        .def("to_json",
             [](const SvmModel& mdl) {
                 std::ostringstream s;
                 save_model(s, mdl);
                 return s.str();
             })
        .def_static("from_json", [](const std::string& text) {
            std::istringstream s(text);
            return load_model(s);
        });

    m.def(
        "train",
        [](const Matrix& x, const std::vector<std::string>& y, std::vector<std::string> features,
           const std::string& kernel, double c, double gamma, bool class_weighting, std::uint64_t seed) {
            SvmConfig cfg;
            cfg.kernel = parse_kernel(kernel);
            cfg.c = c;
            cfg.gamma = gamma;
            cfg.class_weighting = class_weighting;
            cfg.seed = seed;
            const Dataset d = to_dataset(x, y, std::move(features));
            py::gil_scoped_release release;
            return train(d, cfg);
        },
        py::arg("x"), py::arg("y"), py::arg("features") = std::vector<std::string>{}, py::arg("kernel") = "rbf",
        py::arg("c") = 1.0, py::arg("gamma") = 0.0, py::arg("class_weighting") = true, py::arg("seed") = 1);

    m.def(
        "evaluate",
        [](const SvmModel& mdl, const Matrix& x, const std::vector<std::string>& y, const std::string& scoring) {
            return confusion_dict(evaluate(mdl, to_dataset(x, y, mdl.features), parse_scoring(scoring)));
        },
        py::arg("model"), py::arg("x"), py::arg("y"), py::arg("scoring") = "exact");
}
