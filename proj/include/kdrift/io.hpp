#pragma once

#include <deque>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kdrift/classifier.hpp"
#include "kdrift/prequential.hpp"
#include "kdrift/streamgen.hpp"

namespace kdrift {

using Json = nlohmann::ordered_json;

// Shortest decimal representation that round-trips the double exactly.
inline std::string number_repr(double x) { return Json(x).dump(); }

// ---- mixture models ----

inline Json model_to_json(const MixtureModel& model) {
    Json j;
    j["dim"] = model.dim();
    j["components"] = Json::array();
    for (const auto& c : model.components) {
        Json jc;
        jc["w"] = c.weight;
        jc["mean"] = c.mean;
        jc["var"] = c.var;
        j["components"].push_back(std::move(jc));
    }
    return j;
}

inline MixtureModel model_from_json(const Json& j) {
    MixtureModel model;
    const std::size_t dim = j.at("dim").get<std::size_t>();
    for (const auto& jc : j.at("components")) {
        GaussianComponent c;
        c.weight = jc.at("w").get<double>();
        c.mean = jc.at("mean").get<std::vector<double>>();
        c.var = jc.at("var").get<std::vector<double>>();
        if (c.mean.size() != dim || c.var.size() != dim) {
            throw ParseError("component dimension disagrees with model dim");
        }
        model.components.push_back(std::move(c));
    }
    if (model.components.empty()) throw ParseError("model has no components");
    return model;
}

// ---- configs ----

inline Json kd3_config_to_json(const Kd3Config& cfg) {
    return Json{{"alpha", cfg.alpha},
                {"beta", cfg.beta},
                {"window", cfg.window},
                {"buffer_cap", cfg.buffer_cap},
                {"min_adapt_frames", cfg.min_adapt_frames}};
}

inline Kd3Config kd3_config_from_json(const Json& j) {
    Kd3Config cfg;
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.beta = j.value("beta", cfg.beta);
    cfg.window = j.value("window", cfg.window);
    cfg.buffer_cap = j.value("buffer_cap", cfg.buffer_cap);
    cfg.min_adapt_frames = j.value("min_adapt_frames", cfg.min_adapt_frames);
    return cfg;
}

inline Json em_config_to_json(const EmConfig& cfg) {
    return Json{{"max_iter", cfg.max_iter},
                {"tol", cfg.tol},
                {"k_max", cfg.k_max},
                {"restarts", cfg.restarts},
                {"seed", cfg.seed}};
}

inline EmConfig em_config_from_json(const Json& j) {
    EmConfig cfg;
    cfg.max_iter = j.value("max_iter", cfg.max_iter);
    cfg.tol = j.value("tol", cfg.tol);
    cfg.k_max = j.value("k_max", cfg.k_max);
    cfg.restarts = j.value("restarts", cfg.restarts);
    cfg.seed = j.value("seed", cfg.seed);
    return cfg;
}

inline Json adapt_config_to_json(const AdaptConfig& cfg) {
    return Json{{"rho", cfg.rho},
                {"tau_merge", cfg.tau_merge},
                {"tau_prune", cfg.tau_prune},
                {"pruning_enabled", cfg.pruning_enabled},
                {"em", em_config_to_json(cfg.em)}};
}

inline AdaptConfig adapt_config_from_json(const Json& j) {
    AdaptConfig cfg;
    cfg.rho = j.value("rho", cfg.rho);
    cfg.tau_merge = j.value("tau_merge", cfg.tau_merge);
    cfg.tau_prune = j.value("tau_prune", cfg.tau_prune);
    cfg.pruning_enabled = j.value("pruning_enabled", cfg.pruning_enabled);
    if (j.contains("em")) cfg.em = em_config_from_json(j.at("em"));
    return cfg;
}

inline Json run_config_to_json(const RunConfig& cfg) {
    return Json{{"kd3", kd3_config_to_json(cfg.kd3)},
                {"adapt", adapt_config_to_json(cfg.adapt)},
                {"em", em_config_to_json(cfg.em)},
                {"batch", cfg.batch},
                {"train_fraction", cfg.train_fraction},
                {"seed", cfg.seed}};
}

inline RunConfig run_config_from_json(const Json& j) {
    RunConfig cfg;
    if (j.contains("kd3")) cfg.kd3 = kd3_config_from_json(j.at("kd3"));
    if (j.contains("adapt")) cfg.adapt = adapt_config_from_json(j.at("adapt"));
    if (j.contains("em")) cfg.em = em_config_from_json(j.at("em"));
    cfg.batch = j.value("batch", cfg.batch);
    cfg.train_fraction = j.value("train_fraction", cfg.train_fraction);
    cfg.seed = j.value("seed", cfg.seed);
    return cfg;
}

// ---- detector checkpoint ----

inline Json detector_to_json(const Kd3Detector& det) {
    Json j;
    j["config"] = kd3_config_to_json(det.config());
    j["reference"] = det.reference();
    j["current"] = det.current();
    j["warning_rows"] = Json::array();
    for (const auto& row : det.warning_rows()) j["warning_rows"].push_back(row);
    j["steps_since_reset"] = det.steps_since_reset();
    j["last_divergence"] = det.last_divergence();
    return j;
}

inline Kd3Detector detector_from_json(const Json& j) {
    const Kd3Config cfg = kd3_config_from_json(j.at("config"));
    std::deque<std::vector<double>> warning_rows;
    for (const auto& row : j.at("warning_rows")) {
        warning_rows.push_back(row.get<std::vector<double>>());
    }
    return Kd3Detector::restore(cfg, j.at("reference").get<std::vector<double>>(),
                                j.at("current").get<std::vector<double>>(),
                                std::move(warning_rows),
                                j.at("steps_since_reset").get<std::size_t>(),
                                j.at("last_divergence").get<double>());
}

// ---- classifier checkpoint ----

inline Json classifier_to_json(const Classifier& clf) {
    Json j;
    j["kd3"] = kd3_config_to_json(clf.kd3_config());
    j["adapt"] = adapt_config_to_json(clf.adapt_config());
    j["seed"] = clf.seed();
    j["models"] = Json::object();
    for (const auto& [scene, model] : clf.models()) j["models"][scene] = model_to_json(model);
    j["detectors"] = Json::object();
    for (const auto& [scene, det] : clf.detectors()) j["detectors"][scene] = detector_to_json(det);
    j["adaptation_log"] = Json::array();
    for (const auto& ev : clf.adaptation_log()) {
        j["adaptation_log"].push_back(Json{{"instance", ev.instance_id}, {"scene", ev.scene}});
    }
    j["adapt_counts"] = Json::object();
    for (const auto& [scene, n] : clf.adapt_counts()) j["adapt_counts"][scene] = n;
    return j;
}

inline Classifier classifier_from_json(const Json& j) {
    std::map<std::string, MixtureModel> models;
    for (const auto& [scene, jm] : j.at("models").items()) {
        models[scene] = model_from_json(jm);
    }
    std::map<std::string, Kd3Detector> detectors;
    for (const auto& [scene, jd] : j.at("detectors").items()) {
        detectors.emplace(scene, detector_from_json(jd));
    }
    std::vector<AdaptationEvent> log;
    for (const auto& je : j.at("adaptation_log")) {
        log.push_back({je.at("instance").get<std::int64_t>(), je.at("scene").get<std::string>()});
    }
    std::map<std::string, std::uint64_t> counts;
    for (const auto& [scene, n] : j.at("adapt_counts").items()) {
        counts[scene] = n.get<std::uint64_t>();
    }
    return Classifier::restore(std::move(models), std::move(detectors),
                               kd3_config_from_json(j.at("kd3")),
                               adapt_config_from_json(j.at("adapt")),
                               j.at("seed").get<std::uint64_t>(), std::move(log),
                               std::move(counts));
}

// ---- streams (JSON Lines) ----

inline Json instance_to_json(const Instance& inst) {
    Json j;
    j["i"] = inst.id;
    j["label"] = inst.label;
    Json frames = Json::array();
    for (std::size_t r = 0; r < inst.frames.rows(); ++r) {
        const auto row = inst.frames.row(r);
        frames.push_back(std::vector<double>(row.begin(), row.end()));
    }
    j["frames"] = std::move(frames);
    return j;
}

inline Instance instance_from_json(const Json& j) {
    Instance inst;
    inst.id = j.at("i").get<std::int64_t>();
    inst.label = j.at("label").get<std::string>();
    for (const auto& row : j.at("frames")) {
        inst.frames.append_row(row.get<std::vector<double>>());
    }
    if (inst.frames.rows() == 0) throw ParseError("instance has no frames");
    return inst;
}

inline void write_stream_jsonl(const std::vector<Instance>& stream, std::ostream& out) {
    for (const auto& inst : stream) out << instance_to_json(inst).dump() << '\n';
}

inline void write_stream_jsonl(const std::vector<Instance>& stream, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_stream_jsonl(stream, out);
    if (!out) throw IoError("failed writing '" + path + "'");
}

inline std::vector<Instance> read_stream_jsonl(std::istream& in) {
    std::vector<Instance> stream;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            stream.push_back(instance_from_json(Json::parse(line)));
        } catch (const ParseError&) {
            throw ParseError("line " + std::to_string(line_no) + ": malformed stream record");
        } catch (const std::exception& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return stream;
}

inline std::vector<Instance> read_stream_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return read_stream_jsonl(in);
}

// ---- stream specs and annotations ----

inline Json spec_to_json(const DriftStreamSpec& spec) {
    return Json{{"drift_type", to_string(spec.drift_type)},
                {"scenario", to_string(spec.scenario)},
                {"n_scenes", spec.n_scenes},
                {"n_instances", spec.n_instances},
                {"frames_per_instance", spec.frames_per_instance},
                {"dim", spec.dim},
                {"event_gain", {spec.event_gain_lo, spec.event_gain_hi}},
                {"drift_points", spec.drift_points},
                {"seed", spec.seed}};
}

inline DriftStreamSpec spec_from_json(const Json& j) {
    DriftStreamSpec spec;
    if (j.contains("drift_type")) spec.drift_type = parse_drift_type(j.at("drift_type"));
    if (j.contains("scenario")) spec.scenario = parse_scenario(j.at("scenario"));
    spec.n_scenes = j.value("n_scenes", spec.n_scenes);
    spec.n_instances = j.value("n_instances", spec.n_instances);
    spec.frames_per_instance = j.value("frames_per_instance", spec.frames_per_instance);
    spec.dim = j.value("dim", spec.dim);
    if (j.contains("event_gain")) {
        spec.event_gain_lo = j.at("event_gain").at(0).get<double>();
        spec.event_gain_hi = j.at("event_gain").at(1).get<double>();
    }
    if (j.contains("drift_points")) {
        spec.drift_points = j.at("drift_points").get<std::vector<double>>();
    }
    spec.seed = j.value("seed", spec.seed);
    return spec;
}

inline Json annotations_to_json(const DriftStreamSpec& spec,
                                const std::vector<DriftAnnotation>& annotations) {
    Json j;
    j["drift_type"] = to_string(spec.drift_type);
    j["scenario"] = to_string(spec.scenario);
    j["spec"] = spec_to_json(spec);
    j["drifts"] = Json::array();
    for (const auto& a : annotations) {
        j["drifts"].push_back(Json{{"scene", a.scene}, {"at", a.at}, {"kind", a.kind}});
    }
    return j;
}

// ---- reports ----

// Wall time stays out of the serialized report so identical config+seed
// runs emit identical bytes.
inline Json report_to_json(const PrequentialReport& report) {
    Json j;
    j["mean_accuracy"] = report.mean_accuracy;
    j["eval_instances"] = report.eval_instances;
    j["window_accuracy"] = report.window_accuracy;
    j["batch_adaptations"] = report.batch_adaptations;
    j["adaptations_total"] = report.adaptations_total;
    j["adaptations_per_scene"] = Json::object();
    for (const auto& [scene, n] : report.adaptations_per_scene) {
        j["adaptations_per_scene"][scene] = n;
    }
    j["components_e1"] = Json::object();
    for (const auto& [scene, n] : report.components_e1) j["components_e1"][scene] = n;
    j["components_en"] = Json::object();
    for (const auto& [scene, n] : report.components_en) j["components_en"][scene] = n;
    j["config"] = run_config_to_json(report.config);
    return j;
}

inline PrequentialReport report_from_json(const Json& j) {
    PrequentialReport report;
    report.mean_accuracy = j.at("mean_accuracy").get<double>();
    report.eval_instances = j.at("eval_instances").get<std::int64_t>();
    report.window_accuracy = j.at("window_accuracy").get<std::vector<double>>();
    report.batch_adaptations = j.at("batch_adaptations").get<std::vector<std::int64_t>>();
    report.adaptations_total = j.at("adaptations_total").get<std::int64_t>();
    for (const auto& [scene, n] : j.at("adaptations_per_scene").items()) {
        report.adaptations_per_scene[scene] = n.get<std::int64_t>();
    }
    for (const auto& [scene, n] : j.at("components_e1").items()) {
        report.components_e1[scene] = n.get<int>();
    }
    for (const auto& [scene, n] : j.at("components_en").items()) {
        report.components_en[scene] = n.get<int>();
    }
    report.config = run_config_from_json(j.at("config"));
    return report;
}

// Per-batch plot data: batch index, window accuracy, cumulative mean
// accuracy, adaptation events inside the batch.
inline std::string report_to_csv(const PrequentialReport& report) {
    std::ostringstream out;
    out << "batch,window_accuracy,cumulative_accuracy,adaptations\n";
    std::int64_t seen = 0, correct_scaled = 0;
    for (std::size_t b = 0; b < report.window_accuracy.size(); ++b) {
        const std::int64_t batch_size =
            std::min<std::int64_t>(report.config.batch,
                                   report.eval_instances - seen);
        seen += batch_size;
        // window accuracies are exact multiples of 1/batch_size
        correct_scaled += static_cast<std::int64_t>(
            report.window_accuracy[b] * static_cast<double>(batch_size) + 0.5);
        const double cumulative =
            static_cast<double>(correct_scaled) / static_cast<double>(seen);
        out << b << ',' << number_repr(report.window_accuracy[b]) << ','
            << number_repr(cumulative) << ',' << report.batch_adaptations[b] << '\n';
    }
    return out.str();
}

// ---- sweep table ----

// Accuracy and adaptation-count columns per scenario, one row per
// (drift type, grid point); mirrors the layout used for the fixed-margin
// comparison tables.
inline std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::set<std::string> scenario_set;
    for (const auto& r : rows) scenario_set.insert(r.scenario);
    const std::vector<std::string> scenarios(scenario_set.begin(), scenario_set.end());

    struct Cell {
        bool present = false;
        bool ok = false;
        double accuracy = 0.0;
        double adaptations = 0.0;
    };
    struct PivotRow {
        std::string drift_type;
        double alpha, beta;
        int window;
        bool pruning;
        std::map<std::string, Cell> cells;
    };

    std::vector<PivotRow> pivot;
    auto find_row = [&](const SweepRow& r) -> PivotRow& {
        for (auto& p : pivot) {
            if (p.drift_type == r.drift_type && p.alpha == r.alpha && p.beta == r.beta &&
                p.window == r.window && p.pruning == r.pruning) {
                return p;
            }
        }
        pivot.push_back(PivotRow{r.drift_type, r.alpha, r.beta, r.window, r.pruning, {}});
        return pivot.back();
    };
    for (const auto& r : rows) {
        Cell cell;
        cell.present = true;
        cell.ok = r.runs_ok > 0;
        cell.accuracy = r.mean_accuracy;
        cell.adaptations = r.mean_adaptations;
        find_row(r).cells[r.scenario] = cell;
    }

    std::ostringstream out;
    out << "drift_type,alpha,beta,window,pruning";
    for (const auto& s : scenarios) out << ",acc_" << s;
    for (const auto& s : scenarios) out << ",adapt_" << s;
    out << '\n';
    for (const auto& p : pivot) {
        out << p.drift_type << ',' << number_repr(p.alpha) << ',' << number_repr(p.beta) << ','
            << p.window << ',' << (p.pruning ? "on" : "off");
        for (const auto& s : scenarios) {
            const auto it = p.cells.find(s);
            out << ',';
            if (it != p.cells.end() && it->second.present && it->second.ok) {
                out << number_repr(it->second.accuracy);
            } else {
                out << "NA";
            }
        }
        for (const auto& s : scenarios) {
            const auto it = p.cells.find(s);
            out << ',';
            if (it != p.cells.end() && it->second.present && it->second.ok) {
                out << number_repr(it->second.adaptations);
            } else {
                out << "NA";
            }
        }
        out << '\n';
    }
    return out.str();
}

// ---- small file helpers ----

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw IoError("failed writing '" + path + "'");
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Json read_json_file(const std::string& path) {
    try {
        return Json::parse(read_text_file(path));
    } catch (const IoError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

}  // namespace kdrift
