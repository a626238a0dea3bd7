// Command-line front end: synthetic stream generation, single prequential
// runs, and hyperparameter sweeps.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "kdrift/kdrift.hpp"

namespace {

using kdrift::Json;

// Values from an optional --config JSON file fill in any option the user
// did not pass on the command line. Keys match the long option names.
class ConfigOverlay {
public:
    void load(const std::string& path) {
        if (!path.empty()) config_ = kdrift::read_json_file(path);
    }

    template <typename T>
    void apply(const CLI::App& app, const std::string& flag, T& target) const {
        if (config_.is_null()) return;
        const std::string key = flag.substr(2);  // strip leading --
        if (app.count(flag) == 0 && config_.contains(key)) {
            target = config_.at(key).get<T>();
        }
    }

private:
    Json config_;
};

void emit_error(const std::string& type, const std::string& message) {
    Json j;
    j["error"] = Json{{"type", type}, {"message", message}};
    std::cerr << j.dump() << std::endl;
}

std::string default_annotation_path(const std::string& stream_path) {
    return stream_path + ".annotations.json";
}

int cmd_gen(const CLI::App& app, const ConfigOverlay& overlay, std::string type,
            std::string scenario, int scenes, std::int64_t instances, int dim, int frames,
            double gain_lo, double gain_hi, std::vector<double> drift_points,
            std::uint64_t seed, std::string out_path, std::string annotations_path) {
    overlay.apply(app, "--type", type);
    overlay.apply(app, "--scenario", scenario);
    overlay.apply(app, "--scenes", scenes);
    overlay.apply(app, "--instances", instances);
    overlay.apply(app, "--dim", dim);
    overlay.apply(app, "--frames", frames);
    overlay.apply(app, "--gain-lo", gain_lo);
    overlay.apply(app, "--gain-hi", gain_hi);
    overlay.apply(app, "--drift-points", drift_points);
    overlay.apply(app, "--seed", seed);
    overlay.apply(app, "--out", out_path);
    overlay.apply(app, "--annotations", annotations_path);

    if (out_path.empty()) throw kdrift::RejectedInput("gen requires --out");

    kdrift::DriftStreamSpec spec;
    spec.drift_type = kdrift::parse_drift_type(type);
    spec.scenario = kdrift::parse_scenario(scenario);
    spec.n_scenes = scenes;
    spec.n_instances = instances;
    spec.dim = dim;
    spec.frames_per_instance = frames;
    spec.event_gain_lo = gain_lo;
    spec.event_gain_hi = gain_hi;
    spec.drift_points = drift_points;
    spec.seed = seed;

    const kdrift::GeneratedStream stream = kdrift::generate(spec);
    kdrift::write_stream_jsonl(stream.instances, out_path);
    if (annotations_path.empty()) annotations_path = default_annotation_path(out_path);
    kdrift::write_text_file(annotations_path,
                            kdrift::annotations_to_json(spec, stream.annotations).dump(2) + "\n");

    std::cout << "wrote " << stream.instances.size() << " instances to " << out_path << " ("
              << stream.annotations.size() << " drift annotations in " << annotations_path
              << ")\n";
    return 0;
}

int cmd_run(const CLI::App& app, const ConfigOverlay& overlay, std::string stream_path,
            double alpha, double beta, int window, bool no_prune, double rho, double tau_merge,
            double tau_prune, int batch, double train_fraction, std::uint64_t seed,
            std::string report_path, std::string csv_path) {
    overlay.apply(app, "--stream", stream_path);
    overlay.apply(app, "--alpha", alpha);
    overlay.apply(app, "--beta", beta);
    overlay.apply(app, "--window", window);
    overlay.apply(app, "--rho", rho);
    overlay.apply(app, "--tau-merge", tau_merge);
    overlay.apply(app, "--tau-prune", tau_prune);
    overlay.apply(app, "--batch", batch);
    overlay.apply(app, "--train-fraction", train_fraction);
    overlay.apply(app, "--seed", seed);
    overlay.apply(app, "--report", report_path);
    overlay.apply(app, "--csv", csv_path);

    if (stream_path.empty()) throw kdrift::RejectedInput("run requires --stream");

    kdrift::RunConfig cfg;
    cfg.kd3.alpha = alpha;
    cfg.kd3.beta = beta;
    cfg.kd3.window = window;
    cfg.adapt.pruning_enabled = !no_prune;
    cfg.adapt.rho = rho;
    cfg.adapt.tau_merge = tau_merge;
    cfg.adapt.tau_prune = tau_prune;
    cfg.batch = batch;
    cfg.train_fraction = train_fraction;
    cfg.seed = seed;

    const std::vector<kdrift::Instance> stream = kdrift::read_stream_jsonl(stream_path);
    const kdrift::PrequentialReport report = kdrift::run_prequential(stream, cfg);

    if (!report_path.empty()) {
        kdrift::write_text_file(report_path, kdrift::report_to_json(report).dump(2) + "\n");
    }
    if (!csv_path.empty()) {
        kdrift::write_text_file(csv_path, kdrift::report_to_csv(report));
    }

    std::printf("mean_accuracy=%.4f adaptations=%lld eval_instances=%lld wall_time=%.1fs\n",
                report.mean_accuracy, static_cast<long long>(report.adaptations_total),
                static_cast<long long>(report.eval_instances), report.wall_time_sec);
    return 0;
}

int cmd_sweep(const CLI::App& app, const ConfigOverlay& overlay,
              std::vector<std::string> stream_paths, std::vector<double> alphas,
              std::vector<double> betas, std::vector<int> windows, std::string prune_mode,
              std::vector<std::uint64_t> seeds, std::string out_path, int threads) {
    overlay.apply(app, "--streams", stream_paths);
    overlay.apply(app, "--alphas", alphas);
    overlay.apply(app, "--betas", betas);
    overlay.apply(app, "--windows", windows);
    overlay.apply(app, "--prune", prune_mode);
    overlay.apply(app, "--seeds", seeds);
    overlay.apply(app, "--out", out_path);
    overlay.apply(app, "--threads", threads);

    if (stream_paths.empty()) throw kdrift::RejectedInput("sweep requires --streams");
    if (out_path.empty()) throw kdrift::RejectedInput("sweep requires --out");

    std::vector<kdrift::SweepStream> streams;
    for (const auto& path : stream_paths) {
        kdrift::SweepStream s;
        s.name = std::filesystem::path(path).filename().string();
        s.drift_type = s.name;
        s.scenario = "-";
        const std::string ann_path = default_annotation_path(path);
        if (std::filesystem::exists(ann_path)) {
            const Json ann = kdrift::read_json_file(ann_path);
            s.drift_type = ann.value("drift_type", s.drift_type);
            s.scenario = ann.value("scenario", s.scenario);
        }
        s.instances = kdrift::read_stream_jsonl(path);
        streams.push_back(std::move(s));
    }

    kdrift::SweepGrid grid;
    grid.alphas = alphas;
    grid.betas = betas;
    grid.windows = windows;
    if (prune_mode == "both") {
        grid.pruning = {true, false};
    } else if (prune_mode == "on") {
        grid.pruning = {true};
    } else if (prune_mode == "off") {
        grid.pruning = {false};
    } else {
        throw kdrift::RejectedInput("--prune must be both, on, or off");
    }

    kdrift::RunConfig base;
    const std::vector<kdrift::SweepRow> rows =
        kdrift::sweep(streams, grid, seeds, base, threads);
    kdrift::write_text_file(out_path, kdrift::sweep_to_csv(rows));

    std::size_t failed = 0;
    for (const auto& row : rows) {
        for (const auto& err : row.errors) {
            ++failed;
            std::cerr << "row " << row.stream_name << " alpha=" << row.alpha
                      << " beta=" << row.beta << " window=" << row.window << ": " << err << "\n";
        }
    }
    std::cout << "wrote " << rows.size() << " sweep rows to " << out_path;
    if (failed > 0) std::cout << " (" << failed << " failed runs)";
    std::cout << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"streaming scene classification with kernel-density drift detection"};
    app.require_subcommand(1);

    std::string config_path;

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic drifting stream");
    std::string g_type = "A", g_scenario = "T1", g_out, g_annotations;
    int g_scenes = 15, g_dim = 8, g_frames = 20;
    std::int64_t g_instances = 12000;
    double g_gain_lo = 0.2, g_gain_hi = 0.4;
    std::vector<double> g_points;
    std::uint64_t g_seed = 0;
    gen->add_option("--config", config_path, "JSON config file (flags override it)");
    gen->add_option("--type", g_type, "drift type: A, B, C1, C2")->default_str("A");
    gen->add_option("--scenario", g_scenario, "event placement scenario: T1, T2, T3");
    gen->add_option("--scenes", g_scenes, "number of scenes");
    gen->add_option("--instances", g_instances, "total instances (divisible by scenes)");
    gen->add_option("--dim", g_dim, "feature dimension");
    gen->add_option("--frames", g_frames, "frames per instance");
    gen->add_option("--gain-lo", g_gain_lo, "event gain range lower bound");
    gen->add_option("--gain-hi", g_gain_hi, "event gain range upper bound");
    gen->add_option("--drift-points", g_points, "drift points as fractions in (0,1)")
        ->delimiter(',');
    gen->add_option("--seed", g_seed, "generation seed");
    gen->add_option("--out", g_out, "output stream path (JSON Lines)");
    gen->add_option("--annotations", g_annotations,
                    "annotation sidecar path (default: <out>.annotations.json)");

    // run
    auto* run = app.add_subcommand("run", "run one prequential evaluation");
    std::string r_stream, r_report, r_csv;
    double r_alpha = 0.1, r_beta = 0.001, r_rho = 0.5, r_tau_merge = 0.1, r_tau_prune = 1e-4;
    double r_train_fraction = 0.1;
    int r_window = 45, r_batch = 100;
    bool r_no_prune = false;
    std::uint64_t r_seed = 0;
    run->add_option("--config", config_path, "JSON config file (flags override it)");
    run->add_option("--stream", r_stream, "input stream (JSON Lines)");
    run->add_option("--alpha", r_alpha, "drift margin");
    run->add_option("--beta", r_beta, "warning margin");
    run->add_option("--window", r_window, "detector window length");
    run->add_flag("--no-prune", r_no_prune, "disable component pruning");
    run->add_option("--rho", r_rho, "candidate mixing fraction");
    run->add_option("--tau-merge", r_tau_merge, "component merge threshold");
    run->add_option("--tau-prune", r_tau_prune, "relative prune threshold");
    run->add_option("--batch", r_batch, "prequential batch size");
    run->add_option("--train-fraction", r_train_fraction, "initial training share");
    run->add_option("--seed", r_seed, "run seed");
    run->add_option("--report", r_report, "output report JSON path");
    run->add_option("--csv", r_csv, "output per-batch CSV path");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "hyperparameter sweep over streams");
    std::vector<std::string> s_streams;
    std::vector<double> s_alphas{0.1}, s_betas{0.001};
    std::vector<int> s_windows{45};
    std::vector<std::uint64_t> s_seeds{1};
    std::string s_prune = "on", s_out;
    int s_threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    sweep_cmd->add_option("--config", config_path, "JSON config file (flags override it)");
    sweep_cmd->add_option("--streams", s_streams, "stream files")->delimiter(',');
    sweep_cmd->add_option("--alphas", s_alphas, "drift margins")->delimiter(',');
    sweep_cmd->add_option("--betas", s_betas, "warning margins")->delimiter(',');
    sweep_cmd->add_option("--windows", s_windows, "window lengths")->delimiter(',');
    sweep_cmd->add_option("--prune", s_prune, "pruning arm: both, on, off");
    sweep_cmd->add_option("--seeds", s_seeds, "run seeds")->delimiter(',');
    sweep_cmd->add_option("--out", s_out, "output CSV path");
    sweep_cmd->add_option("--threads", s_threads, "parallel sweep workers");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        emit_error("cli", e.what());
        return app.exit(e);
    }

    try {
        ConfigOverlay overlay;
        overlay.load(config_path);
        if (gen->parsed()) {
            return cmd_gen(*gen, overlay, g_type, g_scenario, g_scenes, g_instances, g_dim,
                           g_frames, g_gain_lo, g_gain_hi, g_points, g_seed, g_out,
                           g_annotations);
        }
        if (run->parsed()) {
            return cmd_run(*run, overlay, r_stream, r_alpha, r_beta, r_window, r_no_prune,
                           r_rho, r_tau_merge, r_tau_prune, r_batch, r_train_fraction, r_seed,
                           r_report, r_csv);
        }
        if (sweep_cmd->parsed()) {
            return cmd_sweep(*sweep_cmd, overlay, s_streams, s_alphas, s_betas, s_windows,
                             s_prune, s_seeds, s_out, s_threads);
        }
    } catch (const kdrift::RejectedInput& e) {
        emit_error("rejected_input", e.what());
        return 2;
    } catch (const kdrift::InsufficientData& e) {
        emit_error("insufficient_data", e.what());
        return 3;
    } catch (const kdrift::SpecError& e) {
        emit_error("spec", e.what());
        return 4;
    } catch (const kdrift::ParseError& e) {
        emit_error("parse", e.what());
        return 5;
    } catch (const kdrift::IoError& e) {
        emit_error("io", e.what());
        return 6;
    } catch (const std::exception& e) {
        emit_error("internal", e.what());
        return 1;
    }
    return 0;
}
