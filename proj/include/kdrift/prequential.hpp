#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "kdrift/classifier.hpp"
#include "kdrift/streamgen.hpp"

namespace kdrift {

struct RunConfig {
    Kd3Config kd3;
    AdaptConfig adapt;
    EmConfig em;
    int batch = 100;             // prequential batch size
    double train_fraction = 0.1; // share of each scene used for initial training
    std::uint64_t seed = 0;
};

inline void check_config(const RunConfig& cfg) {
    if (cfg.batch < 1) throw RejectedInput("batch size must be >= 1");
    if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 0.5)) {
        throw RejectedInput("train_fraction must lie in (0, 0.5)");
    }
    check_config(cfg.kd3);
    check_config(cfg.adapt);
}

struct PrequentialReport {
    double mean_accuracy = 0.0;
    std::vector<double> window_accuracy;       // per prequential batch
    std::vector<std::int64_t> batch_adaptations;
    std::int64_t adaptations_total = 0;
    std::map<std::string, std::int64_t> adaptations_per_scene;
    std::map<std::string, int> components_e1;  // after initial training
    std::map<std::string, int> components_en;  // after the final instance
    std::int64_t eval_instances = 0;
    RunConfig config;
    double wall_time_sec = 0.0;  // reported, never serialized
};

// Interleaved test-then-train evaluation: the first train_fraction of each
// scene's instances trains the initial models, every later instance is
// predicted and then fed back through the drift/adaptation pipeline.
inline PrequentialReport run_prequential(const std::vector<Instance>& stream,
                                         const RunConfig& cfg) {
    check_config(cfg);
    const auto t0 = std::chrono::steady_clock::now();

    std::map<std::string, std::int64_t> scene_counts;
    for (const auto& inst : stream) ++scene_counts[inst.label];
    if (scene_counts.empty()) throw InsufficientData("empty stream");

    std::map<std::string, std::int64_t> train_quota;
    for (const auto& [scene, count] : scene_counts) {
        train_quota[scene] = static_cast<std::int64_t>(
            std::ceil(cfg.train_fraction * static_cast<double>(count)));
        if (train_quota[scene] < 1) {
            throw InsufficientData("scene '" + scene + "' has no training instances");
        }
    }

    std::vector<Instance> training;
    std::vector<const Instance*> eval;
    std::map<std::string, std::int64_t> taken;
    for (const auto& inst : stream) {
        if (taken[inst.label] < train_quota[inst.label]) {
            ++taken[inst.label];
            training.push_back(inst);
        } else {
            eval.push_back(&inst);
        }
    }
    if (static_cast<std::int64_t>(eval.size()) <= cfg.batch) {
        throw InsufficientData("stream needs at least two prequential batches after training");
    }

    EmConfig em = cfg.em;
    em.seed = cfg.seed;
    AdaptConfig adapt_cfg = cfg.adapt;
    Classifier clf = Classifier::train_initial(training, em, cfg.kd3, adapt_cfg, cfg.seed);

    PrequentialReport report;
    report.config = cfg;
    for (const auto& [scene, model] : clf.models()) {
        report.components_e1[scene] = static_cast<int>(model.size());
        report.adaptations_per_scene[scene] = 0;
    }

    const std::size_t n_batches =
        (eval.size() + static_cast<std::size_t>(cfg.batch) - 1) /
        static_cast<std::size_t>(cfg.batch);
    std::vector<std::int64_t> batch_correct(n_batches, 0), batch_total(n_batches, 0),
        batch_adapt(n_batches, 0);

    std::int64_t correct = 0;
    for (std::size_t i = 0; i < eval.size(); ++i) {
        const StepOutcome outcome = clf.process(*eval[i]);
        const std::size_t b = i / static_cast<std::size_t>(cfg.batch);
        ++batch_total[b];
        if (outcome.correct) {
            ++correct;
            ++batch_correct[b];
        }
        if (outcome.adapted) {
            ++batch_adapt[b];
            ++report.adaptations_per_scene[eval[i]->label];
        }
    }

    report.eval_instances = static_cast<std::int64_t>(eval.size());
    report.mean_accuracy = static_cast<double>(correct) / static_cast<double>(eval.size());
    for (std::size_t b = 0; b < n_batches; ++b) {
        report.window_accuracy.push_back(static_cast<double>(batch_correct[b]) /
                                         static_cast<double>(batch_total[b]));
        report.batch_adaptations.push_back(batch_adapt[b]);
    }
    report.adaptations_total = static_cast<std::int64_t>(clf.adaptation_log().size());
    for (const auto& [scene, model] : clf.models()) {
        report.components_en[scene] = static_cast<int>(model.size());
    }
    report.wall_time_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

// ---- Hyperparameter sweep ----

struct SweepStream {
    std::string name;
    std::string drift_type;  // "A", "B", "C1", "C2" or free-form
    std::string scenario;    // "T1", "T2", "T3" or free-form
    std::vector<Instance> instances;
};

struct SweepGrid {
    std::vector<double> alphas{0.1};
    std::vector<double> betas{0.001};
    std::vector<int> windows{45};
    std::vector<bool> pruning{true};
};

struct SweepRow {
    std::string stream_name;
    std::string drift_type;
    std::string scenario;
    double alpha = 0.0;
    double beta = 0.0;
    int window = 0;
    bool pruning = true;
    int runs_ok = 0;
    double mean_accuracy = 0.0;     // over successful runs
    double mean_adaptations = 0.0;  // over successful runs
    std::vector<std::string> errors;
};

// Cartesian product of grid points and streams, each combination run once
// per seed with an independently derived run seed. Rows execute in
// parallel but land in a deterministic order.
inline std::vector<SweepRow> sweep(const std::vector<SweepStream>& streams,
                                   const SweepGrid& grid,
                                   const std::vector<std::uint64_t>& seeds,
                                   const RunConfig& base_cfg, int threads = 1) {
    if (streams.empty() || seeds.empty() || grid.alphas.empty() || grid.betas.empty() ||
        grid.windows.empty() || grid.pruning.empty()) {
        throw RejectedInput("sweep needs at least one stream, seed, and grid point");
    }
    std::vector<SweepRow> rows;
    for (const auto& stream : streams) {
        for (double alpha : grid.alphas) {
            for (double beta : grid.betas) {
                for (int window : grid.windows) {
                    for (bool prune_on : grid.pruning) {
                        SweepRow row;
                        row.stream_name = stream.name;
                        row.drift_type = stream.drift_type;
                        row.scenario = stream.scenario;
                        row.alpha = alpha;
                        row.beta = beta;
                        row.window = window;
                        row.pruning = prune_on;
                        rows.push_back(std::move(row));
                    }
                }
            }
        }
    }

    std::map<std::string, const SweepStream*> by_name;
    for (const auto& s : streams) by_name[s.name] = &s;

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= rows.size()) return;
            SweepRow& row = rows[idx];
            const std::string key = row.stream_name + "|a=" + std::to_string(row.alpha) +
                                    "|b=" + std::to_string(row.beta) +
                                    "|w=" + std::to_string(row.window) +
                                    "|p=" + std::to_string(row.pruning);
            double acc = 0.0, adapts = 0.0;
            for (std::uint64_t seed : seeds) {
                RunConfig cfg = base_cfg;
                cfg.kd3.alpha = row.alpha;
                cfg.kd3.beta = row.beta;
                cfg.kd3.window = row.window;
                cfg.adapt.pruning_enabled = row.pruning;
                cfg.seed = mix_seed(seed, fnv1a64(key));
                try {
                    const PrequentialReport rep =
                        run_prequential(by_name.at(row.stream_name)->instances, cfg);
                    acc += rep.mean_accuracy;
                    adapts += static_cast<double>(rep.adaptations_total);
                    ++row.runs_ok;
                } catch (const std::exception& e) {
                    row.errors.push_back("seed " + std::to_string(seed) + ": " + e.what());
                }
            }
            if (row.runs_ok > 0) {
                row.mean_accuracy = acc / row.runs_ok;
                row.mean_adaptations = adapts / row.runs_ok;
            }
        }
    };

    const int n_workers = std::max(1, threads);
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return rows;
}

}  // namespace kdrift
