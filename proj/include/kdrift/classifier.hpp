#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "kdrift/cmgmm.hpp"
#include "kdrift/em.hpp"
#include "kdrift/kd3.hpp"
#include "kdrift/matrix.hpp"
#include "kdrift/mixture.hpp"

namespace kdrift {

// One labeled stream element: a short matrix of feature frames standing in
// for a fixed-length segment, plus its scene label.
struct Instance {
    std::int64_t id = 0;
    std::string label;
    FrameMatrix frames;
};

struct AdaptationEvent {
    std::int64_t instance_id = 0;
    std::string scene;
};

struct StepOutcome {
    std::string predicted;
    bool correct = false;
    Signal signal;
    bool adapted = false;
};

// Per-scene mixture models with one drift detector each. process() runs
// the test-then-train step: predict, reveal the label, feed the label's
// detector, and adapt that scene's model when drift fires with enough
// buffered data.
class Classifier {
public:
    Classifier() = default;

    static Classifier train_initial(const std::vector<Instance>& labeled, const EmConfig& em,
                                    const Kd3Config& kd3, const AdaptConfig& adapt_cfg,
                                    std::uint64_t seed) {
        check_config(kd3);
        check_config(adapt_cfg);
        std::map<std::string, FrameMatrix> frames_by_scene;
        for (const auto& inst : labeled) {
            frames_by_scene[inst.label].append_rows(inst.frames);
        }
        Classifier clf;
        clf.kd3_cfg_ = kd3;
        clf.adapt_cfg_ = adapt_cfg;
        clf.seed_ = seed;
        for (const auto& [scene, frames] : frames_by_scene) {
            if (frames.rows() < 2) {
                throw InsufficientData("scene '" + scene + "' has " +
                                       std::to_string(frames.rows()) +
                                       " training frames, need >= 2");
            }
            EmConfig scene_em = em;
            scene_em.seed = mix_seed(seed, fnv1a64(scene));
            clf.models_.emplace(scene, select_k_bic(frames, scene_em));
            clf.detectors_.emplace(scene, Kd3Detector(kd3));
            clf.adapt_counts_[scene] = 0;
        }
        return clf;
    }

    // Highest mean frame log-likelihood wins; ties break to the
    // lexicographically first scene.
    std::pair<std::string, std::map<std::string, double>> predict(const Instance& inst) const {
        if (models_.empty()) throw RejectedInput("classifier has no trained scenes");
        if (inst.frames.cols() != dim()) {
            throw RejectedInput("instance dimension " + std::to_string(inst.frames.cols()) +
                                " != model dimension " + std::to_string(dim()));
        }
        std::map<std::string, double> scores;
        std::string best_scene;
        double best_score = -std::numeric_limits<double>::infinity();
        for (const auto& [scene, model] : models_) {
            const double s = mean_log_density(model, inst.frames);
            scores.emplace(scene, s);
            if (s > best_score) {
                best_score = s;
                best_scene = scene;
            }
        }
        return {best_scene, std::move(scores)};
    }

    StepOutcome process(const Instance& inst) {
        auto model_it = models_.find(inst.label);
        if (model_it == models_.end()) {
            throw RejectedInput("unknown label '" + inst.label + "'");
        }

        StepOutcome outcome;
        outcome.predicted = predict(inst).first;
        outcome.correct = outcome.predicted == inst.label;

        // Monitored scalar: the instance's mean frame log-likelihood under
        // its own scene's current model.
        const double ell = mean_log_density(model_it->second, inst.frames);
        Kd3Detector& det = detectors_.at(inst.label);
        outcome.signal = det.update(ell, inst.frames);

        if (outcome.signal.kind == SignalKind::Drift) {
            FrameMatrix data = det.take_warning_data();
            if (data.rows() >= kd3_cfg_.min_adapt_frames) {
                AdaptConfig cfg = adapt_cfg_;
                cfg.em.seed = mix_seed(seed_, mix_seed(fnv1a64(inst.label),
                                                       ++adapt_counts_[inst.label]));
                model_it->second = adapt(model_it->second, data, cfg);
                log_.push_back({inst.id, inst.label});
                outcome.adapted = true;
            }
            det.reset();
        }
        return outcome;
    }

    std::size_t dim() const {
        return models_.empty() ? 0 : models_.begin()->second.dim();
    }

    const std::map<std::string, MixtureModel>& models() const { return models_; }
    const std::map<std::string, Kd3Detector>& detectors() const { return detectors_; }
    const std::vector<AdaptationEvent>& adaptation_log() const { return log_; }
    const Kd3Config& kd3_config() const { return kd3_cfg_; }
    const AdaptConfig& adapt_config() const { return adapt_cfg_; }
    std::uint64_t seed() const { return seed_; }

    // Rebuild from checkpointed state.
    static Classifier restore(std::map<std::string, MixtureModel> models,
                              std::map<std::string, Kd3Detector> detectors,
                              const Kd3Config& kd3, const AdaptConfig& adapt_cfg,
                              std::uint64_t seed, std::vector<AdaptationEvent> log,
                              std::map<std::string, std::uint64_t> adapt_counts) {
        Classifier clf;
        clf.models_ = std::move(models);
        clf.detectors_ = std::move(detectors);
        clf.kd3_cfg_ = kd3;
        clf.adapt_cfg_ = adapt_cfg;
        clf.seed_ = seed;
        clf.log_ = std::move(log);
        clf.adapt_counts_ = std::move(adapt_counts);
        for (const auto& [scene, model] : clf.models_) {
            if (!clf.detectors_.count(scene)) clf.detectors_.emplace(scene, Kd3Detector(kd3));
            if (!clf.adapt_counts_.count(scene)) clf.adapt_counts_[scene] = 0;
        }
        return clf;
    }

    const std::map<std::string, std::uint64_t>& adapt_counts() const { return adapt_counts_; }

private:
    std::map<std::string, MixtureModel> models_;
    std::map<std::string, Kd3Detector> detectors_;
    Kd3Config kd3_cfg_;
    AdaptConfig adapt_cfg_;
    std::uint64_t seed_ = 0;
    std::vector<AdaptationEvent> log_;
    std::map<std::string, std::uint64_t> adapt_counts_;
};

}  // namespace kdrift
