#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "kdrift/classifier.hpp"
#include "kdrift/errors.hpp"
#include "kdrift/mixture.hpp"
#include "kdrift/rng.hpp"

namespace kdrift {

enum class DriftType { A, B, C1, C2 };
enum class Scenario { T1, T2, T3 };

inline std::string to_string(DriftType t) {
    switch (t) {
        case DriftType::A: return "A";
        case DriftType::B: return "B";
        case DriftType::C1: return "C1";
        default: return "C2";
    }
}

inline std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::T1: return "T1";
        case Scenario::T2: return "T2";
        default: return "T3";
    }
}

inline DriftType parse_drift_type(const std::string& s) {
    if (s == "A") return DriftType::A;
    if (s == "B") return DriftType::B;
    if (s == "C1") return DriftType::C1;
    if (s == "C2") return DriftType::C2;
    throw ParseError("unknown drift type '" + s + "'");
}

inline Scenario parse_scenario(const std::string& s) {
    if (s == "T1") return Scenario::T1;
    if (s == "T2") return Scenario::T2;
    if (s == "T3") return Scenario::T3;
    throw ParseError("unknown scenario '" + s + "'");
}

// Declarative description of a synthetic drifting stream.
struct DriftStreamSpec {
    DriftType drift_type = DriftType::A;
    Scenario scenario = Scenario::T1;
    int n_scenes = 15;
    std::int64_t n_instances = 12000;
    int frames_per_instance = 20;
    int dim = 8;
    double event_gain_lo = 0.2;
    double event_gain_hi = 0.4;
    // Fractions of the per-scene timeline at which concepts change; empty
    // selects the per-type default.
    std::vector<double> drift_points;
    std::uint64_t seed = 0;
};

// Base concepts use 2-4 components per scene. Event components sit part of
// the way from their scene's mass toward another scene's mass, so a
// drifted, unadapted scene genuinely confuses the classifier, and the
// monitored log-likelihood shifts by a moderate amount rather than
// saturating every margin.
inline constexpr int kEventPoolSize = 5;
inline constexpr int kEventGroups = 3;
inline constexpr double kEventBlendLo = 0.7;   // fraction of the way toward the foreign scene
inline constexpr double kEventBlendHi = 0.95;
inline constexpr double kEventOffsetLo = 2.0;  // fallback offset when no foreign scene exists
inline constexpr double kEventOffsetHi = 4.0;
inline constexpr double kEventVarLo = 0.15;
inline constexpr double kEventVarHi = 0.5;
// Combined event gain above this cannot be realized alongside the base.
inline constexpr double kMaxTotalGain = 0.9;

struct EventComponent {
    GaussianComponent comp;  // weight field unused; gain carries the mixing mass
    double gain = 0.0;
};

struct SceneConcepts {
    std::string scene;
    MixtureModel base;
    std::vector<EventComponent> pool;
};

struct ConceptInterval {
    std::int64_t begin = 0;  // per-scene instance index, inclusive
    std::int64_t end = 0;    // exclusive
    std::vector<int> active_events;
    std::string kind;  // transition that opened this interval; empty for the first
};

struct ConceptTimeline {
    std::vector<ConceptInterval> intervals;
};

struct DriftAnnotation {
    std::string scene;
    std::int64_t at = 0;  // global instance index where the new concept starts
    std::string kind;
};

struct GeneratedStream {
    std::vector<Instance> instances;
    std::vector<DriftAnnotation> annotations;
};

inline std::string scene_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "scene%02d", index);
    return buf;
}

inline std::vector<double> default_drift_points(DriftType t) {
    switch (t) {
        case DriftType::A:
            return {0.25, 0.5, 0.75};
        case DriftType::B:
            // stacks one novel event per drift point; two points keep the
            // combined default gain below kMaxTotalGain
            return {1.0 / 3.0, 2.0 / 3.0};
        case DriftType::C1: {
            // the recurring concept toggles through a few full cycles
            std::vector<double> points;
            for (int k = 1; k <= 5; ++k) points.push_back(k / 6.0);
            return points;
        }
        default:
            // stack of two events, the stack then recurring; intervals long
            // enough for both stacked concepts to be learned
            return {0.25, 0.5, 0.75};
    }
}

inline void check_spec(const DriftStreamSpec& spec) {
    if (spec.n_scenes < 1) throw SpecError("n_scenes must be >= 1");
    if (spec.n_instances < spec.n_scenes) throw SpecError("n_instances must cover every scene");
    if (spec.n_instances % spec.n_scenes != 0) {
        throw SpecError("n_instances must be divisible by n_scenes for equal distribution");
    }
    if (spec.frames_per_instance < 1) throw SpecError("frames_per_instance must be >= 1");
    if (spec.dim < 1) throw SpecError("dim must be >= 1");
    if (!(spec.event_gain_lo > 0.0 && spec.event_gain_lo <= spec.event_gain_hi &&
          spec.event_gain_hi < 1.0)) {
        throw SpecError("event gain range must satisfy 0 < lo <= hi < 1");
    }
    const auto& pts = spec.drift_points;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!(pts[i] > 0.0 && pts[i] < 1.0)) throw SpecError("drift points must lie in (0, 1)");
        if (i > 0 && !(pts[i] > pts[i - 1])) {
            throw SpecError("drift points must be strictly increasing");
        }
    }
}

namespace detail {

inline GaussianComponent random_base_component(Rng& rng, int dim) {
    std::vector<double> mean(dim), var(dim);
    for (int j = 0; j < dim; ++j) mean[j] = rng.uniform(-5.0, 5.0);
    for (int j = 0; j < dim; ++j) var[j] = rng.uniform(0.5, 1.5);
    return make_component(1.0, std::move(mean), std::move(var));
}

// Event between the anchor scene's mass and a foreign scene's mass. With
// no foreign scene available the event steps a fixed distance from the
// anchor in a random direction instead.
inline EventComponent random_event(Rng& rng, const MixtureModel& anchor_base,
                                   const MixtureModel* foreign_base,
                                   const DriftStreamSpec& spec) {
    const int dim = static_cast<int>(anchor_base.dim());
    const auto& anchor = anchor_base.components[rng.index(anchor_base.size())];
    std::vector<double> mean(dim), var(dim);
    if (foreign_base != nullptr) {
        const auto& target = foreign_base->components[rng.index(foreign_base->size())];
        const double blend = rng.uniform(kEventBlendLo, kEventBlendHi);
        for (int j = 0; j < dim; ++j) {
            mean[j] = anchor.mean[j] + blend * (target.mean[j] - anchor.mean[j]);
        }
    } else {
        std::vector<double> dir(dim);
        double norm = 0.0;
        do {
            norm = 0.0;
            for (int j = 0; j < dim; ++j) {
                dir[j] = rng.normal();
                norm += dir[j] * dir[j];
            }
            norm = std::sqrt(norm);
        } while (norm < 1e-12);
        const double dist = rng.uniform(kEventOffsetLo, kEventOffsetHi);
        for (int j = 0; j < dim; ++j) mean[j] = anchor.mean[j] + dist * dir[j] / norm;
    }
    for (int j = 0; j < dim; ++j) var[j] = rng.uniform(kEventVarLo, kEventVarHi);
    EventComponent ev;
    ev.comp = make_component(1.0, std::move(mean), std::move(var));
    ev.gain = rng.uniform(spec.event_gain_lo, spec.event_gain_hi);
    return ev;
}

}  // namespace detail

// Per-scene base mixtures and event pools. T1 and T2 build disjoint
// per-scene pools; T3 builds shared group pools, one group per
// (scene index mod kEventGroups).
inline std::vector<SceneConcepts> build_concepts(const DriftStreamSpec& spec) {
    check_spec(spec);
    std::vector<SceneConcepts> scenes(spec.n_scenes);
    for (int s = 0; s < spec.n_scenes; ++s) {
        Rng rng(mix_seed(spec.seed, fnv1a64("base:" + std::to_string(s))));
        scenes[s].scene = scene_name(s);
        const int k0 = 2 + static_cast<int>(rng.index(3));
        MixtureModel base;
        std::vector<double> raw_weights;
        for (int c = 0; c < k0; ++c) {
            base.components.push_back(detail::random_base_component(rng, spec.dim));
            raw_weights.push_back(rng.uniform(0.5, 1.5));
        }
        double sum = 0.0;
        for (double w : raw_weights) sum += w;
        for (int c = 0; c < k0; ++c) base.components[c].weight = raw_weights[c] / sum;
        scenes[s].base = std::move(base);
    }

    if (spec.scenario == Scenario::T3) {
        std::vector<std::vector<EventComponent>> groups(kEventGroups);
        for (int g = 0; g < kEventGroups; ++g) {
            Rng rng(mix_seed(spec.seed, fnv1a64("group:" + std::to_string(g))));
            std::vector<int> members;
            for (int s = g; s < spec.n_scenes; s += kEventGroups) members.push_back(s);
            for (int e = 0; e < kEventPoolSize; ++e) {
                // Anchor each group event at one member scene, leaning
                // toward another member when the group has one.
                const int anchor_scene = members[rng.index(members.size())];
                const MixtureModel* foreign = nullptr;
                if (members.size() > 1) {
                    int other = anchor_scene;
                    while (other == anchor_scene) {
                        other = members[rng.index(members.size())];
                    }
                    foreign = &scenes[other].base;
                }
                groups[g].push_back(
                    detail::random_event(rng, scenes[anchor_scene].base, foreign, spec));
            }
        }
        for (int s = 0; s < spec.n_scenes; ++s) scenes[s].pool = groups[s % kEventGroups];
    } else {
        for (int s = 0; s < spec.n_scenes; ++s) {
            Rng rng(mix_seed(spec.seed, fnv1a64("pool:" + std::to_string(s))));
            for (int e = 0; e < kEventPoolSize; ++e) {
                const MixtureModel* foreign = nullptr;
                if (spec.n_scenes > 1) {
                    int other = s;
                    while (other == s) {
                        other = static_cast<int>(rng.index(static_cast<std::size_t>(spec.n_scenes)));
                    }
                    foreign = &scenes[other].base;
                }
                scenes[s].pool.push_back(
                    detail::random_event(rng, scenes[s].base, foreign, spec));
            }
        }
    }
    return scenes;
}

namespace detail {

// Pick an unused pool event. T1 assigns pool entries in order; T2/T3 draw
// one at random from the unused remainder.
inline int pick_event(const DriftStreamSpec& spec, Rng& rng, std::vector<bool>& used) {
    std::vector<int> unused;
    for (std::size_t e = 0; e < used.size(); ++e) {
        if (!used[e]) unused.push_back(static_cast<int>(e));
    }
    if (unused.empty()) {
        throw SpecError("drift schedule needs more events than the pool holds (" +
                        std::to_string(used.size()) + ")");
    }
    const int pick = spec.scenario == Scenario::T1
                         ? unused.front()
                         : unused[rng.index(unused.size())];
    used[static_cast<std::size_t>(pick)] = true;
    return pick;
}

inline double total_gain(const SceneConcepts& scene, const std::vector<int>& active) {
    double g = 0.0;
    for (int e : active) g += scene.pool[static_cast<std::size_t>(e)].gain;
    return g;
}

}  // namespace detail

// Resolve drift points into per-scene concept timelines for the four
// drift types:
//   A  — each drift point replaces the active event with a novel one.
//   B  — each drift point stacks one more novel event.
//   C1 — the same event toggles on and off.
//   C2 — one event appears, a second stacks, then the stack toggles.
inline std::vector<ConceptTimeline> schedule_drift(const DriftStreamSpec& spec,
                                                   const std::vector<SceneConcepts>& scenes) {
    check_spec(spec);
    const std::vector<double> points =
        spec.drift_points.empty() ? default_drift_points(spec.drift_type) : spec.drift_points;
    const std::int64_t per_scene = spec.n_instances / spec.n_scenes;

    std::vector<std::int64_t> bounds;
    for (double p : points) {
        const auto idx = static_cast<std::int64_t>(p * static_cast<double>(per_scene) + 0.5);
        if (idx <= 0 || idx >= per_scene || (!bounds.empty() && idx <= bounds.back())) {
            throw SpecError("drift points collapse at this stream length");
        }
        bounds.push_back(idx);
    }

    std::vector<ConceptTimeline> timelines(scenes.size());
    for (std::size_t s = 0; s < scenes.size(); ++s) {
        Rng rng(mix_seed(spec.seed, fnv1a64("schedule:" + std::to_string(s))));
        std::vector<bool> used(scenes[s].pool.size(), false);

        std::vector<std::vector<int>> active_sets{{}};
        std::vector<std::string> kinds{""};
        std::vector<int> stack;
        for (std::size_t m = 0; m < bounds.size(); ++m) {
            switch (spec.drift_type) {
                case DriftType::A: {
                    const int e = detail::pick_event(spec, rng, used);
                    active_sets.push_back({e});
                    kinds.push_back(m == 0 ? "appear" : "replace");
                    break;
                }
                case DriftType::B: {
                    const int e = detail::pick_event(spec, rng, used);
                    stack.push_back(e);
                    active_sets.push_back(stack);
                    kinds.push_back(m == 0 ? "appear" : "stack");
                    break;
                }
                case DriftType::C1: {
                    if (stack.empty()) stack.push_back(detail::pick_event(spec, rng, used));
                    const bool on = m % 2 == 0;
                    active_sets.push_back(on ? std::vector<int>{stack[0]} : std::vector<int>{});
                    kinds.push_back(m == 0 ? "appear" : "recur");
                    break;
                }
                case DriftType::C2: {
                    if (m == 0) {
                        stack.push_back(detail::pick_event(spec, rng, used));
                        active_sets.push_back({stack[0]});
                        kinds.push_back("appear");
                    } else if (m == 1) {
                        stack.push_back(detail::pick_event(spec, rng, used));
                        active_sets.push_back({stack[0], stack[1]});
                        kinds.push_back("stack");
                    } else {
                        const bool stacked = m % 2 == 1;
                        active_sets.push_back(stacked ? std::vector<int>{stack[0], stack[1]}
                                                      : std::vector<int>{stack[0]});
                        kinds.push_back("recur");
                    }
                    break;
                }
            }
        }

        ConceptTimeline& tl = timelines[s];
        for (std::size_t m = 0; m < active_sets.size(); ++m) {
            ConceptInterval iv;
            iv.begin = m == 0 ? 0 : bounds[m - 1];
            iv.end = m == bounds.size() ? per_scene : bounds[m];
            iv.active_events = active_sets[m];
            iv.kind = kinds[m];
            if (detail::total_gain(scenes[s], iv.active_events) > kMaxTotalGain) {
                throw SpecError("combined event gain exceeds " + std::to_string(kMaxTotalGain) +
                                " in scene " + scenes[s].scene);
            }
            tl.intervals.push_back(std::move(iv));
        }
    }
    return timelines;
}

// Effective sampling mixture for one interval: base components scaled down
// so each active event contributes exactly its gain.
inline MixtureModel active_mixture(const SceneConcepts& scene,
                                   const std::vector<int>& active_events) {
    double gain = 0.0;
    for (int e : active_events) gain += scene.pool[static_cast<std::size_t>(e)].gain;
    MixtureModel out;
    for (auto c : scene.base.components) {
        c.weight *= 1.0 - gain;
        out.components.push_back(std::move(c));
    }
    for (int e : active_events) {
        const auto& ev = scene.pool[static_cast<std::size_t>(e)];
        GaussianComponent c = ev.comp;
        c.weight = ev.gain;
        out.components.push_back(std::move(c));
    }
    return out;
}

// Full stream synthesis: scenes interleave round-robin, each instance
// sampled from its scene's active concept. Deterministic per seed.
inline GeneratedStream generate(const DriftStreamSpec& spec) {
    const std::vector<SceneConcepts> scenes = build_concepts(spec);
    const std::vector<ConceptTimeline> timelines = schedule_drift(spec, scenes);
    const std::int64_t per_scene = spec.n_instances / spec.n_scenes;

    // Cache each interval's sampling mixture.
    std::vector<std::vector<MixtureModel>> interval_mixtures(scenes.size());
    for (std::size_t s = 0; s < scenes.size(); ++s) {
        for (const auto& iv : timelines[s].intervals) {
            interval_mixtures[s].push_back(active_mixture(scenes[s], iv.active_events));
        }
    }

    GeneratedStream out;
    out.instances.reserve(static_cast<std::size_t>(spec.n_instances));
    for (std::int64_t i = 0; i < spec.n_instances; ++i) {
        const auto s = static_cast<std::size_t>(i % spec.n_scenes);
        const std::int64_t local = i / spec.n_scenes;
        std::size_t iv_idx = 0;
        while (local >= timelines[s].intervals[iv_idx].end) ++iv_idx;
        Instance inst;
        inst.id = i;
        inst.label = scenes[s].scene;
        inst.frames = sample(interval_mixtures[s][iv_idx],
                             static_cast<std::size_t>(spec.frames_per_instance),
                             mix_seed(spec.seed, 0x5a3f00d ^ static_cast<std::uint64_t>(i)));
        out.instances.push_back(std::move(inst));
    }

    for (std::size_t s = 0; s < scenes.size(); ++s) {
        for (std::size_t m = 1; m < timelines[s].intervals.size(); ++m) {
            const auto& iv = timelines[s].intervals[m];
            DriftAnnotation ann;
            ann.scene = scenes[s].scene;
            ann.at = iv.begin * spec.n_scenes + static_cast<std::int64_t>(s);
            ann.kind = iv.kind;
            out.annotations.push_back(std::move(ann));
        }
    }
    return out;
}

}  // namespace kdrift
