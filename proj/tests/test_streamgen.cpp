#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include "kdrift/io.hpp"
#include "kdrift/kde.hpp"
#include "kdrift/streamgen.hpp"

using namespace kdrift;

namespace {

DriftStreamSpec small_spec(DriftType type, Scenario scenario, std::uint64_t seed = 7) {
    DriftStreamSpec spec;
    spec.drift_type = type;
    spec.scenario = scenario;
    spec.n_scenes = 6;
    spec.n_instances = 1200;
    spec.frames_per_instance = 4;
    spec.dim = 2;
    spec.seed = seed;
    return spec;
}

bool same_component(const GaussianComponent& a, const GaussianComponent& b) {
    return a.mean == b.mean && a.var == b.var;
}

}  // namespace

TEST(BuildConcepts, BasesRespectDocumentedRanges) {
    const auto scenes = build_concepts(small_spec(DriftType::A, Scenario::T1));
    ASSERT_EQ(scenes.size(), 6u);
    for (const auto& s : scenes) {
        EXPECT_GE(s.base.size(), 2u);
        EXPECT_LE(s.base.size(), 4u);
        EXPECT_TRUE(validate(s.base).empty());
        for (const auto& c : s.base.components) {
            for (double m : c.mean) {
                EXPECT_GE(m, -5.0);
                EXPECT_LE(m, 5.0);
            }
            for (double v : c.var) {
                EXPECT_GE(v, 0.5);
                EXPECT_LE(v, 1.5);
            }
        }
        EXPECT_EQ(s.pool.size(), static_cast<std::size_t>(kEventPoolSize));
        for (const auto& ev : s.pool) {
            EXPECT_GE(ev.gain, 0.2);
            EXPECT_LE(ev.gain, 0.4);
        }
    }
}

TEST(BuildConcepts, T1PoolsPairwiseDisjoint) {
    const auto scenes = build_concepts(small_spec(DriftType::A, Scenario::T1));
    for (std::size_t a = 0; a + 1 < scenes.size(); ++a) {
        for (std::size_t b = a + 1; b < scenes.size(); ++b) {
            for (const auto& ea : scenes[a].pool) {
                for (const auto& eb : scenes[b].pool) {
                    EXPECT_FALSE(same_component(ea.comp, eb.comp));
                }
            }
        }
    }
}

TEST(BuildConcepts, T3GroupsSharePools) {
    const auto scenes = build_concepts(small_spec(DriftType::C1, Scenario::T3));
    // scenes 0 and 3 fall in the same group of three
    for (int e = 0; e < kEventPoolSize; ++e) {
        EXPECT_TRUE(same_component(scenes[0].pool[e].comp, scenes[3].pool[e].comp));
        EXPECT_DOUBLE_EQ(scenes[0].pool[e].gain, scenes[3].pool[e].gain);
    }
    // different groups stay distinct
    bool any_shared = false;
    for (const auto& ea : scenes[0].pool) {
        for (const auto& eb : scenes[1].pool) any_shared |= same_component(ea.comp, eb.comp);
    }
    EXPECT_FALSE(any_shared);
}

TEST(BuildConcepts, T3SameGroupScenesCanActivateTheSameEvent) {
    bool collision = false;
    for (std::uint64_t seed = 0; seed < 30 && !collision; ++seed) {
        const DriftStreamSpec spec = small_spec(DriftType::C1, Scenario::T3, seed);
        const auto scenes = build_concepts(spec);
        const auto timelines = schedule_drift(spec, scenes);
        // compare the event activated by scenes 0 and 3 (same group)
        const auto& iv0 = timelines[0].intervals[1];
        const auto& iv3 = timelines[3].intervals[1];
        ASSERT_EQ(iv0.active_events.size(), 1u);
        ASSERT_EQ(iv3.active_events.size(), 1u);
        collision = iv0.active_events[0] == iv3.active_events[0];
    }
    EXPECT_TRUE(collision);
}

TEST(BuildConcepts, DeterministicPerSeed) {
    const DriftStreamSpec spec = small_spec(DriftType::B, Scenario::T2);
    const auto a = build_concepts(spec);
    const auto b = build_concepts(spec);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t s = 0; s < a.size(); ++s) {
        EXPECT_EQ(a[s].base, b[s].base);
        ASSERT_EQ(a[s].pool.size(), b[s].pool.size());
        for (std::size_t e = 0; e < a[s].pool.size(); ++e) {
            EXPECT_TRUE(same_component(a[s].pool[e].comp, b[s].pool[e].comp));
            EXPECT_DOUBLE_EQ(a[s].pool[e].gain, b[s].pool[e].gain);
        }
    }
}

TEST(ScheduleDrift, TypeAReplacesAndNeverRevisits) {
    const DriftStreamSpec spec = small_spec(DriftType::A, Scenario::T1);
    const auto scenes = build_concepts(spec);
    const auto timelines = schedule_drift(spec, scenes);
    for (const auto& tl : timelines) {
        ASSERT_EQ(tl.intervals.size(), 4u);  // base + three replacements
        std::map<int, int> appearances;
        for (const auto& iv : tl.intervals) {
            EXPECT_LE(iv.active_events.size(), 1u);
            for (int e : iv.active_events) ++appearances[e];
        }
        for (const auto& [event, count] : appearances) EXPECT_EQ(count, 1);
        EXPECT_EQ(tl.intervals[1].kind, "appear");
        EXPECT_EQ(tl.intervals[2].kind, "replace");
        EXPECT_EQ(tl.intervals[3].kind, "replace");
    }
}

TEST(ScheduleDrift, TypeBStacksMonotonically) {
    const DriftStreamSpec spec = small_spec(DriftType::B, Scenario::T2);
    const auto scenes = build_concepts(spec);
    const auto timelines = schedule_drift(spec, scenes);
    for (const auto& tl : timelines) {
        std::size_t prev = 0;
        for (const auto& iv : tl.intervals) {
            EXPECT_GE(iv.active_events.size(), prev);
            prev = iv.active_events.size();
        }
        EXPECT_EQ(tl.intervals.back().active_events.size(), tl.intervals.size() - 1);
    }
}

TEST(ScheduleDrift, TypeC1RecurrenceIsExact) {
    DriftStreamSpec spec = small_spec(DriftType::C1, Scenario::T1);
    spec.drift_points = {0.25, 0.5, 0.75};
    const auto scenes = build_concepts(spec);
    const auto timelines = schedule_drift(spec, scenes);
    for (std::size_t s = 0; s < scenes.size(); ++s) {
        const auto& ivs = timelines[s].intervals;
        ASSERT_EQ(ivs.size(), 4u);
        EXPECT_EQ(ivs[0].active_events, ivs[2].active_events);
        EXPECT_EQ(ivs[1].active_events, ivs[3].active_events);
        // parameter-level equality of the sampled distribution
        EXPECT_EQ(active_mixture(scenes[s], ivs[1].active_events),
                  active_mixture(scenes[s], ivs[3].active_events));
        EXPECT_EQ(ivs[2].kind, "recur");
    }
}

TEST(ScheduleDrift, TypeC2StacksThenCycles) {
    const DriftStreamSpec spec = small_spec(DriftType::C2, Scenario::T1);
    const auto scenes = build_concepts(spec);
    const auto timelines = schedule_drift(spec, scenes);
    for (const auto& tl : timelines) {
        ASSERT_GE(tl.intervals.size(), 4u);
        EXPECT_EQ(tl.intervals[0].active_events.size(), 0u);
        EXPECT_EQ(tl.intervals[1].active_events.size(), 1u);
        EXPECT_EQ(tl.intervals[2].active_events.size(), 2u);
        EXPECT_EQ(tl.intervals[1].kind, "appear");
        EXPECT_EQ(tl.intervals[2].kind, "stack");
        // after the stack the two drifted concepts alternate
        for (std::size_t m = 3; m < tl.intervals.size(); ++m) {
            EXPECT_EQ(tl.intervals[m].active_events,
                      tl.intervals[m % 2 == 0 ? 2 : 1].active_events);
            EXPECT_EQ(tl.intervals[m].kind, "recur");
        }
    }
}

TEST(ScheduleDrift, IntervalsPartitionTheTimeline) {
    for (DriftType type : {DriftType::A, DriftType::B, DriftType::C1, DriftType::C2}) {
        const DriftStreamSpec spec = small_spec(type, Scenario::T2);
        const auto scenes = build_concepts(spec);
        const auto timelines = schedule_drift(spec, scenes);
        const std::int64_t per_scene = spec.n_instances / spec.n_scenes;
        for (const auto& tl : timelines) {
            std::int64_t cursor = 0;
            for (const auto& iv : tl.intervals) {
                EXPECT_EQ(iv.begin, cursor);
                EXPECT_GT(iv.end, iv.begin);
                cursor = iv.end;
            }
            EXPECT_EQ(cursor, per_scene);
        }
    }
}

TEST(Generate, EqualClassDistribution) {
    DriftStreamSpec spec;
    spec.n_scenes = 15;
    spec.n_instances = 12000;
    spec.frames_per_instance = 2;
    spec.dim = 2;
    spec.seed = 3;
    const GeneratedStream stream = generate(spec);
    ASSERT_EQ(stream.instances.size(), 12000u);
    std::map<std::string, int> counts;
    for (const auto& inst : stream.instances) ++counts[inst.label];
    ASSERT_EQ(counts.size(), 15u);
    for (const auto& [scene, n] : counts) EXPECT_EQ(n, 800);
}

TEST(Generate, ByteIdenticalPerSeed) {
    const DriftStreamSpec spec = small_spec(DriftType::C2, Scenario::T3);
    std::ostringstream a, b;
    write_stream_jsonl(generate(spec).instances, a);
    write_stream_jsonl(generate(spec).instances, b);
    EXPECT_EQ(a.str(), b.str());
    ASSERT_FALSE(a.str().empty());
}

TEST(Generate, PreDriftHalvesAreStationary) {
    DriftStreamSpec spec;
    spec.drift_type = DriftType::A;
    spec.n_scenes = 3;
    spec.n_instances = 4800;  // 1600 per scene, drift starts at 400
    spec.frames_per_instance = 2;
    spec.dim = 2;
    spec.seed = 11;
    const GeneratedStream stream = generate(spec);
    std::vector<double> first_half, second_half;
    std::int64_t seen = 0;
    for (const auto& inst : stream.instances) {
        if (inst.label != "scene00") continue;
        if (seen < 200) {
            first_half.push_back(inst.frames.at(0, 0));
        } else if (seen < 400) {
            second_half.push_back(inst.frames.at(0, 0));
        }
        ++seen;
    }
    ASSERT_EQ(first_half.size(), 200u);
    ASSERT_EQ(second_half.size(), 200u);
    EXPECT_LT(tv_divergence(first_half, second_half), 0.15);
}

TEST(Generate, AnnotationsMatchTimeline) {
    const DriftStreamSpec spec = small_spec(DriftType::A, Scenario::T1);
    const auto scenes = build_concepts(spec);
    const auto timelines = schedule_drift(spec, scenes);
    const GeneratedStream stream = generate(spec);

    std::size_t expected = 0;
    for (const auto& tl : timelines) expected += tl.intervals.size() - 1;
    ASSERT_EQ(stream.annotations.size(), expected);

    for (const auto& ann : stream.annotations) {
        // the annotated instance exists, carries the right scene, and is the
        // first of its scene inside the new interval
        ASSERT_GE(ann.at, 0);
        ASSERT_LT(ann.at, spec.n_instances);
        const Instance& inst = stream.instances[static_cast<std::size_t>(ann.at)];
        EXPECT_EQ(inst.label, ann.scene);
        EXPECT_TRUE(ann.kind == "appear" || ann.kind == "replace" || ann.kind == "stack" ||
                    ann.kind == "recur");
    }
}

TEST(Generate, EventGainStaysInsideConfiguredRange) {
    for (DriftType type : {DriftType::A, DriftType::B, DriftType::C2}) {
        const DriftStreamSpec spec = small_spec(type, Scenario::T2);
        const auto scenes = build_concepts(spec);
        const auto timelines = schedule_drift(spec, scenes);
        for (std::size_t s = 0; s < scenes.size(); ++s) {
            for (const auto& iv : timelines[s].intervals) {
                const MixtureModel mix = active_mixture(scenes[s], iv.active_events);
                EXPECT_TRUE(validate(mix).empty());
                const std::size_t base_k = scenes[s].base.size();
                for (std::size_t e = 0; e < iv.active_events.size(); ++e) {
                    const double w = mix.components[base_k + e].weight;
                    EXPECT_GE(w, spec.event_gain_lo);
                    EXPECT_LE(w, spec.event_gain_hi);
                }
            }
        }
    }
}

TEST(Generate, SpecErrorsAreReported) {
    DriftStreamSpec spec = small_spec(DriftType::A, Scenario::T1);
    spec.n_instances = 1001;  // not divisible by scenes
    EXPECT_THROW(generate(spec), SpecError);

    spec = small_spec(DriftType::A, Scenario::T1);
    spec.drift_points = {0.5, 0.25};
    EXPECT_THROW(generate(spec), SpecError);

    spec = small_spec(DriftType::A, Scenario::T1);
    spec.drift_points = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};  // more events than the pool
    EXPECT_THROW(generate(spec), SpecError);

    spec = small_spec(DriftType::B, Scenario::T1);
    spec.drift_points = {0.2, 0.5, 0.8};
    spec.event_gain_lo = 0.35;  // three stacked events exceed the gain budget
    spec.event_gain_hi = 0.4;
    EXPECT_THROW(generate(spec), SpecError);
}
