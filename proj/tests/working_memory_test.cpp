#include <doctest.h>

#include <random>

#include "epimem/engine.hpp"
#include "test_util.hpp"

using namespace epimem;

TEST_SUITE_BEGIN("working_memory");

namespace {

struct Rig {
    std::shared_ptr<const SchemaRegistry> reg = testutil::grid_registry();
    OccurrenceStore store{reg};
    EpisodicLog log{256};
    WorkingMemory wm;

    explicit Rig(std::uint64_t ttl = 3) : wm(ttl) {}

    ObserveResult see(double shape, Timestamp now) {
        return wm.observe(store, log, "obj", std::vector<double>{shape, 0.5, 0.5}, {}, now);
    }
};

}  // namespace

TEST_CASE("first observation adds; refresh is silent") {
    Rig rig;
    auto r1 = rig.see(0.5, 0);
    CHECK(r1.id == 0);
    CHECK(r1.event == ObserveEvent::New);
    CHECK(rig.log.size() == 1);
    CHECK(rig.log.deltas()[0] == BeliefDelta{0, 0, DeltaOp::Add, 0});
    CHECK(rig.store.occurrence(0).intervals.size() == 1);

    auto r2 = rig.see(0.5, 1);
    CHECK(r2.id == 0);
    CHECK(r2.event == ObserveEvent::Refreshed);
    CHECK(rig.log.size() == 1);  // belief unchanged, episodic memory unchanged
    CHECK(rig.wm.belief() == BeliefSet{0});
}

TEST_CASE("decay boundary is exactly ttl") {
    Rig rig(3);
    rig.see(0.5, 10);
    CHECK(rig.wm.tick(rig.store, rig.log, 13).empty());  // 13 - 10 == ttl, retained
    CHECK(rig.wm.holds(0));
    auto removed = rig.wm.tick(rig.store, rig.log, 14);  // ttl + 1, removed
    CHECK(removed == std::vector<InstanceId>{0});
    CHECK(rig.wm.belief().empty());
    CHECK(rig.log.deltas().back() == BeliefDelta{1, 14, DeltaOp::Remove, 0});
    CHECK(rig.store.occurrence(0).intervals[0] == PresenceInterval{10, 14});

    CHECK(rig.wm.tick(rig.store, rig.log, 20).empty());  // empty working memory
}

TEST_CASE("decayed instance reenters with a second interval") {
    Rig rig(2);
    // phase 1: seen, phase 2: decays, phase 3: reenters
    auto a = rig.see(1.5, 0);
    CHECK(a.event == ObserveEvent::New);
    rig.wm.tick(rig.store, rig.log, 0);
    rig.wm.tick(rig.store, rig.log, 3);
    CHECK(rig.wm.belief().empty());

    auto b = rig.see(1.5, 5);
    CHECK(b.id == a.id);
    CHECK(b.event == ObserveEvent::Reentered);
    rig.wm.tick(rig.store, rig.log, 5);

    CHECK(rig.store.occurrence(a.id).intervals ==
          std::vector<PresenceInterval>{{0, 3}, {5, std::nullopt}});

    // oracle replay of the emitted deltas reproduces every belief
    std::vector<BeliefDelta> expected{{0, 0, DeltaOp::Add, a.id},
                                      {1, 3, DeltaOp::Remove, a.id},
                                      {2, 5, DeltaOp::Add, a.id}};
    CHECK(rig.log.deltas() == expected);
}

TEST_CASE("timestamps must be monotone") {
    Rig rig;
    rig.see(0.5, 5);
    CHECK_THROWS_AS(rig.see(1.5, 4), DataError);
    CHECK_THROWS_AS(rig.wm.tick(rig.store, rig.log, 4), DataError);
    CHECK_NOTHROW(rig.see(1.5, 5));  // same tick is a frame, fine
}

TEST_CASE("belief equals the fold of emitted deltas and the open intervals") {
    Rig rig(2);
    std::mt19937_64 rng(41);
    for (Timestamp t = 0; t < 200; ++t) {
        std::size_t n = rng() % 4;
        for (std::size_t i = 0; i < n; ++i) rig.see(static_cast<double>(rng() % 8) + 0.5, t);
        rig.wm.tick(rig.store, rig.log, t);

        BeliefSet folded;
        for (const auto& d : rig.log.deltas()) {
            if (d.op == DeltaOp::Add) belief_insert(folded, d.instance);
            else belief_erase(folded, d.instance);
        }
        CHECK(rig.wm.belief() == folded);
        CHECK(rig.wm.belief() == rig.log.belief_at(t));

        BeliefSet open;
        for (const auto& occ : rig.store.all())
            if (!occ.intervals.empty() && occ.intervals.back().open()) belief_insert(open, occ.id);
        CHECK(rig.wm.belief() == open);
    }

    // intervals derived purely from the log equal the stored ones
    for (const auto& occ : rig.store.all()) CHECK(rig.log.episodes_of(occ.id) == occ.intervals);
}

TEST_CASE("slow variation: persistent objects emit far fewer deltas than observations") {
    Rig rig(3);
    // scripted dwell: 4 objects visible for 50 consecutive ticks each
    std::uint64_t observations = 0;
    for (Timestamp t = 0; t < 50; ++t) {
        for (int k = 0; k < 4; ++k) {
            rig.see(static_cast<double>(k) + 0.5, t);
            ++observations;
        }
        rig.wm.tick(rig.store, rig.log, t);
    }
    // oracle count: one Add per object, nothing ever decays
    CHECK(observations == 200);
    CHECK(rig.log.size() == 4);
    CHECK(rig.log.size() < observations);
}

TEST_CASE("relations decay independently of their participants") {
    Rig rig(2);
    InstanceId a = rig.see(0.5, 0).id;
    InstanceId b = rig.see(1.5, 0).id;
    auto rel = rig.wm.observe(rig.store, rig.log, "rel", std::vector<double>{0.5},
                              std::vector<InstanceId>{a, b}, 0);
    rig.wm.tick(rig.store, rig.log, 0);
    CHECK(rig.wm.belief() == BeliefSet{a, b, rel.id});

    // keep refreshing only the relation's participants' relation — i.e. the
    // relation itself — while the objects go stale
    for (Timestamp t = 1; t <= 4; ++t) {
        rig.wm.observe(rig.store, rig.log, "rel", std::vector<double>{0.5},
                       std::vector<InstanceId>{a, b}, t);
        rig.wm.tick(rig.store, rig.log, t);
    }
    CHECK(rig.wm.holds(rel.id));
    CHECK_FALSE(rig.wm.holds(a));
    CHECK_FALSE(rig.wm.holds(b));
}

TEST_SUITE_END();
