#include <doctest.h>

#include <random>

#include "epimem/engine.hpp"
#include "epimem/oracle.hpp"
#include "test_util.hpp"

using namespace epimem;

TEST_SUITE_BEGIN("oracle");

TEST_CASE("empty store scans to nothing") {
    oracle::FlatStore flat;
    Cue cue;
    cue.class_id = "pt";
    CHECK(oracle::scan_query(flat, cue).empty());
    CHECK(oracle::replay_belief(flat, 100).empty());
}

TEST_CASE("flat ingest mirrors the engine on the same event stream") {
    std::mt19937_64 rng(59);
    auto reg = testutil::unit_registry(3);
    auto frames = testutil::random_frames(*reg, "pt", rng, 150, 6, 60);

    MemoryEngine engine(reg, {2, 64});
    ingest_frames(engine, frames);
    auto flat = oracle::ingest_events(*reg, frames, 2);

    REQUIRE(flat.occurrences.size() == engine.occurrences().size());
    CHECK(flat.item_count == item_count(frames));
    CHECK(flat.deltas == engine.log().deltas());
    for (const auto& occ : engine.occurrences().all()) {
        CHECK(flat.occurrences[occ.id].vector == occ.vector);
        CHECK(flat.occurrences[occ.id].intervals == occ.intervals);
    }
}

TEST_CASE("scan_query agrees with query on random cue/store pairs") {
    std::mt19937_64 rng(61);
    auto reg = testutil::unit_registry(4);
    auto frames = testutil::random_frames(*reg, "pt", rng, 120, 10, 500);

    MemoryEngine engine(reg, {3, 128});
    ingest_frames(engine, frames);
    auto flat = oracle::ingest_events(*reg, frames, 3);
    auto qe = engine.query_engine();

    Cue all_any;
    all_any.class_id = "pt";
    all_any.dims.assign(4, CuePattern::any());
    CHECK(oracle::scan_query(flat, all_any).size() == flat.occurrences.size());

    for (int i = 0; i < 1000; ++i) {
        Cue cue;
        cue.class_id = "pt";
        for (int d = 0; d < 4; ++d) {
            switch (rng() % 3) {
                case 0: cue.dims.push_back(CuePattern::exact(static_cast<Bin>(rng() % 10))); break;
                case 1: {
                    Bin a = static_cast<Bin>(rng() % 10), b = static_cast<Bin>(rng() % 10);
                    cue.dims.push_back(CuePattern::range(std::min(a, b), std::max(a, b)));
                    break;
                }
                default: cue.dims.push_back(CuePattern::any());
            }
        }
        CHECK(qe.query(cue) == oracle::scan_query(flat, cue));
    }
}

TEST_CASE("replay_belief sweeps every delta timestamp") {
    std::mt19937_64 rng(67);
    auto reg = testutil::unit_registry(2);
    auto frames = testutil::random_frames(*reg, "pt", rng, 200, 4, 30);

    MemoryEngine engine(reg, {2, 32});
    ingest_frames(engine, frames);
    auto flat = oracle::ingest_events(*reg, frames, 2);

    CHECK(oracle::replay_belief(flat, 0) == engine.log().belief_at(0));
    for (const auto& d : flat.deltas)
        CHECK(oracle::replay_belief(flat, d.ts) == engine.log().belief_at(d.ts));
    Timestamp beyond = flat.deltas.back().ts + 10;
    CHECK(oracle::replay_belief(flat, beyond) == engine.log().current());
}

TEST_CASE("scan touch counter is linear in store size") {
    std::mt19937_64 rng(71);
    auto reg = testutil::unit_registry(2);
    auto frames = testutil::random_frames(*reg, "pt", rng, 50, 8, 100);
    auto flat = oracle::ingest_events(*reg, frames, 2);

    Cue cue;
    cue.class_id = "pt";
    cue.dims.assign(2, CuePattern::any());
    flat.poll_scan_touches();
    oracle::scan_query(flat, cue);
    CHECK(flat.poll_scan_touches() == flat.occurrences.size());
    oracle::scan_query(flat, cue);
    oracle::scan_query(flat, cue);
    CHECK(flat.poll_scan_touches() == 2 * flat.occurrences.size());
}

TEST_SUITE_END();
