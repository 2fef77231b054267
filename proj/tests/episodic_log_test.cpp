#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "epimem/episodic_log.hpp"
#include "test_util.hpp"

using namespace epimem;

TEST_SUITE_BEGIN("episodic_log");

namespace {

/// Oracle fold: replays every delta with ts <= t, no snapshots.
BeliefSet full_replay(const std::vector<BeliefDelta>& deltas, Timestamp t) {
    BeliefSet out;
    for (const auto& d : deltas) {
        if (d.ts > t) break;
        if (d.op == DeltaOp::Add) belief_insert(out, d.instance);
        else belief_erase(out, d.instance);
    }
    return out;
}

/// Random churn log: instances 0..k-1 toggle in and out over time.
std::vector<BeliefDelta> random_log(std::mt19937_64& rng, std::size_t delta_count,
                                    std::size_t id_pool) {
    std::vector<BeliefDelta> deltas;
    std::set<InstanceId> present;
    Timestamp ts = 0;
    std::uint64_t seq = 0;
    while (deltas.size() < delta_count) {
        ts += rng() % 3;  // repeated timestamps happen on purpose
        InstanceId id = rng() % id_pool;
        if (present.count(id)) {
            deltas.push_back({seq++, ts, DeltaOp::Remove, id});
            present.erase(id);
        } else {
            deltas.push_back({seq++, ts, DeltaOp::Add, id});
            present.insert(id);
        }
    }
    return deltas;
}

}  // namespace

TEST_CASE("append validates sequence, time, and fold consistency") {
    EpisodicLog log(4);
    log.append({0, 1, DeltaOp::Add, 0});
    CHECK(log.size() == 1);
    CHECK_THROWS_AS(log.append({2, 1, DeltaOp::Add, 1}), DataError);           // gap
    CHECK_THROWS_AS(log.append({1, 0, DeltaOp::Add, 1}), DataError);           // regression
    CHECK_THROWS_AS(log.append({1, 1, DeltaOp::Add, 0}), DataError);           // double add
    CHECK_THROWS_AS(log.append({1, 1, DeltaOp::Remove, 9}), DataError);        // absent remove
    log.append({1, 1, DeltaOp::Remove, 0});
    CHECK(log.current().empty());
}

TEST_CASE("belief_at boundaries") {
    EpisodicLog log;
    CHECK(log.belief_at(0).empty());
    log.append({0, 5, DeltaOp::Add, 1});
    log.append({1, 7, DeltaOp::Add, 2});
    CHECK(log.belief_at(4).empty());                       // before the first delta
    CHECK(log.belief_at(5) == BeliefSet{1});
    CHECK(log.belief_at(6) == BeliefSet{1});               // piecewise constant
    CHECK(log.belief_at(7) == BeliefSet{1, 2});
    CHECK(log.belief_at(10000) == log.current());          // after the last delta
}

TEST_CASE("belief_at equals the full-replay oracle on a random log") {
    std::mt19937_64 rng(23);
    auto deltas = random_log(rng, 10000, 50);
    EpisodicLog log(256);
    for (const auto& d : deltas) log.append(d);

    Timestamp last = deltas.back().ts;
    for (int i = 0; i < 600; ++i) {
        Timestamp t = rng() % (last + 3);
        CHECK(log.belief_at(t) == full_replay(deltas, t));
    }
    // every delta timestamp exactly
    std::set<Timestamp> stamps;
    for (const auto& d : deltas) stamps.insert(d.ts);
    for (Timestamp t : stamps) CHECK(log.belief_at(t) == full_replay(deltas, t));
}

TEST_CASE("snapshot-bounded replay") {
    std::mt19937_64 rng(29);
    auto deltas = random_log(rng, 5000, 40);
    EpisodicLog log(256);
    for (const auto& d : deltas) log.append(d);
    CHECK(log.snapshots().size() == 5000 / 256);

    Timestamp last = deltas.back().ts;
    for (int i = 0; i < 500; ++i) {
        log.belief_at(rng() % (last + 2));
        CHECK(log.last_replay_count() <= 256);
    }
}

TEST_CASE("belief changes only at delta timestamps") {
    std::mt19937_64 rng(31);
    auto deltas = random_log(rng, 500, 10);
    EpisodicLog log(64);
    for (const auto& d : deltas) log.append(d);
    std::set<Timestamp> stamps;
    for (const auto& d : deltas) stamps.insert(d.ts);

    for (Timestamp t = 0; t <= deltas.back().ts; ++t) {
        if (stamps.count(t)) continue;
        CHECK(log.belief_at(t) == log.belief_at(t == 0 ? 0 : t - 1));
    }
}

TEST_CASE("step walks delta timestamps in both directions") {
    EpisodicLog log;
    log.append({0, 2, DeltaOp::Add, 0});
    log.append({1, 2, DeltaOp::Add, 1});  // same frame
    log.append({2, 5, DeltaOp::Remove, 0});
    log.append({3, 9, DeltaOp::Add, 2});

    CHECK_FALSE(log.step(2, StepDirection::Backward).has_value());  // nothing before first ts
    CHECK_FALSE(log.step(9, StepDirection::Forward).has_value());

    auto fwd = log.step(2, StepDirection::Forward);
    REQUIRE(fwd.has_value());
    CHECK(fwd->ts == 5);
    CHECK(fwd->present == BeliefSet{1});

    auto back = log.step(5, StepDirection::Backward);
    REQUIRE(back.has_value());
    CHECK(back->ts == 2);
    CHECK(back->present == BeliefSet{0, 1});

    // forward from before the log visits each distinct ts once
    std::vector<Timestamp> visited;
    Timestamp cur = 0;
    auto state = log.step(0, StepDirection::Forward);
    CHECK(log.belief_at(1).empty());
    while (state) {
        visited.push_back(state->ts);
        cur = state->ts;
        state = log.step(cur, StepDirection::Forward);
    }
    CHECK(visited == std::vector<Timestamp>{2, 5, 9});

    // forward then backward lands at or before the start
    auto f = log.step(2, StepDirection::Forward);
    auto b = log.step(f->ts, StepDirection::Backward);
    CHECK(b->ts <= 2);
}

TEST_CASE("episodes_of derives intervals from the log") {
    EpisodicLog log;
    log.append({0, 5, DeltaOp::Add, 7});
    log.append({1, 9, DeltaOp::Remove, 7});
    log.append({2, 12, DeltaOp::Add, 7});
    auto eps = log.episodes_of(7);
    REQUIRE(eps.size() == 2);
    CHECK(eps[0] == PresenceInterval{5, 9});
    CHECK(eps[1].enter == 12);
    CHECK(eps[1].open());

    log.append({3, 20, DeltaOp::Add, 8});
    CHECK(log.episodes_of(8).size() == 1);
    CHECK(log.episodes_of(8)[0].open());
    CHECK_THROWS_AS(log.episodes_of(99), DataError);
}

TEST_CASE("fold count per instance is always 0 or 1") {
    std::mt19937_64 rng(37);
    auto deltas = random_log(rng, 2000, 20);
    std::map<InstanceId, int> count;
    for (const auto& d : deltas) {
        count[d.instance] += d.op == DeltaOp::Add ? 1 : -1;
        CHECK(count[d.instance] >= 0);
        CHECK(count[d.instance] <= 1);
    }
}

TEST_SUITE_END();
