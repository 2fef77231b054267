#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "epimem/episodic_log.hpp"
#include "epimem/event_log.hpp"
#include "epimem/feature_space.hpp"
#include "epimem/occurrence_store.hpp"
#include "epimem/query.hpp"
#include "epimem/types.hpp"

namespace epimem::oracle {

/// Deliberately naive reference store: plain lists, no index. Shares the
/// domain types with the engine but none of its index or log machinery,
/// so the two can check each other.
struct FlatOccurrence {
    InstanceId id = 0;
    FeatureVector vector;
    std::vector<InstanceId> participants;
    std::vector<PresenceInterval> intervals;
};

struct FlatStore {
    std::vector<FlatOccurrence> occurrences;
    std::vector<BeliefDelta> deltas;
    std::uint64_t item_count = 0;  // raw percept items consumed

    /// Occurrences inspected by scan_query since the last poll.
    std::uint64_t poll_scan_touches() const { return scan_touches_.poll(); }
    void count_touch() const { scan_touches_.add(); }

private:
    VisitCounter scan_touches_;
};

/// Replays the event stream with flat structures only: identity by direct
/// comparison, decay by walking the live set. Same frame discipline as the
/// engine (observe everything at the tick, then decay).
FlatStore ingest_events(const SchemaRegistry& reg, std::span<const Frame> frames,
                        std::uint64_t decay_ttl);

/// Filters every occurrence against the cue, touching each one.
BeliefSet scan_query(const FlatStore& flat, const Cue& cue);

/// Folds every delta with ts <= t, no snapshots.
BeliefSet replay_belief(const FlatStore& flat, Timestamp t);

}  // namespace epimem::oracle
