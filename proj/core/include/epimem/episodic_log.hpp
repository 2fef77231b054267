#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "epimem/occurrence_store.hpp"
#include "epimem/types.hpp"

namespace epimem {

enum class DeltaOp : std::uint8_t { Add, Remove };

/// One timestamped change of belief — the unit record of episodic memory.
struct BeliefDelta {
    std::uint64_t seq = 0;  // dense, starts at 0
    Timestamp ts = 0;       // non-decreasing with seq
    DeltaOp op = DeltaOp::Add;
    InstanceId instance = 0;

    bool operator==(const BeliefDelta&) const = default;
};

/// Periodic checkpoint of the fold state, so reconstruction replays a
/// bounded number of deltas.
struct Snapshot {
    std::uint64_t at_seq = 0;
    Timestamp ts = 0;
    BeliefSet present;

    bool operator==(const Snapshot&) const = default;
};

enum class StepDirection : std::uint8_t { Forward, Backward };

struct TimedBelief {
    Timestamp ts = 0;
    BeliefSet present;

    bool operator==(const TimedBelief&) const = default;
};

/// Append-only, time-ordered list of working-memory changes. Reconstruction
/// of the belief at any time starts from the nearest earlier snapshot and
/// replays at most snapshot_interval deltas.
///
/// Append is single-writer; the read operations are safe concurrently with
/// each other but not with append.
class EpisodicLog {
public:
    explicit EpisodicLog(std::uint64_t snapshot_interval = 256);

    /// Validates sequence density, time order, and fold consistency (no
    /// double Add, no Remove of an absent instance) before accepting.
    void append(const BeliefDelta& delta);

    std::uint64_t next_seq() const { return deltas_.size(); }
    std::size_t size() const { return deltas_.size(); }
    bool empty() const { return deltas_.empty(); }

    /// The belief after every delta with ts <= t.
    BeliefSet belief_at(Timestamp t) const;

    /// Nearest belief change strictly after (Forward) or before (Backward)
    /// the given time; absent at the ends of the log.
    std::optional<TimedBelief> step(Timestamp t, StepDirection dir) const;

    /// Presence intervals derived purely from this log's deltas. Equal to
    /// the occurrence store's record whenever both saw the same history.
    std::vector<PresenceInterval> episodes_of(InstanceId instance) const;

    const std::vector<BeliefDelta>& deltas() const { return deltas_; }
    const std::vector<Snapshot>& snapshots() const { return snapshots_; }
    std::uint64_t snapshot_interval() const { return snapshot_interval_; }

    /// Current fold state (the belief after the whole log).
    const BeliefSet& current() const { return fold_; }

    /// Number of deltas the most recent belief_at call replayed.
    std::uint64_t last_replay_count() const { return last_replay_.get(); }

private:
    std::uint64_t snapshot_interval_;
    std::vector<BeliefDelta> deltas_;
    std::vector<Snapshot> snapshots_;
    BeliefSet fold_;
    std::unordered_map<InstanceId, std::vector<std::uint64_t>> by_instance_;
    RelaxedValue last_replay_;
};

}  // namespace epimem
