#include "epimem/episodic_log.hpp"

#include <algorithm>

namespace epimem {

EpisodicLog::EpisodicLog(std::uint64_t snapshot_interval)
    : snapshot_interval_(snapshot_interval) {
    if (snapshot_interval_ == 0) throw DataError("snapshot_interval must be >= 1");
}

void EpisodicLog::append(const BeliefDelta& delta) {
    if (delta.seq != deltas_.size())
        throw DataError("sequence gap: expected seq " + std::to_string(deltas_.size()) +
                        ", got " + std::to_string(delta.seq));
    if (!deltas_.empty() && delta.ts < deltas_.back().ts)
        throw DataError("time regression: ts " + std::to_string(delta.ts) + " after ts " +
                        std::to_string(deltas_.back().ts));
    if (delta.op == DeltaOp::Add) {
        if (belief_contains(fold_, delta.instance))
            throw DataError("Add for instance " + std::to_string(delta.instance) +
                            " already present");
        belief_insert(fold_, delta.instance);
    } else {
        if (!belief_contains(fold_, delta.instance))
            throw DataError("Remove for instance " + std::to_string(delta.instance) +
                            " not present");
        belief_erase(fold_, delta.instance);
    }
    deltas_.push_back(delta);
    by_instance_[delta.instance].push_back(delta.seq);
    if ((delta.seq + 1) % snapshot_interval_ == 0)
        snapshots_.push_back({delta.seq, delta.ts, fold_});
}

BeliefSet EpisodicLog::belief_at(Timestamp t) const {
    // last delta with ts <= t
    auto it = std::upper_bound(deltas_.begin(), deltas_.end(), t,
                               [](Timestamp v, const BeliefDelta& d) { return v < d.ts; });
    if (it == deltas_.begin()) {
        last_replay_.set(0);
        return {};
    }
    std::uint64_t upto = static_cast<std::uint64_t>(it - deltas_.begin()) - 1;

    // nearest snapshot at or before that delta
    auto snap = std::upper_bound(snapshots_.begin(), snapshots_.end(), upto,
                                 [](std::uint64_t v, const Snapshot& s) { return v < s.at_seq; });
    BeliefSet belief;
    std::uint64_t start = 0;
    if (snap != snapshots_.begin()) {
        --snap;
        belief = snap->present;
        start = snap->at_seq + 1;
    }
    for (std::uint64_t i = start; i <= upto; ++i) {
        const BeliefDelta& d = deltas_[i];
        if (d.op == DeltaOp::Add) belief_insert(belief, d.instance);
        else belief_erase(belief, d.instance);
    }
    last_replay_.set(upto + 1 - start);
    return belief;
}

std::optional<TimedBelief> EpisodicLog::step(Timestamp t, StepDirection dir) const {
    if (dir == StepDirection::Forward) {
        auto it = std::upper_bound(deltas_.begin(), deltas_.end(), t,
                                   [](Timestamp v, const BeliefDelta& d) { return v < d.ts; });
        if (it == deltas_.end()) return std::nullopt;
        return TimedBelief{it->ts, belief_at(it->ts)};
    }
    auto it = std::lower_bound(deltas_.begin(), deltas_.end(), t,
                               [](const BeliefDelta& d, Timestamp v) { return d.ts < v; });
    if (it == deltas_.begin()) return std::nullopt;
    --it;
    return TimedBelief{it->ts, belief_at(it->ts)};
}

std::vector<PresenceInterval> EpisodicLog::episodes_of(InstanceId instance) const {
    auto it = by_instance_.find(instance);
    if (it == by_instance_.end())
        throw DataError("no episodes for unknown instance " + std::to_string(instance));
    std::vector<PresenceInterval> out;
    for (std::uint64_t seq : it->second) {
        const BeliefDelta& d = deltas_[seq];
        if (d.op == DeltaOp::Add) out.push_back({d.ts, std::nullopt});
        else out.back().exit = d.ts;  // append() guarantees Add/Remove alternation
    }
    return out;
}

}  // namespace epimem
