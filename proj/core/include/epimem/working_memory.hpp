#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "epimem/episodic_log.hpp"
#include "epimem/occurrence_store.hpp"
#include "epimem/types.hpp"

namespace epimem {

enum class ObserveEvent : std::uint8_t { New, Reentered, Refreshed };

const char* observe_event_name(ObserveEvent e);

struct ObserveResult {
    InstanceId id = 0;
    ObserveEvent event = ObserveEvent::New;
};

/// The agent's current belief: instances refreshed by observation, decayed
/// after decay_ttl ticks without one. Entering and leaving working memory
/// is what opens/closes presence intervals and emits log deltas; a refresh
/// changes nothing and emits nothing.
///
/// Time is logical and advances only through observe/tick calls. A frame is
/// a run of observe calls at one timestamp followed by one tick at that
/// same timestamp.
class WorkingMemory {
public:
    explicit WorkingMemory(std::uint64_t decay_ttl);

    ObserveResult observe(OccurrenceStore& store, EpisodicLog& log, const std::string& class_id,
                          std::span<const double> raw, std::span<const InstanceId> participants,
                          Timestamp now);

    /// Decays every entry not refreshed within decay_ttl ticks: closes its
    /// interval, emits a Remove delta, and drops it. Removals happen in
    /// ascending instance order; the removed ids are returned in that order.
    std::vector<InstanceId> tick(OccurrenceStore& store, EpisodicLog& log, Timestamp now);

    BeliefSet belief() const;
    bool holds(InstanceId id) const { return entries_.count(id) != 0; }
    std::size_t size() const { return entries_.size(); }
    Timestamp now() const { return now_; }
    std::uint64_t decay_ttl() const { return ttl_; }
    const std::map<InstanceId, Timestamp>& entries() const { return entries_; }

    // load path
    void restore_entry(InstanceId id, Timestamp last_refresh);
    void restore_clock(Timestamp now) { now_ = now; }

private:
    void check_clock(Timestamp now) const;

    std::map<InstanceId, Timestamp> entries_;  // id -> last_refresh
    std::uint64_t ttl_;
    Timestamp now_ = 0;
};

}  // namespace epimem
