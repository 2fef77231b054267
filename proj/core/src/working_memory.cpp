#include "epimem/working_memory.hpp"

namespace epimem {

const char* observe_event_name(ObserveEvent e) {
    switch (e) {
        case ObserveEvent::New: return "new";
        case ObserveEvent::Reentered: return "reentered";
        case ObserveEvent::Refreshed: return "refreshed";
    }
    return "?";
}

WorkingMemory::WorkingMemory(std::uint64_t decay_ttl) : ttl_(decay_ttl) {
    if (ttl_ == 0) throw DataError("decay_ttl must be >= 1");
}

void WorkingMemory::check_clock(Timestamp now) const {
    if (now < now_)
        throw DataError("non-monotonic timestamp " + std::to_string(now) + " (clock at " +
                        std::to_string(now_) + ")");
}

ObserveResult WorkingMemory::observe(OccurrenceStore& store, EpisodicLog& log,
                                     const std::string& class_id, std::span<const double> raw,
                                     std::span<const InstanceId> participants, Timestamp now) {
    check_clock(now);
    now_ = now;

    FeatureVector v = make_vector(store.schemas().get(class_id), raw);
    auto [id, created] = store.find_or_create(v, participants);

    if (auto it = entries_.find(id); it != entries_.end()) {
        it->second = now;  // refresh is silent: belief unchanged, no delta
        return {id, ObserveEvent::Refreshed};
    }
    store.open_interval(id, now);
    log.append({log.next_seq(), now, DeltaOp::Add, id});
    entries_.emplace(id, now);
    return {id, created ? ObserveEvent::New : ObserveEvent::Reentered};
}

std::vector<InstanceId> WorkingMemory::tick(OccurrenceStore& store, EpisodicLog& log,
                                            Timestamp now) {
    check_clock(now);
    now_ = now;

    std::vector<InstanceId> removed;
    for (auto it = entries_.begin(); it != entries_.end();) {
        if (now - it->second > ttl_) {
            store.close_interval(it->first, now);
            log.append({log.next_seq(), now, DeltaOp::Remove, it->first});
            removed.push_back(it->first);
            it = entries_.erase(it);
        } else {
            ++it;
        }
    }
    return removed;
}

BeliefSet WorkingMemory::belief() const {
    BeliefSet out;
    out.reserve(entries_.size());
    for (const auto& [id, _] : entries_) out.push_back(id);
    return out;
}

void WorkingMemory::restore_entry(InstanceId id, Timestamp last_refresh) {
    if (!entries_.emplace(id, last_refresh).second)
        throw DataError("duplicate working-memory record for instance " + std::to_string(id));
}

}  // namespace epimem
