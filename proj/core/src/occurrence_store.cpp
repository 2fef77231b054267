#include "epimem/occurrence_store.hpp"

#include <algorithm>

namespace epimem {

OccurrenceStore::OccurrenceStore(std::shared_ptr<const SchemaRegistry> schemas, LeafHashFn hash)
    : schemas_(std::move(schemas)), index_(schemas_, std::move(hash)) {
    if (!schemas_) throw DataError("OccurrenceStore requires a schema registry");
}

void OccurrenceStore::check_participants(const ClassSchema& schema,
                                         std::span<const InstanceId> participants) const {
    if (participants.size() != schema.arity)
        throw DataError("class '" + schema.class_id + "' takes " + std::to_string(schema.arity) +
                        " participants, got " + std::to_string(participants.size()));
    for (InstanceId p : participants) {
        if (p >= occurrences_.size())
            throw DataError("dangling participant id " + std::to_string(p));
        const ClassSchema& pschema = schemas_->get(occurrences_[p].class_id);
        if (pschema.kind != ClassKind::Object)
            throw DataError("participant " + std::to_string(p) + " is not an object occurrence");
    }
}

FindResult OccurrenceStore::find_or_create(const FeatureVector& v,
                                           std::span<const InstanceId> participants) {
    const ClassSchema& schema = schemas_->get(v.class_id);
    validate_vector(*schemas_, v);
    check_participants(schema, participants);

    if (auto hit = index_.lookup_exact(v.class_id, v.bins)) {
        for (InstanceId cand : instances_by_hash(hit->key, v.bins)) {
            const MemoryOccurrence& occ = occurrences_[cand];
            if (occ.class_id != v.class_id) continue;
            if (schema.kind == ClassKind::Relation &&
                !std::equal(occ.participants.begin(), occ.participants.end(),
                            participants.begin(), participants.end()))
                continue;  // same bins, different participants: distinct relation
            return {cand, false};
        }
    }

    InstanceId id = occurrences_.size();
    IndexEntry entry = index_.insert(v.class_id, v.bins, id);
    MemoryOccurrence occ;
    occ.id = id;
    occ.class_id = v.class_id;
    occ.vector = v;
    occ.participants.assign(participants.begin(), participants.end());
    occ.leaves = entry.leaves;
    occ.hash = entry.key;
    occurrences_.push_back(std::move(occ));
    by_hash_[entry.key].push_back(id);
    by_class_[v.class_id].push_back(id);
    return {id, true};
}

MemoryOccurrence& OccurrenceStore::occurrence_mut(InstanceId id) {
    if (id >= occurrences_.size())
        throw DataError("unknown instance " + std::to_string(id));
    return occurrences_[id];
}

const MemoryOccurrence& OccurrenceStore::occurrence(InstanceId id) const {
    if (id >= occurrences_.size())
        throw DataError("unknown instance " + std::to_string(id));
    return occurrences_[id];
}

void OccurrenceStore::open_interval(InstanceId id, Timestamp enter) {
    MemoryOccurrence& occ = occurrence_mut(id);
    if (!occ.intervals.empty()) {
        const PresenceInterval& last = occ.intervals.back();
        if (last.open())
            throw DataError("instance " + std::to_string(id) + " already has an open interval");
        if (enter <= *last.exit)
            throw DataError("instance " + std::to_string(id) + ": enter " + std::to_string(enter) +
                            " not after previous exit " + std::to_string(*last.exit));
    }
    occ.intervals.push_back({enter, std::nullopt});
}

void OccurrenceStore::close_interval(InstanceId id, Timestamp exit) {
    MemoryOccurrence& occ = occurrence_mut(id);
    if (occ.intervals.empty() || !occ.intervals.back().open())
        throw DataError("instance " + std::to_string(id) + " has no open interval");
    if (exit <= occ.intervals.back().enter)
        throw DataError("instance " + std::to_string(id) + ": exit " + std::to_string(exit) +
                        " not after enter " + std::to_string(occ.intervals.back().enter));
    occ.intervals.back().exit = exit;
}

bool OccurrenceStore::present_at(InstanceId id, Timestamp t) const {
    const MemoryOccurrence& occ = occurrence(id);
    for (const auto& iv : occ.intervals)
        if (iv.covers(t)) return true;
    return false;
}

std::vector<InstanceId> OccurrenceStore::instances_by_hash(HashKey key,
                                                           std::span<const Bin> bins) const {
    auto it = by_hash_.find(key);
    if (it == by_hash_.end()) return {};
    std::vector<InstanceId> out;
    for (InstanceId id : it->second) {
        const auto& occ_bins = occurrences_[id].vector.bins;
        if (std::equal(occ_bins.begin(), occ_bins.end(), bins.begin(), bins.end()))
            out.push_back(id);
    }
    return out;
}

const std::vector<InstanceId>& OccurrenceStore::instances_of(const std::string& class_id) const {
    static const std::vector<InstanceId> empty;
    auto it = by_class_.find(class_id);
    return it == by_class_.end() ? empty : it->second;
}

void OccurrenceStore::restore_occurrence(MemoryOccurrence occ) {
    const ClassSchema& schema = schemas_->get(occ.class_id);
    if (occ.id != occurrences_.size())
        throw DataError("occurrence ids must be dense: expected " +
                        std::to_string(occurrences_.size()) + ", got " + std::to_string(occ.id));
    if (occ.vector.class_id != occ.class_id)
        throw DataError("occurrence " + std::to_string(occ.id) + ": vector class mismatch");
    validate_vector(*schemas_, occ.vector);
    check_participants(schema, occ.participants);

    // intervals: sorted, non-overlapping, at most the last one open
    for (std::size_t i = 0; i < occ.intervals.size(); ++i) {
        const auto& iv = occ.intervals[i];
        if (iv.open() && i + 1 != occ.intervals.size())
            throw DataError("occurrence " + std::to_string(occ.id) + ": open interval before last");
        if (!iv.open() && *iv.exit <= iv.enter)
            throw DataError("occurrence " + std::to_string(occ.id) + ": empty interval");
        if (i > 0 && iv.enter <= *occ.intervals[i - 1].exit)
            throw DataError("occurrence " + std::to_string(occ.id) + ": intervals out of order");
    }

    if (auto hit = index_.lookup_exact(occ.class_id, occ.vector.bins)) {
        for (InstanceId cand : instances_by_hash(hit->key, occ.vector.bins)) {
            const MemoryOccurrence& other = occurrences_[cand];
            if (other.class_id != occ.class_id) continue;
            if (schema.kind == ClassKind::Object || other.participants == occ.participants)
                throw DataError("occurrence " + std::to_string(occ.id) +
                                " duplicates identity of instance " + std::to_string(cand));
        }
    }

    LeafId watermark = index_.next_leaf_id();
    IndexEntry entry = index_.insert(occ.class_id, occ.vector.bins, occ.id);
    if (index_.next_leaf_id() != watermark)
        throw DataError("occurrence " + std::to_string(occ.id) +
                        " references a bin with no persisted leaf");
    occ.leaves = entry.leaves;
    occ.hash = entry.key;
    by_hash_[entry.key].push_back(occ.id);
    by_class_[occ.class_id].push_back(occ.id);
    occurrences_.push_back(std::move(occ));
}

}  // namespace epimem
