#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "epimem/feature_space.hpp"
#include "epimem/tree_index.hpp"
#include "epimem/types.hpp"

namespace epimem {

/// Half-open presence span [enter, exit). An absent exit means the
/// instance is still in working memory.
struct PresenceInterval {
    Timestamp enter = 0;
    std::optional<Timestamp> exit;

    bool open() const { return !exit.has_value(); }
    bool covers(Timestamp t) const { return t >= enter && (!exit || t < *exit); }
    bool operator==(const PresenceInterval&) const = default;
};

/// One object or relation instance ever believed: the stored copy of its
/// invariant vector plus every presence span in working memory.
struct MemoryOccurrence {
    InstanceId id = 0;
    std::string class_id;
    FeatureVector vector;                  // copy taken at first sight
    std::vector<PresenceInterval> intervals;
    std::vector<InstanceId> participants;  // schema arity entries; empty for objects
    std::vector<LeafId> leaves;            // one per dimension
    HashKey hash = 0;
};

struct FindResult {
    InstanceId id = 0;
    bool created = false;
};

/// Long-term catalog of every instance: the tree index, the occurrence
/// records, and the leaf-hash table keyed on index entries. Instance
/// identity is exact bin equality, plus participant equality for relations.
/// Ids are dense and never reused. Single writer; concurrent readers while
/// quiescent.
class OccurrenceStore {
public:
    explicit OccurrenceStore(std::shared_ptr<const SchemaRegistry> schemas, LeafHashFn hash = {});

    /// Resolves a vector to its instance, creating one on first sight.
    /// Never opens a presence interval; working memory owns that.
    FindResult find_or_create(const FeatureVector& v, std::span<const InstanceId> participants);

    void open_interval(InstanceId id, Timestamp enter);
    void close_interval(InstanceId id, Timestamp exit);
    bool present_at(InstanceId id, Timestamp t) const;

    /// Instances filed under a hash key whose bins actually equal the given
    /// bins — the collision filter the digest contract requires.
    std::vector<InstanceId> instances_by_hash(HashKey key, std::span<const Bin> bins) const;

    const MemoryOccurrence& occurrence(InstanceId id) const;
    std::size_t size() const { return occurrences_.size(); }
    const std::vector<MemoryOccurrence>& all() const { return occurrences_; }

    /// Ascending instance ids belonging to a class; empty for an unseen class.
    const std::vector<InstanceId>& instances_of(const std::string& class_id) const;

    const TreeIndex& index() const { return index_; }
    const SchemaRegistry& schemas() const { return *schemas_; }
    const std::shared_ptr<const SchemaRegistry>& schemas_ptr() const { return schemas_; }

    /// Load path: re-files a persisted occurrence. Ids must arrive dense and
    /// in order; every invariant is revalidated and violations throw.
    void restore_occurrence(MemoryOccurrence occ);

    /// Load path: mutable index access for leaf restoration.
    TreeIndex& index_for_restore() { return index_; }

private:
    MemoryOccurrence& occurrence_mut(InstanceId id);
    void check_participants(const ClassSchema& schema, std::span<const InstanceId> participants) const;

    std::shared_ptr<const SchemaRegistry> schemas_;
    TreeIndex index_;
    std::vector<MemoryOccurrence> occurrences_;
    std::unordered_map<HashKey, std::vector<InstanceId>> by_hash_;
    std::unordered_map<std::string, std::vector<InstanceId>> by_class_;
};

}  // namespace epimem
