#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "epimem/feature_space.hpp"
#include "epimem/types.hpp"

namespace epimem {

/// Order-sensitive FNV-1a digest over a leaf-id sequence. Collisions are
/// tolerated by contract: consumers must verify full bin equality whenever
/// digests match.
HashKey hash_leaves(std::span<const LeafId> leaf_ids);

/// Pluggable digest, so tests can inject a deliberately weak one and
/// exercise the collision-filtering path.
using LeafHashFn = std::function<HashKey(std::span<const LeafId>)>;

/// Relaxed counter that read paths may bump; copyable so the structures
/// holding it keep value semantics.
class VisitCounter {
public:
    VisitCounter() = default;
    VisitCounter(const VisitCounter& other)
        : n_(other.n_.load(std::memory_order_relaxed)) {}
    VisitCounter& operator=(const VisitCounter& other) {
        n_.store(other.n_.load(std::memory_order_relaxed), std::memory_order_relaxed);
        return *this;
    }

    void add(std::uint64_t k = 1) const { n_.fetch_add(k, std::memory_order_relaxed); }
    /// Returns the accumulated count and resets it to zero.
    std::uint64_t poll() const { return n_.exchange(0, std::memory_order_relaxed); }

private:
    mutable std::atomic<std::uint64_t> n_{0};
};

struct Leaf {
    LeafId id = 0;
    std::vector<InstanceId> postings;  // sorted, unique
};

/// Ordered index over one dimension's bins: a flat sorted array searched
/// with instrumented binary probes. Callers may assume exactly the ordered
/// map contract — logarithmic point access and in-order range iteration.
///
/// The visit counter charges one unit per binary-search probe and one per
/// leaf yielded by a range scan, so a point lookup costs at most
/// height() + 1 regardless of how many instances the leaves hold.
class DimensionTree {
public:
    std::size_t leaf_count() const { return slots_.size(); }

    /// Levels of the implicit search tree: ceil(log2(leaf_count + 1)).
    std::uint32_t height() const;

    const Leaf* find(Bin bin, const VisitCounter& visits) const;

    /// Finds the leaf for a bin, creating it with `fresh_id` when absent.
    /// Leaves persist once created; their ids never change.
    Leaf& find_or_create(Bin bin, LeafId fresh_id, bool& created, const VisitCounter& visits);

    /// Visits in-range leaves in bin order.
    void scan_range(Bin lo, Bin hi, const VisitCounter& visits,
                    const std::function<void(Bin, const Leaf&)>& fn) const;

    const std::vector<std::pair<Bin, Leaf>>& slots() const { return slots_; }

    /// Load path: recreates a persisted leaf with its original id.
    void restore_leaf(Bin bin, LeafId id);

private:
    std::size_t lower_bound_slot(Bin bin, const VisitCounter& visits) const;

    std::vector<std::pair<Bin, Leaf>> slots_;
};

struct IndexEntry {
    std::vector<LeafId> leaves;  // one per dimension, in dimension order
    HashKey key = 0;
};

/// One class's collection of dimension trees.
class TreeSet {
public:
    explicit TreeSet(std::size_t dim_count) : trees_(dim_count) {}

    std::size_t dim_count() const { return trees_.size(); }
    const DimensionTree& tree(std::size_t dim) const;
    DimensionTree& tree(std::size_t dim);

    IndexEntry insert(std::span<const Bin> bins, InstanceId instance, LeafId& next_leaf_id,
                      const LeafHashFn& hash, const VisitCounter& visits);
    std::optional<IndexEntry> lookup_exact(std::span<const Bin> bins, const LeafHashFn& hash,
                                           const VisitCounter& visits) const;
    std::vector<InstanceId> range_postings(std::size_t dim, Bin lo, Bin hi,
                                           const VisitCounter& visits) const;

private:
    std::vector<DimensionTree> trees_;
};

/// The per-store index: one tree set per class, a global leaf-id allocator,
/// and the node-visit instrumentation that backs the bounded-computation
/// checks. Single writer; concurrent readers only while no writer is active.
class TreeIndex {
public:
    explicit TreeIndex(std::shared_ptr<const SchemaRegistry> schemas, LeafHashFn hash = {});

    /// Adds an instance under its bin vector. The instance must not have
    /// been inserted with different bins before.
    IndexEntry insert(const std::string& class_id, std::span<const Bin> bins, InstanceId instance);

    /// Never creates leaves; absence is a normal result.
    std::optional<IndexEntry> lookup_exact(const std::string& class_id,
                                           std::span<const Bin> bins) const;

    /// Union of posting sets for bins in [lo, hi], ascending instance order.
    std::vector<InstanceId> range_postings(const std::string& class_id, std::size_t dim,
                                           Bin lo, Bin hi) const;

    HashKey hash(std::span<const LeafId> leaf_ids) const { return hash_(leaf_ids); }

    /// Returns the number of tree nodes touched since the last call and
    /// resets the counter.
    std::uint64_t poll_visited_nodes() const { return visits_.poll(); }

    std::uint32_t height(const std::string& class_id, std::size_t dim) const;
    const TreeSet* find_class(const std::string& class_id) const;
    LeafId next_leaf_id() const { return next_leaf_id_; }

    /// Deterministic traversal (class id, then dimension, then bin) used by
    /// store persistence.
    void for_each_leaf(const std::function<void(const std::string&, std::size_t, Bin, const Leaf&)>& fn) const;

    /// Load path: recreates a persisted leaf. Postings are rebuilt later by
    /// re-inserting occurrences.
    void restore_leaf(const std::string& class_id, std::size_t dim, Bin bin, LeafId id);

private:
    TreeSet& tree_set(const std::string& class_id);

    std::shared_ptr<const SchemaRegistry> schemas_;
    std::map<std::string, TreeSet> sets_;
    LeafId next_leaf_id_ = 0;
    LeafHashFn hash_;
    VisitCounter visits_;
};

}  // namespace epimem
