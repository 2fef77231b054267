#include "epimem/tree_index.hpp"

#include <algorithm>

namespace epimem {

HashKey hash_leaves(std::span<const LeafId> leaf_ids) {
    if (leaf_ids.empty()) throw DataError("hash_leaves: empty leaf sequence");
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (LeafId id : leaf_ids) {
        for (int shift = 0; shift < 64; shift += 8) {
            h ^= (id >> shift) & 0xffull;
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

std::uint32_t DimensionTree::height() const {
    std::uint32_t h = 0;
    for (std::size_t n = slots_.size(); n > 0; n >>= 1) ++h;
    return h;  // ceil(log2(n + 1))
}

std::size_t DimensionTree::lower_bound_slot(Bin bin, const VisitCounter& visits) const {
    std::size_t lo = 0, hi = slots_.size();
    while (lo < hi) {
        std::size_t mid = lo + (hi - lo) / 2;
        visits.add();
        if (slots_[mid].first < bin) lo = mid + 1;
        else hi = mid;
    }
    return lo;
}

const Leaf* DimensionTree::find(Bin bin, const VisitCounter& visits) const {
    std::size_t pos = lower_bound_slot(bin, visits);
    if (pos == slots_.size()) return nullptr;
    visits.add();
    return slots_[pos].first == bin ? &slots_[pos].second : nullptr;
}

Leaf& DimensionTree::find_or_create(Bin bin, LeafId fresh_id, bool& created,
                                    const VisitCounter& visits) {
    std::size_t pos = lower_bound_slot(bin, visits);
    if (pos < slots_.size()) {
        visits.add();
        if (slots_[pos].first == bin) {
            created = false;
            return slots_[pos].second;
        }
    }
    created = true;
    auto it = slots_.insert(slots_.begin() + static_cast<std::ptrdiff_t>(pos),
                            {bin, Leaf{fresh_id, {}}});
    return it->second;
}

void DimensionTree::scan_range(Bin lo, Bin hi, const VisitCounter& visits,
                               const std::function<void(Bin, const Leaf&)>& fn) const {
    for (std::size_t pos = lower_bound_slot(lo, visits);
         pos < slots_.size() && slots_[pos].first <= hi; ++pos) {
        visits.add();
        fn(slots_[pos].first, slots_[pos].second);
    }
}

void DimensionTree::restore_leaf(Bin bin, LeafId id) {
    auto it = std::lower_bound(slots_.begin(), slots_.end(), bin,
                               [](const auto& slot, Bin b) { return slot.first < b; });
    if (it != slots_.end() && it->first == bin)
        throw DataError("duplicate leaf record for bin " + std::to_string(bin));
    slots_.insert(it, {bin, Leaf{id, {}}});
}

const DimensionTree& TreeSet::tree(std::size_t dim) const {
    if (dim >= trees_.size()) throw DataError("dimension index " + std::to_string(dim) + " out of bounds");
    return trees_[dim];
}

DimensionTree& TreeSet::tree(std::size_t dim) {
    if (dim >= trees_.size()) throw DataError("dimension index " + std::to_string(dim) + " out of bounds");
    return trees_[dim];
}

IndexEntry TreeSet::insert(std::span<const Bin> bins, InstanceId instance, LeafId& next_leaf_id,
                           const LeafHashFn& hash, const VisitCounter& visits) {
    if (bins.size() != trees_.size())
        throw DataError("insert arity mismatch: " + std::to_string(bins.size()) + " bins for " +
                        std::to_string(trees_.size()) + " dimensions");
    IndexEntry entry;
    entry.leaves.reserve(bins.size());
    for (std::size_t d = 0; d < bins.size(); ++d) {
        bool created = false;
        Leaf& leaf = trees_[d].find_or_create(bins[d], next_leaf_id, created, visits);
        if (created) ++next_leaf_id;
        auto it = std::lower_bound(leaf.postings.begin(), leaf.postings.end(), instance);
        if (it == leaf.postings.end() || *it != instance) leaf.postings.insert(it, instance);
        entry.leaves.push_back(leaf.id);
    }
    entry.key = hash(entry.leaves);
    return entry;
}

std::optional<IndexEntry> TreeSet::lookup_exact(std::span<const Bin> bins, const LeafHashFn& hash,
                                                const VisitCounter& visits) const {
    if (bins.size() != trees_.size())
        throw DataError("lookup arity mismatch: " + std::to_string(bins.size()) + " bins for " +
                        std::to_string(trees_.size()) + " dimensions");
    IndexEntry entry;
    entry.leaves.reserve(bins.size());
    for (std::size_t d = 0; d < bins.size(); ++d) {
        const Leaf* leaf = trees_[d].find(bins[d], visits);
        if (!leaf) return std::nullopt;  // every dimension must match
        entry.leaves.push_back(leaf->id);
    }
    entry.key = hash(entry.leaves);
    return entry;
}

std::vector<InstanceId> TreeSet::range_postings(std::size_t dim, Bin lo, Bin hi,
                                                const VisitCounter& visits) const {
    if (lo > hi)
        throw DataError("range lo " + std::to_string(lo) + " > hi " + std::to_string(hi));
    std::vector<InstanceId> out;
    tree(dim).scan_range(lo, hi, visits, [&](Bin, const Leaf& leaf) {
        out.insert(out.end(), leaf.postings.begin(), leaf.postings.end());
    });
    // leaves partition the instances, so sorting alone restores set order
    std::sort(out.begin(), out.end());
    return out;
}

TreeIndex::TreeIndex(std::shared_ptr<const SchemaRegistry> schemas, LeafHashFn hash)
    : schemas_(std::move(schemas)),
      hash_(hash ? std::move(hash) : LeafHashFn(&hash_leaves)) {
    if (!schemas_) throw DataError("TreeIndex requires a schema registry");
}

TreeSet& TreeIndex::tree_set(const std::string& class_id) {
    auto it = sets_.find(class_id);
    if (it == sets_.end()) {
        const ClassSchema& schema = schemas_->get(class_id);
        it = sets_.emplace(class_id, TreeSet(schema.dims.size())).first;
    }
    return it->second;
}

IndexEntry TreeIndex::insert(const std::string& class_id, std::span<const Bin> bins,
                             InstanceId instance) {
    return tree_set(class_id).insert(bins, instance, next_leaf_id_, hash_, visits_);
}

std::optional<IndexEntry> TreeIndex::lookup_exact(const std::string& class_id,
                                                  std::span<const Bin> bins) const {
    const ClassSchema& schema = schemas_->get(class_id);
    if (bins.size() != schema.dims.size())
        throw DataError("class '" + class_id + "' expects " + std::to_string(schema.dims.size()) +
                        " bins, got " + std::to_string(bins.size()));
    auto it = sets_.find(class_id);
    if (it == sets_.end()) return std::nullopt;
    return it->second.lookup_exact(bins, hash_, visits_);
}

std::vector<InstanceId> TreeIndex::range_postings(const std::string& class_id, std::size_t dim,
                                                  Bin lo, Bin hi) const {
    const ClassSchema& schema = schemas_->get(class_id);
    if (dim >= schema.dims.size())
        throw DataError("dimension index " + std::to_string(dim) + " out of bounds for class '" +
                        class_id + "'");
    auto it = sets_.find(class_id);
    if (it == sets_.end()) {
        if (lo > hi) throw DataError("range lo " + std::to_string(lo) + " > hi " + std::to_string(hi));
        return {};
    }
    return it->second.range_postings(dim, lo, hi, visits_);
}

std::uint32_t TreeIndex::height(const std::string& class_id, std::size_t dim) const {
    auto it = sets_.find(class_id);
    if (it == sets_.end()) return 0;
    return it->second.tree(dim).height();
}

const TreeSet* TreeIndex::find_class(const std::string& class_id) const {
    auto it = sets_.find(class_id);
    return it == sets_.end() ? nullptr : &it->second;
}

void TreeIndex::for_each_leaf(
    const std::function<void(const std::string&, std::size_t, Bin, const Leaf&)>& fn) const {
    for (const auto& [class_id, set] : sets_) {
        for (std::size_t d = 0; d < set.dim_count(); ++d) {
            for (const auto& [bin, leaf] : set.tree(d).slots()) fn(class_id, d, bin, leaf);
        }
    }
}

void TreeIndex::restore_leaf(const std::string& class_id, std::size_t dim, Bin bin, LeafId id) {
    const ClassSchema& schema = schemas_->get(class_id);
    if (dim >= schema.dims.size())
        throw DataError("leaf record names dimension " + std::to_string(dim) +
                        " outside class '" + class_id + "'");
    if (bin >= schema.dims[dim].bin_count())
        throw DataError("leaf record bin " + std::to_string(bin) + " out of range for class '" +
                        class_id + "' dimension " + std::to_string(dim));
    tree_set(class_id).tree(dim).restore_leaf(bin, id);
    if (id >= next_leaf_id_) next_leaf_id_ = id + 1;
}

}  // namespace epimem
