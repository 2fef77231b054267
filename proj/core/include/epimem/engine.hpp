#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "epimem/episodic_log.hpp"
#include "epimem/event_log.hpp"
#include "epimem/occurrence_store.hpp"
#include "epimem/query.hpp"
#include "epimem/types.hpp"
#include "epimem/working_memory.hpp"

namespace epimem {

struct EngineConfig {
    std::uint64_t decay_ttl = 3;
    std::uint64_t snapshot_interval = 256;

    void validate() const;
};

/// Ties the pieces together: schemas, occurrence catalog with its tree
/// index, episodic log, and working memory, with one clock across them.
/// The whole engine is a value; moving it is cheap and loading a store
/// file yields a fresh one.
class MemoryEngine {
public:
    explicit MemoryEngine(std::shared_ptr<const SchemaRegistry> schemas, EngineConfig cfg = {},
                          LeafHashFn hash = {});

    ObserveResult observe(const std::string& class_id, std::span<const double> raw,
                          std::span<const InstanceId> participants, Timestamp now) {
        return wm_.observe(store_, log_, class_id, raw, participants, now);
    }
    std::vector<InstanceId> tick(Timestamp now) { return wm_.tick(store_, log_, now); }

    BeliefSet belief() const { return wm_.belief(); }

    const SchemaRegistry& schemas() const { return *schemas_; }
    const std::shared_ptr<const SchemaRegistry>& schemas_ptr() const { return schemas_; }
    const EngineConfig& config() const { return cfg_; }
    const OccurrenceStore& occurrences() const { return store_; }
    const EpisodicLog& log() const { return log_; }
    const WorkingMemory& working_memory() const { return wm_; }
    QueryEngine query_engine() const { return {store_, log_}; }

    /// Store persistence: a versioned line-delimited record file. The header
    /// carries the schema digest; loading revalidates every invariant and
    /// fails closed on any violation.
    void save(std::ostream& out) const;
    void save_file(const std::string& path) const;
    static MemoryEngine load(std::istream& in, std::shared_ptr<const SchemaRegistry> schemas,
                             const std::string& origin, LeafHashFn hash = {});
    static MemoryEngine load_file(const std::string& path,
                                  std::shared_ptr<const SchemaRegistry> schemas,
                                  LeafHashFn hash = {});

private:
    std::shared_ptr<const SchemaRegistry> schemas_;
    EngineConfig cfg_;
    OccurrenceStore store_;
    EpisodicLog log_;
    WorkingMemory wm_;
};

struct IngestReport {
    std::uint64_t frames = 0;
    std::uint64_t items = 0;
    std::uint64_t instances = 0;  // store totals after ingest
    std::uint64_t deltas = 0;
    std::uint64_t snapshots = 0;
};

/// Feeds frames through observe/tick: every item of a frame is observed at
/// the frame's tick, then the frame's tick decays unrefreshed entries.
/// Participant indexes are resolved to the instance ids of earlier items in
/// the same frame.
IngestReport ingest_frames(MemoryEngine& engine, std::span<const Frame> frames);

}  // namespace epimem
