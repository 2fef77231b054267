#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "epimem/episodic_log.hpp"
#include "epimem/occurrence_store.hpp"
#include "epimem/types.hpp"

namespace epimem {

/// Per-dimension query pattern. Any is a neglected dimension: every value
/// of it matches.
struct CuePattern {
    enum class Kind : std::uint8_t { Exact, Range, Any };

    Kind kind = Kind::Any;
    Bin lo = 0;
    Bin hi = 0;

    static CuePattern exact(Bin b) { return {Kind::Exact, b, b}; }
    static CuePattern range(Bin lo, Bin hi) { return {Kind::Range, lo, hi}; }
    static CuePattern any() { return {}; }
};

struct Cue {
    std::string class_id;
    std::vector<CuePattern> dims;  // one per schema dimension
};

/// Parses the cue text syntax, e.g. `class=obj shape=3 color=* size=2..4`.
/// Tokens are `class=<id>` (required, first) and `<dim>=<pattern>` where a
/// pattern is a bin, `lo..hi`, or `*`. Unmentioned dimensions are Any.
/// Errors name the offending token.
Cue parse_cue(const SchemaRegistry& reg, const std::string& text);

/// A matched instance with its presence history and, for each interval,
/// the full belief reconstructed at the interval's enter tick.
struct RecallResult {
    InstanceId instance = 0;
    std::vector<PresenceInterval> intervals;
    std::vector<TimedBelief> beliefs;  // one per interval
};

struct ImagineSample {
    FeatureVector vector;
    InstanceId parent_a = 0;
    InstanceId parent_b = 0;
};

/// Read-only retrieval over a store and its log. All results are in
/// ascending instance order. Safe to use concurrently with other readers,
/// not with ingestion.
class QueryEngine {
public:
    QueryEngine(const OccurrenceStore& store, const EpisodicLog& log)
        : store_(store), log_(log) {}

    /// Instances whose bins satisfy every non-Any pattern. Per-dimension
    /// posting sets are intersected smallest-first; an all-Any cue returns
    /// the class's full instance set.
    BeliefSet query(const Cue& cue) const;

    /// Bounded similarity: per-dimension ranges of +-radius[d] bins around
    /// the center, clamped to the valid bin range.
    BeliefSet similar(const FeatureVector& center, std::span<const std::uint32_t> radius) const;

    std::vector<RecallResult> recall(const Cue& cue) const;

    /// Belief sequence across one presence interval, one element per delta
    /// timestamp in [enter, exit); open intervals run to the log end.
    /// Backward yields the same sequence reversed.
    std::vector<TimedBelief> replay(InstanceId instance, std::size_t interval_index,
                                    StepDirection dir = StepDirection::Forward) const;

    /// Composes a novel vector from two uniformly sampled parent occurrences
    /// (per-dimension coin flip) plus bounded integer bin noise. Raw values
    /// are bin centers. Deterministic for a given seed; nothing is stored.
    FeatureVector imagine(const std::string& class_id, std::span<const std::uint32_t> noise,
                          std::uint64_t seed) const;
    ImagineSample imagine_sample(const std::string& class_id, std::span<const std::uint32_t> noise,
                                 std::uint64_t seed) const;

private:
    void validate_cue(const Cue& cue) const;

    const OccurrenceStore& store_;
    const EpisodicLog& log_;
};

}  // namespace epimem
