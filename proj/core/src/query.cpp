#include "epimem/query.hpp"

#include <algorithm>
#include <random>

#include "text_util.hpp"

namespace epimem {

Cue parse_cue(const SchemaRegistry& reg, const std::string& text) {
    auto tokens = detail::split_ws(text);
    if (tokens.empty()) throw ParseError("empty cue");

    std::string ckey, cval;
    if (!detail::split_kv(tokens[0], ckey, cval) || ckey != "class")
        throw ParseError("cue must start with class=<id>, got '" + tokens[0] + "'");
    const ClassSchema* schema = reg.find(cval);
    if (!schema) throw ParseError("unknown class in cue token '" + tokens[0] + "'");

    Cue cue;
    cue.class_id = cval;
    cue.dims.assign(schema->dims.size(), CuePattern::any());
    std::vector<bool> seen(schema->dims.size(), false);

    for (std::size_t i = 1; i < tokens.size(); ++i) {
        const std::string& tok = tokens[i];
        std::string key, val;
        if (!detail::split_kv(tok, key, val))
            throw ParseError("bad cue token '" + tok + "' (expected <dim>=<pattern>)");
        std::size_t d = schema->dims.size();
        for (std::size_t j = 0; j < schema->dims.size(); ++j)
            if (schema->dims[j].name == key) { d = j; break; }
        if (d == schema->dims.size())
            throw ParseError("unknown dimension in cue token '" + tok + "'");
        if (seen[d]) throw ParseError("duplicate dimension in cue token '" + tok + "'");
        seen[d] = true;

        Bin count = schema->dims[d].bin_count();
        if (val == "*") {
            cue.dims[d] = CuePattern::any();
        } else if (auto dots = val.find(".."); dots != std::string::npos) {
            Bin lo = 0, hi = 0;
            if (!detail::parse_u32(val.substr(0, dots), lo) ||
                !detail::parse_u32(val.substr(dots + 2), hi))
                throw ParseError("bad range in cue token '" + tok + "'");
            if (lo > hi) throw ParseError("empty range in cue token '" + tok + "'");
            if (hi >= count) throw ParseError("bin out of range in cue token '" + tok + "'");
            cue.dims[d] = CuePattern::range(lo, hi);
        } else {
            Bin b = 0;
            if (!detail::parse_u32(val, b))
                throw ParseError("bad bin in cue token '" + tok + "'");
            if (b >= count) throw ParseError("bin out of range in cue token '" + tok + "'");
            cue.dims[d] = CuePattern::exact(b);
        }
    }
    return cue;
}

void QueryEngine::validate_cue(const Cue& cue) const {
    const ClassSchema& schema = store_.schemas().get(cue.class_id);
    if (cue.dims.size() != schema.dims.size())
        throw DataError("cue arity mismatch for class '" + cue.class_id + "'");
    for (std::size_t d = 0; d < cue.dims.size(); ++d) {
        const CuePattern& p = cue.dims[d];
        if (p.kind == CuePattern::Kind::Any) continue;
        if (p.lo > p.hi)
            throw DataError("cue range lo > hi on dimension '" + schema.dims[d].name + "'");
        if (p.hi >= schema.dims[d].bin_count())
            throw DataError("cue bin out of range on dimension '" + schema.dims[d].name + "'");
    }
}

BeliefSet QueryEngine::query(const Cue& cue) const {
    validate_cue(cue);

    std::vector<std::vector<InstanceId>> postings;
    for (std::size_t d = 0; d < cue.dims.size(); ++d) {
        const CuePattern& p = cue.dims[d];
        if (p.kind == CuePattern::Kind::Any) continue;
        auto ids = store_.index().range_postings(cue.class_id, d, p.lo, p.hi);
        if (ids.empty()) return {};
        postings.push_back(std::move(ids));
    }
    if (postings.empty()) return store_.instances_of(cue.class_id);  // all-Any cue

    std::sort(postings.begin(), postings.end(),
              [](const auto& a, const auto& b) { return a.size() < b.size(); });
    BeliefSet result = std::move(postings[0]);
    for (std::size_t i = 1; i < postings.size() && !result.empty(); ++i) {
        BeliefSet next;
        std::set_intersection(result.begin(), result.end(), postings[i].begin(),
                              postings[i].end(), std::back_inserter(next));
        result = std::move(next);
    }
    return result;
}

BeliefSet QueryEngine::similar(const FeatureVector& center,
                               std::span<const std::uint32_t> radius) const {
    const ClassSchema& schema = store_.schemas().get(center.class_id);
    validate_vector(store_.schemas(), center);
    if (radius.size() != schema.dims.size())
        throw DataError("radius arity mismatch for class '" + center.class_id + "'");

    Cue cue;
    cue.class_id = center.class_id;
    cue.dims.reserve(schema.dims.size());
    for (std::size_t d = 0; d < schema.dims.size(); ++d) {
        Bin b = center.bins[d];
        Bin lo = b > radius[d] ? b - radius[d] : 0;
        Bin last = schema.dims[d].bin_count() - 1;
        Bin hi = b + radius[d] < b ? last : std::min<Bin>(b + radius[d], last);
        cue.dims.push_back(CuePattern::range(lo, hi));
    }
    return query(cue);
}

std::vector<RecallResult> QueryEngine::recall(const Cue& cue) const {
    std::vector<RecallResult> out;
    for (InstanceId id : query(cue)) {
        const MemoryOccurrence& occ = store_.occurrence(id);
        RecallResult r;
        r.instance = id;
        r.intervals = occ.intervals;
        r.beliefs.reserve(occ.intervals.size());
        for (const auto& iv : occ.intervals)
            r.beliefs.push_back({iv.enter, log_.belief_at(iv.enter)});
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<TimedBelief> QueryEngine::replay(InstanceId instance, std::size_t interval_index,
                                             StepDirection dir) const {
    const MemoryOccurrence& occ = store_.occurrence(instance);
    if (interval_index >= occ.intervals.size())
        throw DataError("instance " + std::to_string(instance) + " has no interval " +
                        std::to_string(interval_index));
    const PresenceInterval& iv = occ.intervals[interval_index];
    const Timestamp enter = iv.enter;

    std::vector<TimedBelief> seq;
    if (dir == StepDirection::Forward) {
        seq.push_back({enter, log_.belief_at(enter)});
        Timestamp cur = enter;
        while (auto next = log_.step(cur, StepDirection::Forward)) {
            if (iv.exit && next->ts >= *iv.exit) break;
            cur = next->ts;
            seq.push_back(std::move(*next));
        }
        return seq;
    }

    // Backward: start from the last delta timestamp inside the interval.
    // The Add at enter guarantees the chain reaches enter exactly.
    Timestamp cur;
    if (iv.exit) {
        cur = log_.step(*iv.exit, StepDirection::Backward)->ts;
    } else {
        cur = log_.deltas().back().ts;
    }
    seq.push_back({cur, log_.belief_at(cur)});
    while (cur > enter) {
        auto prev = log_.step(cur, StepDirection::Backward);
        cur = prev->ts;
        seq.push_back(std::move(*prev));
    }
    return seq;
}

ImagineSample QueryEngine::imagine_sample(const std::string& class_id,
                                          std::span<const std::uint32_t> noise,
                                          std::uint64_t seed) const {
    const ClassSchema& schema = store_.schemas().get(class_id);
    const auto& ids = store_.instances_of(class_id);
    if (ids.empty()) throw DataError("class '" + class_id + "' has no occurrences to sample");
    if (noise.size() != schema.dims.size())
        throw DataError("noise arity mismatch for class '" + class_id + "'");

    // mt19937_64 with modulo draws: sequence is pinned by the standard, so
    // a seed reproduces bit-identical samples everywhere.
    std::mt19937_64 rng(seed);
    auto draw = [&rng](std::uint64_t n) { return static_cast<std::uint64_t>(rng() % n); };

    ImagineSample sample;
    sample.parent_a = ids[draw(ids.size())];
    sample.parent_b = ids[draw(ids.size())];
    const FeatureVector& va = store_.occurrence(sample.parent_a).vector;
    const FeatureVector& vb = store_.occurrence(sample.parent_b).vector;

    std::vector<Bin> bins(schema.dims.size());
    for (std::size_t d = 0; d < bins.size(); ++d) {
        Bin base = (rng() & 1) ? vb.bins[d] : va.bins[d];
        auto offset = static_cast<std::int64_t>(draw(2ull * noise[d] + 1)) -
                      static_cast<std::int64_t>(noise[d]);
        auto shifted = static_cast<std::int64_t>(base) + offset;
        auto last = static_cast<std::int64_t>(schema.dims[d].bin_count()) - 1;
        bins[d] = static_cast<Bin>(std::clamp<std::int64_t>(shifted, 0, last));
    }
    sample.vector = vector_from_bins(schema, bins);
    return sample;
}

FeatureVector QueryEngine::imagine(const std::string& class_id,
                                   std::span<const std::uint32_t> noise,
                                   std::uint64_t seed) const {
    return imagine_sample(class_id, noise, seed).vector;
}

}  // namespace epimem
