#include "epimem/oracle.hpp"

#include <map>
#include <tuple>

namespace epimem::oracle {

FlatStore ingest_events(const SchemaRegistry& reg, std::span<const Frame> frames,
                        std::uint64_t decay_ttl) {
    if (decay_ttl == 0) throw DataError("decay_ttl must be >= 1");
    FlatStore flat;

    // identity lookup kept separate from retrieval: queries still scan
    using Key = std::tuple<std::string, std::vector<Bin>, std::vector<InstanceId>>;
    std::map<Key, InstanceId> known;
    std::map<InstanceId, Timestamp> live;  // id -> last refresh
    std::uint64_t seq = 0;

    std::vector<InstanceId> frame_ids;
    for (const Frame& frame : frames) {
        frame_ids.clear();
        for (std::size_t i = 0; i < frame.items.size(); ++i) {
            const EventItem& item = frame.items[i];
            const ClassSchema& schema = reg.get(item.class_id);
            FeatureVector v = make_vector(schema, item.raw);

            std::vector<InstanceId> participants;
            for (std::uint32_t idx : item.participants) {
                if (idx >= i)
                    throw DataError("frame " + std::to_string(frame.tick) +
                                    ": participant index out of order");
                participants.push_back(frame_ids[idx]);
            }
            if (participants.size() != schema.arity)
                throw DataError("class '" + item.class_id + "' arity mismatch in frame " +
                                std::to_string(frame.tick));

            Key key{item.class_id, v.bins, participants};
            auto it = known.find(key);
            InstanceId id;
            if (it == known.end()) {
                id = flat.occurrences.size();
                flat.occurrences.push_back({id, std::move(v), std::move(participants), {}});
                known.emplace(std::move(key), id);
            } else {
                id = it->second;
            }
            frame_ids.push_back(id);

            if (!live.count(id)) {
                flat.occurrences[id].intervals.push_back({frame.tick, std::nullopt});
                flat.deltas.push_back({seq++, frame.tick, DeltaOp::Add, id});
            }
            live[id] = frame.tick;
        }
        for (auto it = live.begin(); it != live.end();) {
            if (frame.tick - it->second > decay_ttl) {
                flat.occurrences[it->first].intervals.back().exit = frame.tick;
                flat.deltas.push_back({seq++, frame.tick, DeltaOp::Remove, it->first});
                it = live.erase(it);
            } else {
                ++it;
            }
        }
        flat.item_count += frame.items.size();
    }
    return flat;
}

BeliefSet scan_query(const FlatStore& flat, const Cue& cue) {
    BeliefSet out;
    for (const FlatOccurrence& occ : flat.occurrences) {
        flat.count_touch();
        if (occ.vector.class_id != cue.class_id) continue;
        if (occ.vector.bins.size() != cue.dims.size())
            throw DataError("cue arity mismatch for class '" + cue.class_id + "'");
        bool match = true;
        for (std::size_t d = 0; d < cue.dims.size() && match; ++d) {
            const CuePattern& p = cue.dims[d];
            if (p.kind == CuePattern::Kind::Any) continue;
            if (p.lo > p.hi) throw DataError("cue range lo > hi");
            Bin b = occ.vector.bins[d];
            match = b >= p.lo && b <= p.hi;
        }
        if (match) out.push_back(occ.id);  // occurrences are in id order already
    }
    return out;
}

BeliefSet replay_belief(const FlatStore& flat, Timestamp t) {
    BeliefSet belief;
    for (const BeliefDelta& d : flat.deltas) {
        if (d.ts > t) break;  // deltas are time ordered
        if (d.op == DeltaOp::Add) belief_insert(belief, d.instance);
        else belief_erase(belief, d.instance);
    }
    return belief;
}

}  // namespace epimem::oracle
