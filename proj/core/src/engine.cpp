#include "epimem/engine.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "text_util.hpp"

namespace epimem {

void EngineConfig::validate() const {
    if (decay_ttl == 0) throw DataError("decay_ttl must be >= 1");
    if (snapshot_interval == 0) throw DataError("snapshot_interval must be >= 1");
}

MemoryEngine::MemoryEngine(std::shared_ptr<const SchemaRegistry> schemas, EngineConfig cfg,
                           LeafHashFn hash)
    : schemas_(std::move(schemas)),
      cfg_(cfg),
      store_(schemas_, std::move(hash)),
      log_(cfg.snapshot_interval),
      wm_(cfg.decay_ttl) {
    cfg_.validate();
}

IngestReport ingest_frames(MemoryEngine& engine, std::span<const Frame> frames) {
    IngestReport report;
    std::vector<InstanceId> frame_ids;
    std::vector<InstanceId> participants;
    for (const Frame& frame : frames) {
        frame_ids.clear();
        for (std::size_t i = 0; i < frame.items.size(); ++i) {
            const EventItem& item = frame.items[i];
            participants.clear();
            for (std::uint32_t idx : item.participants) {
                if (idx >= i)
                    throw DataError("frame " + std::to_string(frame.tick) + ": item " +
                                    std::to_string(i) + " references item " + std::to_string(idx) +
                                    " which does not precede it");
                participants.push_back(frame_ids[idx]);
            }
            auto obs = engine.observe(item.class_id, item.raw, participants, frame.tick);
            frame_ids.push_back(obs.id);
        }
        engine.tick(frame.tick);
        ++report.frames;
        report.items += frame.items.size();
    }
    report.instances = engine.occurrences().size();
    report.deltas = engine.log().size();
    report.snapshots = engine.log().snapshots().size();
    return report;
}

// ---------------------------------------------------------------------------
// store file
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kStoreMagic = "epimem-store";
constexpr int kStoreVersion = 1;

std::string hex16(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, v);
    return buf;
}

const char* delta_op_name(DeltaOp op) { return op == DeltaOp::Add ? "add" : "remove"; }

void write_id_csv(std::ostream& out, const std::vector<InstanceId>& ids) {
    if (ids.empty()) {
        out << '-';
        return;
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out << ',';
        out << ids[i];
    }
}

}  // namespace

void MemoryEngine::save(std::ostream& out) const {
    out << kStoreMagic << ' ' << kStoreVersion << " schema=" << hex16(schemas_->digest()) << '\n';
    out << "config ttl=" << cfg_.decay_ttl << " snapshot_interval=" << cfg_.snapshot_interval
        << " now=" << wm_.now() << '\n';

    store_.index().for_each_leaf(
        [&](const std::string& class_id, std::size_t dim, Bin bin, const Leaf& leaf) {
            out << "leaf " << class_id << ' ' << dim << ' ' << bin << ' ' << leaf.id << '\n';
        });

    for (const MemoryOccurrence& occ : store_.all()) {
        out << "occ " << occ.id << ' ' << occ.class_id << " raw=";
        for (std::size_t d = 0; d < occ.vector.raw.size(); ++d) {
            if (d) out << ',';
            out << detail::fmt_double(occ.vector.raw[d]);
        }
        out << " bins=";
        for (std::size_t d = 0; d < occ.vector.bins.size(); ++d) {
            if (d) out << ',';
            out << occ.vector.bins[d];
        }
        out << " participants=";
        write_id_csv(out, occ.participants);
        out << " intervals=";
        if (occ.intervals.empty()) {
            out << '-';
        } else {
            for (std::size_t i = 0; i < occ.intervals.size(); ++i) {
                if (i) out << ',';
                out << occ.intervals[i].enter << ':';
                if (occ.intervals[i].exit) out << *occ.intervals[i].exit;
                else out << '-';
            }
        }
        out << '\n';
    }

    for (const auto& [id, last_refresh] : wm_.entries())
        out << "wm " << id << ' ' << last_refresh << '\n';

    for (const BeliefDelta& d : log_.deltas())
        out << "delta " << d.seq << ' ' << d.ts << ' ' << delta_op_name(d.op) << ' '
            << d.instance << '\n';

    for (const Snapshot& s : log_.snapshots()) {
        out << "snap " << s.at_seq << ' ' << s.ts << " present=";
        write_id_csv(out, s.present);
        out << '\n';
    }
}

void MemoryEngine::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write store file '" + path + "'");
    save(out);
    out.flush();
    if (!out) throw DataError("failed writing store file '" + path + "'");
}

namespace {

struct LeafRecord {
    std::string class_id;
    std::size_t dim;
    Bin bin;
    LeafId id;
};

struct WmRecord {
    InstanceId id;
    Timestamp last_refresh;
};

std::vector<InstanceId> parse_id_csv(const std::string& text, const std::string& origin,
                                     std::size_t lineno) {
    std::vector<InstanceId> out;
    if (text == "-") return out;
    for (const std::string& s : detail::split(text, ',')) {
        std::uint64_t v = 0;
        if (!detail::parse_u64(s, v)) detail::fail_at(origin, lineno, "bad id '" + s + "'");
        out.push_back(v);
    }
    return out;
}

std::string expect_kv(const std::string& token, const std::string& key, const std::string& origin,
                      std::size_t lineno) {
    std::string k, v;
    if (!detail::split_kv(token, k, v) || k != key)
        detail::fail_at(origin, lineno, "expected " + key + "=..., got '" + token + "'");
    return v;
}

}  // namespace

MemoryEngine MemoryEngine::load(std::istream& in, std::shared_ptr<const SchemaRegistry> schemas,
                                const std::string& origin, LeafHashFn hash) {
    if (!schemas) throw DataError("load requires a schema registry");
    std::string line;
    std::size_t lineno = 0;

    if (!std::getline(in, line)) throw ParseError(origin + ": empty store file");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    {
        auto tokens = detail::split_ws(line);
        if (tokens.size() != 3 || tokens[0] != kStoreMagic)
            detail::fail_at(origin, lineno, "not a store file");
        std::uint64_t version = 0;
        if (!detail::parse_u64(tokens[1], version) || version != kStoreVersion)
            detail::fail_at(origin, lineno, "unsupported store version '" + tokens[1] + "'");
        std::string digest = expect_kv(tokens[2], "schema", origin, lineno);
        if (digest != hex16(schemas->digest()))
            throw DataError(origin + ": schema digest mismatch (store " + digest + ", schema " +
                            hex16(schemas->digest()) + ")");
    }

    if (!std::getline(in, line)) throw ParseError(origin + ": missing config record");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    EngineConfig cfg;
    Timestamp now = 0;
    {
        auto tokens = detail::split_ws(line);
        if (tokens.size() != 4 || tokens[0] != "config")
            detail::fail_at(origin, lineno, "expected config record");
        if (!detail::parse_u64(expect_kv(tokens[1], "ttl", origin, lineno), cfg.decay_ttl))
            detail::fail_at(origin, lineno, "bad ttl");
        if (!detail::parse_u64(expect_kv(tokens[2], "snapshot_interval", origin, lineno),
                               cfg.snapshot_interval))
            detail::fail_at(origin, lineno, "bad snapshot_interval");
        if (!detail::parse_u64(expect_kv(tokens[3], "now", origin, lineno), now))
            detail::fail_at(origin, lineno, "bad now");
        cfg.validate();
    }

    std::vector<LeafRecord> leaves;
    std::vector<MemoryOccurrence> occs;
    std::vector<WmRecord> wm_records;
    std::vector<BeliefDelta> deltas;
    std::vector<Snapshot> snaps;

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto tokens = detail::split_ws(line);
        if (tokens.empty()) continue;
        const std::string& rec = tokens[0];

        if (rec == "leaf") {
            if (tokens.size() != 5) detail::fail_at(origin, lineno, "bad leaf record");
            LeafRecord r;
            r.class_id = tokens[1];
            std::uint64_t dim = 0, bin = 0;
            if (!detail::parse_u64(tokens[2], dim) || !detail::parse_u64(tokens[3], bin) ||
                !detail::parse_u64(tokens[4], r.id))
                detail::fail_at(origin, lineno, "bad leaf record");
            r.dim = dim;
            r.bin = static_cast<Bin>(bin);
            leaves.push_back(std::move(r));
        } else if (rec == "occ") {
            if (tokens.size() != 7) detail::fail_at(origin, lineno, "bad occ record");
            MemoryOccurrence occ;
            if (!detail::parse_u64(tokens[1], occ.id))
                detail::fail_at(origin, lineno, "bad occurrence id");
            occ.class_id = tokens[2];
            occ.vector.class_id = occ.class_id;
            for (const std::string& s :
                 detail::split(expect_kv(tokens[3], "raw", origin, lineno), ',')) {
                double v = 0.0;
                if (!detail::parse_double(s, v))
                    detail::fail_at(origin, lineno, "bad raw value '" + s + "'");
                occ.vector.raw.push_back(v);
            }
            for (const std::string& s :
                 detail::split(expect_kv(tokens[4], "bins", origin, lineno), ',')) {
                Bin b = 0;
                if (!detail::parse_u32(s, b)) detail::fail_at(origin, lineno, "bad bin '" + s + "'");
                occ.vector.bins.push_back(b);
            }
            occ.participants =
                parse_id_csv(expect_kv(tokens[5], "participants", origin, lineno), origin, lineno);
            std::string ivs = expect_kv(tokens[6], "intervals", origin, lineno);
            if (ivs != "-") {
                for (const std::string& s : detail::split(ivs, ',')) {
                    auto colon = s.find(':');
                    if (colon == std::string::npos)
                        detail::fail_at(origin, lineno, "bad interval '" + s + "'");
                    PresenceInterval iv;
                    if (!detail::parse_u64(s.substr(0, colon), iv.enter))
                        detail::fail_at(origin, lineno, "bad interval '" + s + "'");
                    std::string exit = s.substr(colon + 1);
                    if (exit != "-") {
                        Timestamp t = 0;
                        if (!detail::parse_u64(exit, t))
                            detail::fail_at(origin, lineno, "bad interval '" + s + "'");
                        iv.exit = t;
                    }
                    occ.intervals.push_back(iv);
                }
            }
            occs.push_back(std::move(occ));
        } else if (rec == "wm") {
            if (tokens.size() != 3) detail::fail_at(origin, lineno, "bad wm record");
            WmRecord r{};
            if (!detail::parse_u64(tokens[1], r.id) || !detail::parse_u64(tokens[2], r.last_refresh))
                detail::fail_at(origin, lineno, "bad wm record");
            wm_records.push_back(r);
        } else if (rec == "delta") {
            if (tokens.size() != 5) detail::fail_at(origin, lineno, "bad delta record");
            BeliefDelta d;
            if (!detail::parse_u64(tokens[1], d.seq) || !detail::parse_u64(tokens[2], d.ts) ||
                !detail::parse_u64(tokens[4], d.instance))
                detail::fail_at(origin, lineno, "bad delta record");
            if (tokens[3] == "add") d.op = DeltaOp::Add;
            else if (tokens[3] == "remove") d.op = DeltaOp::Remove;
            else detail::fail_at(origin, lineno, "bad delta op '" + tokens[3] + "'");
            deltas.push_back(d);
        } else if (rec == "snap") {
            if (tokens.size() != 4) detail::fail_at(origin, lineno, "bad snap record");
            Snapshot s;
            if (!detail::parse_u64(tokens[1], s.at_seq) || !detail::parse_u64(tokens[2], s.ts))
                detail::fail_at(origin, lineno, "bad snap record");
            s.present = parse_id_csv(expect_kv(tokens[3], "present", origin, lineno), origin, lineno);
            snaps.push_back(std::move(s));
        } else {
            detail::fail_at(origin, lineno, "unknown record '" + rec + "'");
        }
    }

    // Rebuild, revalidating as we go. Any inconsistency throws.
    MemoryEngine engine(std::move(schemas), cfg, std::move(hash));
    engine.wm_.restore_clock(now);

    std::unordered_set<LeafId> leaf_ids;
    for (const LeafRecord& r : leaves) {
        if (!leaf_ids.insert(r.id).second)
            throw DataError(origin + ": duplicate leaf id " + std::to_string(r.id));
        engine.store_.index_for_restore().restore_leaf(r.class_id, r.dim, r.bin, r.id);
    }

    for (MemoryOccurrence& occ : occs) engine.store_.restore_occurrence(std::move(occ));

    BeliefSet open_set;
    for (const MemoryOccurrence& occ : engine.store_.all())
        if (!occ.intervals.empty() && occ.intervals.back().open())
            belief_insert(open_set, occ.id);

    BeliefSet wm_set;
    for (const WmRecord& r : wm_records) {
        if (r.id >= engine.store_.size())
            throw DataError(origin + ": wm record for unknown instance " + std::to_string(r.id));
        if (r.last_refresh > now)
            throw DataError(origin + ": wm record for instance " + std::to_string(r.id) +
                            " refreshed after now");
        engine.wm_.restore_entry(r.id, r.last_refresh);
        belief_insert(wm_set, r.id);
    }
    if (wm_set != open_set)
        throw DataError(origin + ": working-memory records disagree with open intervals");

    for (const BeliefDelta& d : deltas) {
        if (d.instance >= engine.store_.size())
            throw DataError(origin + ": delta references unknown instance " +
                            std::to_string(d.instance));
        engine.log_.append(d);
    }
    if (engine.log_.current() != open_set)
        throw DataError(origin + ": delta fold disagrees with open intervals");
    if (engine.log_.snapshots() != snaps)
        throw DataError(origin + ": snapshot records disagree with replayed log");

    // log/occurrence duality over the whole file
    for (const MemoryOccurrence& occ : engine.store_.all()) {
        if (occ.intervals.empty()) continue;
        if (engine.log_.episodes_of(occ.id) != occ.intervals)
            throw DataError(origin + ": intervals of instance " + std::to_string(occ.id) +
                            " disagree with the delta log");
    }

    return engine;
}

MemoryEngine MemoryEngine::load_file(const std::string& path,
                                     std::shared_ptr<const SchemaRegistry> schemas,
                                     LeafHashFn hash) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open store file");
    return load(in, std::move(schemas), path, std::move(hash));
}

}  // namespace epimem
