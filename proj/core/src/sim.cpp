#include "epimem/sim.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <tuple>

#include "text_util.hpp"

namespace epimem {

const char* action_name(Action a) {
    switch (a) {
        case Action::MoveN: return "MoveN";
        case Action::MoveS: return "MoveS";
        case Action::MoveE: return "MoveE";
        case Action::MoveW: return "MoveW";
        case Action::TurnL: return "TurnL";
        case Action::TurnR: return "TurnR";
        case Action::Stay: return "Stay";
    }
    return "?";
}

const char* facing_name(Facing f) {
    switch (f) {
        case Facing::North: return "N";
        case Facing::East: return "E";
        case Facing::South: return "S";
        case Facing::West: return "W";
    }
    return "?";
}

void WorldSpec::validate(const SchemaRegistry& reg) const {
    if (width < 1 || height < 1) throw DataError("world must be at least 1x1");
    if (view_radius < 0) throw DataError("view radius must be >= 0");
    if (agent_x < 0 || agent_x >= width || agent_y < 0 || agent_y >= height)
        throw DataError("agent position out of bounds");

    const ClassSchema& obj = reg.get(object_class);
    if (obj.kind != ClassKind::Object)
        throw DataError("class '" + object_class + "' is not an object class");

    if (!predicates.empty()) {
        const ClassSchema& rel = reg.get(relation_class);
        if (rel.kind != ClassKind::Relation || rel.arity != 2)
            throw DataError("class '" + relation_class + "' must be a binary relation class");
        if (rel.dims.size() != 1)
            throw DataError("class '" + relation_class + "' must have a single predicate dimension");
        if (predicates.size() > rel.dims[0].bin_count())
            throw DataError("more predicates than bins on the predicate dimension");
    }

    std::set<std::uint32_t> ids;
    for (const WorldObject& o : objects) {
        if (!ids.insert(o.object_id).second)
            throw DataError("duplicate object id " + std::to_string(o.object_id));
        if (o.x < 0 || o.x >= width || o.y < 0 || o.y >= height)
            throw DataError("object " + std::to_string(o.object_id) + " out of bounds");
        if (o.attrs.size() != obj.dims.size())
            throw DataError("object " + std::to_string(o.object_id) + " has " +
                            std::to_string(o.attrs.size()) + " attributes, schema wants " +
                            std::to_string(obj.dims.size()));
        for (std::size_t d = 0; d < o.attrs.size(); ++d)
            if (o.attrs[d] >= obj.dims[d].bin_count())
                throw DataError("object " + std::to_string(o.object_id) + " attribute " +
                                std::to_string(d) + " exceeds bin count");
    }
}

WorldSpec step_world(WorldSpec world, Action action) {
    switch (action) {
        case Action::MoveN:
            world.agent_y = std::min(world.agent_y + 1, world.height - 1);
            break;
        case Action::MoveS:
            world.agent_y = std::max(world.agent_y - 1, 0);
            break;
        case Action::MoveE:
            world.agent_x = std::min(world.agent_x + 1, world.width - 1);
            break;
        case Action::MoveW:
            world.agent_x = std::max(world.agent_x - 1, 0);
            break;
        case Action::TurnL:
            world.facing = static_cast<Facing>((static_cast<int>(world.facing) + 3) % 4);
            break;
        case Action::TurnR:
            world.facing = static_cast<Facing>((static_cast<int>(world.facing) + 1) % 4);
            break;
        case Action::Stay:
            break;
    }
    return world;
}

namespace {

std::int32_t chebyshev(std::int32_t ax, std::int32_t ay, std::int32_t bx, std::int32_t by) {
    return std::max(std::abs(ax - bx), std::abs(ay - by));
}

bool predicate_holds(const RelationPredicate& p, const WorldObject& a, const WorldObject& b) {
    switch (p.kind) {
        case PredicateKind::LeftOf: return a.x < b.x;
        case PredicateKind::Above: return a.y > b.y;
        case PredicateKind::Near:
            return chebyshev(a.x, a.y, b.x, b.y) <= static_cast<std::int32_t>(p.near_dist);
    }
    return false;
}

}  // namespace

Frame perceive(const WorldSpec& world, const SchemaRegistry& reg, Timestamp tick,
               std::vector<PerceptKey>* keys) {
    const ClassSchema& obj_schema = reg.get(world.object_class);

    Frame frame;
    frame.tick = tick;
    if (keys) keys->clear();

    std::vector<const WorldObject*> visible;
    for (const WorldObject& o : world.objects)
        if (chebyshev(world.agent_x, world.agent_y, o.x, o.y) <= world.view_radius)
            visible.push_back(&o);
    // objects are already sorted by id; visibility keeps that order

    for (const WorldObject* o : visible) {
        EventItem item;
        item.class_id = world.object_class;
        item.raw.reserve(o->attrs.size());
        for (std::size_t d = 0; d < o->attrs.size(); ++d)
            item.raw.push_back(obj_schema.dims[d].bin_center(o->attrs[d]));
        frame.items.push_back(std::move(item));
        if (keys) keys->push_back({false, 0, o->object_id, 0});
    }

    if (!world.predicates.empty() && visible.size() > 1) {
        const ClassSchema& rel_schema = reg.get(world.relation_class);
        const DimensionSpec& pred_dim = rel_schema.dims[0];
        for (std::size_t i = 0; i < visible.size(); ++i) {
            for (std::size_t j = 0; j < visible.size(); ++j) {
                if (i == j) continue;
                for (std::size_t p = 0; p < world.predicates.size(); ++p) {
                    if (!predicate_holds(world.predicates[p], *visible[i], *visible[j])) continue;
                    EventItem item;
                    item.class_id = world.relation_class;
                    item.raw.push_back(pred_dim.bin_center(static_cast<Bin>(p)));
                    item.participants = {static_cast<std::uint32_t>(i),
                                         static_cast<std::uint32_t>(j)};
                    frame.items.push_back(std::move(item));
                    if (keys)
                        keys->push_back({true, static_cast<std::uint32_t>(p),
                                         visible[i]->object_id, visible[j]->object_id});
                }
            }
        }
    }
    return frame;
}

WorldSpec WorldSpec::parse(std::istream& in, const std::string& origin) {
    WorldSpec w;
    bool saw_world = false;
    std::string line;
    std::size_t lineno = 0;

    auto want_i32 = [&](const std::string& v, const char* what) {
        std::int64_t n = 0;
        if (!detail::parse_i64(v, n) || n < -(1ll << 30) || n > (1ll << 30))
            detail::fail_at(origin, lineno, std::string("bad ") + what + " '" + v + "'");
        return static_cast<std::int32_t>(n);
    };

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto tokens = detail::split_ws(line);
        if (tokens.empty()) continue;

        auto kv = [&](std::size_t i, const char* key) {
            std::string k, v;
            if (i >= tokens.size() || !detail::split_kv(tokens[i], k, v) || k != key)
                detail::fail_at(origin, lineno,
                                std::string("expected ") + key + "=... in '" + tokens[0] + "' line");
            return v;
        };

        if (tokens[0] == "world") {
            if (tokens.size() != 3) detail::fail_at(origin, lineno, "expected: world width=<n> height=<n>");
            w.width = want_i32(kv(1, "width"), "width");
            w.height = want_i32(kv(2, "height"), "height");
            saw_world = true;
        } else if (tokens[0] == "agent") {
            if (tokens.size() != 4)
                detail::fail_at(origin, lineno, "expected: agent x=<n> y=<n> facing=<N|E|S|W>");
            w.agent_x = want_i32(kv(1, "x"), "x");
            w.agent_y = want_i32(kv(2, "y"), "y");
            std::string f = kv(3, "facing");
            if (f == "N") w.facing = Facing::North;
            else if (f == "E") w.facing = Facing::East;
            else if (f == "S") w.facing = Facing::South;
            else if (f == "W") w.facing = Facing::West;
            else detail::fail_at(origin, lineno, "bad facing '" + f + "'");
        } else if (tokens[0] == "view") {
            if (tokens.size() != 2) detail::fail_at(origin, lineno, "expected: view radius=<n>");
            w.view_radius = want_i32(kv(1, "radius"), "radius");
        } else if (tokens[0] == "classes") {
            if (tokens.size() != 3)
                detail::fail_at(origin, lineno, "expected: classes object=<id> relation=<id>");
            w.object_class = kv(1, "object");
            w.relation_class = kv(2, "relation");
        } else if (tokens[0] == "predicate") {
            if (tokens.size() < 2) detail::fail_at(origin, lineno, "expected: predicate <name>");
            RelationPredicate p;
            if (tokens[1] == "left-of") p.kind = PredicateKind::LeftOf;
            else if (tokens[1] == "above") p.kind = PredicateKind::Above;
            else if (tokens[1] == "near") p.kind = PredicateKind::Near;
            else detail::fail_at(origin, lineno, "unknown predicate '" + tokens[1] + "'");
            if (p.kind == PredicateKind::Near) {
                if (tokens.size() != 3)
                    detail::fail_at(origin, lineno, "near predicate needs dist=<n>");
                std::uint32_t dist = 0;
                if (!detail::parse_u32(kv(2, "dist"), dist))
                    detail::fail_at(origin, lineno, "bad dist");
                p.near_dist = dist;
            } else if (tokens.size() != 2) {
                detail::fail_at(origin, lineno, "unexpected arguments after predicate name");
            }
            w.predicates.push_back(p);
        } else if (tokens[0] == "object") {
            if (tokens.size() != 5)
                detail::fail_at(origin, lineno, "expected: object id=<n> x=<n> y=<n> attrs=<csv>");
            WorldObject o;
            std::uint32_t id = 0;
            if (!detail::parse_u32(kv(1, "id"), id)) detail::fail_at(origin, lineno, "bad object id");
            o.object_id = id;
            o.x = want_i32(kv(2, "x"), "x");
            o.y = want_i32(kv(3, "y"), "y");
            for (const std::string& s : detail::split(kv(4, "attrs"), ',')) {
                Bin b = 0;
                if (!detail::parse_u32(s, b))
                    detail::fail_at(origin, lineno, "bad attribute '" + s + "'");
                o.attrs.push_back(b);
            }
            w.objects.push_back(std::move(o));
        } else {
            detail::fail_at(origin, lineno, "unknown directive '" + tokens[0] + "'");
        }
    }
    if (!saw_world) throw ParseError(origin + ": missing world line");
    std::sort(w.objects.begin(), w.objects.end(),
              [](const WorldObject& a, const WorldObject& b) { return a.object_id < b.object_id; });
    return w;
}

WorldSpec WorldSpec::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open world file");
    return parse(in, path);
}

std::vector<Action> parse_actions(std::istream& in, const std::string& origin) {
    std::vector<Action> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto tokens = detail::split_ws(line);
        if (tokens.empty()) continue;
        if (tokens.size() != 1) detail::fail_at(origin, lineno, "one action per line");
        const std::string& t = tokens[0];
        if (t == "MoveN") out.push_back(Action::MoveN);
        else if (t == "MoveS") out.push_back(Action::MoveS);
        else if (t == "MoveE") out.push_back(Action::MoveE);
        else if (t == "MoveW") out.push_back(Action::MoveW);
        else if (t == "TurnL") out.push_back(Action::TurnL);
        else if (t == "TurnR") out.push_back(Action::TurnR);
        else if (t == "Stay") out.push_back(Action::Stay);
        else detail::fail_at(origin, lineno, "unknown action '" + t + "'");
    }
    return out;
}

std::vector<Action> load_actions_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open actions file");
    return parse_actions(in, path);
}

std::vector<Action> random_actions(std::uint64_t seed, std::size_t count) {
    std::mt19937_64 rng(seed);
    std::vector<Action> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(static_cast<Action>(rng() % 7));
    return out;
}

ScenarioResult run_scenario(const WorldSpec& world, std::span<const Action> actions,
                            std::shared_ptr<const SchemaRegistry> reg, const EngineConfig& cfg) {
    world.validate(*reg);

    ScenarioResult result{{}, {}, {}, MemoryEngine(reg, cfg)};
    std::map<PerceptKey, InstanceId> first_sight;
    std::map<PerceptKey, Timestamp> last_seen;

    WorldSpec current = world;
    std::vector<PerceptKey> keys;
    std::vector<InstanceId> frame_ids;
    std::vector<InstanceId> participants;

    for (std::size_t t = 0; t <= actions.size(); ++t) {
        if (t > 0) current = step_world(std::move(current), actions[t - 1]);
        Frame frame = perceive(current, *reg, t, &keys);

        frame_ids.clear();
        for (std::size_t i = 0; i < frame.items.size(); ++i) {
            const EventItem& item = frame.items[i];
            participants.clear();
            for (std::uint32_t idx : item.participants) participants.push_back(frame_ids[idx]);
            auto obs = result.engine.observe(item.class_id, item.raw, participants, t);
            frame_ids.push_back(obs.id);
            first_sight.emplace(keys[i], obs.id);
            last_seen[keys[i]] = t;
        }
        result.engine.tick(t);

        result.engine_trace.push_back(result.engine.belief());
        BeliefSet truth;
        for (const auto& [key, seen] : last_seen)
            if (t - seen <= cfg.decay_ttl) belief_insert(truth, first_sight.at(key));
        result.truth_trace.push_back(std::move(truth));

        result.frames.push_back(std::move(frame));
    }
    return result;
}

}  // namespace epimem
