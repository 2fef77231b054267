#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "epimem/engine.hpp"
#include "epimem/event_log.hpp"
#include "epimem/feature_space.hpp"
#include "epimem/types.hpp"

namespace epimem {

enum class Facing : std::uint8_t { North, East, South, West };
enum class Action : std::uint8_t { MoveN, MoveS, MoveE, MoveW, TurnL, TurnR, Stay };

const char* action_name(Action a);
const char* facing_name(Facing f);

enum class PredicateKind : std::uint8_t { LeftOf, Above, Near };

struct RelationPredicate {
    PredicateKind kind = PredicateKind::LeftOf;
    std::uint32_t near_dist = 0;  // Near only
};

struct WorldObject {
    std::uint32_t object_id = 0;
    std::vector<Bin> attrs;  // one categorical value per object-schema dimension
    std::int32_t x = 0;
    std::int32_t y = 0;
};

/// Deterministic gridworld standing in for perception: objects carry fixed
/// categorical attributes, the agent sees everything within a Chebyshev
/// radius, and relations among visible objects are recomputed every tick.
///
/// x grows eastward, y grows northward; moves clamp at the edges. Facing
/// only changes with turns and never affects visibility, which is what
/// makes the emitted vectors pose invariant.
struct WorldSpec {
    std::int32_t width = 1;
    std::int32_t height = 1;
    std::int32_t agent_x = 0;
    std::int32_t agent_y = 0;
    Facing facing = Facing::North;
    std::int32_t view_radius = 1;
    std::string object_class = "obj";
    std::string relation_class = "rel";
    std::vector<WorldObject> objects;     // sorted by object_id
    std::vector<RelationPredicate> predicates;

    void validate(const SchemaRegistry& reg) const;

    /// World file format, line oriented, `#` comments:
    ///
    ///     world width=<n> height=<n>
    ///     agent x=<n> y=<n> facing=<N|E|S|W>
    ///     view radius=<n>
    ///     classes object=<id> relation=<id>     # optional
    ///     predicate <left-of|above|near> [dist=<n>]
    ///     object id=<n> x=<n> y=<n> attrs=<k0,k1,...>
    static WorldSpec parse(std::istream& in, const std::string& origin);
    static WorldSpec load_file(const std::string& path);
};

WorldSpec step_world(WorldSpec world, Action action);

/// Identity of a percept item in world terms, for ground-truth bookkeeping.
struct PerceptKey {
    bool relation = false;
    std::uint32_t predicate = 0;
    std::uint32_t a = 0;
    std::uint32_t b = 0;

    auto operator<=>(const PerceptKey&) const = default;
};

/// Emits the frame an agent perceives: visible objects (attribute vectors
/// only — position never leaks into a vector) followed by the relations
/// that hold among them, participants given as frame-item indexes.
Frame perceive(const WorldSpec& world, const SchemaRegistry& reg, Timestamp tick,
               std::vector<PerceptKey>* keys = nullptr);

std::vector<Action> parse_actions(std::istream& in, const std::string& origin);
std::vector<Action> load_actions_file(const std::string& path);
std::vector<Action> random_actions(std::uint64_t seed, std::size_t count);

struct ScenarioResult {
    std::vector<Frame> frames;
    std::vector<BeliefSet> engine_trace;  // engine belief after each tick
    std::vector<BeliefSet> truth_trace;   // ground truth mapped onto instance ids
    MemoryEngine engine;
};

/// Drives the world tick by tick (tick 0 perceives the initial world, then
/// one action per tick), feeds every frame through the engine, and records
/// the ground-truth belief — everything seen within decay_ttl ticks —
/// mapped to instance ids via first-sight correspondence.
ScenarioResult run_scenario(const WorldSpec& world, std::span<const Action> actions,
                            std::shared_ptr<const SchemaRegistry> reg, const EngineConfig& cfg);

}  // namespace epimem
