// epimem CLI: run scenarios, build stores, query, replay, imagine, benchmark.
// Exit codes: 0 success, 1 usage/parse error, 2 data/invariant error.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "epimem/engine.hpp"
#include "epimem/event_log.hpp"
#include "epimem/oracle.hpp"
#include "epimem/query.hpp"
#include "epimem/sim.hpp"

namespace {

using namespace epimem;

std::string csv_ids(const BeliefSet& ids) {
    if (ids.empty()) return "-";
    std::ostringstream out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out << ',';
        out << ids[i];
    }
    return out.str();
}

std::string csv_bins(const std::vector<Bin>& bins) {
    std::ostringstream out;
    for (std::size_t i = 0; i < bins.size(); ++i) {
        if (i) out << ',';
        out << bins[i];
    }
    return out.str();
}

std::string csv_raw(const std::vector<double>& raw) {
    std::ostringstream out;
    out.precision(17);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (i) out << ',';
        double v = raw[i];
        // shortest text that round-trips
        for (int prec = 1; prec <= 17; ++prec) {
            std::ostringstream probe;
            probe.precision(prec);
            probe << v;
            if (std::stod(probe.str()) == v) {
                out << probe.str();
                break;
            }
        }
    }
    return out.str();
}

std::vector<std::uint32_t> parse_u32_csv(const std::string& text, const std::string& what) {
    std::vector<std::uint32_t> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == ',') {
            std::string part = text.substr(start, i - start);
            try {
                out.push_back(static_cast<std::uint32_t>(std::stoul(part)));
            } catch (...) {
                throw ParseError("bad " + what + " value '" + part + "'");
            }
            start = i + 1;
        }
    }
    return out;
}

std::uint64_t file_size(const std::string& path) {
    std::error_code ec;
    auto n = std::filesystem::file_size(path, ec);
    if (ec) throw DataError("cannot stat '" + path + "'");
    return static_cast<std::uint64_t>(n);
}

struct CommonOpts {
    std::string store_path;
    std::string schema_path;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--store", opts.store_path, "Store file path")
        ->envname("EPIMEM_STORE")
        ->required();
    cmd->add_option("--schema", opts.schema_path, "Schema config file")->required();
}

int cmd_simulate(const std::string& schema_path, const std::string& world_path,
                 const std::string& actions_path, std::uint64_t random_steps,
                 const std::string& out_path, std::uint64_t seed) {
    auto reg = std::make_shared<const SchemaRegistry>(SchemaRegistry::load_file(schema_path));
    WorldSpec world = WorldSpec::load_file(world_path);
    world.validate(*reg);

    std::vector<Action> actions;
    if (!actions_path.empty()) actions = load_actions_file(actions_path);
    else actions = random_actions(seed, random_steps);

    std::vector<Frame> frames;
    WorldSpec current = world;
    for (std::size_t t = 0; t <= actions.size(); ++t) {
        if (t > 0) current = step_world(std::move(current), actions[t - 1]);
        frames.push_back(perceive(current, *reg, t));
    }
    write_event_log_file(out_path, frames);
    std::cout << "ticks=" << frames.size() << " items=" << item_count(frames) << '\n';
    return 0;
}

int cmd_ingest(const CommonOpts& opts, const std::string& events_path, std::uint64_t ttl,
               std::uint64_t snapshot_interval) {
    auto reg = std::make_shared<const SchemaRegistry>(SchemaRegistry::load_file(opts.schema_path));
    auto frames = read_event_log_file(events_path);

    MemoryEngine engine(reg, {ttl, snapshot_interval});
    IngestReport report = ingest_frames(engine, frames);
    engine.save_file(opts.store_path);

    std::uint64_t stored = file_size(opts.store_path);
    std::uint64_t raw = file_size(events_path);
    std::cout << "frames=" << report.frames << " items=" << report.items
              << " instances=" << report.instances << " deltas=" << report.deltas
              << " snapshots=" << report.snapshots << '\n';
    std::ostringstream ratio;
    ratio.precision(4);
    ratio << std::fixed << (raw == 0 ? 0.0 : static_cast<double>(stored) / static_cast<double>(raw));
    std::cout << "stored_bytes=" << stored << " raw_bytes=" << raw << " ratio=" << ratio.str()
              << '\n';
    return 0;
}

int cmd_query(const CommonOpts& opts, const std::string& cue_text, bool do_recall,
              const std::string& similar_radius, const std::string& format) {
    auto reg = std::make_shared<const SchemaRegistry>(SchemaRegistry::load_file(opts.schema_path));
    MemoryEngine engine = MemoryEngine::load_file(opts.store_path, reg);
    QueryEngine qe = engine.query_engine();
    Cue cue = parse_cue(*reg, cue_text);
    bool records = format == "records";

    BeliefSet matches;
    if (!similar_radius.empty()) {
        const ClassSchema& schema = reg->get(cue.class_id);
        std::vector<Bin> bins;
        for (const CuePattern& p : cue.dims) {
            if (p.kind != CuePattern::Kind::Exact)
                throw ParseError("--similar needs an all-exact cue to use as the center");
            bins.push_back(p.lo);
        }
        auto radius = parse_u32_csv(similar_radius, "radius");
        matches = qe.similar(vector_from_bins(schema, bins), radius);
    } else {
        matches = qe.query(cue);
    }

    for (InstanceId id : matches) {
        const MemoryOccurrence& occ = engine.occurrences().occurrence(id);
        if (records)
            std::cout << "match id=" << id << " class=" << occ.class_id
                      << " bins=" << csv_bins(occ.vector.bins) << '\n';
        else
            std::cout << "instance " << id << " class=" << occ.class_id
                      << " bins=" << csv_bins(occ.vector.bins)
                      << " raw=" << csv_raw(occ.vector.raw) << '\n';
    }

    if (do_recall) {
        for (const RecallResult& r : qe.recall(cue)) {
            for (std::size_t k = 0; k < r.intervals.size(); ++k) {
                const auto& iv = r.intervals[k];
                std::ostringstream exit;
                if (iv.exit) exit << *iv.exit;
                else exit << '-';
                if (records)
                    std::cout << "recall id=" << r.instance << " interval=" << k
                              << " enter=" << iv.enter << " exit=" << exit.str()
                              << " belief=" << csv_ids(r.beliefs[k].present) << '\n';
                else
                    std::cout << "recall " << r.instance << " interval " << k << " [" << iv.enter
                              << "," << exit.str() << ") belief=" << csv_ids(r.beliefs[k].present)
                              << '\n';
            }
        }
    }
    return 0;
}

int cmd_replay(const CommonOpts& opts, std::int64_t at, std::int64_t instance,
               std::uint64_t interval, const std::string& direction) {
    auto reg = std::make_shared<const SchemaRegistry>(SchemaRegistry::load_file(opts.schema_path));
    MemoryEngine engine = MemoryEngine::load_file(opts.store_path, reg);
    QueryEngine qe = engine.query_engine();

    if (at >= 0) {
        BeliefSet b = engine.log().belief_at(static_cast<Timestamp>(at));
        std::cout << "t=" << at << " belief=" << csv_ids(b) << '\n';
        return 0;
    }
    if (instance < 0) throw ParseError("replay needs --at or --instance");
    StepDirection dir =
        direction == "backward" ? StepDirection::Backward : StepDirection::Forward;
    for (const TimedBelief& tb :
         qe.replay(static_cast<InstanceId>(instance), interval, dir))
        std::cout << "t=" << tb.ts << " belief=" << csv_ids(tb.present) << '\n';
    return 0;
}

int cmd_bench(const CommonOpts& opts, std::uint64_t queries, std::uint64_t seed) {
    using Clock = std::chrono::steady_clock;
    auto reg = std::make_shared<const SchemaRegistry>(SchemaRegistry::load_file(opts.schema_path));
    MemoryEngine engine = MemoryEngine::load_file(opts.store_path, reg);
    QueryEngine qe = engine.query_engine();

    std::cout << "bench queries=" << queries << " occurrences=" << engine.occurrences().size()
              << '\n';
    if (queries == 0) return 0;
    if (engine.occurrences().size() == 0) throw DataError("store is empty, nothing to benchmark");

    // flat baseline over the same occurrences and deltas
    oracle::FlatStore flat;
    for (const MemoryOccurrence& occ : engine.occurrences().all())
        flat.occurrences.push_back({occ.id, occ.vector, occ.participants, occ.intervals});
    flat.deltas = engine.log().deltas();

    std::mt19937_64 rng(seed);
    const auto& all = engine.occurrences().all();
    std::vector<Cue> cues;
    for (std::uint64_t q = 0; q < queries; ++q) {
        const MemoryOccurrence& occ = all[rng() % all.size()];
        const ClassSchema& schema = reg->get(occ.class_id);
        Cue cue;
        cue.class_id = occ.class_id;
        bool specified = false;
        for (std::size_t d = 0; d < schema.dims.size(); ++d) {
            switch (rng() % 3) {
                case 0:
                    cue.dims.push_back(CuePattern::exact(occ.vector.bins[d]));
                    specified = true;
                    break;
                case 1: {
                    Bin last = schema.dims[d].bin_count() - 1;
                    Bin spread = static_cast<Bin>(rng() % 3);
                    Bin b = occ.vector.bins[d];
                    cue.dims.push_back(
                        CuePattern::range(b > spread ? b - spread : 0, std::min<Bin>(b + spread, last)));
                    specified = true;
                    break;
                }
                default: cue.dims.push_back(CuePattern::any()); break;
            }
        }
        if (!specified) {
            std::size_t d = rng() % schema.dims.size();
            cue.dims[d] = CuePattern::exact(occ.vector.bins[d]);
        }
        cues.push_back(std::move(cue));
    }

    std::vector<double> engine_us, oracle_us, speedups;
    std::vector<std::uint64_t> visit_counts;
    const int reps = 16;
    for (const Cue& cue : cues) {
        engine.occurrences().index().poll_visited_nodes();
        BeliefSet got = qe.query(cue);
        std::uint64_t visits = engine.occurrences().index().poll_visited_nodes();

        auto t0 = Clock::now();
        for (int r = 0; r < reps; ++r) {
            BeliefSet again = qe.query(cue);
            if (again != got) throw DataError("bench: unstable engine result");
        }
        auto t1 = Clock::now();
        BeliefSet expect = oracle::scan_query(flat, cue);
        auto t2 = Clock::now();
        if (got != expect) throw DataError("bench: engine result differs from linear scan");

        double e_us = std::chrono::duration<double, std::micro>(t1 - t0).count() / reps;
        double o_us = std::chrono::duration<double, std::micro>(t2 - t1).count();
        engine_us.push_back(e_us);
        oracle_us.push_back(o_us);
        speedups.push_back(e_us > 0 ? o_us / e_us : 0.0);
        visit_counts.push_back(visits);
    }

    auto pct = [](std::vector<double> v, double p) {
        std::sort(v.begin(), v.end());
        std::size_t i = static_cast<std::size_t>(p * static_cast<double>(v.size() - 1));
        return v[i];
    };
    std::vector<std::uint64_t> visits_sorted = visit_counts;
    std::sort(visits_sorted.begin(), visits_sorted.end());

    std::ostringstream nums;
    nums.precision(3);
    nums << std::fixed << "engine_median_us=" << pct(engine_us, 0.5)
         << " engine_p95_us=" << pct(engine_us, 0.95)
         << " oracle_median_us=" << pct(oracle_us, 0.5)
         << " oracle_p95_us=" << pct(oracle_us, 0.95);
    std::cout << nums.str() << '\n';
    std::cout << "median_node_visits=" << visits_sorted[visits_sorted.size() / 2]
              << " oracle_touches_per_query=" << flat.occurrences.size() << '\n';
    std::ostringstream sp;
    sp.precision(2);
    sp << std::fixed << pct(speedups, 0.5);
    std::cout << "speedup_median=" << sp.str() << '\n';
    std::cout << "results_checked=" << queries << " mismatches=0" << '\n';
    return 0;
}

int cmd_imagine(const CommonOpts& opts, const std::string& class_id, const std::string& noise_csv,
                std::uint64_t seed) {
    auto reg = std::make_shared<const SchemaRegistry>(SchemaRegistry::load_file(opts.schema_path));
    MemoryEngine engine = MemoryEngine::load_file(opts.store_path, reg);
    const ClassSchema& schema = reg->get(class_id);

    std::vector<std::uint32_t> noise(schema.dims.size(), 0);
    if (!noise_csv.empty()) {
        noise = parse_u32_csv(noise_csv, "noise");
        if (noise.size() != schema.dims.size())
            throw ParseError("--noise needs " + std::to_string(schema.dims.size()) + " values");
    }
    ImagineSample s = engine.query_engine().imagine_sample(class_id, noise, seed);
    std::cout << "imagined class=" << class_id << " bins=" << csv_bins(s.vector.bins)
              << " raw=" << csv_raw(s.vector.raw) << " parents=" << s.parent_a << ','
              << s.parent_b << " seed=" << seed << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"epimem — episodic memory engine over indexed invariant feature vectors"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Run the gridworld and write an event log");
    std::string sim_schema, sim_world, sim_actions, sim_out;
    std::uint64_t sim_steps = 0, sim_seed = 0;
    sim->add_option("--schema", sim_schema, "Schema config file")->required();
    sim->add_option("--world", sim_world, "World spec file")->required();
    auto* opt_actions = sim->add_option("--actions", sim_actions, "Actions file, one per line");
    sim->add_option("--random-steps", sim_steps, "Generate this many seeded random actions")
        ->excludes(opt_actions);
    sim->add_option("--out", sim_out, "Event log output path")->required();
    sim->add_option("--seed", sim_seed, "Seed for --random-steps (default 0)");

    // ingest
    auto* ing = app.add_subcommand("ingest", "Feed an event log into a store file");
    CommonOpts ing_opts;
    std::string ing_events;
    std::uint64_t ing_ttl = 3, ing_interval = 256;
    add_common(ing, ing_opts);
    ing->add_option("--events", ing_events, "Event log path")->required();
    ing->add_option("--ttl", ing_ttl, "Working-memory decay TTL in ticks (default 3)");
    ing->add_option("--snapshot-interval", ing_interval, "Snapshot every N deltas (default 256)");

    // query
    auto* qry = app.add_subcommand("query", "Run a cue against a store");
    CommonOpts qry_opts;
    std::string qry_cue, qry_similar, qry_format = "text";
    bool qry_recall = false;
    add_common(qry, qry_opts);
    qry->add_option("cue", qry_cue, "Cue, e.g. 'class=obj shape=3 color=* size=2..4'")->required();
    qry->add_flag("--recall", qry_recall, "Also reconstruct beliefs at every presence interval");
    qry->add_option("--similar", qry_similar, "Per-dimension bin radius CSV; cue gives the center");
    qry->add_option("--format", qry_format, "Output format: text|records")
        ->check(CLI::IsMember({"text", "records"}));

    // replay
    auto* rpl = app.add_subcommand("replay", "Print belief sequences (time travel)");
    CommonOpts rpl_opts;
    std::int64_t rpl_at = -1, rpl_instance = -1;
    std::uint64_t rpl_interval = 0;
    std::string rpl_direction = "forward";
    add_common(rpl, rpl_opts);
    rpl->add_option("--at", rpl_at, "Reconstruct the belief at one timestamp");
    rpl->add_option("--instance", rpl_instance, "Replay one instance's presence interval");
    rpl->add_option("--interval", rpl_interval, "Interval index for --instance (default 0)");
    rpl->add_option("--direction", rpl_direction, "forward|backward")
        ->check(CLI::IsMember({"forward", "backward"}));

    // bench
    auto* bch = app.add_subcommand("bench", "Compare indexed retrieval against a linear scan");
    CommonOpts bch_opts;
    std::uint64_t bch_queries = 100, bch_seed = 0;
    add_common(bch, bch_opts);
    bch->add_option("--queries", bch_queries, "Number of random cues (default 100)");
    bch->add_option("--seed", bch_seed, "Cue generator seed (default 0)");

    // imagine
    auto* img = app.add_subcommand("imagine", "Sample a novel vector from stored occurrences");
    CommonOpts img_opts;
    std::string img_class, img_noise;
    std::uint64_t img_seed = 0;
    add_common(img, img_opts);
    img->add_option("--class", img_class, "Class to sample")->required();
    img->add_option("--noise", img_noise, "Per-dimension max bin perturbation CSV (default zeros)");
    img->add_option("--seed", img_seed, "Sampling seed (default 0)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(sim_schema, sim_world, sim_actions, sim_steps, sim_out, sim_seed);
        if (ing->parsed()) return cmd_ingest(ing_opts, ing_events, ing_ttl, ing_interval);
        if (qry->parsed()) return cmd_query(qry_opts, qry_cue, qry_recall, qry_similar, qry_format);
        if (rpl->parsed()) return cmd_replay(rpl_opts, rpl_at, rpl_instance, rpl_interval, rpl_direction);
        if (bch->parsed()) return cmd_bench(bch_opts, bch_queries, bch_seed);
        if (img->parsed()) return cmd_imagine(img_opts, img_class, img_noise, img_seed);
    } catch (const epimem::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const epimem::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
