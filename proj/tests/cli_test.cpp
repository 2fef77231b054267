#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <string>
#include <vector>

#include "test_util.hpp"

// End-to-end runs of the installed CLI binary. Every command is executed
// through the shell with stdout/stderr captured to files.

namespace {

using epimem::testutil::ScratchDir;
using epimem::testutil::slurp;
using epimem::testutil::spit;

struct RunResult {
    int exit_code;
    std::string out;
    std::string err;
};

RunResult run(const ScratchDir& dir, const std::string& args, const std::string& env = "") {
    std::string out_path = dir.file("stdout.txt");
    std::string err_path = dir.file("stderr.txt");
    std::string cmd = env + (env.empty() ? "" : " ") + EPIMEM_CLI_PATH + " " + args + " > " +
                      out_path + " 2> " + err_path;
    int status = std::system(cmd.c_str());
    int code = status < 0 ? -1 : WEXITSTATUS(status);
    return {code, slurp(out_path), slurp(err_path)};
}

const char* kSchema =
    "class obj kind=object arity=0\n"
    "dim shape min=0 max=8 resolution=1\n"
    "dim color min=0 max=8 resolution=1\n"
    "dim size min=0 max=4 resolution=1\n"
    "class rel kind=relation arity=2\n"
    "dim predicate min=0 max=4 resolution=1\n"
    "class ghost kind=object arity=0\n"  // declared but never perceived
    "dim presence min=0 max=1 resolution=1\n";

const char* kWorld =
    "world width=10 height=10\n"
    "agent x=5 y=5 facing=N\n"
    "view radius=2\n"
    "predicate left-of\n"
    "predicate above\n"
    "predicate near dist=3\n"
    "object id=0 x=4 y=5 attrs=1,2,0\n"
    "object id=1 x=6 y=5 attrs=3,4,1\n"
    "object id=2 x=0 y=0 attrs=5,6,2\n";

const char* kActions =
    "MoveE\nMoveE\nStay\nMoveW\nMoveW\nMoveW\nMoveW\nMoveW\nMoveS\nMoveS\n"
    "MoveS\nMoveS\nMoveW\nMoveW\nStay\nStay\nMoveN\nMoveN\nMoveE\nMoveE\n";

struct Workspace {
    ScratchDir dir;
    std::string schema = dir.file("schema.txt");
    std::string world = dir.file("world.txt");
    std::string actions = dir.file("actions.txt");
    std::string events = dir.file("events.log");
    std::string store = dir.file("store.mem");

    Workspace() {
        spit(schema, kSchema);
        spit(world, kWorld);
        spit(actions, kActions);
    }

    std::string common() const { return "--store " + store + " --schema " + schema; }

    RunResult simulate() {
        return run(dir, "simulate --schema " + schema + " --world " + world + " --actions " +
                            actions + " --out " + events);
    }
    RunResult ingest() { return run(dir, "ingest " + common() + " --events " + events + " --ttl 3"); }
};

}  // namespace

TEST_CASE("simulate writes a deterministic event log") {
    Workspace ws;
    auto r1 = ws.simulate();
    CHECK(r1.exit_code == 0);
    CHECK(r1.out.find("ticks=21") != std::string::npos);
    std::string first = slurp(ws.events);
    CHECK(!first.empty());

    auto r2 = ws.simulate();
    CHECK(r2.exit_code == 0);
    CHECK(slurp(ws.events) == first);  // byte identical
    CHECK(r2.out == r1.out);
}

TEST_CASE("simulate rejects malformed input with a line number, exit 1") {
    Workspace ws;
    spit(ws.world, "world width=10 height=10\nobject id=0 x=1 y=1\n");
    auto r = ws.simulate();
    CHECK(r.exit_code == 1);
    CHECK(r.err.find(":2") != std::string::npos);
}

TEST_CASE("seeded random actions are reproducible") {
    Workspace ws;
    auto r1 = run(ws.dir, "simulate --schema " + ws.schema + " --world " + ws.world +
                              " --random-steps 30 --seed 7 --out " + ws.events);
    CHECK(r1.exit_code == 0);
    std::string first = slurp(ws.events);
    auto r2 = run(ws.dir, "simulate --schema " + ws.schema + " --world " + ws.world +
                              " --random-steps 30 --seed 7 --out " + ws.events);
    CHECK(slurp(ws.events) == first);
}

TEST_CASE("ingest reports counts and is deterministic") {
    Workspace ws;
    REQUIRE(ws.simulate().exit_code == 0);
    auto r = ws.ingest();
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("instances=") != std::string::npos);
    CHECK(r.out.find("deltas=") != std::string::npos);
    CHECK(r.out.find("ratio=") != std::string::npos);
    std::string first_store = slurp(ws.store);

    auto r2 = ws.ingest();
    CHECK(r2.out == r.out);
    CHECK(slurp(ws.store) == first_store);

    // the running-list-of-changes is smaller than the percept stream
    auto items_pos = r.out.find("items=");
    auto deltas_pos = r.out.find("deltas=");
    REQUIRE(items_pos != std::string::npos);
    REQUIRE(deltas_pos != std::string::npos);
    long items = std::strtol(r.out.c_str() + items_pos + 6, nullptr, 10);
    long deltas = std::strtol(r.out.c_str() + deltas_pos + 7, nullptr, 10);
    CHECK(deltas < items);

    // empty event log ingests to an empty store
    spit(ws.events, "epimem-events 1\n");
    auto r3 = run(ws.dir, "ingest --store " + ws.dir.file("empty.mem") + " --schema " + ws.schema +
                              " --events " + ws.events);
    CHECK(r3.exit_code == 0);
    CHECK(r3.out.find("instances=0") != std::string::npos);
}

TEST_CASE("query: wildcards, similar, recall, records format") {
    Workspace ws;
    REQUIRE(ws.simulate().exit_code == 0);
    REQUIRE(ws.ingest().exit_code == 0);

    auto all_colors = run(ws.dir, "query " + ws.common() + " 'class=obj color=*'");
    CHECK(all_colors.exit_code == 0);
    CHECK(all_colors.out.find("instance 0") != std::string::npos);

    // unmatched cue: success with empty output
    auto nothing = run(ws.dir, "query " + ws.common() + " 'class=obj shape=7'");
    CHECK(nothing.exit_code == 0);
    CHECK(nothing.out.empty());

    // radius zero equals the exact query
    auto exact = run(ws.dir, "query " + ws.common() + " 'class=obj shape=1 color=2 size=0'");
    auto sim0 = run(ws.dir, "query " + ws.common() +
                                " 'class=obj shape=1 color=2 size=0' --similar 0,0,0");
    CHECK(exact.exit_code == 0);
    CHECK(sim0.out == exact.out);

    auto rec = run(ws.dir, "query " + ws.common() + " 'class=obj shape=1' --recall --format records");
    CHECK(rec.exit_code == 0);
    CHECK(rec.out.find("match id=0") != std::string::npos);
    CHECK(rec.out.find("recall id=0") != std::string::npos);
    CHECK(rec.out.find("belief=") != std::string::npos);

    // determinism
    auto rec2 = run(ws.dir, "query " + ws.common() + " 'class=obj shape=1' --recall --format records");
    CHECK(rec2.out == rec.out);

    // cue errors name the token, exit 1
    auto bad = run(ws.dir, "query " + ws.common() + " 'class=obj texture=9'");
    CHECK(bad.exit_code == 1);
    CHECK(bad.err.find("texture=9") != std::string::npos);
}

TEST_CASE("replay: point-in-time and interval walks") {
    Workspace ws;
    REQUIRE(ws.simulate().exit_code == 0);
    REQUIRE(ws.ingest().exit_code == 0);

    auto before = run(ws.dir, "replay " + ws.common() + " --at 0");
    CHECK(before.exit_code == 0);
    CHECK(before.out.substr(0, 4) == "t=0 ");

    auto fwd = run(ws.dir, "replay " + ws.common() + " --instance 0 --interval 0");
    auto back = run(ws.dir,
                    "replay " + ws.common() + " --instance 0 --interval 0 --direction backward");
    CHECK(fwd.exit_code == 0);
    CHECK(back.exit_code == 0);

    // backward output is the forward output reversed line by line
    auto lines = [](const std::string& text) {
        std::vector<std::string> out;
        std::size_t start = 0;
        for (std::size_t i = 0; i < text.size(); ++i) {
            if (text[i] == '\n') {
                out.push_back(text.substr(start, i - start));
                start = i + 1;
            }
        }
        return out;
    };
    auto f = lines(fwd.out), b = lines(back.out);
    std::reverse(b.begin(), b.end());
    CHECK(f == b);

    auto missing = run(ws.dir, "replay " + ws.common() + " --instance 9999 --interval 0");
    CHECK(missing.exit_code == 2);
}

TEST_CASE("bench: header only at zero queries, inline equivalence otherwise") {
    Workspace ws;
    REQUIRE(ws.simulate().exit_code == 0);
    REQUIRE(ws.ingest().exit_code == 0);

    auto none = run(ws.dir, "bench " + ws.common() + " --queries 0");
    CHECK(none.exit_code == 0);
    CHECK(none.out.find("bench queries=0") != std::string::npos);
    CHECK(none.out.find("speedup") == std::string::npos);

    auto some = run(ws.dir, "bench " + ws.common() + " --queries 20 --seed 5");
    CHECK(some.exit_code == 0);
    CHECK(some.out.find("results_checked=20 mismatches=0") != std::string::npos);
    CHECK(some.out.find("speedup_median=") != std::string::npos);
    CHECK(some.out.find("median_node_visits=") != std::string::npos);
}

TEST_CASE("imagine is seed deterministic and validates") {
    Workspace ws;
    REQUIRE(ws.simulate().exit_code == 0);
    REQUIRE(ws.ingest().exit_code == 0);

    auto r1 = run(ws.dir, "imagine " + ws.common() + " --class obj --noise 1,1,0 --seed 9");
    auto r2 = run(ws.dir, "imagine " + ws.common() + " --class obj --noise 1,1,0 --seed 9");
    CHECK(r1.exit_code == 0);
    CHECK(r1.out == r2.out);
    CHECK(r1.out.find("imagined class=obj bins=") != std::string::npos);

    // empty class is a data error
    auto empty = run(ws.dir, "imagine " + ws.common() + " --class ghost --seed 1");
    CHECK(empty.exit_code == 2);
}

TEST_CASE("store path can come from the environment") {
    Workspace ws;
    REQUIRE(ws.simulate().exit_code == 0);
    REQUIRE(ws.ingest().exit_code == 0);
    auto r = run(ws.dir, "query --schema " + ws.schema + " 'class=obj color=*'",
                 "EPIMEM_STORE=" + ws.store);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("instance 0") != std::string::npos);
}

TEST_CASE("exit codes distinguish usage from data errors") {
    Workspace ws;
    auto missing = run(ws.dir, "query " + ws.common() + " 'class=obj'");
    CHECK(missing.exit_code == 1);  // store file absent: parse/usage error

    auto usage = run(ws.dir, "nonsense");
    CHECK(usage.exit_code == 1);

    REQUIRE(ws.simulate().exit_code == 0);
    REQUIRE(ws.ingest().exit_code == 0);
    // corrupt the store: flip a bins digit so raw and bins disagree
    std::string text = slurp(ws.store);
    auto pos = text.find("bins=");
    text[pos + 5] = text[pos + 5] == '0' ? '1' : '0';
    spit(ws.store, text);
    auto corrupt = run(ws.dir, "query " + ws.common() + " 'class=obj'");
    CHECK(corrupt.exit_code == 2);
}
