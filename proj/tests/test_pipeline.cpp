#include <doctest.h>

#include "stencilstream/error.hpp"
#include "stencilstream/pipeline.hpp"

#include <atomic>
#include <sstream>
#include <stdexcept>
#include <thread>

using namespace stencilstream;

namespace {

using Id = TaskGraph::TaskId;

TaskGraph::Work noop(int, Stage) {
    return [] { return std::uint64_t{0}; };
}

TaskGraph::Work sleeper(std::chrono::milliseconds d) {
    return [d] {
        std::this_thread::sleep_for(d);
        return std::uint64_t{1};
    };
}

double seconds(std::span<const StageEvent> events) {
    return static_cast<double>(lane_usage(events).makespan_ns) * 1e-9;
}

} // namespace

TEST_CASE("lanes") {
    CHECK(stage_lane(Stage::upload) == 0);
    CHECK(stage_lane(Stage::decompress) == 0);
    CHECK(stage_lane(Stage::compute) == 1);
    CHECK(stage_lane(Stage::compress) == 2);
    CHECK(stage_lane(Stage::download) == 2);
}

TEST_CASE("simulated makespan") {
    const std::int64_t d = 1000;
    SUBCASE("one block runs its five stages back to back") {
        const TaskGraph g = build_sweep_graph(1, noop);
        const std::vector<std::int64_t> dur(5, d);
        CHECK(simulate_schedule(g, dur).makespan_ns == 5 * d);
    }
    SUBCASE("four equal blocks overlap across lanes") {
        const TaskGraph g = build_sweep_graph(4, noop);
        const std::vector<std::int64_t> dur(g.size(), d);
        const auto s = simulate_schedule(g, dur);
        // Lane 0 carries 8d of work and the last block still needs 3d after it.
        CHECK(s.makespan_ns >= 11 * d);
        CHECK(s.makespan_ns < 12 * d);
        CHECK(s.makespan_ns < 20 * d);
    }
    SUBCASE("compute bound blocks hide the transfers") {
        const TaskGraph g = build_sweep_graph(6, noop);
        std::vector<std::int64_t> dur(g.size(), d);
        for (Id id = 0; id < g.size(); ++id)
            if (g.task(id).stage == Stage::compute) dur[id] = 10 * d;
        const auto s = simulate_schedule(g, dur);
        CHECK(s.makespan_ns == 2 * d + 60 * d + 2 * d);
    }
    SUBCASE("schedule respects every edge and lane") {
        const TaskGraph g = build_sweep_graph(5, noop);
        std::vector<std::int64_t> dur;
        for (Id id = 0; id < g.size(); ++id) dur.push_back(100 + static_cast<std::int64_t>((id * 37) % 11) * 50);
        const auto s = simulate_schedule(g, dur);
        std::vector<StageEvent> events;
        for (Id id = 0; id < g.size(); ++id) {
            events.push_back({0, g.task(id).block, g.task(id).stage, stage_lane(g.task(id).stage),
                              s.start_ns[id], s.end_ns[id], 0});
        }
        CHECK_NOTHROW(audit_schedule(g, events));
    }
    TaskGraph g;
    g.add(0, Stage::upload, noop(0, Stage::upload));
    CHECK_THROWS_AS(simulate_schedule(g, std::vector<std::int64_t>{}), Error);
}

TEST_CASE("serial executor runs lowest ready id first") {
    std::vector<Id> order;
    TaskGraph g = build_sweep_graph(3, [&](int block, Stage stage) -> TaskGraph::Work {
        const Id id = static_cast<Id>(block) * 5 + static_cast<Id>(stage);
        return [&order, id] {
            order.push_back(id);
            return std::uint64_t{id};
        };
    });
    const auto events = execute_serial(g, Clock::now());
    REQUIRE(order.size() == g.size());
    CHECK(order.front() == 0);
    for (std::size_t k = 0; k < events.size(); ++k) CHECK(events[k].bytes == k);
    CHECK_NOTHROW(audit_schedule(g, events));
}

TEST_CASE("pipelined executor overlaps lanes") {
    using namespace std::chrono_literals;
    auto work = [](int, Stage) { return sleeper(15ms); };
    TaskGraph serial_graph = build_sweep_graph(4, work);
    TaskGraph piped_graph = build_sweep_graph(4, work);
    const auto serial = execute_serial(serial_graph, Clock::now());
    const auto piped = execute_pipelined(piped_graph, Clock::now());
    CHECK_NOTHROW(audit_schedule(serial_graph, serial));
    CHECK_NOTHROW(audit_schedule(piped_graph, piped));
    CHECK(seconds(serial) >= 0.3);
    CHECK(seconds(piped) < 0.8 * seconds(serial));
    for (const auto& e : piped) CHECK(e.lane == stage_lane(e.stage));
}

TEST_CASE("pipelined executor propagates the first failure") {
    std::atomic<int> ran{0};
    TaskGraph g = build_sweep_graph(4, [&](int block, Stage stage) -> TaskGraph::Work {
        return [&ran, block, stage]() -> std::uint64_t {
            ++ran;
            if (block == 1 && stage == Stage::compute) throw std::runtime_error("boom");
            return 0;
        };
    });
    CHECK_THROWS_WITH_AS(execute_pipelined(g, Clock::now()), "boom", std::runtime_error);
    CHECK(ran.load() < static_cast<int>(g.size()));
}

TEST_CASE("sweep graph shape and insertion order") {
    const auto a = build_sweep_graph(4, noop);
    CHECK(a.size() == 20);
    std::size_t edges = 0;
    for (const auto& t : a.tasks()) edges += t.successors.size();
    CHECK(edges == 4 * 4 + 3 * 2 + 2 * 3);

    std::vector<std::size_t> order(10);
    for (std::size_t k = 0; k < 10; ++k) order[k] = 9 - k;
    const auto b = build_sweep_graph(2, noop, order);
    CHECK(b.task(0).block == 1);
    CHECK(b.task(0).stage == Stage::download);
    CHECK(b.task(9).stage == Stage::upload);
    CHECK_NOTHROW(b.check_acyclic());

    order[3] = order[4];
    CHECK_THROWS_AS(build_sweep_graph(2, noop, order), Error);
}

TEST_CASE("cycles are rejected") {
    TaskGraph g;
    const auto a = g.add(0, Stage::upload, noop(0, Stage::upload));
    const auto b = g.add(0, Stage::decompress, noop(0, Stage::decompress));
    g.depend(a, b);
    CHECK_NOTHROW(g.check_acyclic());
    g.depend(b, a);
    CHECK_THROWS_AS(g.check_acyclic(), Error);
    CHECK_THROWS_AS(execute_serial(g, Clock::now()), Error);
    CHECK_THROWS_AS(g.depend(a, 7), Error);
}

TEST_CASE("auditor catches bad logs") {
    std::vector<StageEvent> ok = {
        {0, 0, Stage::upload, 0, 0, 10, 0},
        {0, 0, Stage::decompress, 0, 10, 20, 0},
        {0, 0, Stage::compute, 1, 20, 30, 0},
    };
    CHECK_NOTHROW(audit_events(ok));

    auto overlap = ok;
    overlap[1].start_ns = 5;
    CHECK_THROWS_AS(audit_events(overlap), Error);

    auto reordered = ok;
    reordered[2].start_ns = 1;
    reordered[2].end_ns = 2;
    CHECK_THROWS_AS(audit_events(reordered), Error);

    auto malformed = ok;
    malformed[0].lane = 3;
    CHECK_THROWS_AS(audit_events(malformed), Error);

    TaskGraph g;
    const auto a = g.add(0, Stage::upload, noop(0, Stage::upload));
    const auto b = g.add(1, Stage::compute, noop(1, Stage::compute));
    g.depend(a, b);
    const std::vector<StageEvent> early = {{0, 0, Stage::upload, 0, 0, 10, 0}, {0, 1, Stage::compute, 1, 5, 8, 0}};
    CHECK_THROWS_AS(audit_schedule(g, early), Error);
    CHECK_THROWS_AS(audit_schedule(g, std::span(early).first(1)), Error);
}

TEST_CASE("lane usage and event csv") {
    const std::vector<StageEvent> events = {
        {0, 0, Stage::upload, 0, 100, 200, 64},
        {0, 0, Stage::compute, 1, 200, 400, 0},
    };
    const auto u = lane_usage(events);
    CHECK(u.makespan_ns == 300);
    CHECK(u.busy_ns[0] == 100);
    CHECK(u.idle_ns[1] == 100);
    CHECK(u.idle_ns[2] == 300);

    std::ostringstream out;
    write_event_csv(out, events);
    CHECK(out.str() == "block,stage,lane,start_ns,end_ns,bytes\n0,upload,0,100,200,64\n0,compute,1,200,400,0\n");
}
