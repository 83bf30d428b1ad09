#include "stencilstream/pipeline.hpp"

#include "stencilstream/error.hpp"

#include <algorithm>
#include <condition_variable>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <string>
#include <thread>

namespace stencilstream {

namespace {

std::int64_t since(Clock::time_point epoch) {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - epoch).count();
}

StageEvent make_event(const TaskGraph::Task& task, int sweep) {
    StageEvent e;
    e.sweep = sweep;
    e.block = task.block;
    e.stage = task.stage;
    e.lane = stage_lane(task.stage);
    return e;
}

std::string describe(const StageEvent& e) {
    return "sweep " + std::to_string(e.sweep) + " block " + std::to_string(e.block) + " " +
           std::string(to_string(e.stage));
}

} // namespace

std::string_view to_string(Stage stage) {
    switch (stage) {
    case Stage::upload: return "upload";
    case Stage::decompress: return "decompress";
    case Stage::compute: return "compute";
    case Stage::compress: return "compress";
    case Stage::download: return "download";
    }
    return "unknown";
}

TaskGraph::TaskId TaskGraph::add(int block, Stage stage, Work work) {
    tasks_.push_back(Task{block, stage, std::move(work), {}, {}});
    return tasks_.size() - 1;
}

void TaskGraph::depend(TaskId before, TaskId after) {
    if (before >= tasks_.size() || after >= tasks_.size()) {
        fail(ErrorKind::schedule, "dependency on an unknown task");
    }
    tasks_[before].successors.push_back(after);
    tasks_[after].predecessors.push_back(before);
}

void TaskGraph::check_acyclic() const {
    std::vector<std::size_t> pending(tasks_.size());
    std::vector<TaskId> ready;
    for (TaskId id = 0; id < tasks_.size(); ++id) {
        pending[id] = tasks_[id].predecessors.size();
        if (pending[id] == 0) ready.push_back(id);
    }
    std::size_t visited = 0;
    while (!ready.empty()) {
        const TaskId id = ready.back();
        ready.pop_back();
        ++visited;
        for (TaskId s : tasks_[id].successors) {
            if (--pending[s] == 0) ready.push_back(s);
        }
    }
    if (visited != tasks_.size()) {
        fail(ErrorKind::schedule, "task graph has a dependency cycle");
    }
}

TaskGraph build_sweep_graph(int blocks, const std::function<TaskGraph::Work(int, Stage)>& work,
                            std::span<const std::size_t> order) {
    const std::size_t count = static_cast<std::size_t>(blocks) * all_stages.size();
    auto at = [](int i, Stage st) {
        return static_cast<std::size_t>(i) * all_stages.size() + static_cast<std::size_t>(st);
    };
    std::vector<std::size_t> sequence(order.begin(), order.end());
    if (sequence.empty()) {
        for (std::size_t k = 0; k < count; ++k) sequence.push_back(k);
    }
    std::vector<bool> seen(count, false);
    for (std::size_t k : sequence) {
        if (k >= count || seen[k]) fail(ErrorKind::schedule, "task order is not a permutation");
        seen[k] = true;
    }
    if (sequence.size() != count) fail(ErrorKind::schedule, "task order is not a permutation");

    TaskGraph graph;
    std::vector<TaskGraph::TaskId> id(count);
    for (std::size_t k : sequence) {
        const int block = static_cast<int>(k / all_stages.size());
        const Stage stage = all_stages[k % all_stages.size()];
        id[k] = graph.add(block, stage, work(block, stage));
    }
    auto edge = [&](int a, Stage sa, int b, Stage sb) {
        if (a >= 0) graph.depend(id[at(a, sa)], id[at(b, sb)]);
    };
    for (int i = 0; i < blocks; ++i) {
        edge(i, Stage::upload, i, Stage::decompress);
        edge(i, Stage::decompress, i, Stage::compute);
        edge(i, Stage::compute, i, Stage::compress);
        edge(i, Stage::compress, i, Stage::download);
        edge(i - 1, Stage::decompress, i, Stage::decompress);  // common-region input copy
        edge(i - 1, Stage::compress, i, Stage::compress);      // upper half of C_{i-1}
        edge(i - 2, Stage::decompress, i, Stage::upload);      // staging-in reuse
        edge(i - 2, Stage::compress, i, Stage::decompress);    // working slab reuse
        edge(i - 2, Stage::download, i, Stage::compress);      // staging-out reuse
    }
    return graph;
}

std::vector<StageEvent> execute_serial(TaskGraph& graph, Clock::time_point epoch, int sweep) {
    graph.check_acyclic();
    const auto& tasks = graph.tasks();
    std::vector<std::size_t> pending(tasks.size());
    std::set<TaskGraph::TaskId> ready;
    for (TaskGraph::TaskId id = 0; id < tasks.size(); ++id) {
        pending[id] = tasks[id].predecessors.size();
        if (pending[id] == 0) ready.insert(id);
    }
    std::vector<StageEvent> events(tasks.size());
    while (!ready.empty()) {
        const auto id = *ready.begin();
        ready.erase(ready.begin());
        StageEvent e = make_event(tasks[id], sweep);
        e.start_ns = since(epoch);
        e.bytes = tasks[id].work ? tasks[id].work() : 0;
        e.end_ns = since(epoch);
        events[id] = e;
        for (auto s : tasks[id].successors) {
            if (--pending[s] == 0) ready.insert(s);
        }
    }
    return events;
}

std::vector<StageEvent> execute_pipelined(TaskGraph& graph, Clock::time_point epoch, int sweep) {
    graph.check_acyclic();
    const auto& tasks = graph.tasks();

    std::mutex mutex;
    std::condition_variable wake;
    std::vector<std::size_t> pending(tasks.size());
    std::array<std::set<TaskGraph::TaskId>, lane_count> ready;
    std::array<std::size_t, lane_count> left{};
    std::exception_ptr failure;
    std::vector<StageEvent> events(tasks.size());

    for (TaskGraph::TaskId id = 0; id < tasks.size(); ++id) {
        const int lane = stage_lane(tasks[id].stage);
        ++left[static_cast<std::size_t>(lane)];
        pending[id] = tasks[id].predecessors.size();
        if (pending[id] == 0) ready[static_cast<std::size_t>(lane)].insert(id);
    }

    auto lane_loop = [&](std::size_t lane) {
        std::unique_lock lock(mutex);
        while (true) {
            wake.wait(lock, [&] { return failure || left[lane] == 0 || !ready[lane].empty(); });
            if (failure || left[lane] == 0) return;
            const auto id = *ready[lane].begin();
            ready[lane].erase(ready[lane].begin());
            lock.unlock();

            StageEvent e = make_event(tasks[id], sweep);
            e.start_ns = since(epoch);
            try {
                e.bytes = tasks[id].work ? tasks[id].work() : 0;
            } catch (...) {
                lock.lock();
                if (!failure) failure = std::current_exception();
                wake.notify_all();
                return;
            }
            e.end_ns = since(epoch);

            lock.lock();
            events[id] = e;
            --left[lane];
            for (auto s : tasks[id].successors) {
                if (--pending[s] == 0) ready[static_cast<std::size_t>(stage_lane(tasks[s].stage))].insert(s);
            }
            wake.notify_all();
        }
    };

    std::vector<std::thread> lanes;
    for (std::size_t lane = 0; lane < lane_count; ++lane) lanes.emplace_back(lane_loop, lane);
    for (auto& t : lanes) t.join();
    if (failure) std::rethrow_exception(failure);
    return events;
}

SimulatedSchedule simulate_schedule(const TaskGraph& graph, std::span<const std::int64_t> durations) {
    const auto& tasks = graph.tasks();
    if (durations.size() != tasks.size()) {
        fail(ErrorKind::schedule, "one duration per task is required");
    }
    SimulatedSchedule out;
    out.start_ns.assign(tasks.size(), 0);
    out.end_ns.assign(tasks.size(), 0);
    std::vector<bool> scheduled(tasks.size(), false);
    std::array<std::int64_t, lane_count> lane_free{};

    // Always commit the globally earliest start; a lane that frees up takes
    // the lowest-id task already ready, else waits for the next one.
    for (std::size_t placed = 0; placed < tasks.size(); ++placed) {
        std::int64_t best_start = std::numeric_limits<std::int64_t>::max();
        std::size_t best = tasks.size();
        for (std::size_t lane = 0; lane < lane_count; ++lane) {
            std::size_t pick = tasks.size();
            std::int64_t pick_start = 0;
            for (std::size_t id = 0; id < tasks.size(); ++id) {
                if (scheduled[id] || static_cast<std::size_t>(stage_lane(tasks[id].stage)) != lane) continue;
                std::int64_t ready_at = 0;
                bool ok = true;
                for (auto p : tasks[id].predecessors) {
                    if (!scheduled[p]) { ok = false; break; }
                    ready_at = std::max(ready_at, out.end_ns[p]);
                }
                if (!ok) continue;
                const std::int64_t start = std::max(ready_at, lane_free[lane]);
                if (pick == tasks.size() || start < pick_start) {
                    pick = id;
                    pick_start = start;
                }
            }
            if (pick != tasks.size() && pick_start < best_start) {
                best = pick;
                best_start = pick_start;
            }
        }
        if (best == tasks.size()) {
            fail(ErrorKind::schedule, "task graph has a dependency cycle");
        }
        scheduled[best] = true;
        out.start_ns[best] = best_start;
        out.end_ns[best] = best_start + durations[best];
        lane_free[static_cast<std::size_t>(stage_lane(tasks[best].stage))] = out.end_ns[best];
        out.makespan_ns = std::max(out.makespan_ns, out.end_ns[best]);
    }
    return out;
}

void audit_events(std::span<const StageEvent> events) {
    std::array<std::vector<const StageEvent*>, lane_count> by_lane;
    for (const auto& e : events) {
        if (e.lane < 0 || e.lane >= lane_count || e.end_ns < e.start_ns) {
            fail(ErrorKind::schedule, "malformed event: " + describe(e));
        }
        by_lane[static_cast<std::size_t>(e.lane)].push_back(&e);
    }
    for (auto& lane : by_lane) {
        std::sort(lane.begin(), lane.end(), [](auto* a, auto* b) { return a->start_ns < b->start_ns; });
        for (std::size_t k = 1; k < lane.size(); ++k) {
            if (lane[k]->start_ns < lane[k - 1]->end_ns) {
                fail(ErrorKind::schedule, "lane overlap: " + describe(*lane[k - 1]) + " and " +
                                              describe(*lane[k]));
            }
        }
    }

    std::map<std::pair<int, int>, std::array<const StageEvent*, all_stages.size()>> chains;
    for (const auto& e : events) {
        chains[{e.sweep, e.block}][static_cast<std::size_t>(e.stage)] = &e;
    }
    for (const auto& [key, chain] : chains) {
        const StageEvent* last = nullptr;
        for (const StageEvent* e : chain) {
            if (!e) continue;
            if (last && e->start_ns < last->start_ns) {
                fail(ErrorKind::schedule, "stage order violated: " + describe(*e) + " started before " +
                                              describe(*last));
            }
            last = e;
        }
    }
}

void audit_schedule(const TaskGraph& graph, std::span<const StageEvent> events) {
    if (events.size() != graph.size()) {
        fail(ErrorKind::schedule, "event log does not match the task graph");
    }
    audit_events(events);
    for (std::size_t id = 0; id < graph.size(); ++id) {
        for (auto s : graph.task(id).successors) {
            if (events[s].start_ns < events[id].end_ns) {
                fail(ErrorKind::schedule, "dependency violated: " + describe(events[s]) +
                                              " started before " + describe(events[id]) + " ended");
            }
        }
    }
}

LaneUsage lane_usage(std::span<const StageEvent> events) {
    LaneUsage usage;
    if (events.empty()) return usage;
    std::int64_t first = std::numeric_limits<std::int64_t>::max();
    std::int64_t last = std::numeric_limits<std::int64_t>::min();
    for (const auto& e : events) {
        first = std::min(first, e.start_ns);
        last = std::max(last, e.end_ns);
        usage.busy_ns[static_cast<std::size_t>(e.lane)] += e.duration_ns();
    }
    usage.makespan_ns = last - first;
    for (std::size_t l = 0; l < lane_count; ++l) usage.idle_ns[l] = usage.makespan_ns - usage.busy_ns[l];
    return usage;
}

void write_event_csv(std::ostream& out, std::span<const StageEvent> events) {
    out << "block,stage,lane,start_ns,end_ns,bytes\n";
    for (const auto& e : events) {
        out << e.block << ',' << to_string(e.stage) << ',' << e.lane << ',' << e.start_ns << ','
            << e.end_ns << ',' << e.bytes << '\n';
    }
}

} // namespace stencilstream
