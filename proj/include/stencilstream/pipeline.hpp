#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace stencilstream {

enum class Stage { upload, decompress, compute, compress, download };

constexpr std::array<Stage, 5> all_stages = {Stage::upload, Stage::decompress, Stage::compute,
                                             Stage::compress, Stage::download};
constexpr int lane_count = 3;

std::string_view to_string(Stage stage);

// Upload and decompress share the upload lane, compress and download the
// download lane; compute has a lane of its own.
constexpr int stage_lane(Stage stage) {
    switch (stage) {
    case Stage::upload:
    case Stage::decompress: return 0;
    case Stage::compute: return 1;
    case Stage::compress:
    case Stage::download: return 2;
    }
    return 0;
}

struct StageEvent {
    int sweep = 0;
    int block = 0;
    Stage stage = Stage::upload;
    int lane = 0;
    std::int64_t start_ns = 0;
    std::int64_t end_ns = 0;
    std::uint64_t bytes = 0;

    std::int64_t duration_ns() const { return end_ns - start_ns; }
};

using Clock = std::chrono::steady_clock;

// Per-block stage tasks with explicit dependencies. Work callbacks return the
// number of bytes they moved or produced.
class TaskGraph {
  public:
    using TaskId = std::size_t;
    using Work = std::function<std::uint64_t()>;

    struct Task {
        int block = 0;
        Stage stage = Stage::upload;
        Work work;
        std::vector<TaskId> successors;
        std::vector<TaskId> predecessors;
    };

    TaskId add(int block, Stage stage, Work work);
    void depend(TaskId before, TaskId after);

    std::size_t size() const { return tasks_.size(); }
    const Task& task(TaskId id) const { return tasks_[id]; }
    const std::vector<Task>& tasks() const { return tasks_; }

    // Throws Error(schedule) if the dependencies contain a cycle.
    void check_acyclic() const;

  private:
    std::vector<Task> tasks_;
};

// Stage tasks of one sweep over `blocks` blocks: each block's upload ->
// decompress -> compute -> compress -> download chain plus the buffer-reuse
// edges between neighbouring blocks. `order` optionally permutes insertion
// (entry k names task block * 5 + stage).
TaskGraph build_sweep_graph(int blocks, const std::function<TaskGraph::Work(int, Stage)>& work,
                            std::span<const std::size_t> order = {});

// Both executors return one event per task, indexed by TaskId, with times
// relative to `epoch`. Among ready tasks the lowest TaskId runs first.
std::vector<StageEvent> execute_serial(TaskGraph& graph, Clock::time_point epoch, int sweep = 0);
std::vector<StageEvent> execute_pipelined(TaskGraph& graph, Clock::time_point epoch, int sweep = 0);

// Discrete-event model of the pipelined executor for given task durations.
struct SimulatedSchedule {
    std::vector<std::int64_t> start_ns;
    std::vector<std::int64_t> end_ns;
    std::int64_t makespan_ns = 0;
};
SimulatedSchedule simulate_schedule(const TaskGraph& graph, std::span<const std::int64_t> durations);

// Throws Error(schedule) on overlapping events within a lane or an
// out-of-order stage chain within a (sweep, block).
void audit_events(std::span<const StageEvent> events);
// Additionally checks every graph edge: events[i] must belong to task i.
void audit_schedule(const TaskGraph& graph, std::span<const StageEvent> events);

struct LaneUsage {
    std::int64_t makespan_ns = 0;
    std::array<std::int64_t, lane_count> busy_ns{};
    std::array<std::int64_t, lane_count> idle_ns{};
};
LaneUsage lane_usage(std::span<const StageEvent> events);

// CSV with header `block,stage,lane,start_ns,end_ns,bytes`.
void write_event_csv(std::ostream& out, std::span<const StageEvent> events);

} // namespace stencilstream
