#pragma once

#include "stencilstream/block_map.hpp"
#include "stencilstream/codec.hpp"
#include "stencilstream/grid.hpp"
#include "stencilstream/pipeline.hpp"
#include "stencilstream/wave.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stencilstream {

// Streamed datasets. The scratch (write-only) dataset never leaves the fast tier.
enum class Dataset { prev, curr, velocity };

constexpr std::array<Dataset, 3> all_datasets = {Dataset::prev, Dataset::curr, Dataset::velocity};
constexpr std::array<Dataset, 2> read_write_datasets = {Dataset::prev, Dataset::curr};
constexpr std::size_t dataset_count = all_datasets.size();

std::string_view to_string(Dataset d);
std::optional<Dataset> parse_dataset(std::string_view name);

enum class RunMode { baseline, rw32, ro32, rw_ro_24, custom };

std::string_view to_string(RunMode mode);
std::optional<RunMode> parse_run_mode(std::string_view name);

// Codec per streamed dataset.
struct CodecAssignment {
    std::array<Codec, dataset_count> codecs{Codec::passthrough(), Codec::passthrough(),
                                            Codec::passthrough()};

    const Codec& operator[](Dataset d) const { return codecs[static_cast<std::size_t>(d)]; }
    Codec& operator[](Dataset d) { return codecs[static_cast<std::size_t>(d)]; }
    bool lossless() const;

    // Named modes fix their rate: rw32 and ro32 use 32, rw-ro-24 uses 24 (a
    // different explicit rate is rejected). rw32 compresses the current time
    // level. custom needs an explicit rate and a non-empty dataset set.
    static CodecAssignment for_mode(RunMode mode, std::optional<int> rate = std::nullopt,
                                    const std::vector<Dataset>& custom = {});
};

// Host-side compressed state: one payload per remainder and common region for
// every streamed dataset, all at one time level.
class CompressedStore {
  public:
    CompressedStore(const BlockMap& map, const CodecAssignment& codecs, const WaveState& initial,
                    const Volume& velocity);

    const BlockMap& map() const { return map_; }
    const CodecAssignment& codecs() const { return codecs_; }
    int time_level() const { return time_level_; }
    void advance(int steps) { time_level_ += steps; }

    EncodedPayload& remainder(Dataset d, int i) { return remainders_[index(d)][static_cast<std::size_t>(i)]; }
    const EncodedPayload& remainder(Dataset d, int i) const {
        return remainders_[index(d)][static_cast<std::size_t>(i)];
    }
    EncodedPayload& common(Dataset d, int i) { return commons_[index(d)][static_cast<std::size_t>(i)]; }
    const EncodedPayload& common(Dataset d, int i) const {
        return commons_[index(d)][static_cast<std::size_t>(i)];
    }

    // Total payload bytes held for a dataset.
    std::size_t payload_bytes(Dataset d) const;

    // Decodes every region of a dataset into a full volume (boundary re-applied).
    Volume assemble(Dataset d) const;

  private:
    static std::size_t index(Dataset d) { return static_cast<std::size_t>(d); }

    BlockMap map_;
    CodecAssignment codecs_;
    int time_level_ = 0;
    std::array<std::vector<EncodedPayload>, dataset_count> remainders_;
    std::array<std::vector<EncodedPayload>, dataset_count> commons_;
};

// Payload layout of a plane range of full padded planes.
Extents3 plane_extents(const GridSpec& spec, PlaneRange range);

enum class Executor { serial, pipelined };

// Fast-tier buffers one sweep needs, computed from the block map and codecs alone.
struct CapacityPlan {
    struct Buffer {
        std::string name;
        std::size_t bytes = 0;
    };
    std::vector<Buffer> buffers;

    std::size_t total() const;
    std::string describe() const;
};

CapacityPlan plan_capacity(const BlockMap& map, const CodecAssignment& codecs);

struct EngineOptions {
    Executor executor = Executor::pipelined;
    std::optional<std::size_t> capacity;   // fast-tier bytes; unbounded if unset
    std::optional<double> bandwidth;       // synthetic transfer bytes/s for upload and download
    std::optional<std::uint64_t> shuffle_seed;  // permutes task submission order
    bool poison_released = false;          // NaN-fill buffers after their last reader
};

struct SweepStats {
    std::array<std::uint64_t, dataset_count> uploaded{};
    std::array<std::uint64_t, dataset_count> downloaded{};
    // Writebacks per padded plane (index z + radius) for each read-write dataset.
    std::array<std::vector<int>, 2> writebacks;
    std::vector<StageEvent> events;
};

// Everything that defines a simulation independent of codecs and execution.
struct Problem {
    GridSpec grid;
    int divisions = 1;
    int temporal_steps = 1;
    int total_steps = 0;
    InitKind initial = ZeroInit{};
    Volume velocity;
    double dt = 0.0;
    double dx = 0.0;
    StencilCoeffs coeffs = laplacian_coeffs_8th();
};

struct RunReport {
    int sweeps = 0;
    int total_steps = 0;
    std::vector<StageEvent> events;
    std::array<std::uint64_t, dataset_count> uploaded{};
    std::array<std::uint64_t, dataset_count> downloaded{};
    std::size_t planned_bytes = 0;
    std::size_t peak_bytes = 0;
    Volume prev;
    Volume curr;
};

// Called after every sweep with the number of steps completed so far.
using SweepObserver = std::function<void(int steps, const CompressedStore& store, const SweepStats& stats)>;

// Streams the store through the fast tier, advancing it by t_b steps per sweep.
class OutOfCoreEngine {
  public:
    OutOfCoreEngine(const BlockMap& map, const CodecAssignment& codecs, const StepParams& params,
                    const EngineOptions& options);
    ~OutOfCoreEngine();
    OutOfCoreEngine(const OutOfCoreEngine&) = delete;
    OutOfCoreEngine& operator=(const OutOfCoreEngine&) = delete;

    const CapacityPlan& plan() const;
    std::size_t peak_bytes() const;

    SweepStats sweep(CompressedStore& store, int sweep_index, Clock::time_point epoch);

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Validates the problem (CFL, divisibility), builds the store, runs
// total_steps / t_b sweeps and returns the decoded final state.
RunReport run(const Problem& problem, const CodecAssignment& codecs, const EngineOptions& options,
              const SweepObserver& observer = {});

} // namespace stencilstream
