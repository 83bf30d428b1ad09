#include "stencilstream/engine.hpp"

#include "stencilstream/error.hpp"
#include "stencilstream/fast_tier.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

namespace stencilstream {

namespace {

constexpr std::uint64_t poison_word = 0x7ff8dead0000beefULL;

std::size_t payload_words(const Codec& codec, const GridSpec& spec, PlaneRange range) {
    return codec.payload_words(plane_extents(spec, range));
}

std::size_t input_words(const BlockMap& map, const Codec& codec, int i) {
    std::size_t words = payload_words(codec, map.spec(), map.remainder(i));
    if (i < map.divisions() - 1) words += payload_words(codec, map.spec(), map.common(i));
    return words;
}

std::size_t output_words(const BlockMap& map, const Codec& codec, int i) {
    std::size_t words = payload_words(codec, map.spec(), map.remainder(i));
    if (i > 0) words += payload_words(codec, map.spec(), map.common(i - 1));
    return words;
}

} // namespace

std::string_view to_string(Dataset d) {
    switch (d) {
    case Dataset::prev: return "prev";
    case Dataset::curr: return "curr";
    case Dataset::velocity: return "velocity";
    }
    return "unknown";
}

std::optional<Dataset> parse_dataset(std::string_view name) {
    for (Dataset d : all_datasets) {
        if (to_string(d) == name) return d;
    }
    return std::nullopt;
}

std::string_view to_string(RunMode mode) {
    switch (mode) {
    case RunMode::baseline: return "baseline";
    case RunMode::rw32: return "rw32";
    case RunMode::ro32: return "ro32";
    case RunMode::rw_ro_24: return "rw-ro-24";
    case RunMode::custom: return "custom";
    }
    return "unknown";
}

std::optional<RunMode> parse_run_mode(std::string_view name) {
    for (RunMode m : {RunMode::baseline, RunMode::rw32, RunMode::ro32, RunMode::rw_ro_24,
                      RunMode::custom}) {
        if (to_string(m) == name) return m;
    }
    return std::nullopt;
}

bool CodecAssignment::lossless() const {
    return std::all_of(codecs.begin(), codecs.end(), [](const Codec& c) { return c.lossless(); });
}

CodecAssignment CodecAssignment::for_mode(RunMode mode, std::optional<int> rate,
                                          const std::vector<Dataset>& custom) {
    auto fixed = [&](int bits) {
        if (rate && *rate != bits) {
            fail(ErrorKind::config, "mode " + std::string(to_string(mode)) + " uses rate " +
                                        std::to_string(bits) + ", got rate " + std::to_string(*rate));
        }
        return Codec::fixed_rate(Rate(bits));
    };
    if (mode != RunMode::custom && !custom.empty()) {
        fail(ErrorKind::config, "a compressed dataset set is only valid with mode custom");
    }

    CodecAssignment a;
    switch (mode) {
    case RunMode::baseline:
        if (rate) fail(ErrorKind::config, "mode baseline takes no rate");
        break;
    case RunMode::rw32:
        a[Dataset::curr] = fixed(32);
        break;
    case RunMode::ro32:
        a[Dataset::velocity] = fixed(32);
        break;
    case RunMode::rw_ro_24:
        a[Dataset::curr] = fixed(24);
        a[Dataset::velocity] = a[Dataset::curr];
        break;
    case RunMode::custom:
        if (!rate) fail(ErrorKind::config, "mode custom needs a rate");
        if (custom.empty()) fail(ErrorKind::config, "mode custom needs at least one compressed dataset");
        for (Dataset d : custom) a[d] = Codec::fixed_rate(Rate(*rate));
        break;
    }
    return a;
}

Extents3 plane_extents(const GridSpec& spec, PlaneRange range) {
    return {spec.padded_x(), spec.padded_y(), static_cast<std::size_t>(range.size())};
}

CompressedStore::CompressedStore(const BlockMap& map, const CodecAssignment& codecs,
                                 const WaveState& initial, const Volume& velocity)
    : map_(map), codecs_(codecs) {
    const GridSpec& spec = map.spec();
    if (initial.prev.spec() != spec || initial.curr.spec() != spec || velocity.spec() != spec) {
        fail(ErrorKind::extent, "initial volumes do not match the block map grid");
    }
    for (Dataset d : all_datasets) {
        const Volume& src = d == Dataset::prev ? initial.prev
                            : d == Dataset::curr ? initial.curr
                                                 : velocity;
        const Codec& codec = codecs_[d];
        auto& rs = remainders_[index(d)];
        auto& cs = commons_[index(d)];
        for (int i = 0; i < map.divisions(); ++i) {
            const auto r = map.remainder(i);
            rs.push_back(codec.encode(src.view().planes(r), plane_extents(spec, r)));
        }
        for (int i = 0; i < map.common_count(); ++i) {
            const auto c = map.common(i);
            cs.push_back(codec.encode(src.view().planes(c), plane_extents(spec, c)));
        }
    }
}

std::size_t CompressedStore::payload_bytes(Dataset d) const {
    std::size_t bytes = 0;
    for (const auto& p : remainders_[index(d)]) bytes += p.words.size() * 8;
    for (const auto& p : commons_[index(d)]) bytes += p.words.size() * 8;
    return bytes;
}

Volume CompressedStore::assemble(Dataset d) const {
    Volume v(map_.spec());
    for (int i = 0; i < map_.divisions(); ++i) {
        const auto& p = remainder(d, i);
        decode_into(p.info, p.words, v.view().planes(map_.remainder(i)));
    }
    for (int i = 0; i < map_.common_count(); ++i) {
        const auto& p = common(d, i);
        decode_into(p.info, p.words, v.view().planes(map_.common(i)));
    }
    apply_dirichlet(v);
    return v;
}

std::size_t CapacityPlan::total() const {
    std::size_t sum = 0;
    for (const auto& b : buffers) sum += b.bytes;
    return sum;
}

std::string CapacityPlan::describe() const {
    std::ostringstream out;
    for (const auto& b : buffers) out << b.name << " " << b.bytes << " bytes\n";
    out << "total " << total() << " bytes\n";
    return out.str();
}

CapacityPlan plan_capacity(const BlockMap& map, const CodecAssignment& codecs) {
    const GridSpec& spec = map.spec();
    const int d_count = map.divisions();
    const std::size_t plane = spec.plane_bytes();
    const auto h = static_cast<std::size_t>(map.halo_depth());

    std::size_t in_bytes = 0;
    for (Dataset d : all_datasets) {
        std::size_t words = 0;
        for (int i = 0; i < d_count; ++i) words = std::max(words, input_words(map, codecs[d], i));
        in_bytes += words * 8;
    }
    std::size_t out_bytes = 0;
    for (Dataset d : read_write_datasets) {
        std::size_t words = 0;
        for (int i = 0; i < d_count; ++i) words = std::max(words, output_words(map, codecs[d], i));
        out_bytes += words * 8;
    }
    // prev, curr, scratch and velocity over the deepest working set.
    const std::size_t slab_bytes = 4 * static_cast<std::size_t>(map.max_working_planes()) * plane;

    CapacityPlan plan;
    for (int b = 0; b < 2; ++b) {
        const std::string tag = "[" + std::to_string(b) + "]";
        plan.buffers.push_back({"staging-in" + tag, in_bytes});
        plan.buffers.push_back({"working-slab" + tag, slab_bytes});
        plan.buffers.push_back({"staging-out" + tag, out_bytes});
    }
    if (d_count > 1) {
        plan.buffers.push_back({"common-input-copy", dataset_count * 2 * h * plane});
        plan.buffers.push_back({"half-output", read_write_datasets.size() * h * plane});
        plan.buffers.push_back({"common-assembly", 2 * h * plane});
    }
    return plan;
}

struct OutOfCoreEngine::Impl {
    struct SlabSet {
        WaveSlab wave;
        Slab velocity;

        Slab& of(Dataset d) {
            switch (d) {
            case Dataset::prev: return wave.prev;
            case Dataset::curr: return wave.curr;
            case Dataset::velocity: break;
            }
            return velocity;
        }
        void poison() {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            wave.prev.fill(nan);
            wave.curr.fill(nan);
            wave.scratch.fill(nan);
            velocity.fill(nan);
        }
    };

    BlockMap map;
    CodecAssignment codecs;
    StepParams params;
    EngineOptions options;
    CapacityPlan plan;
    FastTier tier;
    std::vector<FastTier::Reservation> reservations;

    std::array<std::array<std::vector<std::uint64_t>, dataset_count>, 2> staging_in;
    std::array<SlabSet, 2> slabs;
    std::array<std::array<std::vector<std::uint64_t>, 2>, 2> staging_out;
    std::array<Slab, dataset_count> stash;
    std::array<Slab, 2> half_out;
    Slab combine;

    Impl(const BlockMap& m, const CodecAssignment& c, const StepParams& p, const EngineOptions& o)
        : map(m), codecs(c), params(p), options(o), plan(plan_capacity(m, c)), tier(o.capacity) {
        if (options.capacity && plan.total() > *options.capacity) {
            fail(ErrorKind::capacity, "sweep needs " + std::to_string(plan.total()) +
                                          " bytes of fast tier, capacity is " +
                                          std::to_string(*options.capacity));
        }
        allocate();
    }

    void allocate() {
        const GridSpec& spec = map.spec();
        const int d_count = map.divisions();
        const int working = map.max_working_planes();
        const int h = map.halo_depth();
        auto words_bytes = [](const auto& buffers) {
            std::size_t bytes = 0;
            for (const auto& b : buffers) bytes += b.size() * sizeof(std::uint64_t);
            return bytes;
        };

        for (int b = 0; b < 2; ++b) {
            const std::string tag = "[" + std::to_string(b) + "]";
            auto& in = staging_in[static_cast<std::size_t>(b)];
            for (Dataset d : all_datasets) {
                std::size_t words = 0;
                for (int i = 0; i < d_count; ++i) words = std::max(words, input_words(map, codecs[d], i));
                in[static_cast<std::size_t>(d)].assign(words, 0);
            }
            reservations.push_back(tier.reserve("staging-in" + tag, words_bytes(in)));

            auto& s = slabs[static_cast<std::size_t>(b)];
            s.wave = WaveSlab(spec, working);
            s.velocity = Slab(spec, working);
            reservations.push_back(tier.reserve("working-slab" + tag, s.wave.bytes() + s.velocity.bytes()));

            auto& out = staging_out[static_cast<std::size_t>(b)];
            for (std::size_t k = 0; k < read_write_datasets.size(); ++k) {
                std::size_t words = 0;
                for (int i = 0; i < d_count; ++i) {
                    words = std::max(words, output_words(map, codecs[read_write_datasets[k]], i));
                }
                out[k].assign(words, 0);
            }
            reservations.push_back(tier.reserve("staging-out" + tag, words_bytes(out)));
        }
        if (d_count > 1) {
            std::size_t bytes = 0;
            for (auto& s : stash) {
                s = Slab(spec, 2 * h);
                bytes += s.bytes();
            }
            reservations.push_back(tier.reserve("common-input-copy", bytes));
            bytes = 0;
            for (auto& s : half_out) {
                s = Slab(spec, h);
                bytes += s.bytes();
            }
            reservations.push_back(tier.reserve("half-output", bytes));
            combine = Slab(spec, 2 * h);
            reservations.push_back(tier.reserve("common-assembly", combine.bytes()));
        }
    }

    void throttle(Clock::time_point start, std::uint64_t bytes) const {
        if (!options.bandwidth) return;
        const auto delay = std::chrono::duration<double>(static_cast<double>(bytes) / *options.bandwidth);
        std::this_thread::sleep_until(start + std::chrono::duration_cast<Clock::duration>(delay));
    }

    std::uint64_t upload(CompressedStore& store, int i, SweepStats& stats) {
        const auto start = Clock::now();
        auto& in = staging_in[static_cast<std::size_t>(i % 2)];
        std::uint64_t bytes = 0;
        for (Dataset d : all_datasets) {
            auto& buf = in[static_cast<std::size_t>(d)];
            const auto& r = store.remainder(d, i).words;
            auto at = std::copy(r.begin(), r.end(), buf.begin());
            std::size_t words = r.size();
            if (i < map.divisions() - 1) {
                const auto& c = store.common(d, i).words;
                std::copy(c.begin(), c.end(), at);
                words += c.size();
            }
            stats.uploaded[static_cast<std::size_t>(d)] += words * 8;
            bytes += words * 8;
        }
        throttle(start, bytes);
        return bytes;
    }

    std::uint64_t decompress(const CompressedStore& store, int i) {
        const int d_count = map.divisions();
        auto& s = slabs[static_cast<std::size_t>(i % 2)];
        auto& in = staging_in[static_cast<std::size_t>(i % 2)];
        const PlaneRange window = map.working_set(i);
        s.wave.set_window(window);
        s.velocity.set_window(window);

        if (i > 0) {
            const PlaneRange c = map.common(i - 1);
            for (Dataset d : all_datasets) {
                copy_planes(stash[static_cast<std::size_t>(d)].view(), c, s.of(d).view(), c);
            }
            if (options.poison_released) {
                for (auto& st : stash) st.fill(std::numeric_limits<double>::quiet_NaN());
            }
        }

        std::uint64_t bytes = 0;
        for (Dataset d : all_datasets) {
            std::span<const std::uint64_t> words = in[static_cast<std::size_t>(d)];
            PlaneView target = s.of(d).view();
            const auto& rp = store.remainder(d, i);
            const PlaneRange r = map.remainder(i);
            decode_into(rp.info, words.first(rp.info.word_count()), target.planes(r));
            bytes += target.planes(r).size_bytes();
            if (i < d_count - 1) {
                const auto& cp = store.common(d, i);
                const PlaneRange c = map.common(i);
                decode_into(cp.info, words.subspan(rp.info.word_count(), cp.info.word_count()),
                            target.planes(c));
                bytes += target.planes(c).size_bytes();
            }
            apply_dirichlet(target);
            if (i < d_count - 1) {
                const PlaneRange c = map.common(i);
                auto& st = stash[static_cast<std::size_t>(d)];
                st.set_window(c);
                copy_planes(target, c, st.view(), c);
            }
        }
        if (options.poison_released) {
            for (auto& buf : in) std::fill(buf.begin(), buf.end(), poison_word);
        }
        return bytes;
    }

    std::uint64_t compute(int i) {
        auto& s = slabs[static_cast<std::size_t>(i % 2)];
        compute_temporal_block(s.wave, s.velocity.view(), map.block(i), map.temporal_steps(), params);
        return 0;
    }

    std::uint64_t compress(int i) {
        const GridSpec& spec = map.spec();
        const int d_count = map.divisions();
        const int p = map.plane_depth();
        auto& s = slabs[static_cast<std::size_t>(i % 2)];
        auto& out = staging_out[static_cast<std::size_t>(i % 2)];
        std::uint64_t bytes = 0;

        for (std::size_t k = 0; k < read_write_datasets.size(); ++k) {
            const Dataset d = read_write_datasets[k];
            const Codec& codec = codecs[d];
            ConstPlaneView src = s.of(d).view();
            std::span<std::uint64_t> words = out[k];

            const PlaneRange r = map.remainder(i);
            const std::size_t rw = payload_words(codec, spec, r);
            codec.encode_into(src.planes(r), plane_extents(spec, r), words.first(rw));
            bytes += rw * 8;

            if (i > 0) {
                // Upper half from block i-1, lower half from this block.
                const PlaneRange c = map.common(i - 1);
                const PlaneRange upper{c.begin, i * p};
                const PlaneRange lower{i * p, c.end};
                combine.set_window(c);
                copy_planes(half_out[k].view(), upper, combine.view(), upper);
                copy_planes(src, lower, combine.view(), lower);
                const std::size_t cw = payload_words(codec, spec, c);
                codec.encode_into(combine.view().planes(c), plane_extents(spec, c), words.subspan(rw, cw));
                bytes += cw * 8;
                if (options.poison_released) half_out[k].fill(std::numeric_limits<double>::quiet_NaN());
            }
            if (i < d_count - 1) {
                const PlaneRange upper{map.common(i).begin, (i + 1) * p};
                half_out[k].set_window(upper);
                copy_planes(src, upper, half_out[k].view(), upper);
            }
        }
        if (options.poison_released) s.poison();
        return bytes;
    }

    std::uint64_t download(CompressedStore& store, int i, SweepStats& stats) {
        const auto start = Clock::now();
        const int r = map.spec().radius;
        auto& out = staging_out[static_cast<std::size_t>(i % 2)];
        std::uint64_t bytes = 0;
        auto count = [&](std::size_t k, PlaneRange range) {
            for (int z = range.begin; z < range.end; ++z) ++stats.writebacks[k][static_cast<std::size_t>(z + r)];
        };
        for (std::size_t k = 0; k < read_write_datasets.size(); ++k) {
            const Dataset d = read_write_datasets[k];
            auto& rp = store.remainder(d, i).words;
            std::copy_n(out[k].begin(), rp.size(), rp.begin());
            std::size_t words = rp.size();
            count(k, map.remainder(i));
            if (i > 0) {
                auto& cp = store.common(d, i - 1).words;
                std::copy_n(out[k].begin() + static_cast<std::ptrdiff_t>(rp.size()), cp.size(), cp.begin());
                words += cp.size();
                count(k, map.common(i - 1));
            }
            stats.downloaded[static_cast<std::size_t>(d)] += words * 8;
            bytes += words * 8;
        }
        if (options.poison_released) {
            for (auto& buf : out) std::fill(buf.begin(), buf.end(), poison_word);
        }
        throttle(start, bytes);
        return bytes;
    }

    SweepStats sweep(CompressedStore& store, int sweep_index, Clock::time_point epoch) {
        if (store.map().spec() != map.spec() || store.map().divisions() != map.divisions() ||
            store.map().temporal_steps() != map.temporal_steps() || !(store.codecs().codecs == codecs.codecs)) {
            fail(ErrorKind::incompatible, "compressed store does not match the engine configuration");
        }
        const int d_count = map.divisions();
        SweepStats stats;
        for (auto& w : stats.writebacks) w.assign(map.spec().padded_z(), 0);

        const std::size_t count = static_cast<std::size_t>(d_count) * all_stages.size();
        std::vector<std::size_t> order(count);
        std::iota(order.begin(), order.end(), std::size_t{0});
        if (options.shuffle_seed) {
            std::mt19937_64 rng(*options.shuffle_seed + static_cast<std::uint64_t>(sweep_index));
            std::shuffle(order.begin(), order.end(), rng);
        }
        TaskGraph graph = build_sweep_graph(d_count, [&](int i, Stage stage) -> TaskGraph::Work {
            switch (stage) {
            case Stage::upload: return [&, i] { return upload(store, i, stats); };
            case Stage::decompress: return [&, i] { return decompress(store, i); };
            case Stage::compute: return [this, i] { return compute(i); };
            case Stage::compress: return [this, i] { return compress(i); };
            case Stage::download: break;
            }
            return [&, i] { return download(store, i, stats); };
        }, order);

        auto events = options.executor == Executor::serial ? execute_serial(graph, epoch, sweep_index)
                                                           : execute_pipelined(graph, epoch, sweep_index);
        audit_schedule(graph, events);
        std::stable_sort(events.begin(), events.end(),
                         [](const StageEvent& a, const StageEvent& b) { return a.start_ns < b.start_ns; });
        stats.events = std::move(events);
        store.advance(map.temporal_steps());
        return stats;
    }
};

OutOfCoreEngine::OutOfCoreEngine(const BlockMap& map, const CodecAssignment& codecs,
                                 const StepParams& params, const EngineOptions& options)
    : impl_(std::make_unique<Impl>(map, codecs, params, options)) {}

OutOfCoreEngine::~OutOfCoreEngine() = default;

const CapacityPlan& OutOfCoreEngine::plan() const { return impl_->plan; }

std::size_t OutOfCoreEngine::peak_bytes() const { return impl_->tier.peak(); }

SweepStats OutOfCoreEngine::sweep(CompressedStore& store, int sweep_index, Clock::time_point epoch) {
    return impl_->sweep(store, sweep_index, epoch);
}

RunReport run(const Problem& problem, const CodecAssignment& codecs, const EngineOptions& options,
              const SweepObserver& observer) {
    const BlockMap map = build_block_map(problem.grid, problem.divisions, problem.temporal_steps);
    if (problem.total_steps < 0 || problem.total_steps % problem.temporal_steps != 0) {
        fail(ErrorKind::config, "total_steps (" + std::to_string(problem.total_steps) +
                                    ") must be a non-negative multiple of t_b (" +
                                    std::to_string(problem.temporal_steps) + ")");
    }
    if (problem.velocity.spec() != problem.grid) {
        fail(ErrorKind::extent, "velocity volume does not match the grid");
    }
    const MediumParams medium(problem.velocity, problem.dt, problem.dx, problem.coeffs);

    OutOfCoreEngine engine(map, codecs, medium.step_params(problem.coeffs), options);
    CompressedStore store(map, codecs, make_wave_state(problem.grid, problem.initial), medium.velocity());

    RunReport report;
    report.planned_bytes = engine.plan().total();
    const int sweeps = problem.total_steps / problem.temporal_steps;
    const auto epoch = Clock::now();
    for (int s = 0; s < sweeps; ++s) {
        SweepStats stats = engine.sweep(store, s, epoch);
        for (std::size_t d = 0; d < dataset_count; ++d) {
            report.uploaded[d] += stats.uploaded[d];
            report.downloaded[d] += stats.downloaded[d];
        }
        report.events.insert(report.events.end(), stats.events.begin(), stats.events.end());
        ++report.sweeps;
        report.total_steps = store.time_level();
        if (observer) observer(store.time_level(), store, stats);
    }
    report.peak_bytes = engine.peak_bytes();
    report.prev = store.assemble(Dataset::prev);
    report.curr = store.assemble(Dataset::curr);
    return report;
}

} // namespace stencilstream
