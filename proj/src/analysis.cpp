#include "stencilstream/analysis.hpp"

#include "stencilstream/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <unordered_set>

namespace stencilstream {

std::uint64_t SplitMix64::next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t SplitMix64::below(std::uint64_t bound) {
    // Reject the top partial interval so every residue is equally likely.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t v;
    do {
        v = next();
    } while (v >= limit);
    return v % bound;
}

SplitMix64 SplitMix64::split(std::uint64_t stream) const {
    SplitMix64 mixer(state_ ^ (stream * 0xd1342543de82ef95ULL));
    return SplitMix64(mixer.next());
}

SampleSet sample_points(const GridSpec& spec, int points_per_plane, std::uint64_t seed) {
    spec.validate();
    const auto area = static_cast<std::uint64_t>(spec.nx) * static_cast<std::uint64_t>(spec.ny);
    if (points_per_plane < 1 || static_cast<std::uint64_t>(points_per_plane) > area) {
        fail(ErrorKind::config, "points per plane (" + std::to_string(points_per_plane) +
                                    ") must be in [1, nx*ny = " + std::to_string(area) + "]");
    }
    SampleSet set{points_per_plane, seed, {}};
    set.points.reserve(static_cast<std::size_t>(points_per_plane) * static_cast<std::size_t>(spec.nz));
    const SplitMix64 root(seed);
    const auto n = static_cast<std::uint64_t>(points_per_plane);
    std::unordered_set<std::uint64_t> chosen;
    for (int z = 0; z < spec.nz; ++z) {
        SplitMix64 rng = root.split(static_cast<std::uint64_t>(z));
        chosen.clear();
        // Floyd's algorithm: n distinct cells out of nx*ny.
        for (std::uint64_t j = area - n; j < area; ++j) {
            std::uint64_t t = rng.below(j + 1);
            if (!chosen.insert(t).second) {
                t = j;
                chosen.insert(t);
            }
            set.points.push_back({static_cast<int>(t % static_cast<std::uint64_t>(spec.nx)),
                                  static_cast<int>(t / static_cast<std::uint64_t>(spec.nx)), z});
        }
    }
    return set;
}

ErrorReport relative_error(std::span<const double> reference, std::span<const double> candidate) {
    if (reference.size() != candidate.size()) {
        fail(ErrorKind::incompatible, "relative error needs equally many reference and candidate samples");
    }
    ErrorReport report;
    report.samples = reference.size();
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t k = 0; k < reference.size(); ++k) {
        const double b = reference[k];
        if (std::fabs(b) < near_zero_reference) {
            ++report.skipped;
            continue;
        }
        sum += std::fabs(candidate[k] - b) / std::fabs(b);
        ++used;
    }
    report.avg_rel_error = used ? sum / static_cast<double>(used) : 0.0;
    return report;
}

std::vector<double> sample_values(ConstPlaneView v, const SampleSet& samples) {
    std::vector<double> out;
    out.reserve(samples.points.size());
    for (const auto& p : samples.points) {
        if (p.x < 0 || p.x >= v.spec().nx || p.y < 0 || p.y >= v.spec().ny ||
            p.z < v.window().begin || p.z >= v.window().end) {
            fail(ErrorKind::extent, "sample point outside the volume");
        }
        out.push_back(v.at(p.x, p.y, p.z));
    }
    return out;
}

ErrorReport relative_error(ConstPlaneView reference, ConstPlaneView candidate, const SampleSet& samples) {
    if (reference.spec() != candidate.spec()) {
        fail(ErrorKind::incompatible, "relative error needs volumes on the same grid");
    }
    return relative_error(sample_values(reference, samples), sample_values(candidate, samples));
}

std::string_view to_string(Category c) {
    switch (c) {
    case Category::upload: return "upload";
    case Category::download: return "download";
    case Category::compute: return "compute";
    case Category::compress: return "compress";
    case Category::decompress: return "decompress";
    }
    return "unknown";
}

Category category_of(Stage stage) {
    switch (stage) {
    case Stage::upload: return Category::upload;
    case Stage::decompress: return Category::decompress;
    case Stage::compute: return Category::compute;
    case Stage::compress: return Category::compress;
    case Stage::download: return Category::download;
    }
    return Category::compute;
}

double Breakdown::sum() const { return std::accumulate(seconds.begin(), seconds.end(), 0.0); }

Category Breakdown::bounding() const {
    const auto it = std::max_element(seconds.begin(), seconds.end());
    return all_categories[static_cast<std::size_t>(it - seconds.begin())];
}

Breakdown breakdown_from_events(std::span<const StageEvent> events) {
    audit_events(events);
    Breakdown out;
    std::array<std::int64_t, 5> ns{};
    std::vector<std::pair<std::int64_t, std::int64_t>> spans;
    spans.reserve(events.size());
    for (const auto& e : events) {
        ns[static_cast<std::size_t>(category_of(e.stage))] += e.duration_ns();
        spans.emplace_back(e.start_ns, e.end_ns);
    }
    for (std::size_t c = 0; c < ns.size(); ++c) out.seconds[c] = static_cast<double>(ns[c]) * 1e-9;

    std::sort(spans.begin(), spans.end());
    std::int64_t covered = 0;
    std::int64_t lo = 0, hi = 0;
    bool open = false;
    for (const auto& [s, e] : spans) {
        if (!open || s > hi) {
            if (open) covered += hi - lo;
            lo = s;
            hi = e;
            open = true;
        } else {
            hi = std::max(hi, e);
        }
    }
    if (open) covered += hi - lo;
    out.wall = static_cast<double>(covered) * 1e-9;
    out.lanes = lane_usage(events);
    out.makespan = static_cast<double>(out.lanes.makespan_ns) * 1e-9;
    return out;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

} // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        fail(ErrorKind::incompatible, "spearman needs series of equal length");
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (x.size() < 2) return nan;
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return nan;
    return sxy / std::sqrt(sxx * syy);
}

void write_error_csv(std::ostream& out, std::span<const ErrorReport> rows) {
    out << "mode,total_steps,avg_rel_error,skipped\n";
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << std::setprecision(17);
    for (const auto& r : rows) {
        out << r.mode << ',' << r.total_steps << ',' << r.avg_rel_error << ',' << r.skipped << '\n';
    }
    out.flags(flags);
    out.precision(precision);
}

void write_breakdown_csv(std::ostream& out, std::string_view mode, const Breakdown& breakdown) {
    out << "mode,category,seconds\n";
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << std::fixed << std::setprecision(9);
    for (Category c : all_categories) out << mode << ',' << to_string(c) << ',' << breakdown[c] << '\n';
    out << mode << ",wall," << breakdown.wall << '\n';
    out << mode << ",makespan," << breakdown.makespan << '\n';
    for (std::size_t l = 0; l < lane_count; ++l) {
        out << mode << ",lane" << l << "-idle," << static_cast<double>(breakdown.lanes.idle_ns[l]) * 1e-9
            << '\n';
    }
    out.flags(flags);
    out.precision(precision);
}

} // namespace stencilstream
