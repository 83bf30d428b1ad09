#pragma once

#include "stencilstream/grid.hpp"
#include "stencilstream/pipeline.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stencilstream {

// SplitMix64 (Steele, Lea, Flood 2014). One independent stream per plane is
// obtained with split(), so sampling a plane never depends on other planes.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();
    // Uniform in [0, bound) without modulo bias; bound >= 1.
    std::uint64_t below(std::uint64_t bound);
    SplitMix64 split(std::uint64_t stream) const;

  private:
    std::uint64_t state_;
};

struct SamplePoint {
    int x = 0, y = 0, z = 0;
    bool operator==(const SamplePoint&) const = default;
};

struct SampleSet {
    int points_per_plane = 0;
    std::uint64_t seed = 0;
    std::vector<SamplePoint> points;
};

// points_per_plane distinct interior (x, y) positions on every interior plane.
// Throws Error(config) if points_per_plane exceeds nx * ny.
SampleSet sample_points(const GridSpec& spec, int points_per_plane, std::uint64_t seed);

constexpr double near_zero_reference = 1e-30;

struct ErrorReport {
    int total_steps = 0;
    std::string mode;
    double avg_rel_error = 0.0;
    std::size_t skipped = 0;
    std::size_t samples = 0;

    // Set when 1% or more of the samples had a near-zero reference.
    bool flagged() const { return samples > 0 && skipped * 100 >= samples; }
};

// Mean of |a - b| / |b| over the samples, with b the reference; samples with
// |b| < near_zero_reference are skipped and counted.
ErrorReport relative_error(ConstPlaneView reference, ConstPlaneView candidate, const SampleSet& samples);
// Same metric over values already gathered at the sample points.
ErrorReport relative_error(std::span<const double> reference, std::span<const double> candidate);

std::vector<double> sample_values(ConstPlaneView v, const SampleSet& samples);

enum class Category { upload, download, compute, compress, decompress };

constexpr std::array<Category, 5> all_categories = {Category::upload, Category::download,
                                                    Category::compute, Category::compress,
                                                    Category::decompress};

std::string_view to_string(Category c);
Category category_of(Stage stage);

struct Breakdown {
    std::array<double, 5> seconds{};  // indexed by Category
    double wall = 0.0;                // length of the union of busy intervals
    double makespan = 0.0;            // first start to last end
    LaneUsage lanes;

    double operator[](Category c) const { return seconds[static_cast<std::size_t>(c)]; }
    double sum() const;
    Category bounding() const;
};

// Audits the log first (Error(schedule) on overlap within a lane).
Breakdown breakdown_from_events(std::span<const StageEvent> events);

// Rank correlation with average ranks for ties; NaN if either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

void write_error_csv(std::ostream& out, std::span<const ErrorReport> rows);
void write_breakdown_csv(std::ostream& out, std::string_view mode, const Breakdown& breakdown);

} // namespace stencilstream
