#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <type_traits>
#include <variant>
#include <vector>

namespace stencilstream {

// Half-open range of global plane indices along z. Plane 0 is the first
// interior plane; negative indices address the top padding.
struct PlaneRange {
    int begin = 0;
    int end = 0;

    int size() const { return end - begin; }
    bool empty() const { return end <= begin; }
    bool contains(const PlaneRange& other) const {
        return begin <= other.begin && other.end <= end;
    }
    bool operator==(const PlaneRange&) const = default;
};

struct GridSpec {
    int nx = 0;
    int ny = 0;
    int nz = 0;
    int radius = 0;

    // Throws Error(extent) on non-positive extents or index-space overflow.
    void validate() const;

    std::size_t padded_x() const { return static_cast<std::size_t>(nx + 2 * radius); }
    std::size_t padded_y() const { return static_cast<std::size_t>(ny + 2 * radius); }
    std::size_t padded_z() const { return static_cast<std::size_t>(nz + 2 * radius); }
    std::size_t plane_size() const { return padded_x() * padded_y(); }
    std::size_t plane_bytes() const { return plane_size() * sizeof(double); }
    std::size_t padded_count() const { return plane_size() * padded_z(); }

    PlaneRange padded_planes() const { return {-radius, nz + radius}; }
    PlaneRange interior_planes() const { return {0, nz}; }

    // Same x/y geometry, so planes are interchangeable.
    bool same_planes(const GridSpec& other) const {
        return nx == other.nx && ny == other.ny && radius == other.radius;
    }

    bool operator==(const GridSpec&) const = default;
};

// Non-owning view of a window of padded planes. Row-major, x fastest, z slowest.
template <typename T>
class BasicPlaneView {
  public:
    BasicPlaneView() = default;
    BasicPlaneView(const GridSpec& spec, PlaneRange window, T* data)
        : spec_(spec), window_(window), data_(data) {}

    template <typename U>
        requires std::is_convertible_v<U*, T*>
    BasicPlaneView(const BasicPlaneView<U>& other)
        : spec_(other.spec()), window_(other.window()), data_(other.data()) {}

    const GridSpec& spec() const { return spec_; }
    PlaneRange window() const { return window_; }
    T* data() const { return data_; }
    std::size_t size() const {
        return static_cast<std::size_t>(window_.size()) * spec_.plane_size();
    }

    // Linear offset of (i, j, z) in padded coordinates; i, j may be in [-radius, n+radius).
    std::size_t offset(int i, int j, int z) const {
        const auto r = spec_.radius;
        return (static_cast<std::size_t>(z - window_.begin) * spec_.padded_y() +
                static_cast<std::size_t>(j + r)) * spec_.padded_x() +
               static_cast<std::size_t>(i + r);
    }
    T& at(int i, int j, int z) const { return data_[offset(i, j, z)]; }

    std::span<T> planes(PlaneRange range) const {
        return {data_ + static_cast<std::size_t>(range.begin - window_.begin) * spec_.plane_size(),
                static_cast<std::size_t>(range.size()) * spec_.plane_size()};
    }

  private:
    GridSpec spec_{};
    PlaneRange window_{};
    T* data_ = nullptr;
};

using PlaneView = BasicPlaneView<double>;
using ConstPlaneView = BasicPlaneView<const double>;

// Owning buffer for a window of padded planes. The window can be rebound to
// any range no deeper than the capacity fixed at construction.
class Slab {
  public:
    Slab() = default;
    Slab(const GridSpec& spec, int capacity_planes);

    const GridSpec& spec() const { return spec_; }
    PlaneRange window() const { return window_; }
    int capacity_planes() const { return capacity_; }
    std::size_t bytes() const { return values_.size() * sizeof(double); }

    void set_window(PlaneRange window);
    void fill(double value);

    PlaneView view() { return {spec_, window_, values_.data()}; }
    ConstPlaneView view() const { return {spec_, window_, values_.data()}; }
    double& at(int i, int j, int z) { return view().at(i, j, z); }
    double at(int i, int j, int z) const { return view().at(i, j, z); }

  private:
    GridSpec spec_{};
    PlaneRange window_{};
    int capacity_ = 0;
    std::vector<double> values_;
};

// Full padded field.
class Volume {
  public:
    Volume() = default;
    explicit Volume(const GridSpec& spec);

    const GridSpec& spec() const { return spec_; }
    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    PlaneView view() { return {spec_, spec_.padded_planes(), values_.data()}; }
    ConstPlaneView view() const { return {spec_, spec_.padded_planes(), values_.data()}; }
    operator PlaneView() { return view(); }
    operator ConstPlaneView() const { return view(); }

    double& at(int i, int j, int z) { return view().at(i, j, z); }
    double at(int i, int j, int z) const { return view().at(i, j, z); }

  private:
    GridSpec spec_{};
    std::vector<double> values_;
};

struct ZeroInit {};

struct GaussianPulse {
    double cx = 0.0, cy = 0.0, cz = 0.0;  // interior cell coordinates
    double width = 1.0;                   // standard deviation in cells
    double amplitude = 1.0;
};

// sin(pi*fx*(i+1)/(nx+1)) * sin(pi*fy*(j+1)/(ny+1)) * sin(pi*fz*(k+1)/(nz+1));
// vanishes on the padding so it is compatible with the Dirichlet boundary.
struct SmoothSinusoid {
    double fx = 1.0, fy = 1.0, fz = 1.0;
};

using InitKind = std::variant<ZeroInit, GaussianPulse, SmoothSinusoid>;

GaussianPulse centered_pulse(const GridSpec& spec, double width, double amplitude);

Volume make_volume(const GridSpec& spec, const InitKind& init);

void copy_planes(ConstPlaneView src, PlaneRange src_range, PlaneView dst, PlaneRange dst_range);

// FNV-1a over the raw bytes of the values in range, in storage order.
std::uint64_t checksum_planes(ConstPlaneView v, PlaneRange range);

// Zeroes the x/y padding of every plane in the window, plus any global z
// padding planes the window covers.
void apply_dirichlet(PlaneView v);

} // namespace stencilstream
