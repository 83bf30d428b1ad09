#include "stencilstream/grid.hpp"

#include "stencilstream/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <string>

namespace stencilstream {

namespace {

void check_range(ConstPlaneView v, PlaneRange range, const char* what) {
    if (range.empty() || !v.window().contains(range)) {
        fail(ErrorKind::extent, std::string(what) + " plane range [" + std::to_string(range.begin) +
                                    ", " + std::to_string(range.end) + ") outside window [" +
                                    std::to_string(v.window().begin) + ", " +
                                    std::to_string(v.window().end) + ")");
    }
}

} // namespace

void GridSpec::validate() const {
    if (nx < 1 || ny < 1 || nz < 1) {
        fail(ErrorKind::extent, "grid extents must be >= 1");
    }
    if (radius < 1) {
        fail(ErrorKind::extent, "stencil radius must be >= 1");
    }
    constexpr auto int_max = std::numeric_limits<int>::max();
    if (nx > int_max - 2 * radius || ny > int_max - 2 * radius || nz > int_max - 2 * radius) {
        fail(ErrorKind::extent, "padded extent overflows the index type");
    }
    constexpr auto limit = std::numeric_limits<std::size_t>::max() / sizeof(double);
    std::size_t count = padded_x();
    for (std::size_t n : {padded_y(), padded_z()}) {
        if (count > limit / n) {
            fail(ErrorKind::extent, "padded volume exceeds the addressable index space");
        }
        count *= n;
    }
}

Slab::Slab(const GridSpec& spec, int capacity_planes)
    : spec_(spec), window_{0, capacity_planes}, capacity_(capacity_planes) {
    spec_.validate();
    if (capacity_planes < 1) {
        fail(ErrorKind::extent, "slab capacity must be at least one plane");
    }
    values_.assign(static_cast<std::size_t>(capacity_planes) * spec_.plane_size(), 0.0);
}

void Slab::set_window(PlaneRange window) {
    if (window.empty() || window.size() > capacity_) {
        fail(ErrorKind::extent, "slab window of " + std::to_string(window.size()) +
                                    " planes exceeds capacity " + std::to_string(capacity_));
    }
    window_ = window;
}

void Slab::fill(double value) { std::fill(values_.begin(), values_.end(), value); }

Volume::Volume(const GridSpec& spec) : spec_(spec) {
    spec_.validate();
    values_.assign(spec_.padded_count(), 0.0);
}

GaussianPulse centered_pulse(const GridSpec& spec, double width, double amplitude) {
    return {static_cast<double>(spec.nx / 2), static_cast<double>(spec.ny / 2),
            static_cast<double>(spec.nz / 2), width, amplitude};
}

Volume make_volume(const GridSpec& spec, const InitKind& init) {
    Volume v(spec);
    auto fill_interior = [&](auto&& f) {
        for (int z = 0; z < spec.nz; ++z) {
            for (int j = 0; j < spec.ny; ++j) {
                for (int i = 0; i < spec.nx; ++i) {
                    v.at(i, j, z) = f(i, j, z);
                }
            }
        }
    };

    if (const auto* g = std::get_if<GaussianPulse>(&init)) {
        if (!(g->width > 0.0) || !std::isfinite(g->amplitude)) {
            fail(ErrorKind::config, "gaussian pulse needs width > 0 and a finite amplitude");
        }
        const double inv = 1.0 / (2.0 * g->width * g->width);
        fill_interior([&](int i, int j, int z) {
            const double dx = i - g->cx;
            const double dy = j - g->cy;
            const double dz = z - g->cz;
            return g->amplitude * std::exp(-(dx * dx + dy * dy + dz * dz) * inv);
        });
    } else if (const auto* s = std::get_if<SmoothSinusoid>(&init)) {
        using std::numbers::pi;
        fill_interior([&](int i, int j, int z) {
            return std::sin(pi * s->fx * (i + 1) / (spec.nx + 1)) *
                   std::sin(pi * s->fy * (j + 1) / (spec.ny + 1)) *
                   std::sin(pi * s->fz * (z + 1) / (spec.nz + 1));
        });
    }
    return v;
}

void copy_planes(ConstPlaneView src, PlaneRange src_range, PlaneView dst, PlaneRange dst_range) {
    if (!src.spec().same_planes(dst.spec())) {
        fail(ErrorKind::extent, "copy_planes: volumes differ in x/y extents");
    }
    if (src_range.size() != dst_range.size()) {
        fail(ErrorKind::extent, "copy_planes: range lengths differ");
    }
    check_range(src, src_range, "source");
    check_range(dst, dst_range, "destination");
    auto from = src.planes(src_range);
    auto to = dst.planes(dst_range);
    std::memmove(to.data(), from.data(), from.size_bytes());
}

std::uint64_t checksum_planes(ConstPlaneView v, PlaneRange range) {
    check_range(v, range, "checksum");
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (double value : v.planes(range)) {
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &value, sizeof(double));
        for (unsigned char b : bytes) {
            hash ^= b;
            hash *= 0x100000001b3ULL;
        }
    }
    return hash;
}

void apply_dirichlet(PlaneView v) {
    const auto& spec = v.spec();
    const auto window = v.window();
    const int r = spec.radius;
    for (int z = window.begin; z < window.end; ++z) {
        auto plane = v.planes({z, z + 1});
        if (z < 0 || z >= spec.nz) {
            std::fill(plane.begin(), plane.end(), 0.0);
            continue;
        }
        const std::size_t px = spec.padded_x();
        for (int j = -r; j < spec.ny + r; ++j) {
            double* row = plane.data() + static_cast<std::size_t>(j + r) * px;
            if (j < 0 || j >= spec.ny) {
                std::fill(row, row + px, 0.0);
            } else {
                std::fill(row, row + r, 0.0);
                std::fill(row + r + spec.nx, row + px, 0.0);
            }
        }
    }
}

} // namespace stencilstream
