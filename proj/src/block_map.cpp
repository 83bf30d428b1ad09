#include "stencilstream/block_map.hpp"

#include "stencilstream/error.hpp"

#include <algorithm>
#include <sstream>

namespace stencilstream {

BlockMap build_block_map(const GridSpec& spec, int divisions, int temporal_steps) {
    spec.validate();
    if (divisions < 1) fail(ErrorKind::config, "divisions must be >= 1");
    if (temporal_steps < 1) fail(ErrorKind::config, "temporal block steps must be >= 1");
    if (spec.nz % divisions != 0) {
        fail(ErrorKind::config, "divisions (" + std::to_string(divisions) +
                                    ") must divide nz (" + std::to_string(spec.nz) + ")");
    }
    const int depth = spec.nz / divisions;
    const int halo = spec.radius * temporal_steps;
    if (depth < 2 * halo) {
        fail(ErrorKind::config, "nz/D (" + std::to_string(depth) + ") < 2·radius·t_b (" +
                                    std::to_string(2 * halo) + ")");
    }
    BlockMap map;
    map.spec_ = spec;
    map.divisions_ = divisions;
    map.temporal_steps_ = temporal_steps;
    return map;
}

PlaneRange BlockMap::block(int i) const {
    const int p = plane_depth();
    return {i * p, (i + 1) * p};
}

PlaneRange BlockMap::remainder(int i) const {
    const int p = plane_depth();
    const int h = halo_depth();
    const int begin = i == 0 ? -spec_.radius : i * p + h;
    const int end = i == divisions_ - 1 ? spec_.nz + spec_.radius : (i + 1) * p - h;
    return {begin, end};
}

PlaneRange BlockMap::common(int i) const {
    const int p = plane_depth();
    const int h = halo_depth();
    return {(i + 1) * p - h, (i + 1) * p + h};
}

PlaneRange BlockMap::working_set(int i) const {
    const PlaneRange r = remainder(i);
    return {i > 0 ? common(i - 1).begin : r.begin, i < divisions_ - 1 ? common(i).end : r.end};
}

int BlockMap::max_working_planes() const {
    int planes = 0;
    for (int i = 0; i < divisions_; ++i) planes = std::max(planes, working_set(i).size());
    return planes;
}

int BlockMap::max_remainder_planes() const {
    int planes = 0;
    for (int i = 0; i < divisions_; ++i) planes = std::max(planes, remainder(i).size());
    return planes;
}

std::string BlockMap::describe() const {
    std::ostringstream out;
    out << "grid " << spec_.nx << "x" << spec_.ny << "x" << spec_.nz << " radius " << spec_.radius
        << "\n";
    out << "divisions " << divisions_ << "  plane_depth " << plane_depth() << "  t_b "
        << temporal_steps_ << "  halo_depth " << halo_depth() << "\n";
    for (int i = 0; i < divisions_; ++i) {
        const auto r = remainder(i);
        const auto w = working_set(i);
        out << "block " << i << "  R [" << r.begin << ", " << r.end << ") depth " << r.size()
            << "  working [" << w.begin << ", " << w.end << ")";
        if (i < divisions_ - 1) {
            const auto c = common(i);
            out << "  C [" << c.begin << ", " << c.end << ") depth " << c.size();
        }
        out << "\n";
    }
    return out.str();
}

} // namespace stencilstream
