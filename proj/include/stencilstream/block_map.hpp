#pragma once

#include "stencilstream/grid.hpp"

#include <string>
#include <vector>

namespace stencilstream {

// Partition of the padded z axis into per-block remainders R_i and shared
// common regions C_i that straddle the boundary between blocks i and i+1.
//
//   R_i = [iP + h, (i+1)P - h)      R_0 starts at -radius, R_{D-1} ends at nz + radius
//   C_i = [(i+1)P - h, (i+1)P + h)  for i in [0, D-2]
//
// with P = nz / D and h = radius * t_b.
class BlockMap {
  public:
    const GridSpec& spec() const { return spec_; }
    int divisions() const { return divisions_; }
    int temporal_steps() const { return temporal_steps_; }
    int plane_depth() const { return spec_.nz / divisions_; }
    int halo_depth() const { return spec_.radius * temporal_steps_; }

    PlaneRange block(int i) const;        // [iP, (i+1)P)
    PlaneRange remainder(int i) const;    // R_i
    PlaneRange common(int i) const;       // C_i, i in [0, D-2]
    PlaneRange working_set(int i) const;  // C_{i-1} u R_i u C_i
    int common_count() const { return divisions_ - 1; }
    int max_working_planes() const;
    int max_remainder_planes() const;

    // Plain-text dump for the planning report.
    std::string describe() const;

  private:
    friend BlockMap build_block_map(const GridSpec&, int, int);

    GridSpec spec_{};
    int divisions_ = 1;
    int temporal_steps_ = 1;
};

// Throws Error(config) naming the violated constraint if D does not divide nz
// or nz / D < 2 * radius * t_b.
BlockMap build_block_map(const GridSpec& spec, int divisions, int temporal_steps);

} // namespace stencilstream
