#pragma once

#include "stencilstream/grid.hpp"

#include <array>
#include <functional>

namespace stencilstream {

// Central-difference second derivative: center tap plus one coefficient per
// offset distance 1..4, shared by all three axes (25 points in 3D).
struct StencilCoeffs {
    double center = 0.0;
    std::array<double, 4> axial{};
};

StencilCoeffs laplacian_coeffs_8th();

// Largest stable Courant number v*dt/dx for the leapfrog update with these
// coefficients: 2 / sqrt(3 * (|c0| + 2 * sum |c_k|)).
double cfl_limit(const StencilCoeffs& coeffs);

// Scalars of the update rule.
struct StepParams {
    StencilCoeffs coeffs;
    double dt = 0.0;
    double dx = 0.0;
};

// Read-only medium. Construction rejects configurations that violate the CFL limit.
class MediumParams {
  public:
    MediumParams(Volume velocity, double dt, double dx,
                 const StencilCoeffs& coeffs = laplacian_coeffs_8th());

    const Volume& velocity() const { return velocity_; }
    double dt() const { return dt_; }
    double dx() const { return dx_; }
    double max_velocity() const { return vmax_; }
    double courant() const { return vmax_ * dt_ / dx_; }
    StepParams step_params(const StencilCoeffs& coeffs) const { return {coeffs, dt_, dx_}; }

  private:
    Volume velocity_;
    double dt_;
    double dx_;
    double vmax_;
};

Volume constant_velocity(const GridSpec& spec, double velocity);

// Two layers meeting near plane interface_z, blended by a tanh profile of the
// given width in cells (0 gives a sharp step). A nonzero undulation displaces
// the interface by undulation * sin(2 pi (i+1)/(nx+1)) * sin(2 pi (j+1)/(ny+1)) planes.
Volume two_layer_velocity(const GridSpec& spec, double v_top, double v_bottom,
                          double interface_z, double transition_width, double undulation = 0.0);

// The two read-write time levels and the write-only Laplacian buffer.
struct WaveState {
    Volume prev;
    Volume curr;
    Volume scratch;
};

// Zero initial velocity: both time levels hold the same displacement.
WaveState make_wave_state(const GridSpec& spec, const InitKind& displacement);

// Fused scratch/update pass over the interior points of `planes`:
//   scratch = lap(curr);  prev = 2*curr - prev + v^2*dt^2*scratch
// Returns false if any updated value is non-finite.
bool update_planes(PlaneView prev, ConstPlaneView curr, PlaneView scratch, ConstPlaneView velocity,
                   PlaneRange planes, const StepParams& params);

// One global step on the whole grid; rotates time levels. Throws
// Error(stability) if a non-finite value appears.
void step_in_core(WaveState& state, const MediumParams& medium, const StencilCoeffs& coeffs);

struct WaveSlab {
    Slab prev;
    Slab curr;
    Slab scratch;

    WaveSlab() = default;
    WaveSlab(const GridSpec& spec, int capacity_planes);
    void set_window(PlaneRange window);
    PlaneRange window() const { return curr.window(); }
    std::size_t bytes() const { return prev.bytes() + curr.bytes() + scratch.bytes(); }
};

// Planes of a slab that hold valid values after `step` steps of a temporal
// block; slab edges at the global padding do not shrink.
PlaneRange valid_planes(const GridSpec& spec, PlaneRange window, int step);

// Advances `block` by `steps` steps inside a slab that spans block +- radius*steps
// planes (clipped at the global padding). Planes outside the valid cone are
// left stale. `after_step` (optional) observes the slab after every step.
PlaneRange compute_temporal_block(WaveSlab& slab, ConstPlaneView velocity, PlaneRange block,
                                  int steps, const StepParams& params,
                                  const std::function<void(int, WaveSlab&)>& after_step = {});

} // namespace stencilstream
