#include "stencilstream/wave.hpp"

#include "stencilstream/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

namespace stencilstream {

StencilCoeffs laplacian_coeffs_8th() {
    return {-205.0 / 72.0, {8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0}};
}

double cfl_limit(const StencilCoeffs& coeffs) {
    double taps = std::fabs(coeffs.center);
    for (double c : coeffs.axial) taps += 2.0 * std::fabs(c);
    return 2.0 / std::sqrt(3.0 * taps);
}

MediumParams::MediumParams(Volume velocity, double dt, double dx, const StencilCoeffs& coeffs)
    : velocity_(std::move(velocity)), dt_(dt), dx_(dx), vmax_(0.0) {
    if (!(dt > 0.0) || !(dx > 0.0)) {
        fail(ErrorKind::stability, "time step and grid spacing must be positive");
    }
    for (double v : velocity_.values()) {
        if (!std::isfinite(v) || v < 0.0) {
            fail(ErrorKind::stability, "velocity must be finite and non-negative");
        }
        vmax_ = std::max(vmax_, v);
    }
    const double limit = cfl_limit(coeffs);
    if (courant() > limit) {
        fail(ErrorKind::stability, "CFL violated: v_max*dt/dx = " + std::to_string(courant()) +
                                       " exceeds " + std::to_string(limit));
    }
}

Volume constant_velocity(const GridSpec& spec, double velocity) {
    Volume v(spec);
    for (int z = 0; z < spec.nz; ++z)
        for (int j = 0; j < spec.ny; ++j)
            for (int i = 0; i < spec.nx; ++i) v.at(i, j, z) = velocity;
    return v;
}

Volume two_layer_velocity(const GridSpec& spec, double v_top, double v_bottom,
                          double interface_z, double transition_width, double undulation) {
    using std::numbers::pi;
    Volume v(spec);
    for (int z = 0; z < spec.nz; ++z) {
        for (int j = 0; j < spec.ny; ++j) {
            const double sy = std::sin(2.0 * pi * (j + 1) / (spec.ny + 1));
            for (int i = 0; i < spec.nx; ++i) {
                const double sx = std::sin(2.0 * pi * (i + 1) / (spec.nx + 1));
                const double depth = z - (interface_z + undulation * sx * sy);
                double blend;
                if (transition_width > 0.0) {
                    blend = 0.5 * (1.0 + std::tanh(depth / transition_width));
                } else {
                    blend = depth < 0.0 ? 0.0 : 1.0;
                }
                v.at(i, j, z) = v_top + (v_bottom - v_top) * blend;
            }
        }
    }
    return v;
}

WaveState make_wave_state(const GridSpec& spec, const InitKind& displacement) {
    WaveState state{make_volume(spec, displacement), Volume(spec), Volume(spec)};
    state.curr = state.prev;
    return state;
}

bool update_planes(PlaneView prev, ConstPlaneView curr, PlaneView scratch, ConstPlaneView velocity,
                   PlaneRange planes, const StepParams& params) {
    const auto& spec = curr.spec();
    const auto sy = static_cast<std::ptrdiff_t>(spec.padded_x());
    const auto sz = static_cast<std::ptrdiff_t>(spec.plane_size());
    const double diag = 3.0 * params.coeffs.center;
    const double a1 = params.coeffs.axial[0];
    const double a2 = params.coeffs.axial[1];
    const double a3 = params.coeffs.axial[2];
    const double a4 = params.coeffs.axial[3];
    const double inv_dx2 = 1.0 / (params.dx * params.dx);
    const double dt2 = params.dt * params.dt;

    double sentinel = 0.0;
    const int z0 = std::max(planes.begin, 0);
    const int z1 = std::min(planes.end, spec.nz);
    for (int z = z0; z < z1; ++z) {
        for (int j = 0; j < spec.ny; ++j) {
            const double* u = curr.data() + curr.offset(0, j, z);
            const double* v = velocity.data() + velocity.offset(0, j, z);
            double* up = prev.data() + prev.offset(0, j, z);
            double* lap = scratch.data() + scratch.offset(0, j, z);
            for (int i = 0; i < spec.nx; ++i) {
                const double* p = u + i;
                double acc = diag * p[0];
                acc += a1 * (((p[-1] + p[1]) + (p[-sy] + p[sy])) + (p[-sz] + p[sz]));
                acc += a2 * (((p[-2] + p[2]) + (p[-2 * sy] + p[2 * sy])) + (p[-2 * sz] + p[2 * sz]));
                acc += a3 * (((p[-3] + p[3]) + (p[-3 * sy] + p[3 * sy])) + (p[-3 * sz] + p[3 * sz]));
                acc += a4 * (((p[-4] + p[4]) + (p[-4 * sy] + p[4 * sy])) + (p[-4 * sz] + p[4 * sz]));
                lap[i] = acc * inv_dx2;
                const double next = 2.0 * p[0] - up[i] + (v[i] * v[i]) * dt2 * lap[i];
                up[i] = next;
                sentinel += next * 0.0;
            }
        }
    }
    return sentinel == 0.0;
}

void step_in_core(WaveState& state, const MediumParams& medium, const StencilCoeffs& coeffs) {
    const auto& spec = state.curr.spec();
    if (spec.radius < 4) {
        fail(ErrorKind::extent, "the 25-point stencil needs a padding radius of at least 4");
    }
    if (!update_planes(state.prev, state.curr, state.scratch, medium.velocity(),
                       spec.interior_planes(), medium.step_params(coeffs))) {
        fail(ErrorKind::stability, "non-finite value produced by the in-core step");
    }
    std::swap(state.prev, state.curr);
}

WaveSlab::WaveSlab(const GridSpec& spec, int capacity_planes)
    : prev(spec, capacity_planes), curr(spec, capacity_planes), scratch(spec, capacity_planes) {}

void WaveSlab::set_window(PlaneRange window) {
    prev.set_window(window);
    curr.set_window(window);
    scratch.set_window(window);
}

PlaneRange valid_planes(const GridSpec& spec, PlaneRange window, int step) {
    const int r = spec.radius;
    const int lo = window.begin <= -r ? -r : window.begin + r * step;
    const int hi = window.end >= spec.nz + r ? spec.nz + r : window.end - r * step;
    return {lo, hi};
}

PlaneRange compute_temporal_block(WaveSlab& slab, ConstPlaneView velocity, PlaneRange block,
                                  int steps, const StepParams& params,
                                  const std::function<void(int, WaveSlab&)>& after_step) {
    const auto& spec = slab.curr.spec();
    const int r = spec.radius;
    if (r < 4) {
        fail(ErrorKind::extent, "the 25-point stencil needs a padding radius of at least 4");
    }
    if (steps < 1) {
        fail(ErrorKind::config, "temporal block depth must be >= 1");
    }
    const int halo = r * steps;
    const PlaneRange window = slab.window();
    const PlaneRange needed{std::max(block.begin - halo, -r), std::min(block.end + halo, spec.nz + r)};
    if (window.size() < std::min(2 * halo + 1, needed.size()) || !window.contains(needed)) {
        fail(ErrorKind::extent, "working slab [" + std::to_string(window.begin) + ", " +
                                    std::to_string(window.end) + ") does not cover block +- " +
                                    std::to_string(halo) + " halo planes");
    }
    if (!velocity.window().contains(window) || !velocity.spec().same_planes(spec)) {
        fail(ErrorKind::extent, "velocity slab does not cover the working slab");
    }

    for (int s = 1; s <= steps; ++s) {
        const PlaneRange target = valid_planes(spec, window, s);
        if (!update_planes(slab.prev.view(), slab.curr.view(), slab.scratch.view(), velocity,
                           target, params)) {
            fail(ErrorKind::stability, "non-finite value in temporal block at step " +
                                           std::to_string(s));
        }
        std::swap(slab.prev, slab.curr);
        if (after_step) after_step(s, slab);
    }
    return valid_planes(spec, window, steps);
}

} // namespace stencilstream
