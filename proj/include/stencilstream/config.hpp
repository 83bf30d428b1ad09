#pragma once

#include "stencilstream/engine.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stencilstream {

enum class MediumKind { constant, two_layer };

struct RunConfig {
    GridSpec grid;
    int divisions = 0;
    int temporal_steps = 0;
    int total_steps = 0;
    std::vector<int> steps;  // step grid for sweep-steps; empty means total_steps only

    RunMode mode = RunMode::baseline;
    std::optional<int> rate;
    std::vector<Dataset> compressed;  // mode custom only

    std::optional<std::size_t> capacity;
    std::optional<double> bandwidth;
    std::uint64_t seed = 1;
    std::string out_dir;
    Executor executor = Executor::pipelined;

    double dx = 10.0;
    double dt = 1e-3;
    MediumKind medium = MediumKind::constant;
    double velocity = 1500.0;
    double v_top = 1500.0;
    double v_bottom = 2500.0;
    double interface = 0.6;   // fraction of nz
    double transition = 4.0;  // cells
    double undulation = 0.0;  // cells
    double pulse_width = 0.0; // cells; 0 means nx / 8
    double pulse_amplitude = 1.0;
    int samples_per_plane = 100;

    CodecAssignment codecs() const;
    Problem problem(int total) const;
    EngineOptions engine_options() const;
    std::size_t cells() const;
};

// Raw `key = value` pairs keyed by name.
using ConfigEntries = std::map<std::string, std::string>;

// Flat format: one `key = value` per line, `#` starts a comment, blank lines
// ignored. Throws Error(config) on malformed lines or duplicate keys.
ConfigEntries parse_config_text(std::string_view text, std::string_view origin = "config");
ConfigEntries read_config_file(const std::string& path);

// Converts and validates. Every violation is collected and reported in one
// Error(config), each naming the violated constraint.
RunConfig to_run_config(const ConfigEntries& entries);

// Step grid syntax: `first:last:stride` or a comma-separated list.
std::vector<int> parse_step_grid(std::string_view text);

std::vector<std::string> known_config_keys();

} // namespace stencilstream
