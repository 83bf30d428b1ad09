#include "stencilstream/config.hpp"

#include "stencilstream/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace stencilstream {

namespace {

const std::vector<std::string> required_keys = {"nx", "ny", "nz", "radius", "divisions", "t_b",
                                                "total_steps"};

const std::vector<std::string> optional_keys = {
    "steps",      "mode",      "rate",       "compress",        "capacity",
    "bandwidth",  "seed",      "out",        "executor",        "dx",
    "dt",         "medium",    "velocity",   "v_top",           "v_bottom",
    "interface",  "transition", "undulation", "pulse_width",    "pulse_amplitude",
    "samples_per_plane"};

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

// Collects violations so they can be reported together.
class Checker {
  public:
    explicit Checker(const ConfigEntries& entries) : entries_(entries) {}

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    template <typename T>
    std::optional<T> number(const std::string& key) {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        const std::string& text = it->second;
        T value{};
        const auto* end = text.data() + text.size();
        std::from_chars_result res;
        if constexpr (std::is_floating_point_v<T>) {
            res = std::from_chars(text.data(), end, value, std::chars_format::general);
        } else {
            res = std::from_chars(text.data(), end, value);
        }
        if (res.ec != std::errc{} || res.ptr != end) {
            problem(key + " = '" + text + "' is not a valid number");
            return std::nullopt;
        }
        if constexpr (std::is_floating_point_v<T>) {
            if (!std::isfinite(value)) {
                problem(key + " must be finite");
                return std::nullopt;
            }
        }
        return value;
    }

    std::optional<std::string> text(const std::string& key) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    }

    void require(bool ok, const std::string& message) {
        if (!ok) problem(message);
    }
    void problem(const std::string& message) { problems_.push_back(message); }
    bool clean() const { return problems_.empty(); }

    void throw_if_any() const {
        if (problems_.empty()) return;
        std::string joined;
        for (const auto& p : problems_) {
            if (!joined.empty()) joined += "; ";
            joined += p;
        }
        fail(ErrorKind::config, joined);
    }

  private:
    const ConfigEntries& entries_;
    std::vector<std::string> problems_;
};

} // namespace

std::vector<std::string> known_config_keys() {
    std::vector<std::string> keys = required_keys;
    keys.insert(keys.end(), optional_keys.begin(), optional_keys.end());
    return keys;
}

ConfigEntries parse_config_text(std::string_view text, std::string_view origin) {
    ConfigEntries entries;
    std::istringstream in{std::string(text)};
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        const std::string body = trim(std::string_view(line).substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        const std::string where = std::string(origin) + ":" + std::to_string(number);
        if (eq == std::string::npos) {
            fail(ErrorKind::config, where + ": expected `key = value`");
        }
        std::string key = trim(std::string_view(body).substr(0, eq));
        std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty() || value.empty()) {
            fail(ErrorKind::config, where + ": empty key or value");
        }
        if (!entries.emplace(key, value).second) {
            fail(ErrorKind::config, where + ": duplicate key '" + key + "'");
        }
    }
    return entries;
}

ConfigEntries read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot read config file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str(), path);
}

std::vector<int> parse_step_grid(std::string_view text) {
    auto to_int = [&](std::string_view part) {
        const std::string t = trim(part);
        int v = 0;
        const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
        if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
            fail(ErrorKind::usage, "step grid entry '" + t + "' is not an integer");
        }
        return v;
    };
    std::vector<int> steps;
    const std::string t = trim(text);
    if (t.empty()) fail(ErrorKind::usage, "step grid is empty");
    if (t.find(':') != std::string::npos) {
        const auto a = t.find(':');
        const auto b = t.find(':', a + 1);
        if (b == std::string::npos) fail(ErrorKind::usage, "step range needs first:last:stride");
        const int first = to_int(std::string_view(t).substr(0, a));
        const int last = to_int(std::string_view(t).substr(a + 1, b - a - 1));
        const int stride = to_int(std::string_view(t).substr(b + 1));
        if (stride < 1) fail(ErrorKind::usage, "step stride must be >= 1");
        for (int s = first; s <= last; s += stride) steps.push_back(s);
    } else {
        std::string_view rest = t;
        while (true) {
            const auto comma = rest.find(',');
            steps.push_back(to_int(rest.substr(0, comma)));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
    }
    if (steps.empty()) fail(ErrorKind::usage, "step grid is empty");
    for (std::size_t k = 1; k < steps.size(); ++k) {
        if (steps[k] <= steps[k - 1]) fail(ErrorKind::usage, "step grid must be strictly increasing");
    }
    return steps;
}

RunConfig to_run_config(const ConfigEntries& entries) {
    Checker check(entries);
    const auto known = known_config_keys();
    for (const auto& [key, value] : entries) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            check.problem("unknown key '" + key + "'");
        }
    }
    for (const auto& key : required_keys) {
        if (!check.has(key)) check.problem("missing required key '" + key + "'");
    }

    RunConfig c;
    auto set_int = [&](const std::string& key, int& field) {
        if (auto v = check.number<int>(key)) field = *v;
    };
    auto set_double = [&](const std::string& key, double& field) {
        if (auto v = check.number<double>(key)) field = *v;
    };
    set_int("nx", c.grid.nx);
    set_int("ny", c.grid.ny);
    set_int("nz", c.grid.nz);
    set_int("radius", c.grid.radius);
    set_int("divisions", c.divisions);
    set_int("t_b", c.temporal_steps);
    set_int("total_steps", c.total_steps);
    set_int("samples_per_plane", c.samples_per_plane);
    if (auto v = check.number<std::uint64_t>("seed")) c.seed = *v;
    if (auto v = check.number<std::uint64_t>("capacity")) c.capacity = static_cast<std::size_t>(*v);
    if (auto v = check.number<double>("bandwidth")) c.bandwidth = *v;
    if (auto v = check.number<int>("rate")) c.rate = *v;
    set_double("dx", c.dx);
    set_double("dt", c.dt);
    set_double("velocity", c.velocity);
    set_double("v_top", c.v_top);
    set_double("v_bottom", c.v_bottom);
    set_double("interface", c.interface);
    set_double("transition", c.transition);
    set_double("undulation", c.undulation);
    set_double("pulse_width", c.pulse_width);
    set_double("pulse_amplitude", c.pulse_amplitude);
    if (auto v = check.text("out")) c.out_dir = *v;

    if (auto v = check.text("mode")) {
        if (auto m = parse_run_mode(*v)) {
            c.mode = *m;
        } else {
            check.problem("mode '" + *v + "' is not one of baseline, rw32, ro32, rw-ro-24, custom");
        }
    }
    if (auto v = check.text("compress")) {
        std::string_view rest = *v;
        while (true) {
            const auto comma = rest.find(',');
            const std::string name = trim(rest.substr(0, comma));
            if (auto d = parse_dataset(name)) {
                c.compressed.push_back(*d);
            } else {
                check.problem("compress entry '" + name + "' is not one of prev, curr, velocity");
            }
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
    }
    if (auto v = check.text("executor")) {
        if (*v == "serial") {
            c.executor = Executor::serial;
        } else if (*v == "pipelined") {
            c.executor = Executor::pipelined;
        } else {
            check.problem("executor '" + *v + "' is not one of serial, pipelined");
        }
    }
    if (auto v = check.text("medium")) {
        if (*v == "constant") {
            c.medium = MediumKind::constant;
        } else if (*v == "two-layer") {
            c.medium = MediumKind::two_layer;
        } else {
            check.problem("medium '" + *v + "' is not one of constant, two-layer");
        }
    }
    if (auto v = check.text("steps")) {
        try {
            c.steps = parse_step_grid(*v);
        } catch (const Error& e) {
            check.problem(e.what());
        }
    }

    const auto& g = c.grid;
    const bool have_grid = check.has("nx") && check.has("ny") && check.has("nz") && check.has("radius");
    if (have_grid) {
        check.require(g.nx >= 1 && g.ny >= 1 && g.nz >= 1, "nx, ny, nz must be >= 1");
        check.require(g.radius >= 4, "radius (" + std::to_string(g.radius) +
                                         ") must be >= 4 for the 25-point stencil");
    }
    if (check.has("divisions") && check.has("t_b") && have_grid) {
        check.require(c.divisions >= 1, "divisions must be >= 1");
        check.require(c.temporal_steps >= 1, "t_b must be >= 1");
        if (c.divisions >= 1 && g.nz >= 1) {
            if (g.nz % c.divisions != 0) {
                check.problem("D (" + std::to_string(c.divisions) + ") must divide nz (" +
                              std::to_string(g.nz) + ")");
            } else if (g.nz / c.divisions < 2 * g.radius * c.temporal_steps) {
                check.problem("nz/D (" + std::to_string(g.nz / c.divisions) + ") < 2·radius·t_b (" +
                              std::to_string(2 * g.radius * c.temporal_steps) + ")");
            }
        }
    }
    if (c.temporal_steps >= 1) {
        check.require(c.total_steps >= 0 && c.total_steps % c.temporal_steps == 0,
                      "t_b (" + std::to_string(c.temporal_steps) + ") must divide total_steps (" +
                          std::to_string(c.total_steps) + ")");
        for (int s : c.steps) {
            check.require(s >= 1 && s % c.temporal_steps == 0,
                          "step grid entry " + std::to_string(s) + " must be a positive multiple of t_b (" +
                              std::to_string(c.temporal_steps) + ")");
        }
    }
    check.require(c.dx > 0.0 && c.dt > 0.0, "dx and dt must be positive");
    check.require(c.velocity > 0.0 && c.v_top > 0.0 && c.v_bottom > 0.0, "velocities must be positive");
    check.require(c.transition >= 0.0, "transition must be >= 0");
    check.require(c.pulse_width >= 0.0, "pulse_width must be >= 0");
    check.require(!c.bandwidth || *c.bandwidth > 0.0, "bandwidth must be positive");
    check.require(!c.capacity || *c.capacity > 0, "capacity must be positive");
    if (have_grid && g.nx >= 1 && g.ny >= 1) {
        const auto area = static_cast<long long>(g.nx) * g.ny;
        check.require(c.samples_per_plane >= 1 && c.samples_per_plane <= area,
                      "samples_per_plane (" + std::to_string(c.samples_per_plane) +
                          ") must be in [1, nx*ny]");
    }
    if (c.rate && (*c.rate < Rate::min_bits || *c.rate > Rate::max_bits)) {
        check.problem("rate (" + std::to_string(*c.rate) + ") must be in [8, 64]");
    } else {
        try {
            (void)CodecAssignment::for_mode(c.mode, c.rate, c.compressed);
        } catch (const Error& e) {
            check.problem(e.what());
        }
    }
    check.throw_if_any();
    return c;
}

CodecAssignment RunConfig::codecs() const { return CodecAssignment::for_mode(mode, rate, compressed); }

Problem RunConfig::problem(int total) const {
    Problem p;
    p.grid = grid;
    p.divisions = divisions;
    p.temporal_steps = temporal_steps;
    p.total_steps = total;
    p.initial = centered_pulse(grid, pulse_width > 0.0 ? pulse_width : grid.nx / 8.0, pulse_amplitude);
    if (medium == MediumKind::constant) {
        p.velocity = constant_velocity(grid, velocity);
    } else {
        p.velocity = two_layer_velocity(grid, v_top, v_bottom, interface * grid.nz, transition, undulation);
    }
    p.dt = dt;
    p.dx = dx;
    return p;
}

EngineOptions RunConfig::engine_options() const {
    EngineOptions o;
    o.executor = executor;
    o.capacity = capacity;
    o.bandwidth = bandwidth;
    return o;
}

std::size_t RunConfig::cells() const {
    return static_cast<std::size_t>(grid.nx) * static_cast<std::size_t>(grid.ny) *
           static_cast<std::size_t>(grid.nz);
}

} // namespace stencilstream
