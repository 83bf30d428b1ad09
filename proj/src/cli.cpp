#include "stencilstream/cli.hpp"

#include "stencilstream/analysis.hpp"
#include "stencilstream/config.hpp"
#include "stencilstream/error.hpp"
#include "stencilstream/experiment.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

namespace stencilstream {

namespace {

namespace fs = std::filesystem;

struct Flags {
    std::vector<std::string> configs;
    std::string mode;
    std::string rate;
    std::string steps;
    std::string seed;
    std::string out;
    std::string capacity;
    std::string bandwidth;
    bool serial = false;
    bool allow_large = false;
};

void add_flags(CLI::App& cmd, Flags& f, bool multiple_configs) {
    auto* config = cmd.add_option("--config", f.configs, "configuration file")->required();
    if (!multiple_configs) config->expected(1);
    cmd.add_option("--mode", f.mode, "baseline | rw32 | ro32 | rw-ro-24 | custom");
    cmd.add_option("--rate", f.rate, "bits per value for compressed datasets");
    cmd.add_option("--steps", f.steps, "step grid, first:last:stride or a comma list");
    cmd.add_option("--seed", f.seed, "sampling seed");
    cmd.add_option("--out", f.out, "output directory");
    cmd.add_option("--capacity", f.capacity, "fast-tier capacity in bytes");
    cmd.add_option("--bandwidth", f.bandwidth, "synthetic transfer bandwidth in bytes/s");
    cmd.add_flag("--serial", f.serial, "use the serial executor");
    cmd.add_flag("--allow-large", f.allow_large, "permit grids above the desk-scale limit");
}

// Flags override file entries. Mode and rate apply only when with_mode is set.
RunConfig load(const std::string& path, const Flags& f, bool with_mode) {
    ConfigEntries e = read_config_file(path);
    auto put = [&](const char* key, const std::string& value) {
        if (!value.empty()) e[key] = value;
    };
    if (with_mode) {
        if (!f.mode.empty()) {
            e["mode"] = f.mode;
            // A rate in the file belongs to the file's mode.
            if (f.rate.empty()) e.erase("rate");
            if (f.mode != "custom") e.erase("compress");
        }
        put("rate", f.rate);
    }
    if (!f.steps.empty()) {
        (void)parse_step_grid(f.steps);
        e["steps"] = f.steps;
    }
    put("seed", f.seed);
    put("out", f.out);
    put("capacity", f.capacity);
    put("bandwidth", f.bandwidth);
    if (f.serial) e["executor"] = "serial";
    return to_run_config(e);
}

RunConfig as_baseline(RunConfig c) {
    c.mode = RunMode::baseline;
    c.rate.reset();
    c.compressed.clear();
    return c;
}

void gate_size(const RunConfig& c, const Flags& f) {
    if (c.cells() > large_config_cells && !f.allow_large) {
        fail(ErrorKind::usage, "grid has " + std::to_string(c.cells()) +
                                   " cells; pass --allow-large to run configurations this size");
    }
}

std::string output_dir(const RunConfig& c, const std::optional<std::string>& env_out) {
    if (!c.out_dir.empty()) return c.out_dir;
    if (env_out && !env_out->empty()) return *env_out;
    return "stencilstream-out";
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) fail(ErrorKind::io, "cannot write '" + path.string() + "'");
    return f;
}

// Called only after every computation succeeded, so failures leave no partial output.
void write_outputs(const fs::path& dir, std::string_view mode, const std::vector<ErrorReport>& rows,
                   const RunReport& report) {
    const Breakdown breakdown = breakdown_from_events(report.events);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorKind::io, "cannot create output directory '" + dir.string() + "': " + ec.message());
    {
        auto f = open_output(dir / "errors.csv");
        write_error_csv(f, rows);
    }
    {
        auto f = open_output(dir / "breakdown.csv");
        write_breakdown_csv(f, mode, breakdown);
    }
    {
        auto f = open_output(dir / "events.csv");
        write_event_csv(f, report.events);
    }
}

void summarize(std::ostream& out, std::string_view mode, const std::vector<ErrorReport>& rows,
               const RunReport& report, const fs::path& dir) {
    const Breakdown b = breakdown_from_events(report.events);
    out << "mode " << mode << ": " << report.sweeps << " sweeps, " << report.total_steps << " steps\n";
    out << "fast tier: planned " << report.planned_bytes << " bytes, peak " << report.peak_bytes << " bytes\n";
    out << "uploaded bytes:";
    for (Dataset d : all_datasets) out << " " << to_string(d) << "=" << report.uploaded[static_cast<std::size_t>(d)];
    out << "\nbounding category: " << to_string(b.bounding()) << " (wall " << std::fixed
        << std::setprecision(3) << b.wall << " s)\n";
    out << std::defaultfloat << std::setprecision(6);
    for (const auto& r : rows) {
        out << "steps " << r.total_steps << ": avg_rel_error " << r.avg_rel_error << ", skipped " << r.skipped
            << (r.flagged() ? " (flagged)" : "") << "\n";
    }
    out << "wrote " << (dir / "errors.csv").string() << ", breakdown.csv, events.csv\n";
}

std::string mode_label(const RunConfig& c) { return std::string(to_string(c.mode)); }

int cmd_run(const Flags& f, std::ostream& out, const std::optional<std::string>& env_out) {
    if (f.configs.size() != 1) fail(ErrorKind::usage, "run takes exactly one --config");
    const RunConfig c = load(f.configs[0], f, true);
    gate_size(c, f);
    const auto steps = evaluation_steps(c);
    const SampleSet samples = sample_points(c.grid, c.samples_per_plane, c.seed);
    CandidateRun cand = candidate_series(c, samples, steps);
    const StepSeries ref = c.codecs().lossless() ? cand.series : reference_series(c, samples, steps);
    const auto rows = compare_series(ref, cand.series, mode_label(c));
    const fs::path dir = output_dir(c, env_out);
    write_outputs(dir, mode_label(c), rows, cand.report);
    summarize(out, mode_label(c), rows, cand.report, dir);
    return 0;
}

int cmd_compare(const Flags& f, std::ostream& out, const std::optional<std::string>& env_out,
                bool require_grid) {
    if (f.configs.empty() || f.configs.size() > 2) {
        fail(ErrorKind::usage, "expected one or two --config files");
    }
    const RunConfig cand = load(f.configs.back(), f, true);
    const RunConfig ref = f.configs.size() == 2 ? load(f.configs[0], f, false) : as_baseline(cand);
    check_comparable(ref, cand);
    if (require_grid && cand.steps.empty()) fail(ErrorKind::usage, "step grid is empty");
    gate_size(cand, f);

    const auto steps = evaluation_steps(cand);
    const SampleSet samples = sample_points(cand.grid, cand.samples_per_plane, cand.seed);
    const StepSeries ref_series =
        ref.codecs().lossless() ? reference_series(ref, samples, steps) : candidate_series(ref, samples, steps).series;
    CandidateRun run = candidate_series(cand, samples, steps);
    const auto rows = compare_series(ref_series, run.series, mode_label(cand));
    const fs::path dir = output_dir(cand, env_out);
    write_outputs(dir, mode_label(cand), rows, run.report);
    summarize(out, mode_label(cand), rows, run.report, dir);
    return 0;
}

int cmd_plan(const Flags& f, std::ostream& out) {
    if (f.configs.size() != 1) fail(ErrorKind::usage, "plan takes exactly one --config");
    const RunConfig c = load(f.configs[0], f, true);
    const BlockMap map = build_block_map(c.grid, c.divisions, c.temporal_steps);
    const CapacityPlan plan = plan_capacity(map, c.codecs());
    out << map.describe();
    out << "codecs:";
    for (Dataset d : all_datasets) out << " " << to_string(d) << "=" << c.codecs()[d].name();
    out << "\nfast tier buffers:\n" << plan.describe();
    if (c.capacity) {
        out << "capacity " << *c.capacity << " bytes\n";
        if (plan.total() > *c.capacity) {
            fail(ErrorKind::capacity, "sweep needs " + std::to_string(plan.total()) +
                                          " bytes of fast tier, capacity is " + std::to_string(*c.capacity));
        }
    }
    return 0;
}

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const std::optional<std::string>& env_out) {
    CLI::App app{"Out-of-core stencil engine with on-the-fly fixed-rate compression", "stencilstream"};
    app.require_subcommand(1);
    Flags run_flags, compare_flags, sweep_flags, plan_flags;
    auto* run = app.add_subcommand("run", "run one configuration and write error, breakdown and event CSVs");
    add_flags(*run, run_flags, false);
    auto* compare = app.add_subcommand("compare", "compare a candidate against a reference configuration");
    add_flags(*compare, compare_flags, true);
    auto* sweep = app.add_subcommand("sweep-steps", "compare against the baseline over a step grid");
    add_flags(*sweep, sweep_flags, false);
    auto* plan = app.add_subcommand("plan", "print the block map and fast-tier capacity plan");
    add_flags(*plan, plan_flags, false);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: usage: " << one_line(e.what()) << "\n";
        return exit_code(ErrorKind::usage);
    }

    try {
        if (run->parsed()) return cmd_run(run_flags, out, env_out);
        if (compare->parsed()) return cmd_compare(compare_flags, out, env_out, false);
        if (sweep->parsed()) return cmd_compare(sweep_flags, out, env_out, true);
        return cmd_plan(plan_flags, out);
    } catch (const Error& e) {
        err << "error: " << to_string(e.kind()) << ": " << one_line(e.what()) << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << "error: internal: " << one_line(e.what()) << "\n";
        return 1;
    }
}

} // namespace stencilstream
