#include "stencilstream/experiment.hpp"

#include "stencilstream/error.hpp"

#include <algorithm>
#include <set>

namespace stencilstream {

namespace {

std::vector<int> sorted_steps(const std::vector<int>& steps) {
    if (steps.empty()) fail(ErrorKind::usage, "step grid is empty");
    std::set<int> unique(steps.begin(), steps.end());
    if (*unique.begin() < 0) fail(ErrorKind::usage, "step counts must be non-negative");
    return {unique.begin(), unique.end()};
}

} // namespace

std::vector<int> evaluation_steps(const RunConfig& config) {
    if (!config.steps.empty()) return config.steps;
    return {config.total_steps};
}

StepSeries reference_series(const RunConfig& config, const SampleSet& samples, const std::vector<int>& steps) {
    const auto wanted = sorted_steps(steps);
    const Problem problem = config.problem(wanted.back());
    const MediumParams medium(problem.velocity, problem.dt, problem.dx, problem.coeffs);
    WaveState state = make_wave_state(problem.grid, problem.initial);

    StepSeries series;
    int done = 0;
    for (int target : wanted) {
        while (done < target) {
            step_in_core(state, medium, problem.coeffs);
            ++done;
        }
        series.steps.push_back(target);
        series.values.push_back(sample_values(state.curr, samples));
    }
    return series;
}

CandidateRun candidate_series(const RunConfig& config, const SampleSet& samples, const std::vector<int>& steps) {
    const auto wanted = sorted_steps(steps);
    for (int s : wanted) {
        if (s % config.temporal_steps != 0) {
            fail(ErrorKind::config, "step " + std::to_string(s) + " is not a multiple of t_b (" +
                                        std::to_string(config.temporal_steps) + ")");
        }
    }
    const Problem problem = config.problem(wanted.back());

    CandidateRun out;
    auto next = wanted.begin();
    if (*next == 0) {
        // Step 0 is the initial condition as stored (possibly compressed).
        const BlockMap map = build_block_map(problem.grid, problem.divisions, problem.temporal_steps);
        const CompressedStore store(map, config.codecs(), make_wave_state(problem.grid, problem.initial),
                                    problem.velocity);
        out.series.steps.push_back(0);
        out.series.values.push_back(sample_values(store.assemble(Dataset::curr), samples));
        ++next;
    }
    out.report = run(problem, config.codecs(), config.engine_options(),
                     [&](int done, const CompressedStore& store, const SweepStats&) {
                         if (next != wanted.end() && done == *next) {
                             out.series.steps.push_back(done);
                             out.series.values.push_back(sample_values(store.assemble(Dataset::curr), samples));
                             ++next;
                         }
                     });
    return out;
}

std::vector<ErrorReport> compare_series(const StepSeries& reference, const StepSeries& candidate,
                                        std::string_view mode) {
    if (reference.steps != candidate.steps) {
        fail(ErrorKind::incompatible, "reference and candidate were sampled at different steps");
    }
    std::vector<ErrorReport> rows;
    for (std::size_t k = 0; k < reference.steps.size(); ++k) {
        ErrorReport r = relative_error(reference.values[k], candidate.values[k]);
        r.total_steps = reference.steps[k];
        r.mode = std::string(mode);
        rows.push_back(r);
    }
    return rows;
}

void check_comparable(const RunConfig& a, const RunConfig& b) {
    std::vector<std::string> diffs;
    auto same = [&](bool equal, const char* what) {
        if (!equal) diffs.emplace_back(what);
    };
    same(a.grid == b.grid, "grid");
    same(evaluation_steps(a) == evaluation_steps(b), "steps");
    same(a.seed == b.seed, "seed");
    same(a.samples_per_plane == b.samples_per_plane, "samples_per_plane");
    same(a.dx == b.dx && a.dt == b.dt, "dx/dt");
    same(a.medium == b.medium && a.velocity == b.velocity && a.v_top == b.v_top &&
             a.v_bottom == b.v_bottom && a.interface == b.interface && a.transition == b.transition &&
             a.undulation == b.undulation,
         "medium");
    same(a.pulse_width == b.pulse_width && a.pulse_amplitude == b.pulse_amplitude, "initial pulse");
    if (!diffs.empty()) {
        std::string joined;
        for (const auto& d : diffs) joined += (joined.empty() ? "" : ", ") + d;
        fail(ErrorKind::incompatible, "configs differ in " + joined);
    }
}

} // namespace stencilstream
