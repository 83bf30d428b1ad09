#pragma once

#include "stencilstream/analysis.hpp"
#include "stencilstream/config.hpp"
#include "stencilstream/engine.hpp"

#include <vector>

namespace stencilstream {

// Sampled current-time-level values at each requested step count.
struct StepSeries {
    std::vector<int> steps;
    std::vector<std::vector<double>> values;
};

// In-core reference solver (bit-identical to the lossless out-of-core run).
StepSeries reference_series(const RunConfig& config, const SampleSet& samples, const std::vector<int>& steps);

struct CandidateRun {
    StepSeries series;
    RunReport report;
};

// Out-of-core run of the config's mode up to the largest step, sampled at
// every requested step.
CandidateRun candidate_series(const RunConfig& config, const SampleSet& samples, const std::vector<int>& steps);

std::vector<ErrorReport> compare_series(const StepSeries& reference, const StepSeries& candidate,
                                        std::string_view mode);

// Throws Error(incompatible) unless both configs simulate the same problem
// and sample it the same way. Decomposition, codecs and execution may differ.
void check_comparable(const RunConfig& reference, const RunConfig& candidate);

// Steps to evaluate: the step grid if given, else total_steps.
std::vector<int> evaluation_steps(const RunConfig& config);

} // namespace stencilstream
