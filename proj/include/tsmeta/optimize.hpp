#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace tsmeta {

struct Box {
    std::vector<double> lower;
    std::vector<double> upper;
};

struct NelderMeadOptions {
    int max_evaluations = 2000;
    double tolerance = 1e-10;   // relative spread of simplex values
    double initial_step = 0.1;  // as a fraction of each box width
};

struct OptimumPoint {
    std::vector<double> x;
    double value = 0.0;
    int evaluations = 0;
};

using Objective = std::function<double(const std::vector<double>&)>;

/// Nelder-Mead restricted to a box by projecting every trial point onto it.
/// Non-finite objective values are treated as +infinity.
OptimumPoint nelder_mead(const Objective& f, std::vector<double> start, const Box& box,
                         const NelderMeadOptions& options = {});

/// Runs nelder_mead from `start` and then from `restarts` uniformly drawn
/// points of the box; returns the best result (earliest on ties).
OptimumPoint minimize_with_restarts(const Objective& f, const std::vector<double>& start,
                                    const Box& box, int restarts, std::uint64_t seed,
                                    const NelderMeadOptions& options = {});

} // namespace tsmeta
