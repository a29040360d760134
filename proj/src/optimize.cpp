#include "tsmeta/optimize.hpp"

#include "tsmeta/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tsmeta {

namespace {

void project(std::vector<double>& x, const Box& box) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = std::clamp(x[i], box.lower[i], box.upper[i]);
    }
}

double safe_eval(const Objective& f, const std::vector<double>& x, int& counter) {
    ++counter;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

} // namespace

OptimumPoint nelder_mead(const Objective& f, std::vector<double> start, const Box& box,
                         const NelderMeadOptions& options) {
    const std::size_t dim = start.size();
    project(start, box);
    int evals = 0;

    std::vector<std::vector<double>> simplex(dim + 1, start);
    std::vector<double> values(dim + 1);
    values[0] = safe_eval(f, start, evals);
    for (std::size_t i = 0; i < dim; ++i) {
        const double width = box.upper[i] - box.lower[i];
        double step = options.initial_step * width;
        // step away from the nearer bound so the vertex stays distinct
        if (start[i] + step > box.upper[i]) {
            step = -step;
        }
        simplex[i + 1][i] += step;
        project(simplex[i + 1], box);
        values[i + 1] = safe_eval(f, simplex[i + 1], evals);
    }

    std::vector<std::size_t> order(dim + 1);
    std::vector<double> centroid(dim), trial(dim), trial2(dim);
    while (evals < options.max_evaluations) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[dim > 0 ? dim - 1 : 0];

        const double spread = std::abs(values[worst] - values[best]);
        const double scale = std::abs(values[best]) + std::abs(values[worst]) + 1e-300;
        if (std::isfinite(values[worst]) && 2.0 * spread <= options.tolerance * scale) {
            break;
        }
        double diameter = 0.0;
        for (std::size_t v = 0; v <= dim; ++v) {
            for (std::size_t i = 0; i < dim; ++i) {
                const double width = box.upper[i] - box.lower[i];
                const double d = std::abs(simplex[v][i] - simplex[best][i]);
                diameter = std::max(diameter, width > 0 ? d / width : d);
            }
        }
        if (diameter < 1e-12) {
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t v = 0; v <= dim; ++v) {
            if (v == worst) {
                continue;
            }
            for (std::size_t i = 0; i < dim; ++i) {
                centroid[i] += simplex[v][i] / static_cast<double>(dim);
            }
        }

        auto point = [&](double coef, std::vector<double>& out) {
            for (std::size_t i = 0; i < dim; ++i) {
                out[i] = centroid[i] + coef * (simplex[worst][i] - centroid[i]);
            }
            project(out, box);
            return safe_eval(f, out, evals);
        };

        const double reflected = point(-1.0, trial);
        if (reflected < values[best]) {
            const double expanded = point(-2.0, trial2);
            if (expanded < reflected) {
                simplex[worst] = trial2;
                values[worst] = expanded;
            } else {
                simplex[worst] = trial;
                values[worst] = reflected;
            }
            continue;
        }
        if (reflected < values[second]) {
            simplex[worst] = trial;
            values[worst] = reflected;
            continue;
        }
        const bool outside = reflected < values[worst];
        const double contracted = point(outside ? -0.5 : 0.5, trial2);
        if (contracted < (outside ? reflected : values[worst])) {
            simplex[worst] = trial2;
            values[worst] = contracted;
            continue;
        }
        // shrink toward the best vertex
        for (std::size_t v = 0; v <= dim; ++v) {
            if (v == best) {
                continue;
            }
            for (std::size_t i = 0; i < dim; ++i) {
                simplex[v][i] = simplex[best][i] + 0.5 * (simplex[v][i] - simplex[best][i]);
            }
            values[v] = safe_eval(f, simplex[v], evals);
        }
    }

    const auto best_it = std::min_element(values.begin(), values.end());
    const auto best_index = static_cast<std::size_t>(best_it - values.begin());
    return {simplex[best_index], *best_it, evals};
}

OptimumPoint minimize_with_restarts(const Objective& f, const std::vector<double>& start,
                                    const Box& box, int restarts, std::uint64_t seed,
                                    const NelderMeadOptions& options) {
    OptimumPoint best = nelder_mead(f, start, box, options);
    Rng rng(seed);
    for (int r = 0; r < restarts; ++r) {
        std::vector<double> x(start.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = box.lower[i] + uniform01(rng) * (box.upper[i] - box.lower[i]);
        }
        OptimumPoint candidate = nelder_mead(f, std::move(x), box, options);
        if (candidate.value < best.value) {
            candidate.evaluations += best.evaluations;
            best = std::move(candidate);
        } else {
            best.evaluations += candidate.evaluations;
        }
    }
    return best;
}

} // namespace tsmeta
