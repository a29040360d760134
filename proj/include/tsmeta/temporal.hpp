#pragma once

#include "tsmeta/forecasters.hpp"

#include <span>
#include <vector>

namespace tsmeta {

/// Non-overlapping k-step aggregates (means or sums). The n mod k oldest
/// observations are dropped so the last bucket ends at the last observation.
std::vector<double> temporal_aggregate(std::span<const double> y, int k, bool mean);

/// Seasonal period seen at aggregation level k: s/k when that is an integer
/// greater than one, otherwise 1.
int aggregated_period(int seasonal_period, int k);

/// Multiple aggregation: select_ets_auto at levels 1..max_level, components
/// translated back to the original frequency and averaged.
Forecast forecast_mapa(const TimeSeries& ts, int h, int max_level = 7,
                       const ForecasterConfig& config = {});

/// Structural-scaling reconciliation of one stacked forecast vector:
/// bottom = (S' L^-1 S)^-1 S' L^-1 y with L = diag(lambda). S is given by rows.
std::vector<double> reconcile_structural(const std::vector<std::vector<double>>& summing,
                                         std::span<const double> lambda,
                                         std::span<const double> stacked);

/// Intermediate results of a THieF run, per hierarchy level (largest
/// aggregation first). Each level vector covers all forecast cycles.
struct ThiefDetail {
    std::vector<int> levels;
    std::vector<std::vector<double>> base;
    std::vector<std::vector<double>> reconciled;
    std::vector<double> bottom;  // reconciled bottom level, full cycles
};

/// Temporal hierarchy over the divisors of the seasonal period, theta at
/// every level, structural-scaling reconciliation per cycle.
ThiefDetail thief_detail(const TimeSeries& ts, int h, const ForecasterConfig& config = {});

Forecast forecast_thief(const TimeSeries& ts, int h, const ForecasterConfig& config = {});

} // namespace tsmeta
