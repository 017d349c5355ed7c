#pragma once

#include <string>
#include <vector>

#include "gridcover/trainer.hpp"

namespace gridcover {

struct SweepRow {
    Cell start;
    int budget = 0;
    bool landed = false;
    int steps = 0;
    float coverage = 0.0f;
};

struct SweepResult {
    std::vector<SweepRow> rows;  // ordered by (start row-major, budget)
    float landing_ratio = 0.0f;
};

// Greedy rollout for the full cross product of start cells and budgets.
// jobs > 1 fans the independent rollouts out over threads; row order and
// content do not depend on the fan-out.
SweepResult landing_ratio_sweep(const nn::QNetwork& net, const MapGrid& map,
                                int budget_lo, int budget_hi,
                                const RewardParams& rewards, int jobs = 1);

struct CurvePoint {
    int budget = 0;
    float coverage = 0.0f;
};

// One greedy rollout per budget from a fixed start cell.
std::vector<CurvePoint> coverage_curve(const nn::QNetwork& net, const MapGrid& map,
                                       Cell start, int budget_lo, int budget_hi,
                                       const RewardParams& rewards);

// Count of adjacent pairs where coverage drops; reported alongside the curve
// (early landings make strict monotonicity too strong to assert).
int curve_decreasing_pairs(const std::vector<CurvePoint>& curve);

// SVG document: colored cell grid, covered cells lightened, one arrow per
// accepted move, start cell yellow, landing cell white after an accepted
// land. Identical inputs yield byte-identical output.
std::string render_trajectory_svg(const MapGrid& map,
                                  const std::vector<TrajectoryStep>& trajectory,
                                  const std::vector<std::uint8_t>& coverage,
                                  int allocated_budget);

void write_sweep_csv(const SweepResult& sweep, const std::string& path);
void write_curve_csv(const std::vector<CurvePoint>& curve, const std::string& path);

}  // namespace gridcover
