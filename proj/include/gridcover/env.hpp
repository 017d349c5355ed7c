#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "gridcover/gridmap.hpp"
#include "gridcover/rng.hpp"

namespace gridcover {

enum class Action : int { north = 0, east = 1, south = 2, west = 3, land = 4 };

inline constexpr int kNumActions = 5;
inline constexpr std::array<const char*, kNumActions> kActionNames = {
    "north", "east", "south", "west", "land"};

struct RewardParams {
    float r_cov = 1.0f;     // per target cell covered for the first time
    float r_sc = -1.0f;     // proposed action rejected
    float r_mov = -0.2f;    // every consumed movement unit
    float r_crash = -10.0f; // budget exhausted without landing
};

// Episode state. A value type: copy it to branch a rollout.
struct EnvState {
    const MapGrid* map = nullptr;
    std::vector<std::uint8_t> coverage;  // FoV-visited cells, monotone
    Cell position;
    int budget = 0;
    bool safety_flag = false;  // last action was rejected
    bool landed = false;

    bool terminal() const { return landed || budget == 0; }
};

struct StepResult {
    float reward = 0.0f;
    bool terminal = false;
    bool accepted = false;
};

// The 3x3 camera footprint clipped to the grid.
struct FovSpan {
    std::array<Cell, 9> cells;
    int count = 0;
};
FovSpan fov_cells(Cell position, int grid_size);

// Random start cell and budget drawn uniformly; the initial FoV is marked as
// covered (no coverage reward is granted for it).
EnvState reset(const MapGrid& map, int budget_lo, int budget_hi, Rng& rng);

// Deterministic variant used by evaluation rollouts.
EnvState make_state(const MapGrid& map, Cell start, int budget);

// Applies one action. Moves into no-fly or off-grid cells and landing outside
// the start/land zone are rejected: the position holds and r_sc applies.
// Every call consumes one budget unit and adds r_mov. Throws std::logic_error
// on a terminal state.
StepResult step(EnvState& state, Action action, const RewardParams& rewards);

float coverage_ratio(const EnvState& state);

// Network input: N x N x 5 spatial grid, channels interleaved per cell in the
// order start_land, target, no_fly, coverage, position one-hot; plus the
// normalized remaining budget.
struct Observation {
    int grid_size = 0;
    std::vector<float> spatial;  // (y * N + x) * 5 + channel
    float budget_scalar = 0.0f;
};
inline constexpr int kObsChannels = 5;
inline constexpr int kNoFlyChannel = 2;

Observation encode_observation(const EnvState& state, float budget_norm);

// Bit-packed observation for replay storage; unpack reproduces
// encode_observation exactly (all spatial channels are 0/1-valued).
struct PackedObs {
    std::vector<std::uint64_t> bits;  // channel-major planes of N*N bits
    float budget_scalar = 0.0f;
};

PackedObs pack_observation(const EnvState& state, float budget_norm);
void unpack_observation(const PackedObs& packed, int grid_size, float* spatial);

}  // namespace gridcover
