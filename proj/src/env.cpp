#include "gridcover/env.hpp"

#include <stdexcept>

namespace gridcover {

FovSpan fov_cells(Cell position, int grid_size) {
    FovSpan span;
    for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
            const Cell c{position.row + dr, position.col + dc};
            if (c.row < 0 || c.row >= grid_size || c.col < 0 || c.col >= grid_size)
                continue;
            span.cells[span.count++] = c;
        }
    }
    return span;
}

namespace {

// Marks the FoV at `pos`; returns how many target cells became covered.
int mark_fov(EnvState& state, Cell pos) {
    const FovSpan span = fov_cells(pos, state.map->size);
    int new_targets = 0;
    for (int i = 0; i < span.count; ++i) {
        const std::size_t idx = state.map->index(span.cells[i]);
        if (!state.coverage[idx]) {
            state.coverage[idx] = 1;
            if (state.map->target[idx]) ++new_targets;
        }
    }
    return new_targets;
}

}  // namespace

EnvState reset(const MapGrid& map, int budget_lo, int budget_hi, Rng& rng) {
    if (budget_lo < 1 || budget_hi < budget_lo)
        throw std::runtime_error("reset: empty or invalid budget range");
    const std::vector<Cell> starts = map.start_cells();
    if (starts.empty()) throw std::runtime_error("reset: map has no start cells");

    EnvState state;
    state.map = &map;
    state.coverage.assign(static_cast<std::size_t>(map.size) * map.size, 0);
    state.position = starts[uniform_index(rng, static_cast<std::uint32_t>(starts.size()))];
    state.budget = uniform_int(rng, budget_lo, budget_hi);
    state.safety_flag = false;
    state.landed = false;
    mark_fov(state, state.position);
    return state;
}

EnvState make_state(const MapGrid& map, Cell start, int budget) {
    if (!map.in_bounds(start) || !map.is_start_land(start))
        throw std::runtime_error("make_state: start cell is not a start/land cell");
    if (budget < 1) throw std::runtime_error("make_state: budget must be >= 1");
    EnvState state;
    state.map = &map;
    state.coverage.assign(static_cast<std::size_t>(map.size) * map.size, 0);
    state.position = start;
    state.budget = budget;
    mark_fov(state, state.position);
    return state;
}

StepResult step(EnvState& state, Action action, const RewardParams& rewards) {
    if (state.landed) throw std::logic_error("step: episode already landed");
    if (state.budget <= 0) throw std::logic_error("step: no movement budget left");

    StepResult result;
    result.reward = rewards.r_mov;

    if (action == Action::land) {
        if (state.map->is_start_land(state.position)) {
            state.landed = true;
            state.safety_flag = false;
            result.accepted = true;
        }
    } else {
        static constexpr int kDr[4] = {-1, 0, 1, 0};
        static constexpr int kDc[4] = {0, 1, 0, -1};
        const int a = static_cast<int>(action);
        const Cell dest{state.position.row + kDr[a], state.position.col + kDc[a]};
        if (state.map->in_bounds(dest) && !state.map->is_no_fly(dest)) {
            state.position = dest;
            state.safety_flag = false;
            result.accepted = true;
            const int new_targets = mark_fov(state, dest);
            result.reward += rewards.r_cov * static_cast<float>(new_targets);
        }
    }
    if (!result.accepted) {
        state.safety_flag = true;
        result.reward += rewards.r_sc;
    }

    state.budget -= 1;
    if (state.budget == 0 && !state.landed) result.reward += rewards.r_crash;
    result.terminal = state.terminal();
    return result;
}

float coverage_ratio(const EnvState& state) {
    int total = 0, covered = 0;
    const std::size_t n = state.coverage.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (state.map->target[i]) {
            ++total;
            if (state.coverage[i]) ++covered;
        }
    }
    if (total == 0) return 1.0f;
    return static_cast<float>(covered) / static_cast<float>(total);
}

Observation encode_observation(const EnvState& state, float budget_norm) {
    const int n = state.map->size;
    Observation obs;
    obs.grid_size = n;
    obs.spatial.assign(static_cast<std::size_t>(n) * n * kObsChannels, 0.0f);
    const MapGrid& m = *state.map;
    for (std::size_t i = 0; i < static_cast<std::size_t>(n) * n; ++i) {
        float* cell = obs.spatial.data() + i * kObsChannels;
        cell[0] = m.start_land[i] ? 1.0f : 0.0f;
        cell[1] = m.target[i] ? 1.0f : 0.0f;
        cell[2] = m.no_fly[i] ? 1.0f : 0.0f;
        cell[3] = state.coverage[i] ? 1.0f : 0.0f;
    }
    obs.spatial[m.index(state.position) * kObsChannels + 4] = 1.0f;
    obs.budget_scalar = static_cast<float>(state.budget) / budget_norm;
    return obs;
}

PackedObs pack_observation(const EnvState& state, float budget_norm) {
    const int n = state.map->size;
    const std::size_t cells = static_cast<std::size_t>(n) * n;
    const std::size_t words_per_plane = (cells + 63) / 64;
    PackedObs packed;
    packed.bits.assign(words_per_plane * kObsChannels, 0);
    const MapGrid& m = *state.map;
    auto set_bit = [&](int channel, std::size_t i) {
        const std::size_t bit = static_cast<std::size_t>(channel) * words_per_plane * 64 + i;
        packed.bits[bit / 64] |= std::uint64_t{1} << (bit % 64);
    };
    for (std::size_t i = 0; i < cells; ++i) {
        if (m.start_land[i]) set_bit(0, i);
        if (m.target[i]) set_bit(1, i);
        if (m.no_fly[i]) set_bit(2, i);
        if (state.coverage[i]) set_bit(3, i);
    }
    set_bit(4, m.index(state.position));
    packed.budget_scalar = static_cast<float>(state.budget) / budget_norm;
    return packed;
}

void unpack_observation(const PackedObs& packed, int grid_size, float* spatial) {
    const std::size_t cells = static_cast<std::size_t>(grid_size) * grid_size;
    const std::size_t words_per_plane = (cells + 63) / 64;
    for (int ch = 0; ch < kObsChannels; ++ch) {
        const std::uint64_t* plane =
            packed.bits.data() + static_cast<std::size_t>(ch) * words_per_plane;
        for (std::size_t i = 0; i < cells; ++i) {
            const bool on = (plane[i / 64] >> (i % 64)) & 1;
            spatial[i * kObsChannels + ch] = on ? 1.0f : 0.0f;
        }
    }
}

}  // namespace gridcover
