#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridcover/agent.hpp"

namespace gridcover {

struct TrainConfig {
    std::string map_path;
    int episodes = 10000;  // N_max
    int budget_lo = 25;
    int budget_hi = 75;
    std::size_t replay_capacity = 50000;
    int batch_size = 128;
    float gamma = 0.95f;
    float tau = 0.005f;
    float beta = 0.1f;
    nn::AdamParams adam;
    RewardParams rewards;
    unsigned seed = 1;
    int eval_every = 50;  // greedy evaluation cadence in episodes; 0 disables
    int warmup = 128;     // stored experiences required before updates
    nn::NetworkArch arch; // grid_size and budget_norm are derived at train time
};

struct EpisodeRecord {
    int episode = 0;
    float episode_return = 0.0f;
    int steps = 0;
    bool landed = false;
    float coverage = 0.0f;
};

struct EvalRecord {
    int episode = 0;
    float greedy_return = 0.0f;
};

struct TrainLog {
    std::vector<EpisodeRecord> episodes;
    std::vector<EvalRecord> evals;
};

struct TrainResult {
    nn::QNetwork net;
    TrainLog log;
};

// Raised when the TD loss blows up or turns non-finite.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using ProgressFn = std::function<void(const EpisodeRecord&, const EvalRecord&)>;

// Full training loop: per environment step one soft-max action, one stored
// experience, and (once the warmup count is reached) one minibatch update of
// the primary network followed by a soft update of the target network.
// Deterministic for a fixed (seed, config, map).
TrainResult train(const MapGrid& map, const TrainConfig& config,
                  const ProgressFn& progress = nullptr);

struct TrajectoryStep {
    Cell position;  // before the action
    Action action;
    bool accepted;
};

struct EvalResult {
    float total_reward = 0.0f;
    std::vector<TrajectoryStep> trajectory;
    bool landed = false;
    float coverage = 0.0f;
    EnvState final_state;
};

// Deterministic greedy rollout from a fixed start cell and budget.
EvalResult evaluate_greedy(const nn::QNetwork& net, const MapGrid& map, Cell start,
                           int budget, const RewardParams& rewards,
                           nn::Workspace& ws);

void write_episode_csv(const TrainLog& log, const std::string& path);
void write_eval_csv(const TrainLog& log, const std::string& path);

}  // namespace gridcover
