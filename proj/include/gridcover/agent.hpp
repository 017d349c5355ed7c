#pragma once

#include <array>
#include <span>
#include <vector>

#include "gridcover/nn.hpp"
#include "gridcover/replay.hpp"

// Double-DQN decision logic: the primary network selects the next action,
// the target network values it.

namespace gridcover {

struct AgentParams {
    float gamma = 0.95f;  // discount
    float beta = 0.1f;    // soft-max temperature
};

// Argmax over Q-values; ties break toward the lowest action index.
Action greedy_action(const nn::QNetwork& net, const Observation& obs,
                     nn::Workspace& ws);

// Boltzmann probabilities exp(q_i/beta) normalized, computed with
// max-subtraction so large magnitudes cannot overflow.
std::array<double, kNumActions> softmax_probs(std::span<const float> q, double beta);

Action softmax_policy(const nn::QNetwork& net, const Observation& obs, double beta,
                      Rng& rng, nn::Workspace& ws);

// Assembled minibatch in network layout.
struct TrainBatch {
    nn::ObsBatch s;
    nn::ObsBatch s_next;
    std::vector<int> actions;
    std::vector<float> rewards;
    std::vector<std::uint8_t> terminal;

    void clear();
    void push(const Experience& exp, int grid_size);
};

// Per-sample target: the reward alone when the next state was terminal,
// otherwise reward + gamma * Q_target(s', argmax_a Q_primary(s', a)).
// Targets are constants with respect to the primary parameters.
std::vector<float> ddqn_targets(const nn::QNetwork& primary,
                                const nn::QNetwork& target, const TrainBatch& batch,
                                float gamma, nn::Workspace& ws);

// One optimization step: targets, batch-mean TD loss on taken actions,
// analytic gradients, Adam. Returns the loss.
float train_batch(nn::QNetwork& primary, const nn::QNetwork& target,
                  const TrainBatch& batch, float gamma, nn::AdamState& opt_state,
                  const nn::AdamParams& opt_params, nn::Workspace& ws,
                  std::vector<nn::Tensor>& grad_scratch);

}  // namespace gridcover
