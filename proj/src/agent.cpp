#include "gridcover/agent.hpp"

#include <cmath>
#include <stdexcept>

namespace gridcover {

namespace {

int argmax5(std::span<const float> q) {
    int best = 0;
    for (int i = 1; i < kNumActions; ++i)
        if (q[i] > q[best]) best = i;
    return best;
}

}  // namespace

Action greedy_action(const nn::QNetwork& net, const Observation& obs,
                     nn::Workspace& ws) {
    const auto q = nn::forward(net, obs, ws);
    return static_cast<Action>(argmax5(q));
}

std::array<double, kNumActions> softmax_probs(std::span<const float> q, double beta) {
    if (q.size() != kNumActions) throw std::runtime_error("softmax: expected 5 Q-values");
    if (!(beta > 0.0)) throw std::runtime_error("softmax: temperature must be positive");
    double qmax = q[0];
    for (int i = 1; i < kNumActions; ++i) qmax = std::max(qmax, static_cast<double>(q[i]));
    std::array<double, kNumActions> p{};
    double sum = 0.0;
    for (int i = 0; i < kNumActions; ++i) {
        p[i] = std::exp((static_cast<double>(q[i]) - qmax) / beta);
        sum += p[i];
    }
    for (auto& v : p) v /= sum;
    for (const auto v : p)
        if (!std::isfinite(v)) throw std::runtime_error("softmax: non-finite probability");
    return p;
}

Action softmax_policy(const nn::QNetwork& net, const Observation& obs, double beta,
                      Rng& rng, nn::Workspace& ws) {
    const auto q = nn::forward(net, obs, ws);
    const auto p = softmax_probs(q, beta);
    const double u = uniform_real01(rng);
    double acc = 0.0;
    for (int i = 0; i < kNumActions; ++i) {
        acc += p[i];
        if (u < acc) return static_cast<Action>(i);
    }
    return Action::land;  // u landed in the last bucket's rounding slack
}

void TrainBatch::clear() {
    s.clear();
    s_next.clear();
    actions.clear();
    rewards.clear();
    terminal.clear();
}

void TrainBatch::push(const Experience& exp, int grid_size) {
    s.push_packed(exp.s, grid_size);
    s_next.push_packed(exp.s_next, grid_size);
    actions.push_back(exp.action);
    rewards.push_back(exp.reward);
    terminal.push_back(exp.terminal ? 1 : 0);
}

std::vector<float> ddqn_targets(const nn::QNetwork& primary,
                                const nn::QNetwork& target, const TrainBatch& batch,
                                float gamma, nn::Workspace& ws) {
    const int m = batch.s_next.count;
    std::vector<float> targets(static_cast<std::size_t>(m));
    std::vector<int> selected(static_cast<std::size_t>(m));

    nn::forward_batch(primary, batch.s_next, ws);
    for (int b = 0; b < m; ++b) selected[b] = argmax5(ws.q_row(b));
    nn::forward_batch(target, batch.s_next, ws);
    for (int b = 0; b < m; ++b) {
        if (batch.terminal[b])
            targets[b] = batch.rewards[b];
        else
            targets[b] = batch.rewards[b] + gamma * ws.q_row(b)[selected[b]];
    }
    return targets;
}

float train_batch(nn::QNetwork& primary, const nn::QNetwork& target,
                  const TrainBatch& batch, float gamma, nn::AdamState& opt_state,
                  const nn::AdamParams& opt_params, nn::Workspace& ws,
                  std::vector<nn::Tensor>& grad_scratch) {
    if (batch.s.count == 0) throw std::runtime_error("train_batch: empty batch");
    const std::vector<float> targets = ddqn_targets(primary, target, batch, gamma, ws);
    nn::forward_batch(primary, batch.s, ws);
    const float loss =
        nn::backward(primary, batch.s, batch.actions, targets, ws, grad_scratch);
    nn::adam_step(primary, grad_scratch, opt_state, opt_params);
    return loss;
}

}  // namespace gridcover
