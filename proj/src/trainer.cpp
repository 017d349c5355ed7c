#include "gridcover/trainer.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace gridcover {

namespace {

void validate_config(const MapGrid& map, const TrainConfig& c) {
    if (c.episodes < 0) throw std::runtime_error("config: episodes must be >= 0");
    if (c.budget_lo < 1 || c.budget_hi < c.budget_lo)
        throw std::runtime_error("config: budget range is empty or invalid");
    if (c.batch_size < 1) throw std::runtime_error("config: batch_size must be >= 1");
    if (c.warmup < c.batch_size)
        throw std::runtime_error("config: warmup must be >= batch_size");
    if (c.gamma < 0.0f || c.gamma > 1.0f)
        throw std::runtime_error("config: gamma outside [0,1]");
    if (c.tau < 0.0f || c.tau > 1.0f) throw std::runtime_error("config: tau outside [0,1]");
    if (!(c.beta > 0.0f)) throw std::runtime_error("config: beta must be positive");
    if (!(c.adam.lr > 0.0f)) throw std::runtime_error("config: learning rate must be positive");
    if (!(c.rewards.r_cov > 0.0f)) throw std::runtime_error("config: r_cov must be positive");
    if (!(c.rewards.r_sc < 0.0f) || !(c.rewards.r_mov < 0.0f) || !(c.rewards.r_crash < 0.0f))
        throw std::runtime_error("config: penalty rewards must be negative");
    if (map.start_cells().empty()) throw std::runtime_error("config: map has no start cells");
}

std::string fmt_float(float v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

TrainResult train(const MapGrid& map, const TrainConfig& config,
                  const ProgressFn& progress) {
    validate_config(map, config);

    Rng rng(config.seed);
    nn::NetworkArch arch = config.arch;
    arch.grid_size = map.size;
    arch.budget_norm = static_cast<float>(config.budget_hi);

    TrainResult result;
    result.net = nn::init_network(arch, rng);
    nn::QNetwork target = result.net;  // hard copy at start
    nn::AdamState opt_state = nn::AdamState::like(result.net);
    std::vector<nn::Tensor> grads;
    nn::Workspace ws;
    ReplayBuffer replay(config.replay_capacity);
    TrainBatch batch;
    batch.s.reserve(config.batch_size, map.size);
    batch.s_next.reserve(config.batch_size, map.size);

    const float budget_norm = arch.budget_norm;
    const Cell eval_start = map.start_cells().front();
    const int eval_budget = (config.budget_lo + config.budget_hi) / 2;

    for (int episode = 1; episode <= config.episodes; ++episode) {
        EnvState state = reset(map, config.budget_lo, config.budget_hi, rng);
        PackedObs packed = pack_observation(state, budget_norm);
        float episode_return = 0.0f;
        int steps = 0;

        try {
            while (!state.terminal()) {
                const Observation obs = encode_observation(state, budget_norm);
                const Action action =
                    softmax_policy(result.net, obs, config.beta, rng, ws);
                const StepResult res = step(state, action, config.rewards);
                PackedObs next_packed = pack_observation(state, budget_norm);
                replay.push({std::move(packed), static_cast<int>(action), res.reward,
                             next_packed, res.terminal});
                packed = std::move(next_packed);
                episode_return += res.reward;
                ++steps;

                if (replay.size() >= static_cast<std::size_t>(config.warmup)) {
                    const auto sampled =
                        replay.sample(static_cast<std::size_t>(config.batch_size), rng);
                    batch.clear();
                    for (const Experience* e : sampled) batch.push(*e, map.size);
                    const float loss =
                        train_batch(result.net, target, batch, config.gamma, opt_state,
                                    config.adam, ws, grads);
                    if (!std::isfinite(loss) || loss > 1e6f)
                        throw DivergenceError("training diverged at episode " +
                                              std::to_string(episode) + ": loss " +
                                              std::to_string(loss));
                    nn::soft_update(target, result.net, config.tau);
                }
            }
        } catch (const nn::NonFiniteError& e) {
            throw DivergenceError("training diverged at episode " +
                                  std::to_string(episode) + ": " + e.what());
        }

        result.log.episodes.push_back({episode, episode_return, steps, state.landed,
                                       coverage_ratio(state)});

        if (config.eval_every > 0 && episode % config.eval_every == 0) {
            const EvalResult ev = evaluate_greedy(result.net, map, eval_start,
                                                  eval_budget, config.rewards, ws);
            result.log.evals.push_back({episode, ev.total_reward});
            if (progress) progress(result.log.episodes.back(), result.log.evals.back());
        }
    }
    return result;
}

EvalResult evaluate_greedy(const nn::QNetwork& net, const MapGrid& map, Cell start,
                           int budget, const RewardParams& rewards,
                           nn::Workspace& ws) {
    if (net.arch.grid_size != map.size)
        throw std::runtime_error("evaluate: network was trained on grid size " +
                                 std::to_string(net.arch.grid_size) + ", map has " +
                                 std::to_string(map.size));
    EvalResult result;
    EnvState state = make_state(map, start, budget);
    while (!state.terminal()) {
        const Observation obs = encode_observation(state, net.arch.budget_norm);
        const Action action = greedy_action(net, obs, ws);
        const Cell before = state.position;
        const StepResult res = step(state, action, rewards);
        result.trajectory.push_back({before, action, res.accepted});
        result.total_reward += res.reward;
    }
    result.landed = state.landed;
    result.coverage = coverage_ratio(state);
    result.final_state = std::move(state);
    return result;
}

void write_episode_csv(const TrainLog& log, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "episode,return,steps,landed,coverage_ratio\n";
    for (const auto& e : log.episodes)
        out << e.episode << ',' << fmt_float(e.episode_return) << ',' << e.steps << ','
            << (e.landed ? 1 : 0) << ',' << fmt_float(e.coverage) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_eval_csv(const TrainLog& log, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "episode,greedy_return\n";
    for (const auto& e : log.evals)
        out << e.episode << ',' << fmt_float(e.greedy_return) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace gridcover
