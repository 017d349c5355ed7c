#pragma once

#include <string>

#include "gridcover/trainer.hpp"

namespace gridcover {

// Flat "key = value" config files; '#' starts a comment, unknown keys are
// rejected. Keys mirror TrainConfig: map, episodes, budget_lo, budget_hi,
// replay_capacity, batch_size, gamma, tau, beta, lr, adam_beta1, adam_beta2,
// adam_eps, r_cov, r_sc, r_mov, r_crash, seed, eval_every, warmup,
// conv (e.g. "16x5,16x3,16x3") and dense (hidden widths, e.g. "256,256").
void apply_config_entry(TrainConfig& config, const std::string& key,
                        const std::string& value);

TrainConfig load_train_config(const std::string& path);

// Every effective value in config-file syntax, for run provenance.
std::string effective_config_text(const TrainConfig& config);

}  // namespace gridcover
