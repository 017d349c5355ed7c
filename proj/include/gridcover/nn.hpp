#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridcover/env.hpp"
#include "gridcover/rng.hpp"

// Value network: a conv stack over the five spatial channels (same-shape
// padding, ReLU), flattened and joined with the budget scalar, then dense
// layers down to one Q-value per action. Forward, analytic backward, Adam
// and the target-net soft update all run on the kernels table.

namespace gridcover::nn {

struct Tensor {
    std::vector<int> shape;
    std::vector<float> data;

    static Tensor zeros(std::vector<int> shape);
    std::size_t numel() const { return data.size(); }
};

// Raised when a forward pass produces NaN/Inf Q-values (diverged parameters).
struct NonFiniteError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

bool all_finite(std::span<const float> values);

struct ConvSpec {
    int filters = 0;
    int kernel = 0;  // odd; output keeps the input's spatial shape
    bool operator==(const ConvSpec&) const = default;
};

struct NetworkArch {
    int grid_size = 6;
    int input_channels = 5;
    std::vector<ConvSpec> conv_layers{{16, 5}, {16, 3}, {16, 3}};
    std::vector<int> dense_layers{256, 256, 5};
    // Constant padding of the first conv layer, one value per input channel;
    // the no-fly channel is one-padded so the grid reads as fenced in.
    std::vector<float> pad_values{0.0f, 0.0f, 1.0f, 0.0f, 0.0f};
    float budget_norm = 75.0f;

    int flat_dim() const;         // cells times last conv filter count
    int dense_input_dim() const;  // flat_dim + 1 (budget scalar)
    bool operator==(const NetworkArch&) const = default;
};

struct ParamInfo {
    std::string name;
    std::vector<int> shape;  // conv w: [K,K,C,F]; dense w: [out,in]
};

// Canonical parameter order; init, gradients, Adam and checkpoints follow it.
std::vector<ParamInfo> param_layout(const NetworkArch& arch);

struct QNetwork {
    NetworkArch arch;
    std::vector<Tensor> params;

    std::size_t param_count() const;
};

// Weights uniform in (-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.
QNetwork init_network(const NetworkArch& arch, Rng& rng);

std::vector<Tensor> zero_grads(const NetworkArch& arch);

// Observation batch in the network's input layout.
struct ObsBatch {
    int count = 0;
    int grid_size = 0;
    std::vector<float> spatial;  // count * N*N*5, cell-interleaved channels
    std::vector<float> budget;   // count

    void reserve(int max_count, int n);
    void clear();
    void push(const Observation& obs);
    void push_packed(const PackedObs& packed, int n);
};

// Per-thread scratch: layer activations of the most recent forward_batch
// (these double as the cache consumed by backward) plus gradient buffers.
struct Workspace {
    void ensure(const NetworkArch& arch, int batch);

    std::span<const float> q() const { return {q_out.data(), q_out.size()}; }
    std::span<const float> q_row(int b) const {
        return {q_out.data() + static_cast<std::size_t>(b) * kNumActions,
                kNumActions};
    }

    NetworkArch arch;
    int capacity = 0;
    int batch = 0;
    std::vector<std::vector<float>> conv_padded;   // per conv layer
    std::vector<std::vector<float>> conv_out;      // per conv layer, post-ReLU
    std::vector<float> flat;                       // dense input incl. budget
    std::vector<std::vector<float>> dense_out;     // per dense layer
    std::vector<float> q_out;                      // batch x 5
    std::vector<float> dq;                         // batch x 5
    std::vector<std::vector<float>> dense_grad;    // grad at input of layer j>0
    std::vector<float> flat_grad;
    std::vector<float> conv_gout;                  // per-sample scratch
    std::vector<float> conv_gout_prev;
    std::vector<float> conv_gin;                   // per-sample padded grad
    std::vector<std::vector<float>> w_transposed;  // per conv layer [K,K,F,C]
    ObsBatch one;                                  // batch-of-one staging
};

// Fills ws.q (count x 5) and retains activations for a following backward.
// Throws on non-finite Q-values.
void forward_batch(const QNetwork& net, const ObsBatch& batch, Workspace& ws);

// Policy-path forward for one observation.
std::array<float, kNumActions> forward(const QNetwork& net,
                                       const Observation& obs, Workspace& ws);

// Batch-mean squared error on the taken-action Q-values against constant
// targets. Consumes the activations of the immediately preceding
// forward_batch on `ws`; accumulates nothing across calls (grads are
// overwritten). Returns the loss.
float backward(const QNetwork& net, const ObsBatch& batch,
               std::span<const int> actions, std::span<const float> targets,
               Workspace& ws, std::vector<Tensor>& grads);

float mse_loss(std::span<const float> pred, std::span<const float> target);

struct AdamParams {
    float lr = 1e-4f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;
};

struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    long long step = 0;

    static AdamState like(const QNetwork& net);
};

void adam_step(QNetwork& net, const std::vector<Tensor>& grads,
               AdamState& state, const AdamParams& params);

// target <- (1-tau)*target + tau*primary, elementwise.
void soft_update(QNetwork& target, const QNetwork& primary, float tau);

// Text manifest + raw little-endian float32 blob; the round trip is
// bit-exact on parameters.
void save_checkpoint(const QNetwork& net, const std::string& path);
QNetwork load_checkpoint(const std::string& path);

}  // namespace gridcover::nn
