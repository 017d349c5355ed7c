#include "gridcover/nn.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gridcover/kernels.hpp"

namespace gridcover::nn {

using kernels::active_ops;

Tensor Tensor::zeros(std::vector<int> shape) {
    Tensor t;
    std::size_t n = 1;
    for (const int d : shape) n *= static_cast<std::size_t>(d);
    t.shape = std::move(shape);
    t.data.assign(n, 0.0f);
    return t;
}

bool all_finite(std::span<const float> values) {
    for (const float v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

int NetworkArch::flat_dim() const {
    const int ch = conv_layers.empty() ? input_channels : conv_layers.back().filters;
    return grid_size * grid_size * ch;
}

int NetworkArch::dense_input_dim() const { return flat_dim() + 1; }

namespace {

void validate_arch(const NetworkArch& arch) {
    if (arch.grid_size < 2) throw std::runtime_error("arch: grid size too small");
    if (arch.input_channels != kObsChannels)
        throw std::runtime_error("arch: observation has 5 channels");
    if (arch.conv_layers.empty())
        throw std::runtime_error("arch: at least one conv layer required");
    for (const auto& c : arch.conv_layers) {
        if (c.filters < 1) throw std::runtime_error("arch: conv filters must be >= 1");
        if (c.kernel < 1 || c.kernel % 2 == 0)
            throw std::runtime_error("arch: conv kernels must be odd");
    }
    if (arch.dense_layers.empty() || arch.dense_layers.back() != kNumActions)
        throw std::runtime_error("arch: final dense layer must have one output per action");
    for (const int w : arch.dense_layers)
        if (w < 1) throw std::runtime_error("arch: dense width must be >= 1");
    if (static_cast<int>(arch.pad_values.size()) != arch.input_channels)
        throw std::runtime_error("arch: one pad value per input channel required");
    if (!(arch.budget_norm > 0.0f))
        throw std::runtime_error("arch: budget_norm must be positive");
}

std::string fmt_float(float v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::vector<ParamInfo> param_layout(const NetworkArch& arch) {
    std::vector<ParamInfo> layout;
    int in_ch = arch.input_channels;
    for (std::size_t i = 0; i < arch.conv_layers.size(); ++i) {
        const auto& c = arch.conv_layers[i];
        const std::string base = "conv" + std::to_string(i);
        layout.push_back({base + ".w", {c.kernel, c.kernel, in_ch, c.filters}});
        layout.push_back({base + ".b", {c.filters}});
        in_ch = c.filters;
    }
    int in_dim = arch.dense_input_dim();
    for (std::size_t j = 0; j < arch.dense_layers.size(); ++j) {
        const int out = arch.dense_layers[j];
        const std::string base = "dense" + std::to_string(j);
        layout.push_back({base + ".w", {out, in_dim}});
        layout.push_back({base + ".b", {out}});
        in_dim = out;
    }
    return layout;
}

std::size_t QNetwork::param_count() const {
    std::size_t n = 0;
    for (const auto& t : params) n += t.numel();
    return n;
}

QNetwork init_network(const NetworkArch& arch, Rng& rng) {
    validate_arch(arch);
    QNetwork net;
    net.arch = arch;
    for (const auto& info : param_layout(arch)) {
        Tensor t = Tensor::zeros(info.shape);
        if (info.shape.size() > 1) {
            // fan-in: everything but the output dimension
            std::size_t fan_in = 1;
            if (info.shape.size() == 4)
                fan_in = static_cast<std::size_t>(info.shape[0]) * info.shape[1] *
                         info.shape[2];
            else
                fan_in = static_cast<std::size_t>(info.shape[1]);
            const float a = 1.0f / std::sqrt(static_cast<float>(fan_in));
            for (float& v : t.data) v = uniform_symmetric(rng, a);
        }
        net.params.push_back(std::move(t));
    }
    return net;
}

std::vector<Tensor> zero_grads(const NetworkArch& arch) {
    std::vector<Tensor> grads;
    for (const auto& info : param_layout(arch)) grads.push_back(Tensor::zeros(info.shape));
    return grads;
}

void ObsBatch::reserve(int max_count, int n) {
    spatial.reserve(static_cast<std::size_t>(max_count) * n * n * kObsChannels);
    budget.reserve(static_cast<std::size_t>(max_count));
}

void ObsBatch::clear() {
    count = 0;
    spatial.clear();
    budget.clear();
}

void ObsBatch::push(const Observation& obs) {
    if (count == 0)
        grid_size = obs.grid_size;
    else if (grid_size != obs.grid_size)
        throw std::runtime_error("obs batch: mixed grid sizes");
    spatial.insert(spatial.end(), obs.spatial.begin(), obs.spatial.end());
    budget.push_back(obs.budget_scalar);
    ++count;
}

void ObsBatch::push_packed(const PackedObs& packed, int n) {
    if (count == 0)
        grid_size = n;
    else if (grid_size != n)
        throw std::runtime_error("obs batch: mixed grid sizes");
    const std::size_t cells = static_cast<std::size_t>(n) * n * kObsChannels;
    spatial.resize(spatial.size() + cells);
    unpack_observation(packed, n, spatial.data() + spatial.size() - cells);
    budget.push_back(packed.budget_scalar);
    ++count;
}

void Workspace::ensure(const NetworkArch& requested, int requested_batch) {
    if (arch == requested && requested_batch <= capacity) {
        batch = requested_batch;
        return;
    }
    arch = requested;
    capacity = std::max(requested_batch, capacity);
    batch = requested_batch;
    const int n = arch.grid_size;
    const std::size_t b = static_cast<std::size_t>(capacity);

    const std::size_t layers = arch.conv_layers.size();
    conv_padded.assign(layers, {});
    conv_out.assign(layers, {});
    w_transposed.assign(layers, {});
    std::size_t max_out = 0, max_pad = 0;
    int in_ch = arch.input_channels;
    for (std::size_t i = 0; i < layers; ++i) {
        const auto& c = arch.conv_layers[i];
        const int hp = n + c.kernel - 1;
        const std::size_t pad_sz = static_cast<std::size_t>(hp) * hp * in_ch;
        const std::size_t out_sz = static_cast<std::size_t>(n) * n * c.filters;
        conv_padded[i].assign(b * pad_sz, 0.0f);
        conv_out[i].assign(b * out_sz, 0.0f);
        w_transposed[i].assign(static_cast<std::size_t>(c.kernel) * c.kernel * in_ch *
                                   c.filters,
                               0.0f);
        max_out = std::max(max_out, out_sz);
        max_pad = std::max(max_pad, pad_sz);
        in_ch = c.filters;
    }
    flat.assign(b * static_cast<std::size_t>(arch.dense_input_dim()), 0.0f);
    flat_grad.assign(flat.size(), 0.0f);

    const std::size_t dn = arch.dense_layers.size();
    dense_out.assign(dn, {});
    dense_grad.assign(dn, {});
    int in_dim = arch.dense_input_dim();
    for (std::size_t j = 0; j < dn; ++j) {
        dense_out[j].assign(b * static_cast<std::size_t>(arch.dense_layers[j]), 0.0f);
        if (j > 0) dense_grad[j].assign(b * static_cast<std::size_t>(in_dim), 0.0f);
        in_dim = arch.dense_layers[j];
    }
    q_out.assign(b * kNumActions, 0.0f);
    dq.assign(b * kNumActions, 0.0f);
    conv_gout.assign(max_out, 0.0f);
    conv_gout_prev.assign(max_out, 0.0f);
    conv_gin.assign(max_pad, 0.0f);
}

namespace {

// Copies one sample's activation grid into the padded buffer, border filled
// with per-channel constants.
void pad_sample(const float* src, float* dst, int n, int ch, int kernel,
                const float* pad_values) {
    const int p = kernel / 2;
    const int np = n + 2 * p;
    if (pad_values) {
        for (int i = 0; i < np * np; ++i)
            for (int c = 0; c < ch; ++c)
                dst[static_cast<std::size_t>(i) * ch + c] = pad_values[c];
    } else {
        std::memset(dst, 0, static_cast<std::size_t>(np) * np * ch * sizeof(float));
    }
    for (int y = 0; y < n; ++y)
        std::memcpy(dst + (static_cast<std::size_t>(y + p) * np + p) * ch,
                    src + static_cast<std::size_t>(y) * n * ch,
                    static_cast<std::size_t>(n) * ch * sizeof(float));
}

void unpad_sample(const float* padded, float* dst, int n, int ch, int kernel) {
    const int p = kernel / 2;
    const int np = n + 2 * p;
    for (int y = 0; y < n; ++y)
        std::memcpy(dst + static_cast<std::size_t>(y) * n * ch,
                    padded + (static_cast<std::size_t>(y + p) * np + p) * ch,
                    static_cast<std::size_t>(n) * ch * sizeof(float));
}

}  // namespace

void forward_batch(const QNetwork& net, const ObsBatch& batch, Workspace& ws) {
    const NetworkArch& arch = net.arch;
    if (batch.count == 0) throw std::runtime_error("forward: empty batch");
    if (batch.grid_size != arch.grid_size)
        throw std::runtime_error("forward: observation grid does not match network");
    if (!all_finite(batch.spatial) || !all_finite(batch.budget))
        throw std::runtime_error("forward: non-finite observation");
    ws.ensure(arch, batch.count);
    const auto& ops = active_ops();
    const int n = arch.grid_size;
    const int cells = n * n;
    const std::size_t layers = arch.conv_layers.size();

    int in_ch = arch.input_channels;
    for (std::size_t i = 0; i < layers; ++i) {
        const auto& c = arch.conv_layers[i];
        const int hp = n + c.kernel - 1;
        const std::size_t pad_sz = static_cast<std::size_t>(hp) * hp * in_ch;
        const std::size_t out_sz = static_cast<std::size_t>(cells) * c.filters;
        const std::size_t in_sz = static_cast<std::size_t>(cells) * in_ch;
        const float* w = net.params[2 * i].data.data();
        const float* bias = net.params[2 * i + 1].data.data();
        const float* pad_vals = i == 0 ? arch.pad_values.data() : nullptr;
        for (int b = 0; b < batch.count; ++b) {
            const float* src = i == 0 ? batch.spatial.data() + b * in_sz
                                      : ws.conv_out[i - 1].data() + b * in_sz;
            float* padded = ws.conv_padded[i].data() + b * pad_sz;
            float* out = ws.conv_out[i].data() + b * out_sz;
            pad_sample(src, padded, n, in_ch, c.kernel, pad_vals);
            ops.conv2d_forward(padded, w, bias, out, n, n, in_ch, c.filters, c.kernel);
        }
        ops.relu(ws.conv_out[i].data(), static_cast<std::size_t>(batch.count) * out_sz);
        in_ch = c.filters;
    }

    const int flat_dim = arch.flat_dim();
    const int dense_in = arch.dense_input_dim();
    for (int b = 0; b < batch.count; ++b) {
        float* row = ws.flat.data() + static_cast<std::size_t>(b) * dense_in;
        std::memcpy(row, ws.conv_out.back().data() + static_cast<std::size_t>(b) * flat_dim,
                    static_cast<std::size_t>(flat_dim) * sizeof(float));
        row[flat_dim] = batch.budget[b];
    }

    const float* x = ws.flat.data();
    int in_dim = dense_in;
    const std::size_t conv_params = 2 * layers;
    for (std::size_t j = 0; j < arch.dense_layers.size(); ++j) {
        const int out_dim = arch.dense_layers[j];
        const float* w = net.params[conv_params + 2 * j].data.data();
        const float* bias = net.params[conv_params + 2 * j + 1].data.data();
        float* y = ws.dense_out[j].data();
        ops.dense_forward(w, bias, x, y, batch.count, in_dim, out_dim);
        if (j + 1 < arch.dense_layers.size())
            ops.relu(y, static_cast<std::size_t>(batch.count) * out_dim);
        x = y;
        in_dim = out_dim;
    }

    std::memcpy(ws.q_out.data(), ws.dense_out.back().data(),
                static_cast<std::size_t>(batch.count) * kNumActions * sizeof(float));
    if (!all_finite({ws.q_out.data(), static_cast<std::size_t>(batch.count) * kNumActions}))
        throw NonFiniteError("forward: non-finite Q-values");
}

std::array<float, kNumActions> forward(const QNetwork& net, const Observation& obs,
                                       Workspace& ws) {
    ws.one.clear();
    ws.one.push(obs);
    forward_batch(net, ws.one, ws);
    std::array<float, kNumActions> q;
    std::memcpy(q.data(), ws.q_out.data(), sizeof q);
    return q;
}

float backward(const QNetwork& net, const ObsBatch& batch,
               std::span<const int> actions, std::span<const float> targets,
               Workspace& ws, std::vector<Tensor>& grads) {
    const NetworkArch& arch = net.arch;
    const int m = batch.count;
    if (ws.batch != m || !(ws.arch == arch))
        throw std::logic_error("backward: workspace does not hold this batch's forward pass");
    if (static_cast<int>(actions.size()) != m || static_cast<int>(targets.size()) != m)
        throw std::runtime_error("backward: actions/targets size mismatch");
    const auto& ops = active_ops();

    if (grads.size() != net.params.size()) grads = zero_grads(arch);
    for (auto& g : grads) std::fill(g.data.begin(), g.data.end(), 0.0f);

    // Loss and its gradient; only the taken action's Q-value participates.
    double loss_acc = 0.0;
    std::fill(ws.dq.begin(), ws.dq.end(), 0.0f);
    const float inv_m = 1.0f / static_cast<float>(m);
    for (int b = 0; b < m; ++b) {
        const int a = actions[b];
        if (a < 0 || a >= kNumActions) throw std::runtime_error("backward: bad action index");
        const float d = ws.q_out[static_cast<std::size_t>(b) * kNumActions + a] - targets[b];
        loss_acc += static_cast<double>(d) * d;
        ws.dq[static_cast<std::size_t>(b) * kNumActions + a] = 2.0f * d * inv_m;
    }
    const float loss = static_cast<float>(loss_acc / m);

    // Dense stack, output to input.
    const std::size_t layers = arch.conv_layers.size();
    const std::size_t conv_params = 2 * layers;
    const float* cur = ws.dq.data();
    for (int j = static_cast<int>(arch.dense_layers.size()) - 1; j >= 0; --j) {
        const int out_dim = arch.dense_layers[j];
        const int in_dim = j == 0 ? arch.dense_input_dim() : arch.dense_layers[j - 1];
        const float* input = j == 0 ? ws.flat.data() : ws.dense_out[j - 1].data();
        const float* w = net.params[conv_params + 2 * j].data.data();
        float* gw = grads[conv_params + 2 * j].data.data();
        float* gb = grads[conv_params + 2 * j + 1].data.data();
        ops.dense_grad_params(input, cur, gw, gb, m, in_dim, out_dim);
        if (j > 0) {
            float* gin = ws.dense_grad[j].data();
            ops.dense_grad_input(w, cur, gin, m, in_dim, out_dim);
            ops.relu_mask_grad(input, gin, static_cast<std::size_t>(m) * in_dim);
            cur = gin;
        } else {
            ops.dense_grad_input(w, cur, ws.flat_grad.data(), m, in_dim, out_dim);
        }
    }

    // Transposed conv weights for the input-gradient passes (layer 0 needs none).
    int in_ch = arch.input_channels;
    for (std::size_t i = 0; i < layers; ++i) {
        const auto& c = arch.conv_layers[i];
        if (i > 0) {
            const float* w = net.params[2 * i].data.data();
            float* wt = ws.w_transposed[i].data();
            const int taps = c.kernel * c.kernel;
            for (int t = 0; t < taps; ++t)
                for (int cc = 0; cc < in_ch; ++cc)
                    for (int f = 0; f < c.filters; ++f)
                        wt[(static_cast<std::size_t>(t) * c.filters + f) * in_ch + cc] =
                            w[(static_cast<std::size_t>(t) * in_ch + cc) * c.filters + f];
        }
        in_ch = c.filters;
    }

    const int n = arch.grid_size;
    const int cells = n * n;
    const int flat_dim = arch.flat_dim();
    const int dense_in = arch.dense_input_dim();
    for (int b = 0; b < m; ++b) {
        // budget slot of flat_grad is dropped: nothing upstream produced it
        std::memcpy(ws.conv_gout.data(),
                    ws.flat_grad.data() + static_cast<std::size_t>(b) * dense_in,
                    static_cast<std::size_t>(flat_dim) * sizeof(float));
        for (int i = static_cast<int>(layers) - 1; i >= 0; --i) {
            const auto& c = arch.conv_layers[i];
            const int ci = i == 0 ? arch.input_channels : arch.conv_layers[i - 1].filters;
            const int hp = n + c.kernel - 1;
            const std::size_t pad_sz = static_cast<std::size_t>(hp) * hp * ci;
            const std::size_t out_sz = static_cast<std::size_t>(cells) * c.filters;
            const float* padded = ws.conv_padded[i].data() + b * pad_sz;
            ops.relu_mask_grad(ws.conv_out[i].data() + b * out_sz, ws.conv_gout.data(),
                               out_sz);
            ops.conv2d_grad_params(padded, ws.conv_gout.data(), grads[2 * i].data.data(),
                                   grads[2 * i + 1].data.data(), n, n, ci, c.filters,
                                   c.kernel);
            if (i > 0) {
                std::memset(ws.conv_gin.data(), 0, pad_sz * sizeof(float));
                ops.conv2d_grad_input(ws.w_transposed[i].data(), ws.conv_gout.data(),
                                      ws.conv_gin.data(), n, n, ci, c.filters, c.kernel);
                unpad_sample(ws.conv_gin.data(), ws.conv_gout_prev.data(), n, ci, c.kernel);
                std::swap(ws.conv_gout, ws.conv_gout_prev);
            }
        }
    }
    return loss;
}

float mse_loss(std::span<const float> pred, std::span<const float> target) {
    if (pred.size() != target.size())
        throw std::runtime_error("mse_loss: length mismatch");
    if (pred.empty()) return 0.0f;
    const double s =
        active_ops().sq_err_sum(pred.data(), target.data(), pred.size());
    return static_cast<float>(s / static_cast<double>(pred.size()));
}

AdamState AdamState::like(const QNetwork& net) {
    AdamState s;
    for (const auto& p : net.params) {
        s.m.push_back(Tensor::zeros(p.shape));
        s.v.push_back(Tensor::zeros(p.shape));
    }
    return s;
}

void adam_step(QNetwork& net, const std::vector<Tensor>& grads, AdamState& state,
               const AdamParams& params) {
    if (grads.size() != net.params.size() || state.m.size() != net.params.size())
        throw std::runtime_error("adam: gradient/state layout mismatch");
    state.step += 1;
    const float bc1 = 1.0f - std::pow(params.beta1, static_cast<float>(state.step));
    const float bc2 = 1.0f - std::pow(params.beta2, static_cast<float>(state.step));
    const auto& ops = active_ops();
    for (std::size_t i = 0; i < net.params.size(); ++i) {
        ops.adam_update(net.params[i].data.data(), state.m[i].data.data(),
                        state.v[i].data.data(), grads[i].data.data(),
                        net.params[i].numel(), params.lr, params.beta1, params.beta2,
                        params.eps, 1.0f / bc1, 1.0f / bc2);
    }
}

void soft_update(QNetwork& target, const QNetwork& primary, float tau) {
    if (!(target.arch == primary.arch))
        throw std::runtime_error("soft_update: architecture mismatch");
    if (tau < 0.0f || tau > 1.0f) throw std::runtime_error("soft_update: tau outside [0,1]");
    const auto& ops = active_ops();
    for (std::size_t i = 0; i < target.params.size(); ++i)
        ops.lerp_toward(target.params[i].data.data(), primary.params[i].data.data(), tau,
                        target.params[i].numel());
}

// ---------------------------------------------------------------------------
// Checkpoint format: "GRIDCOVER-CKPT v1" header, a text manifest (grid size,
// pad values, layer list, named parameters with shapes and byte offsets),
// then "blob <bytes>" followed by the raw little-endian float32 arrays.

namespace {

constexpr const char* kMagic = "GRIDCOVER-CKPT v1";

void write_le_floats(std::string& out, const std::vector<float>& values) {
    const std::size_t start = out.size();
    out.resize(start + values.size() * 4);
    if constexpr (std::endian::native == std::endian::little) {
        std::memcpy(out.data() + start, values.data(), values.size() * 4);
    } else {
        for (std::size_t i = 0; i < values.size(); ++i) {
            std::uint32_t u;
            std::memcpy(&u, &values[i], 4);
            u = (u >> 24) | ((u >> 8) & 0xff00u) | ((u << 8) & 0xff0000u) | (u << 24);
            std::memcpy(out.data() + start + i * 4, &u, 4);
        }
    }
}

void read_le_floats(const char* src, float* dst, std::size_t count) {
    if constexpr (std::endian::native == std::endian::little) {
        std::memcpy(dst, src, count * 4);
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            std::uint32_t u;
            std::memcpy(&u, src + i * 4, 4);
            u = (u >> 24) | ((u >> 8) & 0xff00u) | ((u << 8) & 0xff0000u) | (u << 24);
            std::memcpy(dst + i, &u, 4);
        }
    }
}

struct LineCursor {
    std::string_view text;
    std::size_t pos = 0;

    std::string_view next() {
        if (pos >= text.size()) throw std::runtime_error("checkpoint: truncated manifest");
        const std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos)
            throw std::runtime_error("checkpoint: truncated manifest");
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        return line;
    }
};

std::vector<std::string> split_ws(std::string_view line) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && line[i] == ' ') ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ') ++j;
        if (j > i) out.emplace_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

long long parse_ll(const std::string& s) {
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::runtime_error("checkpoint: bad integer '" + s + "'");
    return v;
}

float parse_float(const std::string& s) {
    float v = 0.0f;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::runtime_error("checkpoint: bad float '" + s + "'");
    return v;
}

}  // namespace

void save_checkpoint(const QNetwork& net, const std::string& path) {
    validate_arch(net.arch);
    std::string manifest;
    manifest += kMagic;
    manifest += '\n';
    manifest += "grid " + std::to_string(net.arch.grid_size) + "\n";
    manifest += "channels " + std::to_string(net.arch.input_channels) + "\n";
    manifest += "budget_norm " + fmt_float(net.arch.budget_norm) + "\n";
    manifest += "pad";
    for (const float v : net.arch.pad_values) manifest += " " + fmt_float(v);
    manifest += "\n";
    for (const auto& c : net.arch.conv_layers)
        manifest += "conv " + std::to_string(c.filters) + " " + std::to_string(c.kernel) + "\n";
    for (const int w : net.arch.dense_layers) manifest += "dense " + std::to_string(w) + "\n";

    const auto layout = param_layout(net.arch);
    std::string blob;
    std::size_t offset = 0;
    for (std::size_t i = 0; i < layout.size(); ++i) {
        const Tensor& t = net.params[i];
        manifest += "param " + layout[i].name + " " + std::to_string(t.shape.size());
        for (const int d : t.shape) manifest += " " + std::to_string(d);
        manifest += " " + std::to_string(offset) + " " + std::to_string(t.numel()) + "\n";
        write_le_floats(blob, t.data);
        offset += t.numel() * 4;
    }
    manifest += "blob " + std::to_string(blob.size()) + "\n";

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("checkpoint: cannot open for writing: " + path);
    out.write(manifest.data(), static_cast<std::streamsize>(manifest.size()));
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw std::runtime_error("checkpoint: write failed: " + path);
}

QNetwork load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string content = ss.str();

    LineCursor cur{content};
    if (cur.next() != kMagic) throw std::runtime_error("checkpoint: bad magic line");

    NetworkArch arch;
    arch.conv_layers.clear();
    arch.dense_layers.clear();
    arch.pad_values.clear();

    struct ParamEntry {
        std::string name;
        std::vector<int> shape;
        long long offset;
        long long count;
    };
    std::vector<ParamEntry> entries;
    long long blob_size = -1;

    while (blob_size < 0) {
        const auto fields = split_ws(cur.next());
        if (fields.empty()) throw std::runtime_error("checkpoint: empty manifest line");
        const std::string& key = fields[0];
        if (key == "grid" && fields.size() == 2) {
            arch.grid_size = static_cast<int>(parse_ll(fields[1]));
        } else if (key == "channels" && fields.size() == 2) {
            arch.input_channels = static_cast<int>(parse_ll(fields[1]));
        } else if (key == "budget_norm" && fields.size() == 2) {
            arch.budget_norm = parse_float(fields[1]);
        } else if (key == "pad") {
            for (std::size_t i = 1; i < fields.size(); ++i)
                arch.pad_values.push_back(parse_float(fields[i]));
        } else if (key == "conv" && fields.size() == 3) {
            arch.conv_layers.push_back({static_cast<int>(parse_ll(fields[1])),
                                        static_cast<int>(parse_ll(fields[2]))});
        } else if (key == "dense" && fields.size() == 2) {
            arch.dense_layers.push_back(static_cast<int>(parse_ll(fields[1])));
        } else if (key == "param" && fields.size() >= 5) {
            ParamEntry e;
            e.name = fields[1];
            const int ndims = static_cast<int>(parse_ll(fields[2]));
            if (static_cast<int>(fields.size()) != 5 + ndims)
                throw std::runtime_error("checkpoint: malformed param line for " + e.name);
            for (int d = 0; d < ndims; ++d)
                e.shape.push_back(static_cast<int>(parse_ll(fields[3 + d])));
            e.offset = parse_ll(fields[3 + ndims]);
            e.count = parse_ll(fields[4 + ndims]);
            entries.push_back(std::move(e));
        } else if (key == "blob" && fields.size() == 2) {
            blob_size = parse_ll(fields[1]);
        } else {
            throw std::runtime_error("checkpoint: unknown manifest line '" + key + "'");
        }
    }

    validate_arch(arch);
    const auto layout = param_layout(arch);
    if (entries.size() != layout.size())
        throw std::runtime_error("checkpoint: parameter list does not match architecture");
    long long expected_offset = 0;
    for (std::size_t i = 0; i < layout.size(); ++i) {
        if (entries[i].name != layout[i].name || entries[i].shape != layout[i].shape)
            throw std::runtime_error("checkpoint: parameter '" + entries[i].name +
                                     "' does not match architecture");
        std::size_t numel = 1;
        for (const int d : entries[i].shape) numel *= static_cast<std::size_t>(d);
        if (entries[i].count != static_cast<long long>(numel) ||
            entries[i].offset != expected_offset)
            throw std::runtime_error("checkpoint: bad offsets for '" + entries[i].name + "'");
        expected_offset += entries[i].count * 4;
    }
    if (blob_size != expected_offset)
        throw std::runtime_error("checkpoint: blob size does not match manifest");
    if (content.size() - cur.pos < static_cast<std::size_t>(blob_size))
        throw std::runtime_error("checkpoint: truncated blob");

    QNetwork net;
    net.arch = arch;
    for (std::size_t i = 0; i < layout.size(); ++i) {
        Tensor t = Tensor::zeros(layout[i].shape);
        read_le_floats(content.data() + cur.pos + entries[i].offset, t.data.data(),
                       t.numel());
        net.params.push_back(std::move(t));
    }
    return net;
}

}  // namespace gridcover::nn
