#include "gridcover/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gridcover {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

long long to_int(const std::string& key, const std::string& value) {
    long long v = 0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
    if (res.ec != std::errc{} || res.ptr != value.data() + value.size())
        throw std::runtime_error("config: bad integer for " + key + ": '" + value + "'");
    return v;
}

float to_float(const std::string& key, const std::string& value) {
    float v = 0.0f;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
    if (res.ec != std::errc{} || res.ptr != value.data() + value.size())
        throw std::runtime_error("config: bad number for " + key + ": '" + value + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const std::size_t next = s.find(sep, pos);
        out.push_back(trim(s.substr(pos, next == std::string::npos ? std::string::npos
                                                                   : next - pos)));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return out;
}

std::vector<nn::ConvSpec> parse_conv(const std::string& value) {
    std::vector<nn::ConvSpec> layers;
    for (const std::string& item : split(value, ',')) {
        const std::size_t x = item.find('x');
        if (x == std::string::npos)
            throw std::runtime_error("config: conv layers look like '16x5,16x3': '" +
                                     item + "'");
        layers.push_back({static_cast<int>(to_int("conv", item.substr(0, x))),
                          static_cast<int>(to_int("conv", item.substr(x + 1)))});
    }
    return layers;
}

std::vector<int> parse_dense(const std::string& value) {
    std::vector<int> widths;
    for (const std::string& item : split(value, ','))
        widths.push_back(static_cast<int>(to_int("dense", item)));
    widths.push_back(kNumActions);
    return widths;
}

std::string fmt_float(float v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

void apply_config_entry(TrainConfig& c, const std::string& key,
                        const std::string& value) {
    if (key == "map") c.map_path = value;
    else if (key == "episodes") c.episodes = static_cast<int>(to_int(key, value));
    else if (key == "budget_lo") c.budget_lo = static_cast<int>(to_int(key, value));
    else if (key == "budget_hi") c.budget_hi = static_cast<int>(to_int(key, value));
    else if (key == "replay_capacity")
        c.replay_capacity = static_cast<std::size_t>(to_int(key, value));
    else if (key == "batch_size") c.batch_size = static_cast<int>(to_int(key, value));
    else if (key == "gamma") c.gamma = to_float(key, value);
    else if (key == "tau") c.tau = to_float(key, value);
    else if (key == "beta") c.beta = to_float(key, value);
    else if (key == "lr") c.adam.lr = to_float(key, value);
    else if (key == "adam_beta1") c.adam.beta1 = to_float(key, value);
    else if (key == "adam_beta2") c.adam.beta2 = to_float(key, value);
    else if (key == "adam_eps") c.adam.eps = to_float(key, value);
    else if (key == "r_cov") c.rewards.r_cov = to_float(key, value);
    else if (key == "r_sc") c.rewards.r_sc = to_float(key, value);
    else if (key == "r_mov") c.rewards.r_mov = to_float(key, value);
    else if (key == "r_crash") c.rewards.r_crash = to_float(key, value);
    else if (key == "seed") c.seed = static_cast<unsigned>(to_int(key, value));
    else if (key == "eval_every") c.eval_every = static_cast<int>(to_int(key, value));
    else if (key == "warmup") c.warmup = static_cast<int>(to_int(key, value));
    else if (key == "conv") c.arch.conv_layers = parse_conv(value);
    else if (key == "dense") c.arch.dense_layers = parse_dense(value);
    else throw std::runtime_error("config: unknown key '" + key + "'");
}

TrainConfig load_train_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    TrainConfig config;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: line " + std::to_string(line_no) +
                                     " is not 'key = value'");
        apply_config_entry(config, trim(stripped.substr(0, eq)),
                           trim(stripped.substr(eq + 1)));
    }
    return config;
}

std::string effective_config_text(const TrainConfig& c) {
    std::ostringstream out;
    out << "map = " << c.map_path << "\n";
    out << "episodes = " << c.episodes << "\n";
    out << "budget_lo = " << c.budget_lo << "\n";
    out << "budget_hi = " << c.budget_hi << "\n";
    out << "replay_capacity = " << c.replay_capacity << "\n";
    out << "batch_size = " << c.batch_size << "\n";
    out << "gamma = " << fmt_float(c.gamma) << "\n";
    out << "tau = " << fmt_float(c.tau) << "\n";
    out << "beta = " << fmt_float(c.beta) << "\n";
    out << "lr = " << fmt_float(c.adam.lr) << "\n";
    out << "adam_beta1 = " << fmt_float(c.adam.beta1) << "\n";
    out << "adam_beta2 = " << fmt_float(c.adam.beta2) << "\n";
    out << "adam_eps = " << fmt_float(c.adam.eps) << "\n";
    out << "r_cov = " << fmt_float(c.rewards.r_cov) << "\n";
    out << "r_sc = " << fmt_float(c.rewards.r_sc) << "\n";
    out << "r_mov = " << fmt_float(c.rewards.r_mov) << "\n";
    out << "r_crash = " << fmt_float(c.rewards.r_crash) << "\n";
    out << "seed = " << c.seed << "\n";
    out << "eval_every = " << c.eval_every << "\n";
    out << "warmup = " << c.warmup << "\n";
    out << "conv = ";
    for (std::size_t i = 0; i < c.arch.conv_layers.size(); ++i) {
        if (i) out << ",";
        out << c.arch.conv_layers[i].filters << "x" << c.arch.conv_layers[i].kernel;
    }
    out << "\n";
    out << "dense = ";
    for (std::size_t i = 0; i + 1 < c.arch.dense_layers.size(); ++i) {
        if (i) out << ",";
        out << c.arch.dense_layers[i];
    }
    out << "\n";
    return out.str();
}

}  // namespace gridcover
