#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "gridcover/trainer.hpp"

using namespace gridcover;
namespace fs = std::filesystem;

namespace {

// Desk-sized setup so the loop runs in milliseconds.
TrainConfig tiny_config() {
    TrainConfig c;
    c.episodes = 30;
    c.budget_lo = 3;
    c.budget_hi = 8;
    c.replay_capacity = 500;
    c.batch_size = 8;
    c.warmup = 8;
    c.eval_every = 10;
    c.arch.conv_layers = {{4, 3}};
    c.arch.dense_layers = {16, 5};
    return c;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

nn::QNetwork landing_net(const MapGrid& map, float norm) {
    nn::NetworkArch arch;
    arch.grid_size = map.size;
    arch.conv_layers = {{1, 1}};
    arch.dense_layers = {5};
    arch.budget_norm = norm;
    Rng rng(0);
    nn::QNetwork net = nn::init_network(arch, rng);
    for (auto& t : net.params) std::fill(t.data.begin(), t.data.end(), 0.0f);
    net.params.back().data[static_cast<int>(Action::land)] = 1.0f;
    return net;
}

}  // namespace

TEST_CASE("zero episodes returns an initialized network and an empty log") {
    const MapGrid map = parse_map("L.\n..");
    TrainConfig c = tiny_config();
    c.episodes = 0;
    const TrainResult r = train(map, c);
    CHECK(r.log.episodes.empty());
    CHECK(r.log.evals.empty());
    CHECK(r.net.param_count() > 0);
}

TEST_CASE("without reaching warmup the network keeps its initial weights") {
    const MapGrid map = parse_map("L.\n..");
    TrainConfig c = tiny_config();
    c.episodes = 2;
    c.warmup = 100000;
    c.eval_every = 0;
    const TrainResult r = train(map, c);

    Rng rng(c.seed);
    nn::NetworkArch arch = c.arch;
    arch.grid_size = map.size;
    arch.budget_norm = static_cast<float>(c.budget_hi);
    const nn::QNetwork fresh = nn::init_network(arch, rng);
    for (std::size_t t = 0; t < fresh.params.size(); ++t)
        CHECK(r.net.params[t].data == fresh.params[t].data);
}

TEST_CASE("training is deterministic for a fixed seed") {
    const MapGrid map = load_map_file(std::string(GRIDCOVER_MAPS_DIR) + "/smoke6.map");
    TrainConfig c = tiny_config();
    c.seed = 77;

    const fs::path dir = fs::temp_directory_path() / "gridcover_trainer_test";
    fs::create_directories(dir);
    auto run = [&](const std::string& tag) {
        const TrainResult r = train(map, c);
        write_episode_csv(r.log, (dir / (tag + "_episodes.csv")).string());
        write_eval_csv(r.log, (dir / (tag + "_evals.csv")).string());
        nn::save_checkpoint(r.net, (dir / (tag + "_ckpt")).string());
    };
    run("a");
    run("b");
    CHECK(slurp((dir / "a_episodes.csv").string()) ==
          slurp((dir / "b_episodes.csv").string()));
    CHECK(slurp((dir / "a_evals.csv").string()) == slurp((dir / "b_evals.csv").string()));
    CHECK(slurp((dir / "a_ckpt").string()) == slurp((dir / "b_ckpt").string()));

    SUBCASE("a different seed gives a different trace") {
        TrainConfig c2 = c;
        c2.seed = 78;
        const TrainResult r = train(map, c2);
        write_episode_csv(r.log, (dir / "c_episodes.csv").string());
        CHECK(slurp((dir / "a_episodes.csv").string()) !=
              slurp((dir / "c_episodes.csv").string()));
    }
}

TEST_CASE("log invariants: one record per episode, steps within budget") {
    const MapGrid map = load_map_file(std::string(GRIDCOVER_MAPS_DIR) + "/smoke6.map");
    TrainConfig c = tiny_config();
    const TrainResult r = train(map, c);
    REQUIRE(static_cast<int>(r.log.episodes.size()) == c.episodes);
    for (int i = 0; i < c.episodes; ++i) {
        CHECK(r.log.episodes[i].episode == i + 1);
        CHECK(r.log.episodes[i].steps >= 1);
        CHECK(r.log.episodes[i].steps <= c.budget_hi);
        CHECK(r.log.episodes[i].coverage >= 0.0f);
        CHECK(r.log.episodes[i].coverage <= 1.0f);
    }
    // eval cadence: every eval_every episodes
    REQUIRE(static_cast<int>(r.log.evals.size()) == c.episodes / c.eval_every);
    for (std::size_t i = 0; i < r.log.evals.size(); ++i)
        CHECK(r.log.evals[i].episode == static_cast<int>(i + 1) * c.eval_every);
}

TEST_CASE("obviously bad configs are rejected") {
    const MapGrid map = parse_map("L.\n..");
    TrainConfig c = tiny_config();
    c.budget_lo = 5;
    c.budget_hi = 4;
    CHECK_THROWS_AS(train(map, c), std::runtime_error);
    c = tiny_config();
    c.warmup = 2;  // below batch size
    CHECK_THROWS_AS(train(map, c), std::runtime_error);
    c = tiny_config();
    c.gamma = 1.5f;
    CHECK_THROWS_AS(train(map, c), std::runtime_error);
    c = tiny_config();
    c.rewards.r_mov = 0.1f;
    CHECK_THROWS_AS(train(map, c), std::runtime_error);
}

TEST_CASE("a runaway learning rate trips the divergence guard") {
    const MapGrid map = load_map_file(std::string(GRIDCOVER_MAPS_DIR) + "/smoke6.map");
    TrainConfig c = tiny_config();
    c.episodes = 200;
    c.adam.lr = 1e12f;
    CHECK_THROWS_AS(train(map, c), DivergenceError);
}

TEST_CASE("greedy evaluation lands immediately when the net says land") {
    const MapGrid map = parse_map("L.\n..");
    const nn::QNetwork net = landing_net(map, 8.0f);
    nn::Workspace ws;
    const EvalResult ev = evaluate_greedy(net, map, {0, 0}, 1, RewardParams{}, ws);
    CHECK(ev.landed);
    CHECK(ev.trajectory.size() == 1);
    CHECK(ev.trajectory[0].action == Action::land);
    CHECK(ev.trajectory[0].accepted);
}

TEST_CASE("greedy evaluation is deterministic") {
    const MapGrid map = load_map_file(std::string(GRIDCOVER_MAPS_DIR) + "/smoke6.map");
    TrainConfig c = tiny_config();
    const TrainResult r = train(map, c);
    nn::Workspace ws;
    const EvalResult a = evaluate_greedy(r.net, map, {0, 0}, 12, c.rewards, ws);
    const EvalResult b = evaluate_greedy(r.net, map, {0, 0}, 12, c.rewards, ws);
    CHECK(a.total_reward == b.total_reward);
    REQUIRE(a.trajectory.size() == b.trajectory.size());
    for (std::size_t i = 0; i < a.trajectory.size(); ++i) {
        CHECK(a.trajectory[i].position == b.trajectory[i].position);
        CHECK(a.trajectory[i].action == b.trajectory[i].action);
        CHECK(a.trajectory[i].accepted == b.trajectory[i].accepted);
    }
}

TEST_CASE("greedy evaluation coverage matches an fov replay of its trajectory") {
    const MapGrid map = load_map_file(std::string(GRIDCOVER_MAPS_DIR) + "/smoke6.map");
    TrainConfig c = tiny_config();
    const TrainResult r = train(map, c);
    nn::Workspace ws;
    const EvalResult ev = evaluate_greedy(r.net, map, {1, 1}, 10, c.rewards, ws);

    // replay accepted moves, marking fovs
    const int n = map.size;
    std::vector<std::uint8_t> covered(static_cast<std::size_t>(n) * n, 0);
    auto see = [&](Cell p) {
        for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc) {
                const int rr = p.row + dr, cc = p.col + dc;
                if (rr < 0 || rr >= n || cc < 0 || cc >= n) continue;
                covered[static_cast<std::size_t>(rr) * n + cc] = 1;
            }
    };
    see({1, 1});
    Cell pos{1, 1};
    static constexpr int kDr[4] = {-1, 0, 1, 0};
    static constexpr int kDc[4] = {0, 1, 0, -1};
    int accepted_moves = 0;
    for (const auto& stepinfo : ev.trajectory) {
        CHECK(stepinfo.position == pos);
        if (stepinfo.accepted && stepinfo.action != Action::land) {
            pos = {pos.row + kDr[static_cast<int>(stepinfo.action)],
                   pos.col + kDc[static_cast<int>(stepinfo.action)]};
            see(pos);
            ++accepted_moves;
        }
    }
    int total = 0, hit = 0;
    for (std::size_t i = 0; i < covered.size(); ++i)
        if (map.target[i]) {
            ++total;
            hit += covered[i];
        }
    CHECK(ev.coverage == static_cast<float>(hit) / static_cast<float>(total));
    CHECK(ev.final_state.coverage == covered);
    CHECK(accepted_moves <= static_cast<int>(ev.trajectory.size()));
}

TEST_CASE("evaluation rejects starts off the landing zone and zero budgets") {
    const MapGrid map = parse_map("L.\n..");
    const nn::QNetwork net = landing_net(map, 8.0f);
    nn::Workspace ws;
    CHECK_THROWS_AS(evaluate_greedy(net, map, {1, 1}, 5, RewardParams{}, ws),
                    std::runtime_error);
    CHECK_THROWS_AS(evaluate_greedy(net, map, {0, 0}, 0, RewardParams{}, ws),
                    std::runtime_error);
}

TEST_CASE("a checkpoint from another grid size is rejected at evaluation") {
    const MapGrid small = parse_map("L.\n..");
    const MapGrid big = parse_map("L...\n....\n....\n....");
    const nn::QNetwork net = landing_net(small, 8.0f);
    nn::Workspace ws;
    CHECK_THROWS_WITH_AS(evaluate_greedy(net, big, {0, 0}, 5, RewardParams{}, ws),
                         doctest::Contains("grid size"), std::runtime_error);
}
