#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gridcover/env.hpp"
#include "env_oracle.hpp"

using namespace gridcover;
using testing::oracle_return;
using testing::random_map;

TEST_CASE("fov clips at corners and edges") {
    CHECK(fov_cells({5, 5}, 10).count == 9);
    CHECK(fov_cells({0, 0}, 10).count == 4);
    CHECK(fov_cells({0, 5}, 10).count == 6);
    CHECK(fov_cells({9, 9}, 10).count == 4);
    const FovSpan corner = fov_cells({0, 0}, 10);
    for (int i = 0; i < corner.count; ++i) {
        CHECK(corner.cells[i].row <= 1);
        CHECK(corner.cells[i].col <= 1);
    }
}

TEST_CASE("reset puts the agent on the single start cell with budget in range") {
    const MapGrid m = parse_map("..L\n...\n...");
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        const EnvState s = reset(m, 25, 75, rng);
        CHECK(s.position == Cell{0, 2});
        CHECK(s.budget >= 25);
        CHECK(s.budget <= 75);
        CHECK_FALSE(s.safety_flag);
        CHECK_FALSE(s.landed);
    }
}

TEST_CASE("degenerate budget interval always yields that budget") {
    const MapGrid m = parse_map("L.\n..");
    Rng rng(4);
    for (int i = 0; i < 20; ++i) CHECK(reset(m, 10, 10, rng).budget == 10);
}

TEST_CASE("reset start cells are uniform over the landing zone") {
    const MapGrid m = parse_map("LL..\nLL..\n....\n....");
    Rng rng(5);
    int counts[4] = {0, 0, 0, 0};
    const int trials = 10000;
    for (int i = 0; i < trials; ++i) {
        const EnvState s = reset(m, 5, 10, rng);
        counts[s.position.row * 2 + s.position.col] += 1;
    }
    // 4 sigma of a binomial(10000, 1/4)
    const double sigma = std::sqrt(trials * 0.25 * 0.75);
    for (const int c : counts) CHECK(std::fabs(c - 2500.0) < 4.0 * sigma);
}

TEST_CASE("initial fov is covered but pays no reward") {
    const MapGrid m = parse_map("LT\n..");
    Rng rng(6);
    const EnvState s = reset(m, 5, 5, rng);
    // whole 2x2 grid is inside the start fov
    for (const auto v : s.coverage) CHECK(v == 1);
    CHECK(coverage_ratio(s) == 1.0f);
}

TEST_CASE("rejected moves keep position, flag safety, and still cost budget") {
    const MapGrid m = parse_map("L.\n..");
    const RewardParams rp;
    EnvState s = make_state(m, {0, 0}, 5);
    const StepResult r = step(s, Action::north, rp);  // off-grid
    CHECK_FALSE(r.accepted);
    CHECK(s.position == Cell{0, 0});
    CHECK(s.safety_flag);
    CHECK(s.budget == 4);
    CHECK(r.reward == rp.r_mov + rp.r_sc);
}

TEST_CASE("moves into no-fly cells are rejected") {
    const MapGrid m = parse_map("LX\n..");
    EnvState s = make_state(m, {0, 0}, 5);
    const StepResult r = step(s, Action::east, RewardParams{});
    CHECK_FALSE(r.accepted);
    CHECK(s.position == Cell{0, 0});
}

TEST_CASE("an accepted move reveals new target cells at r_cov each") {
    // fov at (1,1) sees the whole 3x3 grid; three targets are outside the
    // start fov at (0,0)... none, so craft: start top-left, targets right col
    const MapGrid m = parse_map("L.T\n..T\n..T");
    const RewardParams rp;
    EnvState s = make_state(m, {0, 0}, 5);
    // start fov covered rows 0-1, cols 0-1: no targets
    const StepResult r = step(s, Action::east, rp);  // to (0,1), fov covers col 2 rows 0-1
    CHECK(r.accepted);
    CHECK(r.reward == rp.r_mov + 2.0f * rp.r_cov);
    CHECK_FALSE(s.safety_flag);
}

TEST_CASE("each target cell pays exactly once") {
    const MapGrid m = parse_map("L.T\n..T\n..T");
    const RewardParams rp;
    EnvState s = make_state(m, {0, 0}, 10);
    float total_cov = 0.0f;
    for (const Action a : {Action::east, Action::west, Action::east, Action::south,
                           Action::east, Action::north}) {
        const StepResult r = step(s, a, rp);
        if (r.accepted) total_cov += r.reward - rp.r_mov;
    }
    CHECK(total_cov <= rp.r_cov * 3.0f + 1e-6f);
    CHECK(coverage_ratio(s) == 1.0f);
}

TEST_CASE("landing succeeds only on start cells and ends the episode") {
    const MapGrid m = parse_map("L.\n..");
    const RewardParams rp;
    EnvState s = make_state(m, {0, 0}, 5);
    StepResult r = step(s, Action::east, rp);
    CHECK(r.accepted);
    r = step(s, Action::land, rp);  // not a landing cell
    CHECK_FALSE(r.accepted);
    CHECK(s.safety_flag);
    CHECK_FALSE(s.landed);
    r = step(s, Action::west, rp);
    r = step(s, Action::land, rp);
    CHECK(r.accepted);
    CHECK(s.landed);
    CHECK(r.terminal);
    CHECK(r.reward == rp.r_mov);
}

TEST_CASE("running out of budget without landing costs r_crash") {
    const MapGrid m = parse_map("L.\n..");
    const RewardParams rp;
    EnvState s = make_state(m, {0, 0}, 1);
    const StepResult r = step(s, Action::east, rp);
    CHECK(r.terminal);
    CHECK_FALSE(s.landed);
    CHECK(r.reward == rp.r_mov + rp.r_crash);
}

TEST_CASE("landing on the last budget unit is not a crash") {
    const MapGrid m = parse_map("L.\n..");
    const RewardParams rp;
    EnvState s = make_state(m, {0, 0}, 1);
    const StepResult r = step(s, Action::land, rp);
    CHECK(r.terminal);
    CHECK(s.landed);
    CHECK(r.reward == rp.r_mov);
}

TEST_CASE("stepping a terminal state is a contract violation") {
    const MapGrid m = parse_map("L.\n..");
    EnvState s = make_state(m, {0, 0}, 1);
    step(s, Action::land, RewardParams{});
    CHECK_THROWS_AS(step(s, Action::north, RewardParams{}), std::logic_error);
}

TEST_CASE("conservation suite over random maps against the replay oracle") {
    Rng rng(42);
    const RewardParams rp;
    for (int episode = 0; episode < 2000; ++episode) {
        const MapGrid m = random_map(rng, 5);
        if (m.start_cells().empty()) continue;
        EnvState s = reset(m, 3, 12, rng);
        const Cell start = s.position;
        const int b0 = s.budget;

        std::vector<Action> actions;
        std::vector<std::uint8_t> prev_cov = s.coverage;
        float total = 0.0f;
        int steps = 0;
        while (!s.terminal()) {
            const Action a = static_cast<Action>(uniform_index(rng, 5));
            actions.push_back(a);
            const StepResult r = step(s, a, rp);
            total += r.reward;
            ++steps;
            // budget conservation and bounds
            CHECK(s.budget == b0 - steps);
            // never on a no-fly cell
            CHECK_FALSE(m.is_no_fly(s.position));
            CHECK(m.in_bounds(s.position));
            // coverage is monotone
            for (std::size_t i = 0; i < s.coverage.size(); ++i)
                CHECK(s.coverage[i] >= prev_cov[i]);
            prev_cov = s.coverage;
        }
        CHECK(steps <= b0);
        if (s.landed) CHECK(m.is_start_land(s.position));
        const float expected = oracle_return(m, start, b0, actions, rp);
        CHECK(total == expected);
    }
}

TEST_CASE("identical seeds give identical trajectories") {
    const MapGrid m = parse_map("LL.\n.X.\nT.T");
    auto run = [&](unsigned seed) {
        Rng rng(seed);
        EnvState s = reset(m, 5, 9, rng);
        std::vector<float> rewards;
        while (!s.terminal()) {
            const Action a = static_cast<Action>(uniform_index(rng, 5));
            rewards.push_back(step(s, a, RewardParams{}).reward);
        }
        return std::pair{rewards, s.coverage};
    };
    CHECK(run(99) == run(99));
}

TEST_CASE("observation encodes channels in order with one-hot position") {
    const MapGrid m = parse_map("L.T\n.X.\nT..");
    EnvState s = make_state(m, {0, 0}, 50);
    const Observation obs = encode_observation(s, 75.0f);
    CHECK(obs.grid_size == 3);
    CHECK(obs.spatial.size() == 3 * 3 * 5);
    CHECK(obs.budget_scalar == 50.0f / 75.0f);
    // channel order: start_land, target, no_fly, coverage, position
    CHECK(obs.spatial[(0 * 3 + 0) * 5 + 0] == 1.0f);
    CHECK(obs.spatial[(0 * 3 + 2) * 5 + 1] == 1.0f);
    CHECK(obs.spatial[(1 * 3 + 1) * 5 + 2] == 1.0f);
    float pos_sum = 0.0f;
    for (int i = 0; i < 9; ++i) pos_sum += obs.spatial[i * 5 + 4];
    CHECK(pos_sum == 1.0f);
    CHECK(obs.spatial[(0 * 3 + 0) * 5 + 4] == 1.0f);
    // fresh reset: coverage channel equals the start fov
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            const bool in_fov = r <= 1 && c <= 1;
            CHECK(obs.spatial[(r * 3 + c) * 5 + 3] == (in_fov ? 1.0f : 0.0f));
        }
}

TEST_CASE("packed observations unpack to the exact float encoding") {
    Rng rng(17);
    for (int iter = 0; iter < 100; ++iter) {
        const MapGrid m = random_map(rng, 6);
        if (m.start_cells().empty()) continue;
        EnvState s = reset(m, 2, 9, rng);
        for (int k = 0; k < 3 && !s.terminal(); ++k)
            step(s, static_cast<Action>(uniform_index(rng, 5)), RewardParams{});
        if (s.landed) continue;
        const Observation obs = encode_observation(s, 9.0f);
        const PackedObs packed = pack_observation(s, 9.0f);
        std::vector<float> unpacked(obs.spatial.size());
        unpack_observation(packed, 6, unpacked.data());
        CHECK(unpacked == obs.spatial);
        CHECK(packed.budget_scalar == obs.budget_scalar);
    }
}
