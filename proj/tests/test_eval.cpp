#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "gridcover/eval.hpp"

using namespace gridcover;
namespace fs = std::filesystem;

namespace {

nn::QNetwork const_q_net(int n, const std::array<float, 5>& q, float norm) {
    nn::NetworkArch arch;
    arch.grid_size = n;
    arch.conv_layers = {{1, 1}};
    arch.dense_layers = {5};
    arch.budget_norm = norm;
    Rng rng(0);
    nn::QNetwork net = nn::init_network(arch, rng);
    for (auto& t : net.params) std::fill(t.data.begin(), t.data.end(), 0.0f);
    std::copy(q.begin(), q.end(), net.params.back().data.begin());
    return net;
}

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
    std::size_t count = 0, pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

}  // namespace

TEST_CASE("a net that always lands gives landing ratio one in one step") {
    const MapGrid map = load_map_file(std::string(GRIDCOVER_MAPS_DIR) + "/smoke6.map");
    const auto net = const_q_net(6, {0, 0, 0, 0, 1}, 20.0f);
    const SweepResult sweep = landing_ratio_sweep(net, map, 10, 20, RewardParams{});
    CHECK(sweep.landing_ratio == 1.0f);
    CHECK(sweep.rows.size() == map.start_cells().size() * 11u);
    for (const auto& row : sweep.rows) {
        CHECK(row.landed);
        CHECK(row.steps == 1);
    }
}

TEST_CASE("a net that never lands gives landing ratio zero") {
    const MapGrid map = load_map_file(std::string(GRIDCOVER_MAPS_DIR) + "/smoke6.map");
    const auto net = const_q_net(6, {0, 1, 0, 0, -1}, 20.0f);  // always east
    const SweepResult sweep = landing_ratio_sweep(net, map, 10, 12, RewardParams{});
    CHECK(sweep.landing_ratio == 0.0f);
    for (const auto& row : sweep.rows) CHECK(row.steps == row.budget);
}

TEST_CASE("the sweep covers the exact cross product without duplicates") {
    const MapGrid map = load_map_file(std::string(GRIDCOVER_MAPS_DIR) + "/smoke6.map");
    const auto net = const_q_net(6, {0, 0, 0, 0, 1}, 20.0f);
    const SweepResult sweep = landing_ratio_sweep(net, map, 5, 9, RewardParams{});
    const auto starts = map.start_cells();
    REQUIRE(sweep.rows.size() == starts.size() * 5u);
    std::size_t i = 0;
    for (const Cell start : starts)
        for (int b = 5; b <= 9; ++b, ++i) {
            CHECK(sweep.rows[i].start == start);
            CHECK(sweep.rows[i].budget == b);
        }
}

TEST_CASE("parallel sweep matches the single-threaded sweep") {
    const MapGrid map = load_map_file(std::string(GRIDCOVER_MAPS_DIR) + "/smoke6.map");
    Rng rng(5);
    nn::NetworkArch arch;
    arch.grid_size = 6;
    arch.conv_layers = {{4, 3}};
    arch.dense_layers = {16, 5};
    arch.budget_norm = 20.0f;
    const nn::QNetwork net = nn::init_network(arch, rng);
    const SweepResult one = landing_ratio_sweep(net, map, 8, 16, RewardParams{}, 1);
    const SweepResult four = landing_ratio_sweep(net, map, 8, 16, RewardParams{}, 4);
    REQUIRE(one.rows.size() == four.rows.size());
    for (std::size_t i = 0; i < one.rows.size(); ++i) {
        CHECK(one.rows[i].landed == four.rows[i].landed);
        CHECK(one.rows[i].steps == four.rows[i].steps);
        CHECK(one.rows[i].coverage == four.rows[i].coverage);
    }
    CHECK(one.landing_ratio == four.landing_ratio);
}

TEST_CASE("coverage curve has one point per budget and no gaps") {
    const MapGrid map = load_map_file(std::string(GRIDCOVER_MAPS_DIR) + "/smoke6.map");
    const auto net = const_q_net(6, {0, 0, 0, 0, 1}, 20.0f);
    const auto curve = coverage_curve(net, map, {0, 0}, 4, 19, RewardParams{});
    REQUIRE(curve.size() == 16u);
    for (std::size_t i = 0; i < curve.size(); ++i)
        CHECK(curve[i].budget == 4 + static_cast<int>(i));
}

TEST_CASE("an immediate-landing net pins the curve at the initial fov coverage") {
    const MapGrid map = load_map_file(std::string(GRIDCOVER_MAPS_DIR) + "/smoke6.map");
    const auto net = const_q_net(6, {0, 0, 0, 0, 1}, 20.0f);
    // start (1,1): fov covers rows 0-2 x cols 0-2, no targets (targets sit in cols 3-5)
    const auto curve = coverage_curve(net, map, {1, 1}, 4, 10, RewardParams{});
    for (const auto& p : curve) CHECK(p.coverage == 0.0f);
    CHECK(curve_decreasing_pairs(curve) == 0);
}

TEST_CASE("curve rejects a start cell outside the landing zone") {
    const MapGrid map = load_map_file(std::string(GRIDCOVER_MAPS_DIR) + "/smoke6.map");
    const auto net = const_q_net(6, {0, 0, 0, 0, 1}, 20.0f);
    CHECK_THROWS_AS(coverage_curve(net, map, {5, 5}, 4, 8, RewardParams{}),
                    std::runtime_error);
}

TEST_CASE("empty trajectories render a map with no arrows") {
    const MapGrid map = load_map_file(std::string(GRIDCOVER_MAPS_DIR) + "/smoke6.map");
    const std::vector<std::uint8_t> coverage(36, 0);
    const std::string svg = render_trajectory_svg(map, {}, coverage, 10);
    CHECK(count_occurrences(svg, "<line") == 0);
    CHECK(count_occurrences(svg, "<rect") == 36);
    CHECK(svg.find("0/10 movement") != std::string::npos);
}

TEST_CASE("one accepted move renders exactly one arrow between cell centers") {
    const MapGrid map = parse_map("L.\n..");
    std::vector<std::uint8_t> coverage(4, 1);
    const std::vector<TrajectoryStep> traj = {{{0, 0}, Action::east, true}};
    const std::string svg = render_trajectory_svg(map, traj, coverage, 5);
    CHECK(count_occurrences(svg, "<line") == 1);
    CHECK(svg.find("x1=\"16\" y1=\"16\" x2=\"48\" y2=\"16\"") != std::string::npos);
}

TEST_CASE("rejected actions render no arrow") {
    const MapGrid map = parse_map("L.\n..");
    std::vector<std::uint8_t> coverage(4, 1);
    const std::vector<TrajectoryStep> traj = {
        {{0, 0}, Action::north, false},  // off-grid, rejected
        {{0, 0}, Action::east, true},
        {{0, 1}, Action::land, false},  // not a landing cell
    };
    const std::string svg = render_trajectory_svg(map, traj, coverage, 5);
    int accepted_moves = 0;
    for (const auto& s : traj)
        if (s.accepted && s.action != Action::land) ++accepted_moves;
    CHECK(count_occurrences(svg, "<line") == static_cast<std::size_t>(accepted_moves));
}

TEST_CASE("the landing cell turns white only after an accepted land") {
    const MapGrid map = parse_map("LL\n..");
    std::vector<std::uint8_t> coverage(4, 1);
    const std::vector<TrajectoryStep> landed = {{{0, 0}, Action::east, true},
                                                {{0, 1}, Action::land, true}};
    CHECK(render_trajectory_svg(map, landed, coverage, 5).find("fill=\"#ffffff\"") !=
          std::string::npos);
    const std::vector<TrajectoryStep> crashed = {{{0, 0}, Action::east, true},
                                                 {{0, 1}, Action::south, true}};
    CHECK(render_trajectory_svg(map, crashed, coverage, 5).find("fill=\"#ffffff\"") ==
          std::string::npos);
}

TEST_CASE("rendering is byte-identical for identical inputs") {
    const MapGrid map = load_map_file(std::string(GRIDCOVER_MAPS_DIR) + "/corridor6.map");
    std::vector<std::uint8_t> coverage(36, 0);
    for (int i = 0; i < 18; ++i) coverage[i] = 1;
    const std::vector<TrajectoryStep> traj = {{{0, 0}, Action::south, true},
                                              {{1, 0}, Action::east, true},
                                              {{1, 1}, Action::land, true}};
    CHECK(render_trajectory_svg(map, traj, coverage, 9) ==
          render_trajectory_svg(map, traj, coverage, 9));
}

TEST_CASE("csv outputs carry one row per record") {
    const MapGrid map = load_map_file(std::string(GRIDCOVER_MAPS_DIR) + "/smoke6.map");
    const auto net = const_q_net(6, {0, 0, 0, 0, 1}, 20.0f);
    const fs::path dir = fs::temp_directory_path() / "gridcover_eval_test";
    fs::create_directories(dir);

    const SweepResult sweep = landing_ratio_sweep(net, map, 5, 9, RewardParams{});
    write_sweep_csv(sweep, (dir / "sweep.csv").string());
    std::ifstream in((dir / "sweep.csv").string());
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == sweep.rows.size() + 1);

    const auto curve = coverage_curve(net, map, {0, 0}, 5, 9, RewardParams{});
    write_curve_csv(curve, (dir / "curve.csv").string());
    std::ifstream in2((dir / "curve.csv").string());
    lines = 0;
    while (std::getline(in2, line)) ++lines;
    CHECK(lines == curve.size() + 1);
}
