// gridcover CLI: train a coverage agent, evaluate landing/coverage metrics,
// render trajectories, validate map files.
//
// Exit codes: 0 ok, 1 usage error, 2 data error, 3 training divergence.

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "gridcover/config.hpp"
#include "gridcover/eval.hpp"
#include "gridcover/gridmap.hpp"
#include "gridcover/kernels.hpp"
#include "gridcover/nn.hpp"
#include "gridcover/trainer.hpp"

namespace fs = std::filesystem;
using namespace gridcover;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitDivergence = 3;

struct BudgetRange {
    int lo = 0;
    int hi = 0;
};

BudgetRange parse_budgets(const std::string& text) {
    const std::size_t colon = text.find(':');
    if (colon == std::string::npos)
        throw std::runtime_error("budgets look like 'lo:hi', got '" + text + "'");
    BudgetRange r;
    auto parse = [&](std::string_view part, int& out) {
        const auto res = std::from_chars(part.data(), part.data() + part.size(), out);
        if (res.ec != std::errc{} || res.ptr != part.data() + part.size())
            throw std::runtime_error("bad budget value '" + std::string(part) + "'");
    };
    parse(std::string_view(text).substr(0, colon), r.lo);
    parse(std::string_view(text).substr(colon + 1), r.hi);
    return r;
}

Cell parse_cell(const std::string& text) {
    const std::size_t comma = text.find(',');
    if (comma == std::string::npos)
        throw std::runtime_error("start cell looks like 'row,col', got '" + text + "'");
    Cell c;
    auto parse = [&](std::string_view part, int& out) {
        const auto res = std::from_chars(part.data(), part.data() + part.size(), out);
        if (res.ec != std::errc{} || res.ptr != part.data() + part.size())
            throw std::runtime_error("bad cell coordinate '" + std::string(part) + "'");
    };
    parse(std::string_view(text).substr(0, comma), c.row);
    parse(std::string_view(text).substr(comma + 1), c.col);
    return c;
}

unsigned default_seed() {
    if (const char* env = std::getenv("GRIDCOVER_SEED")) {
        unsigned v = 0;
        const auto res = std::from_chars(env, env + std::string_view(env).size(), v);
        if (res.ec == std::errc{}) return v;
    }
    return 1;
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

struct TrainArgs {
    std::string map_path;
    std::string config_path;
    std::string out_dir;
    std::vector<std::pair<std::string, std::string>> overrides;
    bool seed_given = false;
    unsigned seed = 0;
};

int run_train(const TrainArgs& args) {
    TrainConfig config =
        args.config_path.empty() ? TrainConfig{} : load_train_config(args.config_path);
    if (!args.map_path.empty()) config.map_path = args.map_path;
    for (const auto& [key, value] : args.overrides)
        apply_config_entry(config, key, value);
    if (args.seed_given)
        config.seed = args.seed;
    else if (args.config_path.empty() || config.seed == TrainConfig{}.seed)
        config.seed = default_seed();
    if (config.map_path.empty())
        throw std::runtime_error("no map given (use --map or the config 'map' key)");

    const MapGrid map = load_map_file(config.map_path);
    fs::create_directories(args.out_dir);

    std::cout << "training on " << config.map_path << " (" << map.size << "x" << map.size
              << "), " << config.episodes << " episodes, seed " << config.seed
              << ", kernels " << kernels::active_ops().name << "\n";

    const TrainResult result =
        train(map, config, [](const EpisodeRecord& ep, const EvalRecord& ev) {
            std::cout << "episode " << ep.episode << "  return " << ep.episode_return
                      << "  landed " << (ep.landed ? 1 : 0) << "  coverage "
                      << ep.coverage << "  eval_return " << ev.greedy_return << "\n";
        });

    const fs::path out(args.out_dir);
    nn::save_checkpoint(result.net, (out / "ckpt").string());
    write_episode_csv(result.log, (out / "episodes.csv").string());
    write_eval_csv(result.log, (out / "evals.csv").string());
    write_text_file(out / "effective.cfg", effective_config_text(config));
    std::cout << "wrote " << (out / "ckpt").string() << ", episodes.csv, evals.csv, "
              << "effective.cfg\n";
    return 0;
}

void check_net_map(const nn::QNetwork& net, const MapGrid& map) {
    if (net.arch.grid_size != map.size)
        throw std::runtime_error("checkpoint grid size " +
                                 std::to_string(net.arch.grid_size) +
                                 " does not match map size " + std::to_string(map.size));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gridcover: power-constrained coverage path planning with a DDQN"};
    app.require_subcommand(1);

    // train
    TrainArgs train_args;
    auto* cmd_train = app.add_subcommand("train", "train an agent on a map");
    cmd_train->add_option("--map", train_args.map_path, "map file");
    cmd_train->add_option("--config", train_args.config_path, "key = value config file");
    cmd_train->add_option("--out", train_args.out_dir, "output directory")->required();
    auto* seed_opt = cmd_train->add_option("--seed", train_args.seed, "RNG seed");
    std::string train_episodes, train_budgets;
    cmd_train->add_option("--episodes", train_episodes, "episode count override");
    cmd_train->add_option("--budgets", train_budgets, "budget range lo:hi override");

    // eval sweep | curve
    auto* cmd_eval = app.add_subcommand("eval", "evaluate a trained agent");
    cmd_eval->require_subcommand(1);
    std::string eval_ckpt, eval_map, eval_budgets, eval_out, curve_start;
    int sweep_jobs = 1;
    auto* cmd_sweep = cmd_eval->add_subcommand(
        "sweep", "greedy landing ratio over all start cells and budgets");
    cmd_sweep->add_option("--ckpt", eval_ckpt, "checkpoint file")->required();
    cmd_sweep->add_option("--map", eval_map, "map file")->required();
    cmd_sweep->add_option("--budgets", eval_budgets, "budget range lo:hi")->required();
    cmd_sweep->add_option("--out", eval_out, "CSV output path");
    cmd_sweep->add_option("--jobs", sweep_jobs, "worker threads");
    auto* cmd_curve = cmd_eval->add_subcommand(
        "curve", "coverage ratio vs budget from a fixed start cell");
    cmd_curve->add_option("--ckpt", eval_ckpt, "checkpoint file")->required();
    cmd_curve->add_option("--map", eval_map, "map file")->required();
    cmd_curve->add_option("--budgets", eval_budgets, "budget range lo:hi")->required();
    cmd_curve->add_option("--start", curve_start, "start cell row,col")->required();
    cmd_curve->add_option("--out", eval_out, "CSV output path");

    // render
    auto* cmd_render = app.add_subcommand("render", "render a greedy trajectory as SVG");
    std::string render_ckpt, render_map, render_start, render_out = "trajectory.svg";
    int render_budget = 0;
    cmd_render->add_option("--ckpt", render_ckpt, "checkpoint file")->required();
    cmd_render->add_option("--map", render_map, "map file")->required();
    cmd_render->add_option("--start", render_start, "start cell row,col")->required();
    cmd_render->add_option("--budget", render_budget, "movement budget")->required();
    cmd_render->add_option("--out", render_out, "SVG output path");

    // map-validate
    auto* cmd_validate = app.add_subcommand("map-validate", "parse and check a map file");
    std::string validate_map_path;
    cmd_validate->add_option("map", validate_map_path, "map file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*cmd_train) {
            train_args.seed_given = seed_opt->count() > 0;
            if (!train_episodes.empty())
                train_args.overrides.emplace_back("episodes", train_episodes);
            if (!train_budgets.empty()) {
                const BudgetRange r = parse_budgets(train_budgets);
                train_args.overrides.emplace_back("budget_lo", std::to_string(r.lo));
                train_args.overrides.emplace_back("budget_hi", std::to_string(r.hi));
            }
            return run_train(train_args);
        }
        if (*cmd_sweep) {
            const MapGrid map = load_map_file(eval_map);
            const nn::QNetwork net = nn::load_checkpoint(eval_ckpt);
            check_net_map(net, map);
            const BudgetRange r = parse_budgets(eval_budgets);
            const SweepResult sweep =
                landing_ratio_sweep(net, map, r.lo, r.hi, RewardParams{}, sweep_jobs);
            std::cout << "episodes " << sweep.rows.size() << " ("
                      << map.start_cells().size() << " start cells x " << (r.hi - r.lo + 1)
                      << " budgets)\nlanding ratio " << sweep.landing_ratio << "\n";
            write_sweep_csv(sweep, eval_out.empty() ? "sweep.csv" : eval_out);
            return 0;
        }
        if (*cmd_curve) {
            const MapGrid map = load_map_file(eval_map);
            const nn::QNetwork net = nn::load_checkpoint(eval_ckpt);
            check_net_map(net, map);
            const BudgetRange r = parse_budgets(eval_budgets);
            const auto curve =
                coverage_curve(net, map, parse_cell(curve_start), r.lo, r.hi, RewardParams{});
            std::cout << "curve points " << curve.size() << ", decreasing pairs "
                      << curve_decreasing_pairs(curve) << "\n";
            write_curve_csv(curve, eval_out.empty() ? "curve.csv" : eval_out);
            return 0;
        }
        if (*cmd_render) {
            const MapGrid map = load_map_file(render_map);
            const nn::QNetwork net = nn::load_checkpoint(render_ckpt);
            check_net_map(net, map);
            nn::Workspace ws;
            const EvalResult ev = evaluate_greedy(net, map, parse_cell(render_start),
                                                  render_budget, RewardParams{}, ws);
            write_text_file(render_out,
                            render_trajectory_svg(map, ev.trajectory,
                                                  ev.final_state.coverage, render_budget));
            std::cout << "wrote " << render_out << " (landed " << (ev.landed ? 1 : 0)
                      << ", coverage " << ev.coverage << ", steps "
                      << ev.trajectory.size() << "/" << render_budget << ")\n";
            return 0;
        }
        if (*cmd_validate) {
            const MapGrid map = load_map_file(validate_map_path);
            int starts = 0, targets = 0, no_fly = 0;
            for (std::size_t i = 0; i < map.start_land.size(); ++i) {
                starts += map.start_land[i];
                targets += map.target[i];
                no_fly += map.no_fly[i];
            }
            std::cout << "ok: " << map.size << "x" << map.size << ", " << starts
                      << " start/land, " << targets << " target, " << no_fly
                      << " no-fly cells\n";
            return 0;
        }
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
