#include "gridcover/eval.hpp"

#include <charconv>
#include <fstream>
#include <thread>

namespace gridcover {

SweepResult landing_ratio_sweep(const nn::QNetwork& net, const MapGrid& map,
                                int budget_lo, int budget_hi,
                                const RewardParams& rewards, int jobs) {
    if (budget_lo < 1 || budget_hi < budget_lo)
        throw std::runtime_error("sweep: invalid budget range");
    const std::vector<Cell> starts = map.start_cells();
    const int budgets = budget_hi - budget_lo + 1;

    SweepResult result;
    result.rows.resize(starts.size() * static_cast<std::size_t>(budgets));
    for (std::size_t si = 0; si < starts.size(); ++si)
        for (int b = 0; b < budgets; ++b) {
            SweepRow& row = result.rows[si * budgets + b];
            row.start = starts[si];
            row.budget = budget_lo + b;
        }

    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(result.rows.size())));
    auto run_range = [&](std::size_t begin, std::size_t end) {
        nn::Workspace ws;
        for (std::size_t i = begin; i < end; ++i) {
            SweepRow& row = result.rows[i];
            const EvalResult ev =
                evaluate_greedy(net, map, row.start, row.budget, rewards, ws);
            row.landed = ev.landed;
            row.steps = static_cast<int>(ev.trajectory.size());
            row.coverage = ev.coverage;
        }
    };
    if (workers == 1) {
        run_range(0, result.rows.size());
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (result.rows.size() + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const std::size_t begin = static_cast<std::size_t>(w) * chunk;
            const std::size_t end = std::min(begin + chunk, result.rows.size());
            if (begin < end) pool.emplace_back(run_range, begin, end);
        }
        for (auto& t : pool) t.join();
    }

    int landed = 0;
    for (const auto& row : result.rows) landed += row.landed ? 1 : 0;
    result.landing_ratio =
        result.rows.empty() ? 0.0f
                            : static_cast<float>(landed) / static_cast<float>(result.rows.size());
    return result;
}

std::vector<CurvePoint> coverage_curve(const nn::QNetwork& net, const MapGrid& map,
                                       Cell start, int budget_lo, int budget_hi,
                                       const RewardParams& rewards) {
    if (!map.in_bounds(start) || !map.is_start_land(start))
        throw std::runtime_error("curve: start cell is not a start/land cell");
    if (budget_lo < 1 || budget_hi < budget_lo)
        throw std::runtime_error("curve: invalid budget range");
    std::vector<CurvePoint> curve;
    nn::Workspace ws;
    for (int b = budget_lo; b <= budget_hi; ++b) {
        const EvalResult ev = evaluate_greedy(net, map, start, b, rewards, ws);
        curve.push_back({b, ev.coverage});
    }
    return curve;
}

int curve_decreasing_pairs(const std::vector<CurvePoint>& curve) {
    int drops = 0;
    for (std::size_t i = 1; i < curve.size(); ++i)
        if (curve[i].coverage < curve[i - 1].coverage) ++drops;
    return drops;
}

namespace {

constexpr int kCellPx = 32;

struct CellColors {
    const char* base;
    const char* covered;
};

// Palette: no-fly red, start/land blue, target green, target+no-fly olive,
// free grey; covered cells use the lightened variant.
CellColors cell_colors(const MapGrid& m, std::size_t i) {
    const bool l = m.start_land[i] != 0, t = m.target[i] != 0, x = m.no_fly[i] != 0;
    if (l) return {"#1565c0", "#64b5f6"};
    if (t && x) return {"#9e9d24", "#dce775"};
    if (t) return {"#2e7d32", "#81c784"};
    if (x) return {"#c62828", "#e57373"};
    return {"#eceff1", "#fafafa"};
}

void append_int(std::string& out, long long v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

void append_rect(std::string& out, int x, int y, const char* fill) {
    out += "<rect x=\"";
    append_int(out, x);
    out += "\" y=\"";
    append_int(out, y);
    out += "\" width=\"32\" height=\"32\" fill=\"";
    out += fill;
    out += "\" stroke=\"#607d8b\" stroke-width=\"1\"/>\n";
}

}  // namespace

std::string render_trajectory_svg(const MapGrid& map,
                                  const std::vector<TrajectoryStep>& trajectory,
                                  const std::vector<std::uint8_t>& coverage,
                                  int allocated_budget) {
    const int n = map.size;
    if (coverage.size() != static_cast<std::size_t>(n) * n)
        throw std::runtime_error("render: coverage grid does not match map size");
    const int side = n * kCellPx;

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<!-- palette: no-fly #c62828, start/land #1565c0, target #2e7d32,\n";
    svg += "     target+no-fly #9e9d24, free #eceff1; covered cells lightened;\n";
    svg += "     start cell #ffd600, landing cell #ffffff, trajectory #d50000;\n";
    svg += "     cell size 32 -->\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"";
    append_int(svg, side);
    svg += "\" height=\"";
    append_int(svg, side);
    svg += "\" viewBox=\"0 0 ";
    append_int(svg, side);
    svg += " ";
    append_int(svg, side);
    svg += "\">\n<title>";
    append_int(svg, static_cast<long long>(trajectory.size()));
    svg += "/";
    append_int(svg, allocated_budget);
    svg += " movement</title>\n";
    svg += "<defs><marker id=\"arrow\" viewBox=\"0 0 8 8\" refX=\"7\" refY=\"4\" "
           "markerWidth=\"6\" markerHeight=\"6\" orient=\"auto\">"
           "<path d=\"M0,0 L8,4 L0,8 z\" fill=\"#d50000\"/></marker></defs>\n";

    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * n + c;
            const CellColors colors = cell_colors(map, i);
            append_rect(svg, c * kCellPx, r * kCellPx,
                        coverage[i] ? colors.covered : colors.base);
        }
    }

    if (!trajectory.empty()) {
        const Cell start = trajectory.front().position;
        append_rect(svg, start.col * kCellPx, start.row * kCellPx, "#ffd600");
        const TrajectoryStep& last = trajectory.back();
        if (last.action == Action::land && last.accepted)
            append_rect(svg, last.position.col * kCellPx, last.position.row * kCellPx,
                        "#ffffff");
    }

    static constexpr int kDr[4] = {-1, 0, 1, 0};
    static constexpr int kDc[4] = {0, 1, 0, -1};
    for (const auto& step : trajectory) {
        if (!step.accepted || step.action == Action::land) continue;
        const int a = static_cast<int>(step.action);
        const int x1 = step.position.col * kCellPx + kCellPx / 2;
        const int y1 = step.position.row * kCellPx + kCellPx / 2;
        const int x2 = x1 + kDc[a] * kCellPx;
        const int y2 = y1 + kDr[a] * kCellPx;
        svg += "<line x1=\"";
        append_int(svg, x1);
        svg += "\" y1=\"";
        append_int(svg, y1);
        svg += "\" x2=\"";
        append_int(svg, x2);
        svg += "\" y2=\"";
        append_int(svg, y2);
        svg += "\" stroke=\"#d50000\" stroke-width=\"3\" marker-end=\"url(#arrow)\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

namespace {

std::string fmt_float(float v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

void write_sweep_csv(const SweepResult& sweep, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "start_row,start_col,budget,landed,steps,coverage_ratio\n";
    for (const auto& row : sweep.rows)
        out << row.start.row << ',' << row.start.col << ',' << row.budget << ','
            << (row.landed ? 1 : 0) << ',' << row.steps << ',' << fmt_float(row.coverage)
            << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_curve_csv(const std::vector<CurvePoint>& curve, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "budget,coverage_ratio\n";
    for (const auto& p : curve)
        out << p.budget << ',' << fmt_float(p.coverage) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace gridcover
