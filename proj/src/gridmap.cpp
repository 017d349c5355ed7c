#include "gridcover/gridmap.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gridcover {

std::vector<Cell> MapGrid::start_cells() const {
    std::vector<Cell> cells;
    for (int r = 0; r < size; ++r)
        for (int c = 0; c < size; ++c)
            if (start_land[static_cast<std::size_t>(r) * size + c]) cells.push_back({r, c});
    return cells;
}

int MapGrid::target_count() const {
    int n = 0;
    for (const auto v : target) n += v;
    return n;
}

namespace {

struct Channels {
    bool start_land, target, no_fly;
};

Channels decode_char(char ch, int row, int col) {
    switch (ch) {
        case '.': return {false, false, false};
        case 'L': return {true, false, false};
        case 'T': return {false, true, false};
        case 'X': return {false, false, true};
        case 'Y': return {false, true, true};
        case 'M': return {true, true, false};
        default:
            throw std::runtime_error("map: unknown character '" + std::string(1, ch) +
                                     "' at row " + std::to_string(row) + ", col " +
                                     std::to_string(col));
    }
}

char encode_cell(const MapGrid& m, std::size_t i) {
    const bool l = m.start_land[i], t = m.target[i], x = m.no_fly[i];
    if (l && t) return 'M';
    if (l) return 'L';
    if (t && x) return 'Y';
    if (t) return 'T';
    if (x) return 'X';
    return '.';
}

}  // namespace

MapGrid parse_map(std::string_view text) {
    std::vector<std::string> rows;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos
                                                     ? std::string_view::npos
                                                     : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        rows.emplace_back(line);
    }
    if (rows.empty()) throw std::runtime_error("map: no grid lines found");

    const std::size_t n = rows.size();
    for (std::size_t r = 0; r < n; ++r)
        if (rows[r].size() != n)
            throw std::runtime_error("map: grid is not square (row " +
                                     std::to_string(r) + " has " +
                                     std::to_string(rows[r].size()) + " cells, expected " +
                                     std::to_string(n) + ")");

    MapGrid m;
    m.size = static_cast<int>(n);
    m.start_land.assign(n * n, 0);
    m.target.assign(n * n, 0);
    m.no_fly.assign(n * n, 0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const Channels ch = decode_char(rows[r][c], static_cast<int>(r),
                                            static_cast<int>(c));
            m.start_land[r * n + c] = ch.start_land;
            m.target[r * n + c] = ch.target;
            m.no_fly[r * n + c] = ch.no_fly;
        }
    }
    const std::string err = validate_map(m);
    if (!err.empty()) throw std::runtime_error("map: " + err);
    return m;
}

std::string serialize_map(const MapGrid& map) {
    std::string out;
    const std::size_t n = static_cast<std::size_t>(map.size);
    out.reserve(n * (n + 1));
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) out.push_back(encode_cell(map, r * n + c));
        out.push_back('\n');
    }
    return out;
}

MapGrid load_map_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open map file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_map(ss.str());
}

std::string validate_map(const MapGrid& map) {
    const std::size_t n = static_cast<std::size_t>(map.size);
    if (map.start_land.size() != n * n || map.target.size() != n * n ||
        map.no_fly.size() != n * n)
        return "channel size does not match grid size";
    bool any_start = false;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const std::size_t i = r * n + c;
            if (map.start_land[i] && map.no_fly[i])
                return "start/land cell is also a no-fly cell at row " +
                       std::to_string(r) + ", col " + std::to_string(c);
            any_start = any_start || map.start_land[i];
        }
    }
    if (!any_start) return "map has no start/land cells";
    return "";
}

}  // namespace gridcover
