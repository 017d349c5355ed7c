#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gridcover {

struct Cell {
    int row = 0;
    int col = 0;
    bool operator==(const Cell&) const = default;
};

// Square grid with three boolean channels. Cell alphabet for the text form:
//   '.' free   'L' start/land   'T' target   'X' no-fly
//   'Y' target + no-fly         'M' target + start/land
// Start/land cells are never no-fly cells; at least one must exist.
struct MapGrid {
    int size = 0;
    std::vector<std::uint8_t> start_land;
    std::vector<std::uint8_t> target;
    std::vector<std::uint8_t> no_fly;

    bool in_bounds(Cell c) const {
        return c.row >= 0 && c.row < size && c.col >= 0 && c.col < size;
    }
    std::size_t index(Cell c) const {
        return static_cast<std::size_t>(c.row) * size + c.col;
    }
    bool is_start_land(Cell c) const { return start_land[index(c)] != 0; }
    bool is_target(Cell c) const { return target[index(c)] != 0; }
    bool is_no_fly(Cell c) const { return no_fly[index(c)] != 0; }

    std::vector<Cell> start_cells() const;
    int target_count() const;

    bool operator==(const MapGrid&) const = default;
};

// Parses a character-grid document. Lines starting with '#' and blank lines
// are ignored. Throws std::runtime_error on a non-square grid, an unknown
// character, a missing start cell, or a start/no-fly clash.
MapGrid parse_map(std::string_view text);

// Emits the bare character grid; parse_map(serialize_map(m)) == m.
std::string serialize_map(const MapGrid& map);

MapGrid load_map_file(const std::string& path);

// Re-checks the channel invariants of an already-built grid. Returns an empty
// string when valid, otherwise a message naming the offending cell.
std::string validate_map(const MapGrid& map);

}  // namespace gridcover
