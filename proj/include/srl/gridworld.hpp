#pragma once

#include <array>
#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace srl {

struct Position {
    int row = 0;
    int col = 0;
    auto operator<=>(const Position&) const = default;
};

// Index order is part of the Q-table file format; do not reorder.
enum class Action : int { Up = 0, Down = 1, Left = 2, Right = 3, Stay = 4 };

inline constexpr int kNumActions = 5;
inline constexpr std::array<Action, kNumActions> kAllActions = {
    Action::Up, Action::Down, Action::Left, Action::Right, Action::Stay};

enum class CellCode : int { OffRoad = 0, Road = 1, Vehicle = 2, Goal = 3 };

// Cross-shaped junction map. Road cells form one connected component; spawn
// points are the road cells on the outer border and double as goal candidates.
struct GridLayout {
    int height = 0;
    int width = 0;
    std::set<Position> road_cells;
    std::vector<Position> spawn_points;
    std::vector<Position> goal_candidates;

    bool in_bounds(Position p) const {
        return p.row >= 0 && p.row < height && p.col >= 0 && p.col < width;
    }
    bool on_road(Position p) const { return road_cells.contains(p); }
};

// What one agent perceives: its own cell plus the 3x3 mask around it.
// step_fraction (step / max_steps) is present only in multi-agent mode.
struct LocalObservation {
    Position own_position;
    std::array<CellCode, 9> mask{};  // row-major, centre = own cell
    std::optional<double> step_fraction;

    bool operator==(const LocalObservation&) const = default;
};

GridLayout build_junction_layout(int arm_length, int arm_width);

// Moves one cell in the action's direction when that cell is road; blocked
// moves (off-grid or off-road) are silent no-ops. Stay always returns pos.
Position apply_action(Position pos, Action act, const GridLayout& layout);

LocalObservation observe(const GridLayout& layout, const std::map<Position, CellCode>& occupied,
                         Position focus, std::optional<double> step_fraction = std::nullopt);

// Canonical discrete state for the tabular learners: deterministic, injective
// over distinct observations, contains no whitespace, excludes step_fraction.
std::string state_key(const LocalObservation& obs);

inline int manhattan(Position a, Position b) {
    int dr = a.row - b.row;
    int dc = a.col - b.col;
    return (dr < 0 ? -dr : dr) + (dc < 0 ? -dc : dc);
}

// Raw one-cell offset, no bounds or road check.
Position neighbour(Position p, Action a);

}  // namespace srl
