#include "srl/gridworld.hpp"

#include <string>

#include "srl/errors.hpp"

namespace srl {

Position neighbour(Position p, Action a) {
    switch (a) {
        case Action::Up: return {p.row - 1, p.col};
        case Action::Down: return {p.row + 1, p.col};
        case Action::Left: return {p.row, p.col - 1};
        case Action::Right: return {p.row, p.col + 1};
        case Action::Stay: return p;
    }
    return p;
}

GridLayout build_junction_layout(int arm_length, int arm_width) {
    if (arm_length < 2 || (arm_width != 1 && arm_width != 2)) {
        throw ConfigError("build_junction_layout: need arm_length >= 2 and arm_width in {1,2}, got " +
                          std::to_string(arm_length) + ", " + std::to_string(arm_width));
    }
    GridLayout layout;
    const int side = 2 * arm_length + arm_width;
    layout.height = side;
    layout.width = side;

    // Horizontal and vertical bands of width arm_width crossing at the centre.
    for (int band = 0; band < arm_width; ++band) {
        const int k = arm_length + band;
        for (int c = 0; c < side; ++c) layout.road_cells.insert({k, c});
        for (int r = 0; r < side; ++r) layout.road_cells.insert({r, k});
    }

    for (const Position& p : layout.road_cells) {
        if (p.row == 0 || p.row == side - 1 || p.col == 0 || p.col == side - 1) {
            layout.spawn_points.push_back(p);
        }
    }
    layout.goal_candidates = layout.spawn_points;
    return layout;
}

Position apply_action(Position pos, Action act, const GridLayout& layout) {
    if (!layout.on_road(pos)) {
        throw ContractError("apply_action: position (" + std::to_string(pos.row) + "," +
                            std::to_string(pos.col) + ") is not on the road");
    }
    if (act == Action::Stay) return pos;
    const Position next = neighbour(pos, act);
    return layout.on_road(next) ? next : pos;
}

LocalObservation observe(const GridLayout& layout, const std::map<Position, CellCode>& occupied,
                         Position focus, std::optional<double> step_fraction) {
    if (!layout.on_road(focus)) {
        throw ContractError("observe: focus (" + std::to_string(focus.row) + "," +
                            std::to_string(focus.col) + ") is not on the road");
    }
    LocalObservation obs;
    obs.own_position = focus;
    obs.step_fraction = step_fraction;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const Position cell{focus.row - 1 + i, focus.col - 1 + j};
            CellCode code = CellCode::OffRoad;
            if (layout.in_bounds(cell) && layout.on_road(cell)) {
                code = CellCode::Road;
                if (auto it = occupied.find(cell); it != occupied.end()) code = it->second;
            }
            obs.mask[static_cast<std::size_t>(i * 3 + j)] = code;
        }
    }
    return obs;
}

namespace {
char code_char(CellCode c) {
    switch (c) {
        case CellCode::OffRoad: return '#';
        case CellCode::Road: return '.';
        case CellCode::Vehicle: return 'V';
        case CellCode::Goal: return 'G';
    }
    return '?';
}
}  // namespace

std::string state_key(const LocalObservation& obs) {
    std::string key = "r" + std::to_string(obs.own_position.row) + "c" +
                      std::to_string(obs.own_position.col) + ":";
    for (CellCode c : obs.mask) key.push_back(code_char(c));
    return key;
}

}  // namespace srl
