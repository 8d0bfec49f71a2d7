#include "gossicrypt/topology.hpp"

#include <cmath>
#include <stdexcept>

namespace gossicrypt::sim {

GridTopology GridTopology::build(int n) {
    if (n <= 0) throw std::invalid_argument("node count must be positive");
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
    if (side * side != n) throw std::invalid_argument("node count is not a perfect square");
    if (n >= (1 << 16)) throw std::invalid_argument("node count must fit 16-bit ids");
    return GridTopology(side);
}

std::array<NodeId, 4> GridTopology::neighbors(NodeId id) const {
    const Coord c = coord(id);
    return {id_at(c.x + 1, c.y), id_at(c.x - 1, c.y), id_at(c.x, c.y + 1), id_at(c.x, c.y - 1)};
}

namespace {

// Signed wrapped displacement along one axis: the shortest step count and its
// direction; `tie` reports the even-side ambiguity (both ways equally short).
struct AxisMove {
    int steps = 0;
    int dir = 0;
    bool tie = false;
};

AxisMove axis_move(int from, int to, int side) {
    const int fwd = ((to - from) % side + side) % side;
    const int bwd = side - fwd;
    if (fwd == 0) return {0, 0, false};
    if (fwd < bwd) return {fwd, +1, false};
    if (bwd < fwd) return {bwd, -1, false};
    return {fwd, +1, true};
}

}  // namespace

int GridTopology::distance(NodeId a, NodeId b) const {
    const Coord ca = coord(a), cb = coord(b);
    return axis_move(ca.x, cb.x, side_).steps + axis_move(ca.y, cb.y, side_).steps;
}

std::vector<NodeId> GridTopology::shortest_path(NodeId a, NodeId b, Rng& rng) const {
    const Coord ca = coord(a), cb = coord(b);
    AxisMove mx = axis_move(ca.x, cb.x, side_);
    AxisMove my = axis_move(ca.y, cb.y, side_);
    if (mx.tie && rng.bernoulli(0.5)) mx.dir = -mx.dir;
    if (my.tie && rng.bernoulli(0.5)) my.dir = -my.dir;

    std::vector<NodeId> path;
    path.reserve(static_cast<std::size_t>(mx.steps + my.steps) + 1);
    int x = ca.x, y = ca.y;
    path.push_back(a);
    int rx = mx.steps, ry = my.steps;
    while (rx + ry > 0) {
        // Choosing the x axis with probability rx/(rx+ry) makes the sampled
        // staircase uniform over all C(rx+ry, rx) shortest paths.
        if (rng.below(static_cast<std::uint64_t>(rx + ry)) < static_cast<std::uint64_t>(rx)) {
            x += mx.dir;
            --rx;
        } else {
            y += my.dir;
            --ry;
        }
        path.push_back(id_at(x, y));
    }
    return path;
}

std::vector<NodeId> GridTopology::nodes_at_distance(NodeId from, int d) const {
    std::vector<NodeId> out;
    for (int id = 0; id < n(); ++id)
        if (distance(from, static_cast<NodeId>(id)) == d) out.push_back(static_cast<NodeId>(id));
    return out;
}

}  // namespace gossicrypt::sim
