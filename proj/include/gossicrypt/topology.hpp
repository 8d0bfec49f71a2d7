#ifndef GOSSICRYPT_TOPOLOGY_HPP
#define GOSSICRYPT_TOPOLOGY_HPP

#include <array>
#include <vector>

#include "gossicrypt/protocol.hpp"
#include "gossicrypt/rng.hpp"

namespace gossicrypt::sim {

using protocol::NodeId;

// sqrt(N) x sqrt(N) lattice projected on a torus: moving out of one side
// enters on the opposite side, so every cell has four neighbors and there
// are no boundary effects. Node ids are row-major cell indices.
class GridTopology {
   public:
    // Throws std::invalid_argument when n is not a perfect square.
    static GridTopology build(int n);

    int side() const { return side_; }
    int n() const { return side_ * side_; }

    struct Coord {
        int x = 0, y = 0;
    };

    Coord coord(NodeId id) const { return {id % side_, id / side_}; }
    NodeId id_at(int x, int y) const {
        const int s = side_;
        return static_cast<NodeId>(((y % s + s) % s) * s + ((x % s + s) % s));
    }

    // Order: +x, -x, +y, -y.
    std::array<NodeId, 4> neighbors(NodeId id) const;

    // Shortest-path hop count under the wraparound metric.
    int distance(NodeId a, NodeId b) const;
    int max_distance() const { return 2 * (side_ / 2); }

    // A hop-count-minimal path from a to b, both endpoints included, sampled
    // uniformly over all shortest paths (monotone staircases; wrap-direction
    // ties are a fair coin).
    std::vector<NodeId> shortest_path(NodeId a, NodeId b, Rng& rng) const;

    std::vector<NodeId> nodes_at_distance(NodeId from, int d) const;

   private:
    explicit GridTopology(int side) : side_(side) {}
    int side_;
};

}  // namespace gossicrypt::sim

#endif
