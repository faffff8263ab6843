#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace qfreq {

using Vec2 = std::array<double, 2>;

enum class MeshKind { interval, rect, disk };

struct Edge {
    int a = -1;
    int b = -1;
    int axis = 0;  // 0 = x, 1 = y
};

// Uniform-spacing node mesh. 1D: an interval. 2D: a rectangle grid or a
// square grid masked to a disk. Node ids are contiguous over kept nodes,
// row-major in the underlying grid.
struct Mesh {
    MeshKind kind = MeshKind::interval;
    int dim = 1;
    double ax = 0, bx = 1, ay = 0, by = 0;
    int nx = 2, ny = 1;
    double cx = 0, cy = 0, radius = 0;  // disk only

    double h = 0;  // spacing, identical along both axes in 2D

    std::vector<Vec2> coords;          // per node
    std::vector<int> node_of_grid;     // flat grid index -> node id, -1 if masked out
    std::vector<int> grid_of_node;     // node id -> flat grid index
    std::vector<Edge> edges;           // axis-aligned, both endpoints kept
    std::vector<double> edge_weight;   // cell volume owned by each edge
    std::vector<bool> boundary;        // per node

    std::size_t n_nodes() const { return coords.size(); }
    int node_at(int i, int j) const { return node_of_grid[std::size_t(j) * nx + i]; }
};

Mesh make_interval_mesh(double a, double b, int n);
Mesh make_rect_mesh(double ax, double bx, double ay, double by, int nx, int ny);
// Square grid over [cx-R, cx+R] x [cy-R, cy+R], n nodes per side, nodes kept
// iff inside the closed disk. The kept set must be edge-connected.
Mesh make_disk_mesh(double cx, double cy, double R, int n);

// 1D edges own their segment, volume h. A 2D edge receives h^2/2 from each
// complete grid cell it bounds: h^2 in the bulk, h^2/2 along the domain rim,
// which is what makes the discrete energy of a smooth sheet converge to the
// continuum integral.

}  // namespace qfreq
