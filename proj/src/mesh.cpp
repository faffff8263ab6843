#include "qfreq/mesh.hpp"

#include <cmath>
#include <queue>
#include <stdexcept>
#include <utility>

namespace qfreq {

namespace {

void build_edges_and_boundary(Mesh& m) {
    m.edges.clear();
    m.edge_weight.clear();
    m.boundary.assign(m.n_nodes(), false);
    if (m.dim == 1) {
        for (int i = 0; i + 1 < m.nx; ++i) {
            m.edges.push_back({i, i + 1, 0});
            m.edge_weight.push_back(m.h);
        }
        m.boundary.front() = true;
        m.boundary.back() = true;
        return;
    }
    // Share of a grid cell that lies in the domain: 1 when all four corners
    // are kept, else (disk rim) the sampled area fraction inside the circle.
    // Keeps the per-axis edge weights a Riemann sum of the domain area.
    auto cell_fraction = [&](int ci, int cj) -> double {
        if (ci < 0 || cj < 0 || ci + 1 >= m.nx || cj + 1 >= m.ny) return 0.0;
        const int in = int(m.node_at(ci, cj) >= 0) + int(m.node_at(ci + 1, cj) >= 0) +
                       int(m.node_at(ci, cj + 1) >= 0) + int(m.node_at(ci + 1, cj + 1) >= 0);
        if (in == 4) return 1.0;
        if (in == 0 || m.kind != MeshKind::disk) return 0.0;
        const double x0 = m.ax + m.h * ci, y0 = m.ay + m.h * cj;
        const double r2 = m.radius * m.radius * (1.0 + 1e-12);
        int hits = 0;
        for (int sj = 0; sj < 8; ++sj)
            for (int si = 0; si < 8; ++si) {
                const double x = x0 + m.h * (si + 0.5) / 8.0 - m.cx;
                const double y = y0 + m.h * (sj + 0.5) / 8.0 - m.cy;
                if (x * x + y * y <= r2) ++hits;
            }
        return hits / 64.0;
    };
    // grid index of the horizontal / vertical edge starting at (i, j)
    std::vector<int> eh(std::size_t(m.nx) * m.ny, -1), ev(std::size_t(m.nx) * m.ny, -1);
    for (int j = 0; j < m.ny; ++j) {
        for (int i = 0; i < m.nx; ++i) {
            const int n = m.node_at(i, j);
            if (n < 0) continue;
            const int right = (i + 1 < m.nx) ? m.node_at(i + 1, j) : -1;
            const int up = (j + 1 < m.ny) ? m.node_at(i, j + 1) : -1;
            if (right >= 0) {
                eh[std::size_t(j) * m.nx + i] = int(m.edges.size());
                m.edges.push_back({n, right, 0});
                m.edge_weight.push_back(0.0);
            }
            if (up >= 0) {
                ev[std::size_t(j) * m.nx + i] = int(m.edges.size());
                m.edges.push_back({n, up, 1});
                m.edge_weight.push_back(0.0);
            }
            const int left = (i > 0) ? m.node_at(i - 1, j) : -1;
            const int down = (j > 0) ? m.node_at(i, j - 1) : -1;
            if (left < 0 || right < 0 || up < 0 || down < 0) m.boundary[n] = true;
        }
    }
    // Each cell spreads its area over the present edges of each axis family,
    // so the family totals Riemann-sum the domain even along the rim.
    const double cell_area = m.h * m.h;
    for (int cj = 0; cj + 1 < m.ny; ++cj)
        for (int ci = 0; ci + 1 < m.nx; ++ci) {
            const double frac = cell_fraction(ci, cj);
            if (frac <= 0.0) continue;
            const int hb = eh[std::size_t(cj) * m.nx + ci];
            const int ht = eh[std::size_t(cj + 1) * m.nx + ci];
            const int vl = ev[std::size_t(cj) * m.nx + ci];
            const int vr = ev[std::size_t(cj) * m.nx + ci + 1];
            for (const auto& pair : {std::pair<int, int>{hb, ht}, {vl, vr}}) {
                const int k = int(pair.first >= 0) + int(pair.second >= 0);
                if (k == 0) continue;
                const double share = cell_area * frac / k;
                if (pair.first >= 0) m.edge_weight[pair.first] += share;
                if (pair.second >= 0) m.edge_weight[pair.second] += share;
            }
        }
}

void check_connected(const Mesh& m) {
    if (m.n_nodes() == 0) throw std::invalid_argument("mesh has no nodes");
    std::vector<char> seen(m.n_nodes(), 0);
    std::vector<std::vector<int>> adj(m.n_nodes());
    for (const Edge& e : m.edges) {
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
    }
    std::queue<int> bfs;
    bfs.push(0);
    seen[0] = 1;
    std::size_t count = 1;
    while (!bfs.empty()) {
        const int v = bfs.front();
        bfs.pop();
        for (int w : adj[v])
            if (!seen[w]) {
                seen[w] = 1;
                ++count;
                bfs.push(w);
            }
    }
    if (count != m.n_nodes()) throw std::invalid_argument("mesh mask is disconnected");
}

}  // namespace

Mesh make_interval_mesh(double a, double b, int n) {
    if (n < 2 || !(b > a)) throw std::invalid_argument("interval mesh needs n >= 2, b > a");
    Mesh m;
    m.kind = MeshKind::interval;
    m.dim = 1;
    m.ax = a;
    m.bx = b;
    m.nx = n;
    m.ny = 1;
    m.h = (b - a) / double(n - 1);
    m.coords.resize(n);
    m.node_of_grid.resize(n);
    m.grid_of_node.resize(n);
    for (int i = 0; i < n; ++i) {
        m.coords[i] = {a + m.h * i, 0.0};
        m.node_of_grid[i] = i;
        m.grid_of_node[i] = i;
    }
    build_edges_and_boundary(m);
    return m;
}

Mesh make_rect_mesh(double ax, double bx, double ay, double by, int nx, int ny) {
    if (nx < 2 || ny < 2 || !(bx > ax) || !(by > ay))
        throw std::invalid_argument("rect mesh needs nx,ny >= 2 and positive extents");
    Mesh m;
    m.kind = MeshKind::rect;
    m.dim = 2;
    m.ax = ax;
    m.bx = bx;
    m.ay = ay;
    m.by = by;
    m.nx = nx;
    m.ny = ny;
    const double hx = (bx - ax) / double(nx - 1);
    const double hy = (by - ay) / double(ny - 1);
    if (std::abs(hx - hy) > 1e-12 * (std::abs(hx) + std::abs(hy)))
        throw std::invalid_argument("rect mesh spacing must match along both axes");
    m.h = hx;
    m.node_of_grid.resize(std::size_t(nx) * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int id = int(m.coords.size());
            m.node_of_grid[std::size_t(j) * nx + i] = id;
            m.coords.push_back({ax + hx * i, ay + hy * j});
            m.grid_of_node.push_back(j * nx + i);
        }
    build_edges_and_boundary(m);
    return m;
}

Mesh make_disk_mesh(double cx, double cy, double R, int n) {
    if (n < 3 || !(R > 0)) throw std::invalid_argument("disk mesh needs n >= 3, R > 0");
    Mesh m;
    m.kind = MeshKind::disk;
    m.dim = 2;
    m.cx = cx;
    m.cy = cy;
    m.radius = R;
    m.ax = cx - R;
    m.bx = cx + R;
    m.ay = cy - R;
    m.by = cy + R;
    m.nx = n;
    m.ny = n;
    m.h = 2.0 * R / double(n - 1);
    m.node_of_grid.assign(std::size_t(n) * n, -1);
    const double r2 = R * R * (1.0 + 1e-12);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double x = m.ax + m.h * i, y = m.ay + m.h * j;
            const double dx = x - cx, dy = y - cy;
            if (dx * dx + dy * dy <= r2) {
                m.node_of_grid[std::size_t(j) * n + i] = int(m.coords.size());
                m.coords.push_back({x, y});
                m.grid_of_node.push_back(j * n + i);
            }
        }
    build_edges_and_boundary(m);
    check_connected(m);
    return m;
}

}  // namespace qfreq
