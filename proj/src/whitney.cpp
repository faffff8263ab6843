#include "qfreq/whitney.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace qfreq {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kBallShell = 64.0;  // ball radius = kBallShell * M0 * sqrt(2) * l(L)

double sqr(double v) { return v * v; }

std::array<double, 3> unit_normal(const Plane3& pi) {
    const double n = std::sqrt(sqr(pi.normal[0]) + sqr(pi.normal[1]) + sqr(pi.normal[2]));
    if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("plane normal must be a nonzero finite vector");
    return {pi.normal[0] / n, pi.normal[1] / n, pi.normal[2] / n};
}

// One sheet point of the graph with its mass and unit normal.
struct MassPoint {
    double x, y, z;
    double mass;
    double nx, ny, nz;
};

// Sheet points inside the closed ball, sampled on the node lattice extended
// by the constant boundary values. Returns whether any sample fell outside
// the square.
bool collect_ball(const GraphCurrent& T, const std::array<double, 3>& q, double r,
                  std::vector<MassPoint>& out) {
    out.clear();
    const Mesh& m = T.g.mesh;
    const double h = m.h;
    const double r2 = r * r;
    const long long i0 = (long long)std::floor((q[0] - r - m.ax) / h);
    const long long i1 = (long long)std::ceil((q[0] + r - m.ax) / h);
    const long long j0 = (long long)std::floor((q[1] - r - m.ay) / h);
    const long long j1 = (long long)std::ceil((q[1] + r - m.ay) / h);
    const std::size_t sheets = T.sheets();
    bool outside = false;
    for (long long jj = j0; jj <= j1; ++jj) {
        const double y = m.ay + jj * h;
        const double dy2 = sqr(y - q[1]);
        if (dy2 > r2) continue;
        const int cj = (int)std::clamp(jj, 0LL, (long long)m.ny - 1);
        for (long long ii = i0; ii <= i1; ++ii) {
            const double x = m.ax + ii * h;
            const double dxy2 = dy2 + sqr(x - q[0]);
            if (dxy2 > r2) continue;
            const int ci = (int)std::clamp(ii, 0LL, (long long)m.nx - 1);
            const bool in = (ci == ii && cj == jj);
            const int n = m.node_at(ci, cj);
            for (std::size_t s = 0; s < sheets; ++s) {
                const double z = T.g.values[n].values[s];
                if (dxy2 + sqr(z - q[2]) > r2) continue;
                const double gx = in ? T.grad_x[s][n] : 0.0;
                const double gy = in ? T.grad_y[s][n] : 0.0;
                const double dens = std::sqrt(1.0 + gx * gx + gy * gy);
                out.push_back({x, y, z, dens * h * h, -gx / dens, -gy / dens, 1.0 / dens});
                if (!in) outside = true;
            }
        }
    }
    return outside;
}

double excess_of_points(const std::vector<MassPoint>& pts, const std::array<double, 3>& n,
                        double r) {
    double acc = 0.0;
    for (const MassPoint& p : pts) {
        const double d = p.nx * n[0] + p.ny * n[1] + p.nz * n[2];
        acc += p.mass * 2.0 * (1.0 - d * d);
    }
    return acc / (2.0 * kPi * r * r);
}

double height_of_points(const std::vector<MassPoint>& pts, const std::array<double, 3>& n) {
    if (pts.empty()) return 0.0;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const MassPoint& p : pts) {
        const double d = p.x * n[0] + p.y * n[1] + p.z * n[2];
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    return hi - lo;
}

// Top eigenvector of a symmetric 3x3 matrix by cyclic Jacobi rotations.
std::array<double, 3> top_eigenvector(std::array<std::array<double, 3>, 3> a) {
    std::array<std::array<double, 3>, 3> v{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    for (int sweep = 0; sweep < 32; ++sweep) {
        double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
        if (off < 1e-15 * (std::abs(a[0][0]) + std::abs(a[1][1]) + std::abs(a[2][2]) + 1e-300))
            break;
        for (int p = 0; p < 2; ++p)
            for (int q = p + 1; q < 3; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = 0.5 * std::atan2(2.0 * a[p][q], a[q][q] - a[p][p]);
                const double c = std::cos(theta), s = std::sin(theta);
                for (int k = 0; k < 3; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < 3; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (int k = 0; k < 3; ++k) {
                    const double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
    }
    int best = 0;
    for (int k = 1; k < 3; ++k)
        if (a[k][k] > a[best][best]) best = k;
    std::array<double, 3> e{v[0][best], v[1][best], v[2][best]};
    const double n = std::sqrt(sqr(e[0]) + sqr(e[1]) + sqr(e[2]));
    for (double& c : e) c /= n;
    if (e[2] < 0.0 || (e[2] == 0.0 && (e[0] < 0.0 || (e[0] == 0.0 && e[1] < 0.0))))
        for (double& c : e) c = -c;
    return e;
}

std::array<double, 3> plane_from_points(const std::vector<MassPoint>& pts) {
    std::array<std::array<double, 3>, 3> M{{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}};
    for (const MassPoint& p : pts) {
        const double n[3] = {p.nx, p.ny, p.nz};
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) M[r][c] += p.mass * n[r] * n[c];
    }
    return top_eigenvector(M);
}

void check_radius(double r) {
    if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("ball radius must be positive");
}

// Exact 1D squared-distance transform, lower envelope of parabolas.
void dt_1d(std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
           std::vector<double>& z) {
    const int n = (int)f.size();
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    for (int q = 1; q < n; ++q) {
        double s;
        while (true) {
            s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * (q - v[k]));
            if (s <= z[k] && k > 0) {
                --k;
            } else {
                break;
            }
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        d[q] = double(q - v[k]) * (q - v[k]) + f[v[k]];
    }
}

// Euclidean distance (mesh units) from every node to the nearest active node.
// A node is active when its sheets are spread apart or differ from any
// lattice neighbor; balls containing no active node see one constant flat
// sheet, with excess and height exactly zero.
std::vector<double> active_distance(const GraphCurrent& T) {
    const Mesh& m = T.g.mesh;
    const int nx = m.nx, ny = m.ny;
    const double inf = 1e30;
    std::vector<double> f((std::size_t)nx * ny, inf);
    const std::size_t sheets = T.sheets();
    auto differs = [&](int a, int b) {
        for (std::size_t s = 0; s < sheets; ++s)
            if (T.g.values[a].values[s] != T.g.values[b].values[s]) return true;
        return false;
    };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int n = m.node_at(i, j);
            bool act = T.g.values[n].values.back() != T.g.values[n].values.front();
            if (!act && i + 1 < nx) act = differs(n, m.node_at(i + 1, j));
            if (!act && j + 1 < ny) act = differs(n, m.node_at(i, j + 1));
            if (act) {
                f[(std::size_t)j * nx + i] = 0.0;
                if (i + 1 < nx) f[(std::size_t)j * nx + i + 1] = 0.0;
                if (j + 1 < ny) f[(std::size_t)(j + 1) * nx + i] = 0.0;
            }
        }
    const int side = std::max(nx, ny);
    std::vector<double> col(side), out(side), z(side + 1);
    std::vector<int> v(side);
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) col[j] = f[(std::size_t)j * nx + i];
        col.resize(ny);
        out.resize(ny);
        dt_1d(col, out, v, z);
        for (int j = 0; j < ny; ++j) f[(std::size_t)j * nx + i] = out[j];
        col.resize(side);
        out.resize(side);
    }
    std::vector<double> row(nx), rout(nx);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) row[i] = f[(std::size_t)j * nx + i];
        dt_1d(row, rout, v, z);
        for (int i = 0; i < nx; ++i) f[(std::size_t)j * nx + i] = std::sqrt(rout[i]) * m.h;
    }
    return f;
}

std::uint64_t pack_idx(std::int64_t ix, std::int64_t iy) {
    return (std::uint64_t(ix) << 32) | std::uint64_t(iy);
}

}  // namespace

double projector_distance2(const Plane3& a, const Plane3& b) {
    const std::array<double, 3> na = unit_normal(a), nb = unit_normal(b);
    const double d = na[0] * nb[0] + na[1] * nb[1] + na[2] * nb[2];
    return 2.0 * (1.0 - d * d);
}

GraphCurrent make_graph_current(SampledField g) {
    const Mesh& m = g.mesh;
    if (m.kind != MeshKind::rect || m.dim != 2)
        throw std::invalid_argument("graph current needs a rectangle grid");
    if (m.nx != m.ny || m.nx < 3) throw std::invalid_argument("graph current needs a square grid, at least 3 nodes per side");
    const double tol = 1e-9;
    if (std::abs(m.ax + 4.0) > tol || std::abs(m.bx - 4.0) > tol || std::abs(m.ay + 4.0) > tol ||
        std::abs(m.by - 4.0) > tol)
        throw std::invalid_argument("graph current lives over [-4,4]^2");
    if (g.values.size() != m.n_nodes()) throw std::invalid_argument("field does not match its mesh");
    const std::size_t sheets = g.q();
    if (sheets == 0) throw std::invalid_argument("graph current needs at least one sheet");
    for (QPoint& t : g.values) {
        if (t.q() != sheets) throw std::invalid_argument("inconsistent sheet count");
        std::sort(t.values.begin(), t.values.end());
        for (double vv : t.values)
            if (!std::isfinite(vv)) throw std::invalid_argument("sheet heights must be finite");
    }
    GraphCurrent T;
    T.g = std::move(g);
    const Mesh& mm = T.g.mesh;
    T.grad_x.assign(sheets, std::vector<double>(mm.n_nodes(), 0.0));
    T.grad_y.assign(sheets, std::vector<double>(mm.n_nodes(), 0.0));
    T.density.assign(sheets, std::vector<double>(mm.n_nodes(), 1.0));
    auto val = [&](int i, int j, std::size_t s) { return T.g.values[mm.node_at(i, j)].values[s]; };
    for (int j = 0; j < mm.ny; ++j)
        for (int i = 0; i < mm.nx; ++i) {
            const int n = mm.node_at(i, j);
            for (std::size_t s = 0; s < sheets; ++s) {
                double gx, gy;
                if (i == 0)
                    gx = (val(1, j, s) - val(0, j, s)) / mm.h;
                else if (i == mm.nx - 1)
                    gx = (val(i, j, s) - val(i - 1, j, s)) / mm.h;
                else
                    gx = (val(i + 1, j, s) - val(i - 1, j, s)) / (2.0 * mm.h);
                if (j == 0)
                    gy = (val(i, 1, s) - val(i, 0, s)) / mm.h;
                else if (j == mm.ny - 1)
                    gy = (val(i, j, s) - val(i, j - 1, s)) / mm.h;
                else
                    gy = (val(i, j + 1, s) - val(i, j - 1, s)) / (2.0 * mm.h);
                T.grad_x[s][n] = gx;
                T.grad_y[s][n] = gy;
                T.density[s][n] = std::sqrt(1.0 + gx * gx + gy * gy);
            }
        }
    return T;
}

double unoriented_excess(const GraphCurrent& T, std::array<double, 3> q, double r,
                         const Plane3& pi) {
    check_radius(r);
    const std::array<double, 3> n = unit_normal(pi);
    std::vector<MassPoint> pts;
    collect_ball(T, q, r, pts);
    return excess_of_points(pts, n, r);
}

std::pair<Plane3, double> best_plane_excess(const GraphCurrent& T, std::array<double, 3> q,
                                            double r) {
    check_radius(r);
    std::vector<MassPoint> pts;
    collect_ball(T, q, r, pts);
    if (pts.empty()) throw std::runtime_error("ball contains no graph points, no plane to fit");
    const std::array<double, 3> n = plane_from_points(pts);
    Plane3 pi;
    pi.normal = n;
    return {pi, excess_of_points(pts, n, r)};
}

double height(const GraphCurrent& T, std::array<double, 3> q, double r, const Plane3& pi) {
    check_radius(r);
    const std::array<double, 3> n = unit_normal(pi);
    std::vector<MassPoint> pts;
    collect_ball(T, q, r, pts);
    return height_of_points(pts, n);
}

CubeForest refine(const GraphCurrent& T, const WhitneyParams& params, int j_max) {
    WhitneyParams p = params;
    if (p.M0 < 4) throw std::invalid_argument("M0 must be at least 4");
    if (std::abs(p.beta2 - 4.0 * p.delta2) > 1e-12)
        throw std::invalid_argument("beta2 must equal 4 delta2");
    if (!(p.delta2 > 0.0) || p.delta2 >= 1.0) throw std::invalid_argument("delta2 must lie in (0,1)");
    if (!(p.Ce > 0.0) || !(p.Ch > 0.0)) throw std::invalid_argument("Ce and Ch must be positive");
    if (std::sqrt(2.0) * p.M0 * std::pow(2.0, 7 - p.N0) > 1.0 + 1e-12)
        throw std::invalid_argument("N0 too small: need sqrt(2) M0 2^(7-N0) <= 1");
    if (j_max < p.N0) throw std::invalid_argument("j_max must be at least N0");
    if (p.c_sigma_sq < 0.0) throw std::invalid_argument("c_sigma_sq must be nonnegative");

    if (p.m0 <= 0.0) {
        Plane3 flat;
        const double measured =
            unoriented_excess(T, {0.0, 0.0, 0.0}, 6.0 * std::sqrt(2.0), flat);
        p.m0 = std::max(p.c_sigma_sq, measured);
    }

    const Mesh& mesh = T.g.mesh;
    const std::vector<double> adist = active_distance(T);

    CubeForest F;
    F.params = p;
    F.j_max = j_max;
    F.gamma_mask.assign(mesh.n_nodes(), 1);

    // Stopped cubes per generation, for ancestor walks.
    std::vector<std::unordered_set<std::uint64_t>> stopped_by_gen;
    auto ancestor_stopped = [&](std::int64_t ix, std::int64_t iy, int j) {
        std::int64_t ax = ix, ay = iy;
        for (int g = j - 1; g >= p.N0; --g) {
            ax >>= 1;
            ay >>= 1;
            if (stopped_by_gen[g - p.N0].count(pack_idx(ax, ay))) return true;
        }
        return false;
    };

    // Bounding box of the active nodes, for the first-generation window.
    double axlo = 1e30, axhi = -1e30, aylo = 1e30, ayhi = -1e30;
    for (int jj = 0; jj < mesh.ny; ++jj)
        for (int ii = 0; ii < mesh.nx; ++ii)
            if (adist[(std::size_t)jj * mesh.nx + ii] == 0.0) {
                axlo = std::min(axlo, mesh.ax + ii * mesh.h);
                axhi = std::max(axhi, mesh.ax + ii * mesh.h);
                aylo = std::min(aylo, mesh.ay + jj * mesh.h);
                ayhi = std::max(ayhi, mesh.ay + jj * mesh.h);
            }
    const bool any_active = axlo <= axhi;

    std::vector<std::pair<std::int64_t, std::int64_t>> surv_prev;  // explicit survivors
    std::unordered_set<std::uint64_t> surv_prev_set;
    std::vector<std::pair<std::int64_t, std::int64_t>> stopped_prev;
    std::unordered_set<std::uint64_t> stopped_prev_set;
    unsigned long long survivors_prev = 0;

    std::vector<MassPoint> pts;
    for (int j = p.N0; j <= j_max; ++j) {
        const double l = std::ldexp(1.0, -j);  // half side
        const std::int64_t K = (std::int64_t)1 << (j + 2);
        const double Rj = kBallShell * p.M0 * std::sqrt(2.0) * l;
        const double thr_e = p.Ce * p.m0 * std::pow(l, 2.0 - 2.0 * p.delta2);
        const double thr_h = p.Ch * std::sqrt(p.m0) * std::pow(l, 1.0 + p.beta2);

        auto center_of = [&](std::int64_t ix, std::int64_t iy) {
            return Vec2{-4.0 + l * (2.0 * ix + 1.0), -4.0 + l * (2.0 * iy + 1.0)};
        };
        auto active_dist_at = [&](const Vec2& c) {
            const int ni = std::clamp((int)std::lround((c[0] - mesh.ax) / mesh.h), 0, mesh.nx - 1);
            const int nj = std::clamp((int)std::lround((c[1] - mesh.ay) / mesh.h), 0, mesh.ny - 1);
            return adist[(std::size_t)nj * mesh.nx + ni];
        };
        auto touches_stopped_prev = [&](std::int64_t ix, std::int64_t iy, const Vec2& c) {
            if (stopped_prev_set.empty()) return false;
            for (std::int64_t dy = -1; dy <= 1; ++dy)
                for (std::int64_t dx = -1; dx <= 1; ++dx) {
                    const std::int64_t kx = (ix >> 1) + dx, ky = (iy >> 1) + dy;
                    if (kx < 0 || ky < 0 || kx >= K / 2 || ky >= K / 2) continue;
                    if (!stopped_prev_set.count(pack_idx(kx, ky))) continue;
                    const double ccx = -4.0 + 2.0 * l * (2.0 * kx + 1.0);
                    const double ccy = -4.0 + 2.0 * l * (2.0 * ky + 1.0);
                    if (std::max(std::abs(c[0] - ccx), std::abs(c[1] - ccy)) <= 3.0 * l + 1e-12 * l)
                        return true;
                }
            return false;
        };

        // A cube stays explicit while active data could still reach the ball
        // of some descendant: centers drift by at most sqrt(2) l and the node
        // snap of the distance field costs under 2h, so beyond this bound the
        // whole subtree keeps excess and height exactly zero.
        const double keep = Rj + std::sqrt(2.0) * l + 3.0 * mesh.h;

        std::vector<std::pair<std::int64_t, std::int64_t>> cand;
        unsigned long long cubes_j;
        if (j == p.N0) {
            cubes_j = (unsigned long long)K * (unsigned long long)K;
            if (any_active) {
                const double pad = keep + 2.0 * mesh.h;
                const std::int64_t lo_x = std::clamp(
                    (std::int64_t)std::floor((axlo - pad + 4.0) / (2.0 * l)), (std::int64_t)0, K - 1);
                const std::int64_t hi_x = std::clamp(
                    (std::int64_t)std::ceil((axhi + pad + 4.0) / (2.0 * l)), (std::int64_t)0, K - 1);
                const std::int64_t lo_y = std::clamp(
                    (std::int64_t)std::floor((aylo - pad + 4.0) / (2.0 * l)), (std::int64_t)0, K - 1);
                const std::int64_t hi_y = std::clamp(
                    (std::int64_t)std::ceil((ayhi + pad + 4.0) / (2.0 * l)), (std::int64_t)0, K - 1);
                for (std::int64_t iy = lo_y; iy <= hi_y; ++iy)
                    for (std::int64_t ix = lo_x; ix <= hi_x; ++ix)
                        if (active_dist_at(center_of(ix, iy)) <= keep) cand.emplace_back(ix, iy);
            }
        } else {
            cubes_j = 4 * survivors_prev;
            std::unordered_set<std::uint64_t> seen;
            for (const auto& s : surv_prev)
                for (std::int64_t dy = 0; dy <= 1; ++dy)
                    for (std::int64_t dx = 0; dx <= 1; ++dx) {
                        const std::int64_t ix = 2 * s.first + dx, iy = 2 * s.second + dy;
                        const Vec2 c = center_of(ix, iy);
                        if (active_dist_at(c) <= keep || touches_stopped_prev(ix, iy, c))
                            if (seen.insert(pack_idx(ix, iy)).second) cand.emplace_back(ix, iy);
                    }
            // Cubes from never-evaluated regions can only stop through the
            // neighbor rule; enumerate them around last generation's stops.
            for (const auto& k : stopped_prev)
                for (std::int64_t iy = 2 * k.second - 1; iy <= 2 * k.second + 2; ++iy)
                    for (std::int64_t ix = 2 * k.first - 1; ix <= 2 * k.first + 2; ++ix) {
                        if (ix < 0 || iy < 0 || ix >= K || iy >= K) continue;
                        if (surv_prev_set.count(pack_idx(ix >> 1, iy >> 1))) continue;
                        if (ancestor_stopped(ix, iy, j)) continue;
                        if (seen.insert(pack_idx(ix, iy)).second) cand.emplace_back(ix, iy);
                    }
            std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
                return a.second == b.second ? a.first < b.first : a.second < b.second;
            });
        }

        GenerationSummary gs;
        gs.j = j;
        gs.cubes = cubes_j;
        gs.evaluated = cand.size();

        std::vector<std::pair<std::int64_t, std::int64_t>> surv_cur;
        std::vector<std::pair<std::int64_t, std::int64_t>> stopped_cur;
        for (const auto& [ix, iy] : cand) {
            if (j > p.N0 && ancestor_stopped(ix, iy, j)) F.father_rule_ok = false;
            const Vec2 c = center_of(ix, iy);
            const int ni = std::clamp((int)std::lround((c[0] - mesh.ax) / mesh.h), 0, mesh.nx - 1);
            const int nj = std::clamp((int)std::lround((c[1] - mesh.ay) / mesh.h), 0, mesh.ny - 1);
            const double anchor_z = T.g.values[mesh.node_at(ni, nj)].values.front();

            double E = 0.0, hgt = 0.0;
            if (active_dist_at(c) <= Rj + mesh.h) {
                if (collect_ball(T, {c[0], c[1], anchor_z}, Rj, pts))
                    F.boundary_extension_used = true;
                if (!pts.empty()) {
                    const std::array<double, 3> n = plane_from_points(pts);
                    E = excess_of_points(pts, n, Rj);
                    hgt = height_of_points(pts, n);
                }
            }

            char cls = 'S';
            if (E > thr_e)
                cls = 'e';
            else if (hgt > thr_h)
                cls = 'h';
            else if (j > p.N0 && touches_stopped_prev(ix, iy, c))
                cls = 'n';

            if (cls == 'S') {
                surv_cur.emplace_back(ix, iy);
            } else {
                CubeRecord rec;
                rec.j = j;
                rec.ix = ix;
                rec.iy = iy;
                rec.center = c;
                rec.half_side = l;
                rec.cls = cls;
                rec.excess = E;
                rec.height_val = hgt;
                rec.anchor_z = anchor_z;
                F.stopped.push_back(rec);
                stopped_cur.emplace_back(ix, iy);
                if (cls == 'e') ++gs.we;
                if (cls == 'h') ++gs.wh;
                if (cls == 'n') ++gs.wn;
                // Nodes under a stopped cube leave the contact set.
                const int ilo = std::clamp((int)std::ceil((c[0] - l - mesh.ax) / mesh.h - 1e-9), 0,
                                           mesh.nx - 1);
                const int ihi = std::clamp((int)std::floor((c[0] + l - mesh.ax) / mesh.h + 1e-9), 0,
                                           mesh.nx - 1);
                const int jlo = std::clamp((int)std::ceil((c[1] - l - mesh.ay) / mesh.h - 1e-9), 0,
                                           mesh.ny - 1);
                const int jhi = std::clamp((int)std::floor((c[1] + l - mesh.ay) / mesh.h + 1e-9), 0,
                                           mesh.ny - 1);
                for (int pj = jlo; pj <= jhi; ++pj)
                    for (int pi = ilo; pi <= ihi; ++pi)
                        F.gamma_mask[mesh.node_at(pi, pj)] = 0;
            }
        }

        gs.survivors = cubes_j - (unsigned long long)stopped_cur.size();
        F.generations.push_back(gs);

        surv_prev = std::move(surv_cur);
        surv_prev_set.clear();
        for (const auto& s : surv_prev) surv_prev_set.insert(pack_idx(s.first, s.second));
        stopped_prev = std::move(stopped_cur);
        stopped_prev_set.clear();
        for (const auto& s : stopped_prev) stopped_prev_set.insert(pack_idx(s.first, s.second));
        stopped_by_gen.push_back(stopped_prev_set);
        survivors_prev = gs.survivors;
    }
    return F;
}

FineContactReport check_fine_cm(const CubeForest& forest, const std::vector<Vec2>& marks) {
    FineContactReport rep;
    const double scale = 64.0 * std::sqrt(2.0);
    for (std::size_t mi = 0; mi < marks.size(); ++mi)
        for (const CubeRecord& cr : forest.stopped) {
            const double dx = std::max(std::abs(marks[mi][0] - cr.center[0]) - cr.half_side, 0.0);
            const double dy = std::max(std::abs(marks[mi][1] - cr.center[1]) - cr.half_side, 0.0);
            const double dist = std::hypot(dx, dy);
            if (!(cr.half_side < dist / scale)) {
                rep.pass = false;
                rep.violations.push_back({mi, cr, dist});
            }
        }
    return rep;
}

std::string forest_to_string(const CubeForest& f) {
    std::string out;
    out.reserve(128 * f.stopped.size() + 4096 + f.gamma_mask.size() + 64);
    char buf[320];
    const WhitneyParams& p = f.params;
    std::snprintf(buf, sizeof buf,
                  "whitney forest\nparams N0 %d M0 %d Ce %.17g Ch %.17g delta2 %.17g beta2 %.17g "
                  "m0 %.17g c_sigma_sq %.17g j_max %d\nflags father_rule %d boundary_extension %d\n",
                  p.N0, p.M0, p.Ce, p.Ch, p.delta2, p.beta2, p.m0, p.c_sigma_sq, f.j_max,
                  f.father_rule_ok ? 1 : 0, f.boundary_extension_used ? 1 : 0);
    out += buf;
    std::snprintf(buf, sizeof buf, "generations %zu\n", f.generations.size());
    out += buf;
    for (const GenerationSummary& g : f.generations) {
        std::snprintf(buf, sizeof buf, "gen %d cubes %llu survivors %llu we %llu wh %llu wn %llu evaluated %llu\n",
                      g.j, g.cubes, g.survivors, g.we, g.wh, g.wn, g.evaluated);
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "stopped %zu\n", f.stopped.size());
    out += buf;
    for (const CubeRecord& c : f.stopped) {
        std::snprintf(buf, sizeof buf, "cube %d %lld %lld %c %.17g %.17g %.17g %.17g %.17g %.17g\n",
                      c.j, (long long)c.ix, (long long)c.iy, c.cls, c.center[0], c.center[1],
                      c.half_side, c.excess, c.height_val, c.anchor_z);
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "gamma %zu\n", f.gamma_mask.size());
    out += buf;
    std::string row;
    for (std::size_t i = 0; i < f.gamma_mask.size(); ++i) {
        row.push_back(f.gamma_mask[i] ? '1' : '0');
        if (row.size() == 64 || i + 1 == f.gamma_mask.size()) {
            out += row;
            out += '\n';
            row.clear();
        }
    }
    return out;
}

void write_forest(const std::string& path, const CubeForest& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << forest_to_string(f);
}

}  // namespace qfreq
