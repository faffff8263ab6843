#include "qfreq/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace qfreq {

BoundaryTrace make_boundary_trace(const Mesh& mesh, const std::function<QPoint(Vec2)>& f) {
    BoundaryTrace tr;
    for (std::size_t v = 0; v < mesh.n_nodes(); ++v)
        if (mesh.boundary[v]) tr.values.push_back({int(v), f(mesh.coords[v])});
    if (mesh.kind == MeshKind::disk) {
        const double cx = mesh.cx, cy = mesh.cy, R = mesh.radius;
        tr.angular = trace_from_function(
            720, [&](double t) { return f({cx + R * std::cos(t), cy + R * std::sin(t)}); });
    }
    return tr;
}

QPoint local_node_update(const QPoint& current, const std::vector<QPoint>& neighbors,
                         const std::vector<double>& weights) {
    if (neighbors.empty()) throw std::invalid_argument("local_node_update: no neighbors");
    const std::size_t q = current.q();
    for (const QPoint& n : neighbors)
        if (n.q() != q) throw std::invalid_argument("local_node_update: sheet count mismatch");
    std::vector<double> w = weights;
    if (w.empty()) w.assign(neighbors.size(), 1.0);
    if (w.size() != neighbors.size())
        throw std::invalid_argument("local_node_update: weight count mismatch");
    double wsum = 0.0;
    for (double x : w) {
        if (x < 0.0) throw std::invalid_argument("local_node_update: negative weight");
        wsum += x;
    }
    if (wsum <= 0.0) return current;

    QPoint cand[2];
    double cand_e[2];
    for (int k = 0; k < 2; ++k) {
        const int s = k == 0 ? +1 : -1;
        std::vector<double> v(q, 0.0);
        for (std::size_t i = 0; i < neighbors.size(); ++i) {
            const QPoint& n = neighbors[i];
            if (n.sign == s) {
                for (std::size_t r = 0; r < q; ++r) v[r] += w[i] * n.values[r];
            } else {
                const double e = eta(n);
                for (std::size_t r = 0; r < q; ++r) v[r] += w[i] * e;
            }
        }
        for (std::size_t r = 0; r < q; ++r) v[r] /= wsum;
        cand[k] = make_qpoint(std::move(v), s);
        double en = 0.0;
        for (std::size_t i = 0; i < neighbors.size(); ++i) {
            const double d = gs_metric(cand[k], neighbors[i]);
            en += w[i] * d * d;
        }
        cand_e[k] = en;
    }
    if (cand_e[0] < cand_e[1]) return cand[0];
    if (cand_e[1] < cand_e[0]) return cand[1];
    return current.sign < 0 ? cand[1] : cand[0];
}

namespace {

struct TraceInfo {
    std::vector<int> entry_of_node;  // -1 for interior
    std::size_t q = 0;
};

TraceInfo validate_trace(const BoundaryTrace& tr, const Mesh& m, bool need_zero_average) {
    TraceInfo info;
    info.entry_of_node.assign(m.n_nodes(), -1);
    if (tr.values.empty()) throw std::invalid_argument("solve: empty boundary trace");
    info.q = tr.values.front().second.q();
    if (info.q == 0) throw std::invalid_argument("solve: trace has zero sheets");
    std::size_t n_boundary = 0;
    for (std::size_t v = 0; v < m.n_nodes(); ++v) n_boundary += m.boundary[v];
    if (tr.values.size() != n_boundary)
        throw std::invalid_argument("solve: trace must cover every boundary node");
    for (std::size_t i = 0; i < tr.values.size(); ++i) {
        const int v = tr.values[i].first;
        if (v < 0 || std::size_t(v) >= m.n_nodes() || !m.boundary[v])
            throw std::invalid_argument("solve: trace entry is not a boundary node");
        if (info.entry_of_node[v] != -1)
            throw std::invalid_argument("solve: duplicate trace entry");
        if (tr.values[i].second.q() != info.q)
            throw std::invalid_argument("solve: trace sheet counts differ");
        if (need_zero_average && std::abs(eta(tr.values[i].second)) > 1e-9)
            throw std::invalid_argument("solve: zero-average constraint needs a zero-mean trace");
        info.entry_of_node[v] = int(i);
    }
    return info;
}

void apply_trace(SampledField& f, const BoundaryTrace& tr, const TraceInfo& info) {
    for (std::size_t v = 0; v < f.mesh.n_nodes(); ++v)
        if (info.entry_of_node[v] >= 0) {
            QPoint p = tr.values[info.entry_of_node[v]].second;
            canonicalize(p);
            f.values[v] = p;
        }
}

// Best piecewise-linear profile with a single sign interface on edge
// (t, t+1). The sides are staggered: the left trace decays to zero at
// x_{t+1}, the right trace grows from x_t, which for mean-free boundary
// points is the exact fixed point of the nodewise update (a node beside the
// interface averages its same-sign neighbor with the mean of the opposite
// one).
void seed_interval(SampledField& f, const QPoint& left, const QPoint& right) {
    const Mesh& m = f.mesh;
    const int n = m.nx;
    const std::size_t q = left.q();
    auto lerp_profile = [&](int t) {
        const double xa = m.coords.front()[0], xb = m.coords.back()[0];
        const double xl = m.coords[t + 1][0], xr = m.coords[t][0];
        for (int i = 0; i < n; ++i) {
            const double x = m.coords[i][0];
            std::vector<double> v(q);
            if (i <= t)
                for (std::size_t r = 0; r < q; ++r)
                    v[r] = left.values[r] * (xl - x) / (xl - xa);
            else
                for (std::size_t r = 0; r < q; ++r)
                    v[r] = right.values[r] * (x - xr) / (xb - xr);
            f.values[i] = make_qpoint(std::move(v), i <= t ? left.sign : right.sign);
        }
    };
    const bool interface = !is_collapsed(left) && !is_collapsed(right) && left.sign != right.sign;
    if (!interface) {
        const int s = is_collapsed(left) ? right.sign : left.sign;
        const double xa = m.coords.front()[0], xb = m.coords.back()[0];
        for (int i = 0; i < n; ++i) {
            const double lam = (m.coords[i][0] - xa) / (xb - xa);
            std::vector<double> v(q);
            for (std::size_t r = 0; r < q; ++r)
                v[r] = (1.0 - lam) * left.values[r] + lam * right.values[r];
            f.values[i] = make_qpoint(std::move(v), s);
        }
        return;
    }
    int best_t = 0;
    double best_e = std::numeric_limits<double>::infinity();
    for (int t = 0; t + 1 < n; ++t) {
        lerp_profile(t);
        const double e = dirichlet_energy(f);
        if (e < best_e) {
            best_e = e;
            best_t = t;
        }
    }
    lerp_profile(best_t);
}

SampledField seed_field(const BoundaryTrace& tr, const Mesh& m, const TraceInfo& info,
                        int attempt, std::mt19937& rng) {
    SampledField f;
    f.mesh = m;
    f.values.assign(m.n_nodes(), splat(0.0, info.q));
    if (attempt > 0) {
        for (std::size_t v = 0; v < m.n_nodes(); ++v)
            if (info.entry_of_node[v] < 0)
                f.values[v] = tr.values[rng() % tr.values.size()].second;
    } else if (m.dim == 1) {
        seed_interval(f, tr.values[info.entry_of_node[0]].second,
                      tr.values[info.entry_of_node[m.nx - 1]].second);
    } else if (tr.angular) {
        f = homogeneous_extension(*tr.angular, 1.0, m);
    } else {
        for (std::size_t v = 0; v < m.n_nodes(); ++v) {
            if (info.entry_of_node[v] >= 0) continue;
            double best = std::numeric_limits<double>::infinity();
            const QPoint* pick = nullptr;
            for (const auto& [b, val] : tr.values) {
                const double dx = m.coords[v][0] - m.coords[b][0];
                const double dy = m.coords[v][1] - m.coords[b][1];
                const double d2 = dx * dx + dy * dy;
                if (d2 < best) {
                    best = d2;
                    pick = &val;
                }
            }
            f.values[v] = *pick;
        }
    }
    apply_trace(f, tr, info);
    for (QPoint& p : f.values) canonicalize(p);
    return f;
}

}  // namespace

SolveResult solve(const BoundaryTrace& trace, const Mesh& mesh, const SolveParams& params) {
    if (!(params.tol > 0.0)) throw std::invalid_argument("solve: tol must be positive");
    if (params.restarts < 1) throw std::invalid_argument("solve: restarts must be >= 1");
    if (params.max_sweeps < 1) throw std::invalid_argument("solve: max_sweeps must be >= 1");
    const TraceInfo info = validate_trace(trace, mesh, params.enforce_zero_average);

    std::vector<std::vector<std::pair<int, double>>> adj(mesh.n_nodes());
    for (std::size_t k = 0; k < mesh.edges.size(); ++k) {
        const Edge& e = mesh.edges[k];
        adj[e.a].push_back({e.b, mesh.edge_weight[k]});
        adj[e.b].push_back({e.a, mesh.edge_weight[k]});
    }

    std::mt19937 rng(params.rng_seed);
    SolveResult best;
    std::vector<QPoint> nbrs;
    std::vector<double> wts;
    for (int attempt = 0; attempt < params.restarts; ++attempt) {
        SampledField f = seed_field(trace, mesh, info, attempt, rng);
        std::vector<double> hist;
        double e_prev = dirichlet_energy(f);
        hist.push_back(e_prev);
        bool converged = false;
        int sweeps = 0;
        for (int s = 1; s <= params.max_sweeps; ++s) {
            for (std::size_t v = 0; v < mesh.n_nodes(); ++v) {
                if (info.entry_of_node[v] >= 0) continue;
                nbrs.clear();
                wts.clear();
                for (const auto& [u, w] : adj[v]) {
                    nbrs.push_back(f.values[u]);
                    wts.push_back(w);
                }
                f.values[v] = local_node_update(f.values[v], nbrs, wts);
            }
            if (params.enforce_zero_average)
                for (std::size_t v = 0; v < mesh.n_nodes(); ++v) {
                    if (info.entry_of_node[v] >= 0) continue;
                    QPoint p = sub(f.values[v], eta(f.values[v]));
                    canonicalize(p);
                    f.values[v] = p;
                }
            const double e = dirichlet_energy(f);
            hist.push_back(e);
            sweeps = s;
            if (e_prev - e <= params.tol * std::max(e_prev, 1e-300)) {
                converged = true;
                break;
            }
            e_prev = e;
        }
        const double e_final = hist.back();
        if (attempt == 0 || e_final < best.energy) {
            best.field = std::move(f);
            best.energy_history = std::move(hist);
            best.energy = e_final;
            best.sweeps = sweeps;
            best.converged = converged;
        }
    }
    return best;
}

}  // namespace qfreq
