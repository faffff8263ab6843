#include "qfreq/homogeneous.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

#include "qfreq/frequency.hpp"

namespace qfreq {

double HarmonicPolynomial2D::operator()(Vec2 x) const {
    double re = 1.0, im = 0.0;
    for (int k = 0; k < alpha; ++k) {
        const double nre = re * x[0] - im * x[1];
        im = re * x[1] + im * x[0];
        re = nre;
    }
    return c_cos * re + c_sin * im;
}

double HarmonicPolynomial2D::gradient_norm(Vec2 x) const {
    return alpha * std::hypot(c_cos, c_sin) * std::pow(std::hypot(x[0], x[1]), alpha - 1);
}

namespace {

void validate_polynomial(const HarmonicPolynomial2D& p) {
    if (p.alpha < 1) throw std::invalid_argument("polynomial degree must be positive");
    if (p.c_cos == 0.0 && p.c_sin == 0.0)
        throw std::invalid_argument("polynomial coefficients are both zero");
}

int collect_neighbors(const Mesh& m, int n, int out[4]) {
    const int g = m.grid_of_node[n];
    const int i = g % m.nx, j = g / m.nx;
    int cnt = 0;
    if (i > 0) out[cnt++] = m.node_at(i - 1, j);
    if (i + 1 < m.nx) out[cnt++] = m.node_at(i + 1, j);
    if (j > 0) out[cnt++] = m.node_at(i, j - 1);
    if (j + 1 < m.ny) out[cnt++] = m.node_at(i, j + 1);
    int kept = 0;
    for (int k = 0; k < cnt; ++k)
        if (out[k] >= 0) out[kept++] = out[k];
    return kept;
}

// Extends component labels into the resolution band by sign-matched BFS,
// nearest component first. Nodes where p vanishes exactly keep label 0.
void attach_band(const Mesh& m, const std::vector<double>& pv, std::vector<int>& label) {
    std::queue<int> bfs;
    for (std::size_t n = 0; n < label.size(); ++n)
        if (label[n] != 0) bfs.push(int(n));
    int nbr[4];
    while (!bfs.empty()) {
        const int n = bfs.front();
        bfs.pop();
        const int cnt = collect_neighbors(m, n, nbr);
        for (int k = 0; k < cnt; ++k) {
            const int v = nbr[k];
            if (label[v] != 0 || pv[v] == 0.0) continue;
            if ((pv[v] > 0.0) != (label[n] > 0)) continue;
            label[v] = label[n];
            bfs.push(v);
        }
    }
    // stragglers (same-sign region not grid-connected): nearest labeled node
    for (std::size_t n = 0; n < label.size(); ++n) {
        if (label[n] != 0 || pv[n] == 0.0) continue;
        const bool plus = pv[n] > 0.0;
        double best = 1e300;
        int pick = 0;
        for (std::size_t v = 0; v < label.size(); ++v) {
            if (label[v] == 0 || (label[v] > 0) != plus) continue;
            const double dx = m.coords[n][0] - m.coords[v][0];
            const double dy = m.coords[n][1] - m.coords[v][1];
            const double d2 = dx * dx + dy * dy;
            if (d2 < best) {
                best = d2;
                pick = label[v];
            }
        }
        label[n] = pick;
    }
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

NodalComponents components_of_nodal_partition(const HarmonicPolynomial2D& p, const Mesh& mesh) {
    validate_polynomial(p);
    if (mesh.dim != 2 || mesh.kind != MeshKind::disk)
        throw std::invalid_argument("nodal partition requires a disk mesh");

    const std::size_t n = mesh.n_nodes();
    std::vector<double> pv(n);
    std::vector<bool> band(n);
    for (std::size_t i = 0; i < n; ++i) {
        pv[i] = p(mesh.coords[i]);
        band[i] = std::abs(pv[i]) <= mesh.h * p.gradient_norm(mesh.coords[i]);
    }

    NodalComponents comp;
    comp.label.assign(n, 0);
    int nbr[4];
    for (std::size_t seed = 0; seed < n; ++seed) {
        if (comp.label[seed] != 0 || band[seed]) continue;
        const bool plus = pv[seed] > 0.0;
        const int id = plus ? ++comp.n_plus : -(++comp.n_minus);
        comp.label[seed] = id;
        std::queue<int> bfs;
        bfs.push(int(seed));
        while (!bfs.empty()) {
            const int v = bfs.front();
            bfs.pop();
            const int cnt = collect_neighbors(mesh, v, nbr);
            for (int k = 0; k < cnt; ++k) {
                const int w = nbr[k];
                if (comp.label[w] != 0 || band[w]) continue;
                if ((pv[w] > 0.0) != plus) continue;
                comp.label[w] = id;
                bfs.push(w);
            }
        }
    }
    if (comp.n_plus != p.alpha || comp.n_minus != p.alpha) {
        char buf[128];
        std::snprintf(buf, sizeof buf,
                      "nodal partition of a degree-%d polynomial found %d plus and %d minus "
                      "components",
                      p.alpha, comp.n_plus, comp.n_minus);
        throw std::runtime_error(buf);
    }
    return comp;
}

SampledField build_homogeneous(const HomogeneousSpec& spec, const Mesh& mesh) {
    NodalComponents comp = components_of_nodal_partition(spec.p, mesh);
    const int alpha = spec.p.alpha;
    if (int(spec.a_plus.size()) != alpha || int(spec.a_minus.size()) != alpha)
        throw std::invalid_argument("need one coefficient vector per component of each sign");

    const std::size_t q = spec.a_plus.front().size();
    if (q == 0) throw std::invalid_argument("coefficient vectors are empty");
    for (const auto* side : {&spec.a_plus, &spec.a_minus})
        for (const auto& v : *side) {
            if (v.size() != q)
                throw std::invalid_argument("coefficient vectors have mismatched lengths");
            double sum = 0.0, amax = 0.0;
            for (double x : v) {
                sum += x;
                amax = std::max(amax, std::abs(x));
            }
            if (std::abs(sum) > 1e-9 * std::max(1.0, amax))
                throw std::invalid_argument("coefficient vector does not sum to zero");
        }

    const std::size_t n = mesh.n_nodes();
    std::vector<double> pv(n);
    for (std::size_t i = 0; i < n; ++i) pv[i] = spec.p(mesh.coords[i]);
    attach_band(mesh, pv, comp.label);

    // transmission across the nodal line: edges joining opposite components,
    // or opposite components flanking an exact zero node
    std::set<std::pair<int, int>> touching;
    for (const Edge& e : mesh.edges) {
        const int la = comp.label[e.a], lb = comp.label[e.b];
        if (la > 0 && lb < 0) touching.insert({la, -lb});
        if (la < 0 && lb > 0) touching.insert({lb, -la});
    }
    int nbr[4];
    for (std::size_t z = 0; z < n; ++z) {
        if (comp.label[z] != 0) continue;
        const int cnt = collect_neighbors(mesh, int(z), nbr);
        for (int i = 0; i < cnt; ++i)
            for (int j = 0; j < cnt; ++j)
                if (comp.label[nbr[i]] > 0 && comp.label[nbr[j]] < 0)
                    touching.insert({comp.label[nbr[i]], -comp.label[nbr[j]]});
    }
    for (const auto& [jp, jm] : touching) {
        const double np = norm2(spec.a_plus[jp - 1]), nm = norm2(spec.a_minus[jm - 1]);
        if (std::abs(np - nm) > 1e-6 * std::max({np, nm, 1e-12})) {
            char buf[128];
            std::snprintf(buf, sizeof buf,
                          "transmission mismatch between components +%d and -%d: norms %.6g vs "
                          "%.6g",
                          jp, jm, np, nm);
            throw std::invalid_argument(buf);
        }
    }

    SampledField u;
    u.mesh = mesh;
    u.values.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int l = comp.label[i];
        if (l == 0) {
            u.values.push_back(splat(0.0, q));
            continue;
        }
        const auto& A = l > 0 ? spec.a_plus[l - 1] : spec.a_minus[-l - 1];
        std::vector<double> vals(q);
        for (std::size_t r = 0; r < q; ++r) vals[r] = A[r] * pv[i];
        u.values.push_back(make_qpoint(std::move(vals), l > 0 ? +1 : -1));
    }
    return u;
}

OneDClassification classify_1d(const SampledField& u, double norm_tol) {
    if (u.mesh.dim != 1) throw std::invalid_argument("1d field required");
    const std::size_t n = u.mesh.n_nodes();
    if (n < 4) throw std::invalid_argument("too few nodes to classify");
    const std::size_t q = u.q();

    const std::vector<double> mag = pointwise_norm(u);
    const double magscale = *std::max_element(mag.begin(), mag.end());

    // zero nodes by a resolution band scaled to the local slope, so shallow
    // fields far from their zeros are not swallowed; sign flips between
    // non-zero nodes also mark crossings
    std::vector<double> local_slope(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double s = gs_metric(u.values[i], u.values[i + 1]) / u.mesh.h;
        local_slope[i] = std::max(local_slope[i], s);
        local_slope[i + 1] = std::max(local_slope[i + 1], s);
    }
    std::vector<bool> zero(n);
    for (std::size_t i = 0; i < n; ++i)
        zero[i] = mag[i] <= u.mesh.h * local_slope[i] + 1e-12 * magscale;

    // cluster the zero locations; a sign flip with no zero node between also
    // marks a crossing
    std::vector<std::pair<double, double>> clusters;  // [lo, hi] in x
    for (std::size_t i = 0; i < n; ++i) {
        if (!zero[i]) continue;
        const double x = u.mesh.coords[i][0];
        if (!clusters.empty() && x - clusters.back().second <= 1.5 * u.mesh.h)
            clusters.back().second = x;
        else
            clusters.push_back({x, x});
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (zero[i] || zero[i + 1]) continue;
        if (is_collapsed(u.values[i]) || is_collapsed(u.values[i + 1])) continue;
        if (u.values[i].sign == u.values[i + 1].sign) continue;
        const double lo = u.mesh.coords[i][0], hi = u.mesh.coords[i + 1][0];
        bool merged = false;
        for (auto& c : clusters)
            if (hi >= c.first - 1.5 * u.mesh.h && lo <= c.second + 1.5 * u.mesh.h) {
                c.first = std::min(c.first, lo);
                c.second = std::max(c.second, hi);
                merged = true;
                break;
            }
        if (!merged) clusters.push_back({lo, hi});
    }
    std::sort(clusters.begin(), clusters.end());
    for (std::size_t c = 0; c + 1 < clusters.size();) {
        if (clusters[c + 1].first - clusters[c].second <= 1.5 * u.mesh.h) {
            clusters[c].second = std::max(clusters[c].second, clusters[c + 1].second);
            clusters.erase(clusters.begin() + c + 1);
        } else
            ++c;
    }

    OneDClassification out;
    if (clusters.empty()) return out;
    if (clusters.size() > 1)
        throw std::runtime_error("zero set has several separated clusters, not a minimizer "
                                 "profile");

    const double clo = clusters[0].first, chi = clusters[0].second;
    const double cmid = 0.5 * (clo + chi);

    // per-side affine fit of every sheet, then the side's common zero
    // crossing: X = -sum(slope*intercept) / sum(slope^2)
    struct Side {
        std::vector<double> slope, icept;
        double x_cross = 0.0;
        bool has_cross = false;
        std::size_t count = 0;
    };
    auto fit_side = [&](bool right) {
        Side s;
        double sw = 0, sx = 0, sxx = 0;
        std::vector<double> sy(q, 0.0), sxy(q, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = u.mesh.coords[i][0];
            if (zero[i]) continue;
            if (right ? x <= chi : x >= clo) continue;
            sw += 1;
            sx += x;
            sxx += x * x;
            for (std::size_t r = 0; r < q; ++r) {
                sy[r] += u.values[i].values[r];
                sxy[r] += x * u.values[i].values[r];
            }
            ++s.count;
        }
        s.slope.assign(q, 0.0);
        s.icept.assign(q, 0.0);
        if (s.count < 2) return s;
        const double det = sw * sxx - sx * sx;
        double num = 0, den = 0;
        for (std::size_t r = 0; r < q; ++r) {
            s.slope[r] = (sw * sxy[r] - sx * sy[r]) / det;
            s.icept[r] = (sy[r] - s.slope[r] * sx) / sw;
            num += s.slope[r] * s.icept[r];
            den += s.slope[r] * s.slope[r];
        }
        if (den > 0) {
            s.x_cross = -num / den;
            s.has_cross = true;
        }
        return s;
    };
    const Side sr = fit_side(true), sl = fit_side(false);

    double x0 = cmid;
    if (sr.has_cross && sl.has_cross)
        x0 = 0.5 * (sr.x_cross + sl.x_cross);
    else if (sr.has_cross)
        x0 = sr.x_cross;
    else if (sl.has_cross)
        x0 = sl.x_cross;
    out.x0 = x0;

    // slopes re-anchored at each side's own crossing; left slopes are taken
    // against the distance x_cross - x so both vectors describe growth away
    // from the singular point
    out.a.assign(q, 0.0);
    out.b.assign(q, 0.0);
    double ss = 0.0;
    std::size_t cnt = 0;
    for (int side = 0; side < 2; ++side) {
        const Side& s = side == 0 ? sr : sl;
        std::vector<double>& slopes = side == 0 ? out.a : out.b;
        if (!s.has_cross) continue;
        double den = 0.0;
        std::vector<double> num(q, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = u.mesh.coords[i][0];
            if (zero[i]) continue;
            if (side == 0 ? x <= chi : x >= clo) continue;
            const double d = side == 0 ? x - s.x_cross : s.x_cross - x;
            den += d * d;
            for (std::size_t r = 0; r < q; ++r) num[r] += d * u.values[i].values[r];
        }
        if (den == 0.0) continue;
        for (std::size_t r = 0; r < q; ++r) slopes[r] = num[r] / den;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = u.mesh.coords[i][0];
            if (zero[i]) continue;
            if (side == 0 ? x <= chi : x >= clo) continue;
            const double d = side == 0 ? x - s.x_cross : s.x_cross - x;
            for (std::size_t r = 0; r < q; ++r) {
                const double e = u.values[i].values[r] - slopes[r] * d;
                ss += e * e;
                ++cnt;
            }
        }
    }
    std::sort(out.a.begin(), out.a.end());
    std::sort(out.b.begin(), out.b.end());
    out.residual = cnt ? std::sqrt(ss / cnt) : 0.0;

    double suma = 0, sumb = 0;
    for (std::size_t r = 0; r < q; ++r) {
        suma += out.a[r];
        sumb += out.b[r];
    }
    const double na = norm2(out.a), nb = norm2(out.b);
    char buf[128];
    if (std::abs(suma) > 1e-6 * std::max(1.0, na)) {
        out.invariants_ok = false;
        std::snprintf(buf, sizeof buf, "right slopes sum to %.3g, not zero", suma);
        out.violation = buf;
    } else if (std::abs(sumb) > 1e-6 * std::max(1.0, nb)) {
        out.invariants_ok = false;
        std::snprintf(buf, sizeof buf, "left slopes sum to %.3g, not zero", sumb);
        out.violation = buf;
    } else if (std::abs(na - nb) > norm_tol * std::max(1.0, std::max(na, nb))) {
        out.invariants_ok = false;
        std::snprintf(buf, sizeof buf, "slope norms differ: right %.6g vs left %.6g", na, nb);
        out.violation = buf;
    }
    return out;
}

StationarityReport check_stationarity(const SampledField& u) {
    StationarityReport rep;
    const Mesh& m = u.mesh;
    const std::size_t q = u.q();

    if (m.dim == 1) {
        std::vector<double> g2(m.edges.size());
        double mean = 0.0;
        for (std::size_t k = 0; k < m.edges.size(); ++k) {
            const double gs = gs_metric(u.values[m.edges[k].a], u.values[m.edges[k].b]);
            g2[k] = gs * gs / (m.h * m.h);
            mean += g2[k];
        }
        mean /= double(g2.size());
        for (double v : g2) rep.gradient_constancy = std::max(rep.gradient_constancy, std::abs(v - mean));
        return rep;
    }

    const std::vector<RegionLabel> lab = decompose(u);
    const std::size_t n = m.n_nodes();
    int nbr[4];

    // a node is near the zero set if it is collapsed, touches a collapsed
    // node, or touches the opposite sign
    std::vector<bool> nz(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (lab[i] == RegionLabel::zero) {
            nz[i] = true;
            continue;
        }
        const int cnt = collect_neighbors(m, int(i), nbr);
        for (int k = 0; k < cnt; ++k)
            if (lab[nbr[k]] == RegionLabel::zero || lab[nbr[k]] != lab[i]) nz[i] = true;
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (nz[i]) continue;
        const int g = m.grid_of_node[i];
        const int gi = g % m.nx, gj = g / m.nx;
        if (gi == 0 || gi + 1 == m.nx || gj == 0 || gj + 1 == m.ny) continue;
        const int e = m.node_at(gi + 1, gj), w = m.node_at(gi - 1, gj);
        const int no = m.node_at(gi, gj + 1), so = m.node_at(gi, gj - 1);
        if (e < 0 || w < 0 || no < 0 || so < 0) continue;
        if (nz[e] || nz[w] || nz[no] || nz[so]) continue;
        for (std::size_t r = 0; r < q; ++r) {
            const double res = (u.values[e].values[r] + u.values[w].values[r] +
                                u.values[no].values[r] + u.values[so].values[r] -
                                4.0 * u.values[i].values[r]) /
                               (m.h * m.h);
            rep.laplacian_residual = std::max(rep.laplacian_residual, std::abs(res));
        }
    }

    // sum of squared sheet gradients per node, from same-sign differences
    auto grad_energy = [&](std::size_t i, double& out) -> bool {
        const int g = m.grid_of_node[i];
        const int gi = g % m.nx, gj = g / m.nx;
        out = 0.0;
        for (int axis = 0; axis < 2; ++axis) {
            const int ip = axis == 0 ? (gi + 1 < m.nx ? m.node_at(gi + 1, gj) : -1)
                                     : (gj + 1 < m.ny ? m.node_at(gi, gj + 1) : -1);
            const int im = axis == 0 ? (gi > 0 ? m.node_at(gi - 1, gj) : -1)
                                     : (gj > 0 ? m.node_at(gi, gj - 1) : -1);
            const bool okp = ip >= 0 && lab[ip] == lab[i];
            const bool okm = im >= 0 && lab[im] == lab[i];
            if (!okp && !okm) return false;
            for (std::size_t r = 0; r < q; ++r) {
                double d;
                if (okp && okm)
                    d = (u.values[ip].values[r] - u.values[im].values[r]) / (2.0 * m.h);
                else if (okp)
                    d = (u.values[ip].values[r] - u.values[i].values[r]) / m.h;
                else
                    d = (u.values[i].values[r] - u.values[im].values[r]) / m.h;
                out += d * d;
            }
        }
        return true;
    };

    auto check_pair = [&](std::size_t a, std::size_t b) {
        double sa, sb;
        if (grad_energy(a, sa) && grad_energy(b, sb))
            rep.transmission_residual = std::max(rep.transmission_residual, std::abs(sa - sb));
    };
    for (const Edge& e : m.edges) {
        if (lab[e.a] == RegionLabel::zero || lab[e.b] == RegionLabel::zero) continue;
        if (lab[e.a] != lab[e.b]) check_pair(e.a, e.b);
    }
    for (std::size_t z = 0; z < n; ++z) {
        if (lab[z] != RegionLabel::zero) continue;
        const int cnt = collect_neighbors(m, int(z), nbr);
        for (int i = 0; i < cnt; ++i)
            for (int j = 0; j < cnt; ++j)
                if (lab[nbr[i]] == RegionLabel::plus && lab[nbr[j]] == RegionLabel::minus)
                    check_pair(nbr[i], nbr[j]);
    }
    return rep;
}

IntegerFrequencyReport measured_frequency_is_integer(const SampledField& u, Vec2 center,
                                                     double r_hi) {
    if (r_hi <= 0.0) {
        double r_bd = 1e300;
        for (std::size_t i = 0; i < u.mesh.n_nodes(); ++i) {
            if (!u.mesh.boundary[i]) continue;
            r_bd = std::min(r_bd, std::hypot(u.mesh.coords[i][0] - center[0],
                                             u.mesh.coords[i][1] - center[1]));
        }
        if (r_bd >= 1e300) throw std::invalid_argument("mesh has no boundary nodes");
        r_hi = 0.8 * r_bd;
    }
    IntegerFrequencyReport rep;
    rep.median = median_frequency(u, center, r_hi);
    rep.nearest = std::max(1, int(std::lround(rep.median)));
    rep.distance = std::abs(rep.median - rep.nearest);
    rep.pass = rep.distance <= 0.05;
    return rep;
}

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_num(const std::string& tok) {
    std::size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size() || !std::isfinite(v))
        throw std::runtime_error("bad numeric token '" + tok + "'");
    return v;
}

}  // namespace

void write_homogeneous_spec(const std::string& path, const HomogeneousSpec& spec) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    os << "homogeneous " << spec.p.alpha << " " << fmt(spec.p.c_cos) << " " << fmt(spec.p.c_sin)
       << "\n";
    for (int s = 0; s < 2; ++s) {
        const auto& side = s == 0 ? spec.a_plus : spec.a_minus;
        for (std::size_t j = 0; j < side.size(); ++j) {
            os << (s == 0 ? "+1 " : "-1 ") << j + 1;
            for (double v : side[j]) os << " " << fmt(v);
            os << "\n";
        }
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

HomogeneousSpec read_homogeneous_spec(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    std::string word;
    HomogeneousSpec spec;
    if (!(is >> word) || word != "homogeneous")
        throw std::runtime_error("not a homogeneous spec file: " + path);
    std::string sa, sc, ss;
    if (!(is >> sa >> sc >> ss)) throw std::runtime_error("truncated header: " + path);
    spec.p.alpha = int(parse_num(sa));
    spec.p.c_cos = parse_num(sc);
    spec.p.c_sin = parse_num(ss);
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        std::vector<std::string> toks;
        while (ls >> tok) toks.push_back(tok);
        if (toks.size() < 3) throw std::runtime_error("short component line: " + line);
        const int sign = int(parse_num(toks[0]));
        const int idx = int(parse_num(toks[1]));
        if ((sign != 1 && sign != -1) || idx < 1)
            throw std::runtime_error("bad component line: " + line);
        std::vector<double> coeff;
        for (std::size_t k = 2; k < toks.size(); ++k) coeff.push_back(parse_num(toks[k]));
        auto& side = sign == 1 ? spec.a_plus : spec.a_minus;
        if (std::size_t(idx) != side.size() + 1)
            throw std::runtime_error("component indices out of order: " + line);
        side.push_back(std::move(coeff));
    }
    return spec;
}

}  // namespace qfreq
