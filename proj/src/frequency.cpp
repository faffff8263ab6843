#include "qfreq/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qfreq {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kCircleQuadPoints = 720;

double sq(double x) { return x * x; }

void require_ball_inside(const Mesh& m, Vec2 x, double r) {
    const double slack = 1e-9 * (1.0 + r);
    bool ok = true;
    if (m.dim == 1) {
        ok = x[0] - r >= m.ax - slack && x[0] + r <= m.bx + slack;
    } else if (m.kind == MeshKind::disk) {
        ok = std::hypot(x[0] - m.cx, x[1] - m.cy) + r <= m.radius + slack;
    } else {
        ok = x[0] - r >= m.ax - slack && x[0] + r <= m.bx + slack && x[1] - r >= m.ay - slack &&
             x[1] + r <= m.by + slack;
    }
    if (!ok) throw std::invalid_argument("profile ball exits the domain");
}

// rank-matched linear interpolation of tuple values
std::vector<double> lerp_values(const QPoint& a, const QPoint& b, double t) {
    std::vector<double> out(a.q());
    for (std::size_t i = 0; i < a.q(); ++i)
        out[i] = (1 - t) * a.values[i] + t * b.values[i];
    return out;
}

double norm2_of(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return s;
}

// |u|^2 at a 1D point by rank interpolation
double mass_at_1d(const SampledField& u, double x) {
    const Mesh& m = u.mesh;
    double t = (x - m.ax) / m.h;
    int i = int(std::floor(t));
    i = std::clamp(i, 0, m.nx - 2);
    t = std::clamp(t - i, 0.0, 1.0);
    return norm2_of(lerp_values(u.values[i], u.values[i + 1], t));
}

// |u|^2 at a 2D point by bilinear rank interpolation; masked corners fall
// back to the nearest kept corner of the same cell.
double mass_at_2d(const SampledField& u, Vec2 p) {
    const Mesh& m = u.mesh;
    double tx = (p[0] - m.ax) / m.h, ty = (p[1] - m.ay) / m.h;
    int i = std::clamp(int(std::floor(tx)), 0, m.nx - 2);
    int j = std::clamp(int(std::floor(ty)), 0, m.ny - 2);
    tx = std::clamp(tx - i, 0.0, 1.0);
    ty = std::clamp(ty - j, 0.0, 1.0);
    const int corner[4] = {m.node_at(i, j), m.node_at(i + 1, j), m.node_at(i, j + 1),
                           m.node_at(i + 1, j + 1)};
    const double w[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
    int nearest = -1;
    double wbest = -1;
    for (int k = 0; k < 4; ++k)
        if (corner[k] >= 0 && w[k] > wbest) {
            wbest = w[k];
            nearest = corner[k];
        }
    if (nearest < 0) throw std::invalid_argument("circle quadrature point outside the mask");
    const std::size_t q = u.values[nearest].q();
    std::vector<double> acc(q, 0.0);
    for (int k = 0; k < 4; ++k) {
        const int n = corner[k] >= 0 ? corner[k] : nearest;
        for (std::size_t s = 0; s < q; ++s) acc[s] += w[k] * u.values[n].values[s];
    }
    return norm2_of(acc);
}

double boundary_mass(const SampledField& u, Vec2 x, double r) {
    if (u.mesh.dim == 1) return mass_at_1d(u, x[0] - r) + mass_at_1d(u, x[0] + r);
    double s = 0;
    const double dphi = 2.0 * M_PI / kCircleQuadPoints;
    for (int k = 0; k < kCircleQuadPoints; ++k) {
        const double phi = dphi * k;
        s += mass_at_2d(u, {x[0] + r * std::cos(phi), x[1] + r * std::sin(phi)});
    }
    return s * r * dphi;
}

}  // namespace

FrequencyProfile profile(const SampledField& u, Vec2 x, std::vector<double> radii) {
    FrequencyProfile p;
    p.center = x;
    p.dim = u.mesh.dim;
    for (std::size_t k = 1; k < radii.size(); ++k)
        if (!(radii[k] > radii[k - 1])) throw std::invalid_argument("radii must increase");
    for (double r : radii) {
        if (!(r > 0)) throw std::invalid_argument("radii must be positive");
        require_ball_inside(u.mesh, x, r);
        const double D = dirichlet_energy_in_ball(u, x, r);
        const double H = boundary_mass(u, x, r);
        p.radii.push_back(r);
        p.D.push_back(D);
        p.H.push_back(H);
        p.I.push_back(H > 0 ? r * D / H : kNaN);
    }
    return p;
}

void add_weiss(FrequencyProfile& p, double I0) {
    if (!(I0 > 0)) throw std::invalid_argument("I0 must be positive");
    p.I0 = I0;
    p.W.clear();
    const double m = p.dim;
    for (std::size_t k = 0; k < p.radii.size(); ++k) {
        const double r = p.radii[k];
        p.W.push_back(std::pow(r, -(m + 2 * I0 - 2)) * p.D[k] -
                      I0 * std::pow(r, -(m + 2 * I0 - 1)) * p.H[k]);
    }
}

MonotoneReport check_weiss_monotone(const FrequencyProfile& p, double tol) {
    if (p.W.size() < 3) throw std::invalid_argument("need at least 3 Weiss samples");
    MonotoneReport rep;
    for (std::size_t k = 0; k + 1 < p.W.size(); ++k) {
        const double drop = p.W[k] - p.W[k + 1];
        if (drop > rep.worst_drop) {
            rep.worst_drop = drop;
            rep.at_r = p.radii[k + 1];
        }
    }
    rep.pass = rep.worst_drop <= tol;
    return rep;
}

DecayReport check_weiss_decay(const FrequencyProfile& p, double alpha) {
    if (p.W.empty()) throw std::invalid_argument("no Weiss samples");
    DecayReport rep;
    const double rmax = p.radii.back(), Wmax = p.W.back();
    bool any_positive = false;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t k = 0; k < p.W.size(); ++k) {
        if (p.W[k] > 0) {
            any_positive = true;
            const double lx = std::log(p.radii[k]), ly = std::log(p.W[k]);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            ++n;
        }
        const double bound = std::pow(p.radii[k] / rmax, alpha) * Wmax;
        const double excess = p.W[k] - bound;
        rep.worst_excess = std::max(rep.worst_excess, excess);
        if (excess > 1e-12 * (1.0 + std::abs(bound))) rep.pass = false;
    }
    if (!any_positive) {  // decay holds vacuously
        rep.pass = true;
        rep.worst_excess = 0;
        return rep;
    }
    if (n >= 2 && n * sxx - sx * sx > 0) {
        rep.alpha_hat = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        rep.alpha_defined = true;
    }
    return rep;
}

AngularTrace trace_from_function(int n_samples, const std::function<QPoint(double)>& f) {
    if (n_samples < 4) throw std::invalid_argument("need at least 4 trace samples");
    AngularTrace tr;
    tr.angles.reserve(n_samples);
    tr.points.reserve(n_samples);
    for (int k = 0; k < n_samples; ++k) {
        const double phi = 2.0 * M_PI * k / n_samples;
        tr.angles.push_back(phi);
        tr.points.push_back(f(phi));
    }
    return tr;
}

QPoint eval_trace(const AngularTrace& tr, double phi) {
    const std::size_t n = tr.points.size();
    if (n == 0) throw std::invalid_argument("empty trace");
    double x = std::fmod(phi, 2.0 * M_PI);
    if (x < 0) x += 2.0 * M_PI;
    // gap [k, k+1) with wraparound
    std::size_t k = std::upper_bound(tr.angles.begin(), tr.angles.end(), x) - tr.angles.begin();
    const std::size_t lo = (k == 0) ? n - 1 : k - 1;
    const std::size_t hi = (lo + 1) % n;
    double a0 = tr.angles[lo];
    double a1 = lo + 1 == n ? tr.angles[0] + 2.0 * M_PI : tr.angles[hi];
    if (x < a0) x += 2.0 * M_PI;
    const double t = (a1 > a0) ? (x - a0) / (a1 - a0) : 0.0;
    std::vector<double> vals = lerp_values(tr.points[lo], tr.points[hi], t);
    const int sign = (t <= 0.5 ? tr.points[lo].sign : tr.points[hi].sign);
    return make_qpoint(std::move(vals), sign);
}

SampledField homogeneous_extension(const AngularTrace& tr, double I, Mesh disk_mesh) {
    if (disk_mesh.dim != 2) throw std::invalid_argument("extension needs a 2D mesh");
    if (!(I > 0)) throw std::invalid_argument("homogeneity must be positive");
    const std::size_t q = tr.q();
    const Vec2 c{disk_mesh.cx, disk_mesh.cy};
    return sample_field(std::move(disk_mesh), [&](Vec2 p) {
        const double r = std::hypot(p[0] - c[0], p[1] - c[1]);
        if (r < 1e-15) return splat(0.0, q);
        QPoint t = eval_trace(tr, std::atan2(p[1] - c[1], p[0] - c[0]));
        const double f = std::pow(r, I);
        for (double& v : t.values) v *= f;
        canonicalize(t);
        return t;
    });
}

double extension_energy_spectral(const AngularTrace& tr, double I) {
    const std::size_t n = tr.points.size();
    if (n < 4) throw std::invalid_argument("trace too coarse");
    if (!(I > 0)) throw std::invalid_argument("homogeneity must be positive");
    double tangential = 0, mass = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t k1 = (k + 1) % n;
        double dphi = tr.angles[k1] - tr.angles[k];
        if (k1 == 0) dphi += 2.0 * M_PI;
        if (!(dphi > 0)) throw std::invalid_argument("trace angles must increase");
        tangential += sq(gs_metric(tr.points[k], tr.points[k1])) / dphi;
        mass += sq(qnorm(tr.points[k])) * dphi;  // left-endpoint rule on the circle
    }
    const double m = 2.0;
    return (tangential + I * I * mass) / (m + 2 * I - 2);
}

SmoothedFrequencySample smoothed_frequency(const SampledField& u, Vec2 q, double r) {
    if (!(r > 0)) throw std::invalid_argument("radius must be positive");
    require_ball_inside(u.mesh, q, r);
    const Mesh& m = u.mesh;
    const double h2 = m.h * m.h;

    // half of each incident edge energy belongs to the node
    std::vector<double> node_energy(m.n_nodes(), 0.0);
    for (std::size_t k = 0; k < m.edges.size(); ++k) {
        const Edge& e = m.edges[k];
        const double ee = m.edge_weight[k] * sq(gs_metric(u.values[e.a], u.values[e.b])) / h2;
        node_energy[e.a] += 0.5 * ee;
        node_energy[e.b] += 0.5 * ee;
    }
    // node cell volume: share of each complete incident cell
    std::vector<double> node_cell(m.n_nodes(), 0.0);
    if (m.dim == 1) {
        for (const Edge& e : m.edges) {
            node_cell[e.a] += 0.5 * m.h;
            node_cell[e.b] += 0.5 * m.h;
        }
    } else {
        for (int j = 0; j + 1 < m.ny; ++j)
            for (int i = 0; i + 1 < m.nx; ++i) {
                const int c[4] = {m.node_at(i, j), m.node_at(i + 1, j), m.node_at(i, j + 1),
                                  m.node_at(i + 1, j + 1)};
                if (c[0] < 0 || c[1] < 0 || c[2] < 0 || c[3] < 0) continue;
                for (int t = 0; t < 4; ++t) node_cell[c[t]] += h2 / 4.0;
            }
    }

    SmoothedFrequencySample out;
    out.q = q;
    out.r = r;
    for (std::size_t i = 0; i < m.n_nodes(); ++i) {
        const double d = std::hypot(m.coords[i][0] - q[0], m.coords[i][1] - q[1]);
        const double t = d / r;
        if (t <= 0.5) {
            out.D_phi += node_energy[i];
        } else if (t <= 1.0) {
            out.D_phi += (2.0 - 2.0 * t) * node_energy[i];
            if (d > 0) out.H_phi += 2.0 * sq(qnorm(u.values[i])) / d * node_cell[i];
        }
    }
    out.I_phi = out.H_phi > 0 ? r * out.D_phi / out.H_phi : kNaN;
    return out;
}

double median_frequency(const SampledField& u, Vec2 x, double r_hi, int n_radii) {
    if (n_radii < 3) throw std::invalid_argument("need several radii");
    std::vector<double> radii(n_radii);
    for (int k = 0; k < n_radii; ++k)
        radii[k] = r_hi * std::pow(10.0, -1.0 + double(k) / (n_radii - 1));
    FrequencyProfile p = profile(u, x, std::move(radii));
    std::vector<double> vals;
    for (double v : p.I)
        if (std::isfinite(v)) vals.push_back(v);
    if (vals.empty()) throw std::runtime_error("frequency undefined at every radius");
    std::sort(vals.begin(), vals.end());
    return vals[vals.size() / 2];
}

}  // namespace qfreq
