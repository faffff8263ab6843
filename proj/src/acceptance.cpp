#include "qfreq/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "qfreq/epiperimetric.hpp"
#include "qfreq/field.hpp"
#include "qfreq/frequency.hpp"
#include "qfreq/homogeneous.hpp"
#include "qfreq/mesh.hpp"
#include "qfreq/minimize.hpp"
#include "qfreq/qpoint.hpp"
#include "qfreq/whitney.hpp"

namespace qfreq {

std::vector<double> fd_dirichlet_eigenvalues(double theta, int n, int count) {
    if (!(theta > 0.0) || n < 2 || count < 1 || count > n)
        throw std::invalid_argument("fd_dirichlet_eigenvalues: bad arguments");
    const double h = theta / double(n + 1);
    const double diag = 2.0 / (h * h);
    const double off2 = 1.0 / (h * h * h * h);
    // Sturm count: negative pivots of the LDL^T factorization of T - x I
    auto count_below = [&](double x) {
        int neg = 0;
        double d = diag - x;
        if (d == 0.0) d = -1e-300;
        if (d < 0.0) ++neg;
        for (int i = 1; i < n; ++i) {
            d = (diag - x) - off2 / d;
            if (d == 0.0) d = -1e-300;
            if (d < 0.0) ++neg;
        }
        return neg;
    };
    std::vector<double> ev(count);
    for (int k = 1; k <= count; ++k) {
        double lo = 0.0, hi = 2.0 * diag;
        for (int it = 0; it < 120; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (count_below(mid) >= k)
                hi = mid;
            else
                lo = mid;
        }
        ev[k - 1] = 0.5 * (lo + hi);
    }
    return ev;
}

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

double vec_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

std::string fmt(const char* f, ...) {
    char buf[256];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// ---- criterion 1: metric oracle ----------------------------------------

bool crit_metric(std::string& detail) {
    std::mt19937 rng(20260815u);
    std::uniform_real_distribution<double> val(-3.0, 3.0);
    std::uniform_int_distribution<int> qdist(1, 5);
    std::uniform_int_distribution<int> coin(0, 1);
    auto rand_point = [&](std::size_t q) {
        std::vector<double> v(q);
        for (double& x : v) x = val(rng);
        return make_qpoint(std::move(v), coin(rng) ? +1 : -1);
    };

    int exact = 0;
    for (int t = 0; t < 500; ++t) {
        const auto q = std::size_t(qdist(rng));
        const QPoint a = rand_point(q), b = rand_point(q);
        std::vector<std::size_t> perm(q);
        std::iota(perm.begin(), perm.end(), 0);
        double best = std::numeric_limits<double>::infinity();
        do {
            double s = 0.0;
            for (std::size_t i = 0; i < q; ++i) {
                const double d = a.values[i] - b.values[perm[i]];
                s += d * d;
            }
            best = std::min(best, s);
        } while (std::next_permutation(perm.begin(), perm.end()));
        if (g_metric(a, b) == std::sqrt(best)) ++exact;
    }

    int triangle = 0;
    for (int t = 0; t < 500; ++t) {
        const auto q = std::size_t(qdist(rng));
        const QPoint a = rand_point(q), b = rand_point(q), c = rand_point(q);
        if (gs_metric(a, c) <= gs_metric(a, b) + gs_metric(b, c) + 1e-12) ++triangle;
    }

    detail = fmt("exact %d/500, triangle %d/500", exact, triangle);
    return exact == 500 && triangle == 500;
}

// ---- criterion 2: 1D classification -------------------------------------
// Analytic oracle: E(x0) = 2/(1-x0) + 8/(1+x0), minimized at x0 = 1/3, E = 9.

bool crit_classify_1d(std::string& detail) {
    Mesh m = make_interval_mesh(-1.0, 1.0, 201);
    BoundaryTrace tr = make_boundary_trace(m, [](Vec2 x) {
        return x[0] > 0.0 ? make_qpoint({1.0, -1.0}, +1) : make_qpoint({2.0, -2.0}, -1);
    });
    SolveParams sp;
    sp.max_sweeps = 20000;
    const SolveResult res = solve(tr, m, sp);
    const OneDClassification cls = classify_1d(res.field);
    const double x0 = cls.x0 ? *cls.x0 : -9.0;
    const double gap = std::abs(vec_norm(cls.a) - vec_norm(cls.b));
    detail = fmt("x0 %.4f, energy %.4f, ||a|-|b|| %.2e", x0, res.energy, gap);
    return cls.x0.has_value() && std::abs(x0 - 1.0 / 3.0) <= 0.02 &&
           std::abs(res.energy - 9.0) <= 0.1 && cls.invariants_ok && gap <= 0.02;
}

// ---- criterion 3: integer frequency -------------------------------------

HomogeneousSpec unit_spec(int alpha) {
    const double a = 1.0 / std::sqrt(2.0);
    HomogeneousSpec spec;
    spec.p = {alpha, 1.0, 0.0};
    spec.a_plus.assign(std::size_t(alpha), {a, -a});
    spec.a_minus.assign(std::size_t(alpha), {a, -a});
    return spec;
}

bool crit_integer_frequency(std::string& detail) {
    const Mesh disk = make_disk_mesh(0, 0, 1, 257);
    bool ok = true;
    double worst_dist = 0.0, worst_dev = 0.0;
    for (int alpha = 1; alpha <= 3; ++alpha) {
        const SampledField u = build_homogeneous(unit_spec(alpha), disk);
        const IntegerFrequencyReport rep = measured_frequency_is_integer(u, {0, 0});
        ok = ok && rep.pass && rep.nearest == alpha && rep.distance <= 0.05;
        worst_dist = std::max(worst_dist, rep.distance);

        FrequencyProfile pr = profile(u, {0, 0}, linspace(0.2, 0.8, 13));
        std::vector<double> sorted = pr.I;
        std::sort(sorted.begin(), sorted.end());
        const double med = sorted[sorted.size() / 2];
        for (double i : pr.I) {
            const double dev = std::abs(i - med) / med;
            worst_dev = std::max(worst_dev, dev);
            ok = ok && dev <= 0.01;
        }
    }
    detail = fmt("max |median-alpha| %.3f, max I deviation %.2f%%", worst_dist,
                 100.0 * worst_dev);
    return ok;
}

// ---- criteria 4 and 5 share the model trace ------------------------------
// g(s) = sin s + eps sin 2s on each half circle, sheets (-g, g).

BoundaryPartition model_partition(double eps) {
    const int nsamp = 1025;
    BoundaryPartition bp;
    bp.arcs = {Arc{0.0, kPi, +1, false}, Arc{kPi, 2.0 * kPi, -1, false}};
    for (int arc = 0; arc < 2; ++arc) {
        std::vector<double> g(nsamp), neg(nsamp);
        for (int j = 0; j < nsamp; ++j) {
            const double s = kPi * j / (nsamp - 1);
            g[std::size_t(j)] = std::sin(s) + eps * std::sin(2.0 * s);
            neg[std::size_t(j)] = -g[std::size_t(j)];
        }
        bp.traces.push_back({neg, g});
    }
    mark_main_arcs(bp);
    return bp;
}

QPoint model_trace_point(double phi, double eps) {
    if (phi < 0.0) phi += 2.0 * kPi;
    const int sgn = phi <= kPi ? +1 : -1;
    const double s = sgn > 0 ? phi : phi - kPi;
    const double g = std::sin(s) + eps * std::sin(2.0 * s);
    return make_qpoint({-g, g}, sgn);
}

bool crit_weiss(std::string& detail) {
    double wmax = 0.0;
    {
        const SampledField u = sample_field(make_interval_mesh(-1, 1, 201), [](Vec2 x) {
            return make_qpoint({x[0], -x[0]}, x[0] >= 0 ? +1 : -1);
        });
        FrequencyProfile p = profile(u, {0, 0}, linspace(0.2, 0.8, 13));
        add_weiss(p, 1.0);
        for (double w : p.W) wmax = std::max(wmax, std::abs(w));
    }
    const Mesh disk = make_disk_mesh(0, 0, 1, 513);
    for (int alpha : {1, 2}) {
        const SampledField u = sample_field(disk, [alpha](Vec2 x) {
            const double v = alpha == 1 ? x[0] : x[0] * x[0] - x[1] * x[1];
            return make_qpoint({v}, +1);
        });
        FrequencyProfile p = profile(u, {0, 0}, linspace(0.2, 0.8, 13));
        add_weiss(p, double(alpha));
        for (double w : p.W) wmax = std::max(wmax, std::abs(w));
    }
    bool ok = wmax <= 1e-3;

    const Mesh d = make_disk_mesh(0, 0, 1, 101);
    BoundaryTrace tr = make_boundary_trace(
        d, [](Vec2 x) { return model_trace_point(std::atan2(x[1], x[0]), 0.1); });
    SolveParams sp;
    sp.max_sweeps = 20000;
    const SolveResult res = solve(tr, d, sp);
    FrequencyProfile p = profile(res.field, {0, 0}, linspace(0.2, 0.8, 13));
    add_weiss(p, 1.0);
    const MonotoneReport mono = check_weiss_monotone(p, 3.0 * d.h);
    ok = ok && mono.pass;
    detail = fmt("max |W| %.2e on exact fields, worst solved drop %.2e (tol %.2e)", wmax,
                 mono.worst_drop, 3.0 * d.h);
    return ok;
}

bool crit_epiperimetric(std::string& detail) {
    const double sigma = 1.0 / 6.0;
    bool ok = true;
    double delta_min = std::numeric_limits<double>::infinity();
    for (double eps : {0.05, 0.1, 0.2}) {
        const CompetitorReport rep = verify_epiperimetric(model_partition(eps), sigma, 0.01);
        ok = ok && rep.pass && !rep.trivially_satisfied && rep.gap >= 0.01 * rep.W1;
        delta_min = std::min(delta_min, rep.delta_measured);
    }
    const int n = 241;
    int grid_ok = 0;
    for (int k = 0; k < n; ++k) {
        const double lam = 8.0 * std::pow(1e4 / 8.0, double(k) / (n - 1));
        if (step_one_mode_inequality(lam, sigma, sigma)) ++grid_ok;
    }
    ok = ok && grid_ok == n;
    detail = fmt("min delta %.4f (need 0.01), mode inequality %d/%d", delta_min, grid_ok, n);
    return ok;
}

// ---- criterion 6: spectral energy identity -------------------------------

bool crit_spectral_identity(std::string& detail) {
    const Mesh disk = make_disk_mesh(0, 0, 1, 257);
    struct Case {
        double I;
        std::function<QPoint(double)> f;
    };
    const Case cases[] = {
        {1.0, [](double phi) { return make_qpoint({std::sin(phi)}, +1); }},
        {2.0, [](double phi) { return make_qpoint({std::sin(2.0 * phi)}, +1); }},
        {1.0,
         [](double phi) {
             const double c = std::cos(phi);
             return make_qpoint({c, -c}, c >= 0 ? +1 : -1);
         }},
    };
    bool ok = true;
    double worst = 0.0;
    for (const Case& cs : cases) {
        const AngularTrace tr = trace_from_function(2048, cs.f);
        const double spectral = extension_energy_spectral(tr, cs.I);
        const double quad = dirichlet_energy(homogeneous_extension(tr, cs.I, disk));
        const double rel = std::abs(quad - spectral) / spectral;
        worst = std::max(worst, rel);
        ok = ok && rel <= 0.01;
    }
    detail = fmt("max |quadrature-spectral| %.2f%%", 100.0 * worst);
    return ok;
}

// ---- criterion 7: arc spectra --------------------------------------------

bool crit_arc_spectra(std::string& detail) {
    bool ok = true;
    double worst = 0.0;
    for (double theta : {kPi / 3.0, kPi / 2.0, kPi, 1.5 * kPi}) {
        const ArcSpectrum sp = arc_eigen(theta, 5);
        const std::vector<double> fd = fd_dirichlet_eigenvalues(theta, 4096, 5);
        for (int k = 0; k < 5; ++k) {
            const double rel = std::abs(fd[std::size_t(k)] - sp.lambda[std::size_t(k)]) /
                               sp.lambda[std::size_t(k)];
            worst = std::max(worst, rel);
            ok = ok && rel <= 0.005;
        }
    }
    detail = fmt("max eigenvalue mismatch %.3f%%", 100.0 * worst);
    return ok;
}

// ---- criterion 8: whitney forest -----------------------------------------

std::uint64_t cube_key(int j, std::int64_t ix, std::int64_t iy) {
    return (std::uint64_t(j) << 44) | (std::uint64_t(ix) << 22) | std::uint64_t(iy);
}

SampledField bump_input(int n) {
    Mesh m = make_rect_mesh(-4, 4, -4, 4, n, n);
    return sample_field(std::move(m), [](Vec2 x) {
        const double t = ((x[0] - 0.5) * (x[0] - 0.5) + (x[1] - 0.25) * (x[1] - 0.25)) / 0.04;
        return make_qpoint({t < 1.0 ? (1.0 - t) * (1.0 - t) : 0.0}, +1);
    });
}

double stopped_area(const CubeForest& f) {
    double a = 0.0;
    for (const CubeRecord& c : f.stopped) a += 4.0 * c.half_side * c.half_side;
    return a;
}

bool has_self_or_ancestor(const std::unordered_set<std::uint64_t>& keys, const CubeRecord& c,
                          int n0) {
    std::int64_t ax = c.ix, ay = c.iy;
    for (int g = c.j; g >= n0; --g) {
        if (keys.count(cube_key(g, ax, ay))) return true;
        ax >>= 1;
        ay >>= 1;
    }
    return false;
}

bool crit_whitney(std::string& detail) {
    const WhitneyParams params;
    const int j_max = params.N0 + 5;

    const GraphCurrent flat = make_graph_current(sample_field(
        make_rect_mesh(-4, 4, -4, 4, 65, 65), [](Vec2) { return make_qpoint({0.0}, +1); }));
    const CubeForest ff = refine(flat, params, j_max);
    bool flat_ok = ff.stopped.empty() && ff.father_rule_ok;
    for (std::uint8_t m : ff.gamma_mask) flat_ok = flat_ok && m == 1;

    const GraphCurrent bump = make_graph_current(bump_input(129));
    const CubeForest f1 = refine(bump, params, j_max);
    const CubeForest f2 = refine(bump, params, j_max);
    const bool regression_ok = forest_to_string(f1) == forest_to_string(f2);

    std::unordered_set<std::uint64_t> keys;
    for (const CubeRecord& c : f1.stopped) keys.insert(cube_key(c.j, c.ix, c.iy));
    bool disjoint = true;
    for (const CubeRecord& c : f1.stopped) {
        std::int64_t ax = c.ix, ay = c.iy;
        for (int g = c.j - 1; g >= params.N0; --g) {
            ax >>= 1;
            ay >>= 1;
            if (keys.count(cube_key(g, ax, ay))) disjoint = false;
        }
    }

    WhitneyParams doubled = params;
    doubled.Ce *= 2.0;
    doubled.Ch *= 2.0;
    const CubeForest f3 = refine(bump, doubled, j_max);
    bool monotone = stopped_area(f3) <= stopped_area(f1) + 1e-12;
    for (const CubeRecord& c : f3.stopped)
        if (c.cls != 'n') monotone = monotone && has_self_or_ancestor(keys, c, params.N0);

    detail = fmt("flat stopped %zu, bump stopped %zu, father %s, disjoint %s, "
                 "monotone %s, regression %s",
                 ff.stopped.size(), f1.stopped.size(), f1.father_rule_ok ? "ok" : "BAD",
                 disjoint ? "ok" : "BAD", monotone ? "ok" : "BAD",
                 regression_ok ? "ok" : "BAD");
    return flat_ok && f1.father_rule_ok && !f1.stopped.empty() && disjoint && monotone &&
           regression_ok;
}

// ---- criterion 9: smoothed frequency --------------------------------------

bool crit_smoothed_frequency(std::string& detail) {
    const Mesh disk = make_disk_mesh(0, 0, 1, 257);
    bool ok = true;
    double worst = 0.0;
    SampledField keep;
    for (int alpha : {1, 2}) {
        SampledField u = build_homogeneous(unit_spec(alpha), disk);
        for (double r : {0.4, 0.6, 0.8}) {
            const FrequencyProfile pr = profile(u, {0, 0}, {r});
            const SmoothedFrequencySample s = smoothed_frequency(u, {0, 0}, r);
            const double rel = std::abs(s.I_phi - pr.I[0]) / pr.I[0];
            worst = std::max(worst, rel);
            ok = ok && rel <= 0.05;
        }
        if (alpha == 1) keep = std::move(u);
    }

    const double base = smoothed_frequency(keep, {0, 0}, 0.6).I_phi;
    double scale_err = 0.0;
    for (double lam : {0.5, 2.0}) {
        SampledField v = keep;
        for (QPoint& p : v.values)
            for (double& x : p.values) x *= lam;
        const double got = smoothed_frequency(v, {0, 0}, 0.6).I_phi;
        scale_err = std::max(scale_err, std::abs(got - base) / std::abs(base));
    }
    ok = ok && scale_err <= 1e-10;
    detail = fmt("max |I_phi - I| %.2f%%, scaling drift %.1e", 100.0 * worst, scale_err);
    return ok;
}

}  // namespace

int run_acceptance(std::ostream& out, bool show_timing) {
    struct Entry {
        int id;
        const char* name;
        double budget;  // seconds, 0 = unbudgeted
        bool (*fn)(std::string&);
    };
    const Entry entries[] = {
        {1, "metric oracle", 1.0, crit_metric},
        {2, "1d classification", 5.0, crit_classify_1d},
        {3, "integer frequency", 30.0, crit_integer_frequency},
        {4, "weiss functional", 0.0, crit_weiss},
        {5, "epiperimetric gap", 10.0, crit_epiperimetric},
        {6, "spectral identity", 20.0, crit_spectral_identity},
        {7, "arc spectra", 0.0, crit_arc_spectra},
        {8, "whitney forest", 60.0, crit_whitney},
        {9, "smoothed frequency", 0.0, crit_smoothed_frequency},
    };
    int failures = 0;
    for (const Entry& e : entries) {
        std::string detail;
        bool pass = false;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            pass = e.fn(detail);
        } catch (const std::exception& ex) {
            detail = std::string("exception: ") + ex.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (e.budget > 0.0 && secs > e.budget) {
            pass = false;
            detail += fmt(" [over budget %.0fs]", e.budget);
        }
        if (!pass) ++failures;
        char line[400];
        if (show_timing)
            std::snprintf(line, sizeof line, "criterion %d %-4s %-20s %7.2fs  %s\n", e.id,
                          pass ? "pass" : "FAIL", e.name, secs, detail.c_str());
        else
            std::snprintf(line, sizeof line, "criterion %d %-4s %-20s %s\n", e.id,
                          pass ? "pass" : "FAIL", e.name, detail.c_str());
        out << line;
    }
    out << "acceptance: " << (9 - failures) << "/9 criteria passed\n";
    return failures;
}

}  // namespace qfreq
