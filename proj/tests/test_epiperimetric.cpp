#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "qfreq/acceptance.hpp"
#include "qfreq/epiperimetric.hpp"
#include "qfreq/minimize.hpp"

using namespace qfreq;

namespace {

constexpr double kPi = 3.14159265358979323846;

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += f(a + h * i) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

// sheets (-g, g) with g(s) = sin s + eps sin 2s on both half circles
BoundaryPartition model_partition(double eps, int nsamp = 1025) {
    BoundaryPartition bp;
    bp.arcs = {Arc{0.0, kPi, +1, false}, Arc{kPi, 2.0 * kPi, -1, false}};
    for (int arc = 0; arc < 2; ++arc) {
        std::vector<double> g(nsamp);
        for (int j = 0; j < nsamp; ++j) {
            const double s = kPi * j / (nsamp - 1);
            g[j] = std::sin(s) + eps * std::sin(2.0 * s);
        }
        std::vector<double> neg(nsamp);
        for (int j = 0; j < nsamp; ++j) neg[j] = -g[j];
        bp.traces.push_back({neg, g});
    }
    mark_main_arcs(bp);
    return bp;
}

// CG solve of the weighted graph Laplacian with fixed boundary values
std::vector<double> harmonic_on_mesh(const Mesh& m, const std::vector<double>& bc) {
    const std::size_t n = m.n_nodes();
    std::vector<std::vector<std::pair<int, double>>> adj(n);
    for (std::size_t k = 0; k < m.edges.size(); ++k) {
        adj[m.edges[k].a].push_back({m.edges[k].b, m.edge_weight[k]});
        adj[m.edges[k].b].push_back({m.edges[k].a, m.edge_weight[k]});
    }
    std::vector<double> v(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (m.boundary[i]) v[i] = bc[i];
    auto apply = [&](const std::vector<double>& x, std::vector<double>& out) {
        for (std::size_t i = 0; i < n; ++i) {
            if (m.boundary[i]) {
                out[i] = 0.0;
                continue;
            }
            double acc = 0.0;
            for (const auto& [j, w] : adj[i]) acc += w * (x[i] - x[j]);
            out[i] = acc;
        }
    };
    std::vector<double> r(n, 0.0), p(n), Ap(n);
    apply(v, r);
    for (std::size_t i = 0; i < n; ++i) r[i] = -r[i];
    p = r;
    double rr = 0.0;
    for (double x : r) rr += x * x;
    for (int it = 0; it < 4000 && rr > 1e-24; ++it) {
        apply(p, Ap);
        double pAp = 0.0;
        for (std::size_t i = 0; i < n; ++i) pAp += p[i] * Ap[i];
        if (pAp <= 0.0) break;
        const double alpha = rr / pAp;
        for (std::size_t i = 0; i < n; ++i)
            if (!m.boundary[i]) v[i] += alpha * p[i];
        double rr2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (m.boundary[i]) continue;
            r[i] -= alpha * Ap[i];
            rr2 += r[i] * r[i];
        }
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + (rr2 / rr) * p[i];
        rr = rr2;
    }
    return v;
}

}  // namespace

TEST_CASE("arc spectra closed forms and eigensolver cross-check") {
    ArcSpectrum half = arc_eigen(kPi, 5);
    for (int k = 1; k <= 5; ++k) {
        CHECK(half.mu[k - 1] == doctest::Approx(double(k)).epsilon(1e-14));
        CHECK(half.lambda[k - 1] == doctest::Approx(double(k * k)).epsilon(1e-14));
        CHECK(half.mu[k - 1] * half.mu[k - 1] == half.lambda[k - 1]);
    }
    ArcSpectrum quarter = arc_eigen(kPi / 2.0, 1);
    CHECK(quarter.lambda[0] == doctest::Approx(4.0));
    CHECK(quarter.mu[0] == doctest::Approx(2.0));

    for (double theta : {kPi / 3.0, kPi / 2.0, kPi, 1.5 * kPi}) {
        const ArcSpectrum sp = arc_eigen(theta, 5);
        const std::vector<double> fd = fd_dirichlet_eigenvalues(theta, 4096, 5);
        for (int k = 0; k < 5; ++k)
            CHECK(std::abs(fd[k] / sp.lambda[k] - 1.0) <= 5e-3);
        for (int k = 0; k + 1 < 5; ++k) CHECK(sp.lambda[k] < sp.lambda[k + 1]);
    }

    CHECK_THROWS_AS(arc_eigen(0.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(arc_eigen(-1.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(arc_eigen(7.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(arc_eigen(kPi, 0), std::invalid_argument);
}

TEST_CASE("eigenfunctions are orthonormal under 2048-point quadrature") {
    const ArcSpectrum sp = arc_eigen(2.2, 16);
    const int n = 2048;
    const double ds = sp.theta / (n - 1);
    for (int j = 1; j <= 16; ++j)
        for (int k = j; k <= 16; ++k) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) {
                const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
                acc += w * sp.eigenfunction(j, ds * i) * sp.eigenfunction(k, ds * i);
            }
            acc *= ds;
            CHECK(std::abs(acc - (j == k ? 1.0 : 0.0)) <= 1e-8);
        }
}

TEST_CASE("arc fourier coefficients recover known expansions") {
    const ArcSpectrum sp = arc_eigen(2.0, 16);
    const int n = 1025;
    const double ds = sp.theta / (n - 1);

    std::vector<double> u(n);
    for (int j = 0; j < n; ++j) u[j] = sp.eigenfunction(1, ds * j);
    std::vector<double> a = fourier_on_arc(u, sp);
    CHECK(a[0] == doctest::Approx(1.0).epsilon(1e-10));
    for (int k = 1; k < 16; ++k) CHECK(std::abs(a[k]) <= 1e-10);

    for (int j = 0; j < n; ++j)
        u[j] = 2.0 * sp.eigenfunction(1, ds * j) + 3.0 * sp.eigenfunction(2, ds * j);
    a = fourier_on_arc(u, sp);
    CHECK(a[0] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(a[1] == doctest::Approx(3.0).epsilon(1e-10));

    // smooth but not in the span: dense-quadrature oracle and Parseval
    for (int j = 0; j < n; ++j) {
        const double s = ds * j;
        u[j] = s * (sp.theta - s);
    }
    a = fourier_on_arc(u, sp);
    double mass = 0.0;
    for (int k = 0; k < 16; ++k) {
        const double oracle = simpson(
            [&](double s) { return s * (sp.theta - s) * sp.eigenfunction(k + 1, s); }, 0.0,
            sp.theta, 20000);
        CHECK(std::abs(a[k] - oracle) <= 1e-8);
        mass += a[k] * a[k];
    }
    const double exact_mass = std::pow(sp.theta, 5) / 30.0;
    CHECK(std::abs(mass - exact_mass) <= 1e-6);

    u[0] = 0.3;
    CHECK_THROWS_AS(fourier_on_arc(u, sp), std::invalid_argument);
    CHECK_THROWS_AS(fourier_on_arc(std::vector<double>(4, 0.0), sp), std::invalid_argument);
}

TEST_CASE("annulus profile coefficients and mode energies") {
    auto [A, B] = coefficients_AB(0.5, 1.0);
    CHECK(A == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
    CHECK(B == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

    for (double sigma : {1.0 / 6.0, 0.3, 0.45})
        for (double mu : {1.0, 2.5, 7.0}) {
            auto [aa, bb] = coefficients_AB(sigma, mu);
            const double rho1 = aa - bb;
            const double rhos = aa * std::pow(sigma, mu) - bb * std::pow(sigma, -mu);
            CHECK(std::abs(rho1 - 1.0) <= 1e-13);
            CHECK(std::abs(rhos) <= 1e-12 * std::max(1.0, bb * std::pow(sigma, -mu)));

            // closed-form mode energy vs direct quadrature of the profile
            const double lam = mu * mu;
            auto integrand = [&, aa = aa, bb = bb](double r) {
                const double rho = aa * std::pow(r, mu) - bb * std::pow(r, -mu);
                const double drho = mu * (aa * std::pow(r, mu - 1.0) + bb * std::pow(r, -mu - 1.0));
                return (drho * drho + lam * rho * rho / (r * r)) * r;
            };
            const double direct = simpson(integrand, sigma, 1.0, 40000);
            const double s2 = std::pow(sigma, 2.0 * mu);
            CHECK(direct == doctest::Approx(mu * (1.0 + s2) / (1.0 - s2)).epsilon(1e-8));
        }

    CHECK(coefficients_AB(1e-4, 400.0).first == doctest::Approx(1.0));
    CHECK(coefficients_AB(1e-4, 400.0).second == doctest::Approx(0.0));
    CHECK_THROWS_AS(coefficients_AB(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(coefficients_AB(1.0, 1.0), std::invalid_argument);

    const ArcSpectrum sp = arc_eigen(kPi, 4);
    CHECK(annulus_energy({0.0, 0.0}, 0.5, sp, true) == doctest::Approx(0.0));
    CHECK(annulus_energy({1.0}, 0.5, sp, true) == doctest::Approx(5.0 / 3.0).epsilon(1e-14));
    CHECK(annulus_energy({1.0}, 0.5, sp, false) == doctest::Approx(0.75).epsilon(1e-14));
    // keeping the first mode homogeneous is strictly cheaper
    CHECK(annulus_energy({1.0}, 1.0 / 6.0, sp, false) < annulus_energy({1.0}, 1.0 / 6.0, sp, true));
    CHECK_THROWS_AS(annulus_energy({1.0, 0.0, 0.0, 0.0, 0.0}, 0.5, sp, true),
                    std::invalid_argument);
}

TEST_CASE("inner extension energies") {
    CHECK(inner_extension_energy({}, {}, std::nullopt, std::nullopt, 0.25) == 0.0);
    CHECK(inner_extension_energy({0.0}, {0.0}, Arc{0.0, kPi, +1, true},
                                 Arc{kPi, 2 * kPi, -1, true}, 0.25) == 0.0);

    // half circles with equal norms glue to a pure sine: energy 2 sigma^2 c^2
    const double sigma = 0.25;
    const double e = inner_extension_energy({0.6, 0.8}, {1.0}, Arc{0.0, kPi, +1, true},
                                            Arc{kPi, 2 * kPi, -1, true}, sigma);
    CHECK(e == doctest::Approx(2.0 * sigma * sigma).epsilon(1e-9));

    // asymmetric arcs against an elliptic solve on a fine disk mesh
    const Arc fp{0.3, 2.1, +1, true};
    const Arc fm{2.6, 5.2, -1, true};
    const double ei = inner_extension_energy({0.8}, {1.1}, fp, fm, sigma);
    const Mesh disk = make_disk_mesh(0.0, 0.0, sigma, 161);
    std::vector<double> bc(disk.n_nodes(), 0.0);
    for (std::size_t v = 0; v < disk.n_nodes(); ++v) {
        if (!disk.boundary[v]) continue;
        double phi = std::atan2(disk.coords[v][1], disk.coords[v][0]);
        if (phi < 0) phi += 2.0 * kPi;
        if (phi > fp.start && phi < fp.end)
            bc[v] = sigma * 0.8 * std::sqrt(2.0 / fp.length()) *
                    std::sin(kPi * (phi - fp.start) / fp.length());
        else if (phi > fm.start && phi < fm.end)
            bc[v] = -sigma * 1.1 * std::sqrt(2.0 / fm.length()) *
                    std::sin(kPi * (phi - fm.start) / fm.length());
    }
    const std::vector<double> sol = harmonic_on_mesh(disk, bc);
    const double fd_energy = scalar_dirichlet_energy(disk, sol);
    CHECK(std::abs(fd_energy / ei - 1.0) <= 0.02);
}

TEST_CASE("per-mode killed-extension inequality") {
    const double sigma = 1.0 / 6.0;
    for (int i = 0; i <= 200; ++i) {
        const double lam = 8.0 * std::pow(10000.0 / 8.0, i / 200.0);
        CHECK(step_one_mode_inequality(lam, sigma, sigma));
    }
    CHECK(!step_one_mode_inequality(1.0, 0.49, 0.01));
    CHECK_THROWS_AS(step_one_mode_inequality(-1.0, sigma, sigma), std::invalid_argument);
}

TEST_CASE("main arc selection") {
    BoundaryPartition bp;
    bp.arcs = {Arc{0.0, 1.0, +1, false}, Arc{1.5, 4.0, +1, false}, Arc{4.5, 5.5, -1, false},
               Arc{5.6, 6.1, -1, false}};
    bp.traces.resize(4);
    mark_main_arcs(bp);
    CHECK(!bp.arcs[0].main);
    CHECK(bp.arcs[1].main);
    CHECK(bp.arcs[2].main);
    CHECK(!bp.arcs[3].main);
}

TEST_CASE("epiperimetric verification on the model and its perturbations") {
    const double sigma = 1.0 / 6.0;

    CompetitorReport exact = verify_epiperimetric(model_partition(0.0), sigma, 0.01);
    CHECK(exact.trivially_satisfied);
    CHECK(exact.pass);
    CHECK(std::abs(exact.W1) <= 1e-8);
    CHECK(std::abs(exact.gap) <= 1e-6);
    CHECK(exact.energy_uI == doctest::Approx(2.0 * kPi).epsilon(1e-8));
    CHECK(exact.h1 == doctest::Approx(2.0 * kPi).epsilon(1e-8));

    for (double eps : {0.05, 0.1, 0.2}) {
        CompetitorReport rep = verify_epiperimetric(model_partition(eps), sigma, 0.01);
        CHECK(!rep.trivially_satisfied);
        CHECK(rep.pass);
        CHECK(rep.W1 == doctest::Approx(3.0 * kPi * eps * eps).epsilon(1e-6));
        CHECK(rep.gap > 0.0);
        CHECK(rep.delta_measured == doctest::Approx(0.3313).epsilon(0.01));
    }

    // all-killed single small arc: the gap comes from the per-mode margins
    BoundaryPartition small;
    small.arcs = {Arc{0.0, kPi / 3.0, +1, false}};
    const int n = 513;
    std::vector<double> g(n);
    const ArcSpectrum sp3 = arc_eigen(kPi / 3.0, 3);
    for (int j = 0; j < n; ++j) {
        const double s = (kPi / 3.0) * j / (n - 1);
        g[j] = sp3.eigenfunction(1, s) + 0.3 * sp3.eigenfunction(2, s) +
               0.1 * sp3.eigenfunction(3, s);
    }
    std::vector<double> neg(n);
    for (int j = 0; j < n; ++j) neg[j] = -g[j];
    small.traces = {{neg, g}};
    CompetitorReport srep = verify_epiperimetric(small, sigma, 0.01);
    CHECK(!srep.trivially_satisfied);
    CHECK(srep.gap > 0.0);
    CHECK(srep.pass);
    CHECK(srep.delta_measured >= 0.01);
}

TEST_CASE("coefficient round-trip reproduces the trace on the circle") {
    BoundaryPartition bp = model_partition(0.1);
    const ArcSpectrum sp = arc_eigen(bp.arcs[0].length(), 16);
    for (std::size_t arc = 0; arc < bp.arcs.size(); ++arc)
        for (const auto& sheet : bp.traces[arc]) {
            const std::vector<double> a = fourier_on_arc(sheet, sp);
            const int n = int(sheet.size());
            for (int j = 0; j < n; j += 16) {
                const double s = bp.arcs[arc].length() * j / (n - 1);
                double rec = 0.0;
                for (int k = 1; k <= sp.modes(); ++k)
                    rec += a[k - 1] * sp.eigenfunction(k, s);
                CHECK(std::abs(rec - sheet[j]) <= 1e-8);
            }
        }
}

TEST_CASE("partition validation rejects malformed inputs") {
    BoundaryPartition bp = model_partition(0.0);
    bp.arcs[1].start = 2.0;  // overlaps arc 0
    CHECK_THROWS_AS(verify_epiperimetric(bp, 1.0 / 6.0, 0.01), std::invalid_argument);

    bp = model_partition(0.0);
    std::swap(bp.traces[0][0], bp.traces[0][1]);  // unordered sheets
    CHECK_THROWS_AS(verify_epiperimetric(bp, 1.0 / 6.0, 0.01), std::invalid_argument);

    bp = model_partition(0.0);
    for (double& v : bp.traces[0][1]) v *= 1.5;  // mean no longer zero
    CHECK_THROWS_AS(verify_epiperimetric(bp, 1.0 / 6.0, 0.01), std::invalid_argument);

    bp = model_partition(0.0);
    bp.arcs[0].sign = bp.arcs[1].sign = +1;
    bp.arcs[0].main = bp.arcs[1].main = true;  // two mains of one sign
    CHECK_THROWS_AS(verify_epiperimetric(bp, 1.0 / 6.0, 0.01), std::invalid_argument);

    CHECK_THROWS_AS(verify_epiperimetric(model_partition(0.0), 0.7, 0.01),
                    std::invalid_argument);
}

TEST_CASE("partition file round-trip") {
    BoundaryPartition bp = model_partition(0.1, 65);
    const std::string path = "build_test_partition.txt";
    write_partition(path, bp);
    BoundaryPartition rd = read_partition(path);
    REQUIRE(rd.arcs.size() == bp.arcs.size());
    for (std::size_t i = 0; i < bp.arcs.size(); ++i) {
        CHECK(rd.arcs[i].start == bp.arcs[i].start);
        CHECK(rd.arcs[i].end == bp.arcs[i].end);
        CHECK(rd.arcs[i].sign == bp.arcs[i].sign);
        REQUIRE(rd.traces[i].size() == bp.traces[i].size());
        for (std::size_t s = 0; s < bp.traces[i].size(); ++s)
            for (std::size_t j = 0; j < bp.traces[i][s].size(); ++j)
                CHECK(rd.traces[i][s][j] == bp.traces[i][s][j]);
    }
    std::remove(path.c_str());
    CHECK_THROWS_AS(read_partition("no_such_partition_file.txt"), std::runtime_error);
}

TEST_CASE("solved minimizer stays below the competitor energy") {
    const double eps = 0.1;
    CompetitorReport rep = verify_epiperimetric(model_partition(eps), 1.0 / 6.0, 0.01);

    const Mesh m = make_disk_mesh(0.0, 0.0, 1.0, 61);
    BoundaryTrace tr = make_boundary_trace(m, [eps](Vec2 p) {
        double phi = std::atan2(p[1], p[0]);
        if (phi < 0) phi += 2.0 * kPi;
        const double s = phi < kPi ? phi : phi - kPi;
        const double g = std::sin(s) + eps * std::sin(2.0 * s);
        return make_qpoint({-g, g}, phi < kPi ? +1 : -1);
    });
    SolveResult res = solve(tr, m, SolveParams{});
    CHECK(res.energy <= rep.energy_w * 1.02);
}
