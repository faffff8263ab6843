#include "qfreq/frequency.hpp"

#include <cmath>

#include "doctest.h"

using namespace qfreq;

namespace {

SampledField fold_field(const Mesh& m) {
    return sample_field(m, [](Vec2 p) {
        return make_qpoint({p[0], -p[0]}, p[0] >= 0 ? +1 : -1);
    });
}

AngularTrace fold_trace(int n = 2048) {
    return trace_from_function(n, [](double phi) {
        const double c = std::cos(phi);
        return make_qpoint({c, -c}, c >= 0 ? +1 : -1);
    });
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

}  // namespace

TEST_CASE("1D fold profile: D = 4r, H = 4r^2, I = 1") {
    SampledField u = fold_field(make_interval_mesh(-1, 1, 201));
    FrequencyProfile p = profile(u, {0, 0}, linspace(0.1, 0.9, 9));
    for (std::size_t k = 0; k < p.radii.size(); ++k) {
        const double r = p.radii[k];
        CHECK(p.D[k] == doctest::Approx(4 * r).epsilon(0.03));
        CHECK(p.H[k] == doctest::Approx(4 * r * r).epsilon(1e-10));
        CHECK(p.I[k] == doctest::Approx(1.0).epsilon(1e-10));
    }
    CHECK_THROWS(profile(u, {0, 0}, {1.5}));  // ball exits the domain
}

TEST_CASE("harmonic sheet Re z^2 has frequency 2") {
    SampledField u = sample_field(make_disk_mesh(0, 0, 1, 101), [](Vec2 p) {
        return make_qpoint({p[0] * p[0] - p[1] * p[1]}, +1);
    });
    FrequencyProfile p = profile(u, {0, 0}, linspace(0.3, 0.8, 6));
    for (std::size_t k = 0; k < p.radii.size(); ++k) {
        const double r = p.radii[k];
        CHECK(p.D[k] == doctest::Approx(2 * M_PI * std::pow(r, 4)).epsilon(0.02));
        CHECK(p.H[k] == doctest::Approx(M_PI * std::pow(r, 5)).epsilon(0.02));
        CHECK(p.I[k] == doctest::Approx(2.0).epsilon(0.01));
    }
    CHECK(median_frequency(u, {0, 0}, 0.8) == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("constant field has zero frequency") {
    SampledField u = sample_field(make_disk_mesh(0, 0, 1, 41),
                                  [](Vec2) { return make_qpoint({1.0, 2.0}, +1); });
    FrequencyProfile p = profile(u, {0, 0}, {0.3, 0.5, 0.7});
    for (double d : p.D) CHECK(d == doctest::Approx(0.0));
    for (double i : p.I) CHECK(i == doctest::Approx(0.0));
}

TEST_CASE("weiss vanishes on matched homogeneous fields") {
    SampledField u1 = fold_field(make_interval_mesh(-1, 1, 201));
    FrequencyProfile p1 = profile(u1, {0, 0}, linspace(0.1, 0.9, 9));
    add_weiss(p1, 1.0);
    for (double w : p1.W) CHECK(std::abs(w) <= 1e-3);
    CHECK(check_weiss_monotone(p1, 1e-6).pass);

    // Edges straddling the 2D sign interface undercount energy by
    // |p_a||p_b| per edge, so D and hence W sit below zero by ~1.2 h/r.
    SampledField u2 = fold_field(make_disk_mesh(0, 0, 1, 151));
    FrequencyProfile p2 = profile(u2, {0, 0}, linspace(0.2, 0.8, 7));
    add_weiss(p2, 1.0);
    for (std::size_t k = 0; k < p2.W.size(); ++k)
        CHECK(std::abs(p2.W[k]) <= 1.6 * u2.mesh.h / p2.radii[k]);

    // I(r) > I0 forces W > 0
    SampledField u3 = sample_field(make_disk_mesh(0, 0, 1, 101), [](Vec2 p) {
        return make_qpoint({p[0] * p[0] - p[1] * p[1]}, +1);
    });
    FrequencyProfile p3 = profile(u3, {0, 0}, linspace(0.3, 0.8, 6));
    add_weiss(p3, 1.0);
    for (double w : p3.W) CHECK(w > 0.0);
}

TEST_CASE("weiss monotonicity and decay checkers") {
    FrequencyProfile p;
    p.dim = 2;
    p.radii = linspace(0.1, 1.0, 10);
    p.W.assign(10, 0.0);
    CHECK(check_weiss_monotone(p, 1e-12).pass);

    DecayReport flat = check_weiss_decay(p, 0.5);
    CHECK(flat.pass);
    CHECK(!flat.alpha_defined);

    for (int i = 0; i < 10; ++i) p.W[i] = 2.0 * std::sqrt(p.radii[i]);
    DecayReport half = check_weiss_decay(p, 0.5);
    CHECK(half.pass);
    CHECK(half.alpha_defined);
    CHECK(half.alpha_hat == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(check_weiss_monotone(p, 1e-12).pass);

    p.W.assign(10, 1.0);  // constant positive W decays for no alpha > 0
    CHECK(!check_weiss_decay(p, 0.3).pass);

    for (int i = 0; i < 10; ++i) p.W[i] = 1.0 - 0.1 * i;
    MonotoneReport bad = check_weiss_monotone(p, 1e-12);
    CHECK(!bad.pass);
    CHECK(bad.worst_drop == doctest::Approx(0.1));
}

TEST_CASE("homogeneous extension recovers homogeneous fields") {
    const Mesh disk = make_disk_mesh(0, 0, 1, 81);
    SampledField want = fold_field(disk);
    SampledField got = homogeneous_extension(fold_trace(), 1.0, disk);
    double worst = 0;
    for (std::size_t i = 0; i < want.values.size(); ++i)
        worst = std::max(worst, gs_metric(want.values[i], got.values[i]));
    CHECK(worst <= 2e-5);

    AngularTrace zero = trace_from_function(64, [](double) { return splat(0.0, 2); });
    SampledField z = homogeneous_extension(zero, 1.0, disk);
    CHECK(dirichlet_energy(z) == doctest::Approx(0.0));

    AngularTrace s2 = trace_from_function(2048, [](double phi) {
        return make_qpoint({std::sin(2 * phi)}, +1);
    });
    SampledField ext2 = homogeneous_extension(s2, 2.0, disk);
    for (std::size_t i = 0; i < ext2.values.size(); ++i) {
        const Vec2 p = disk.coords[i];
        const double want_v = 2 * p[0] * p[1];  // r^2 sin(2 phi)
        CHECK(ext2.values[i].values[0] == doctest::Approx(want_v).epsilon(1e-4));
    }
}

TEST_CASE("spectral energy matches closed forms and disk quadrature") {
    AngularTrace zero = trace_from_function(64, [](double) { return splat(0.0, 1); });
    CHECK(extension_energy_spectral(zero, 1.0) == doctest::Approx(0.0));

    AngularTrace s1 = trace_from_function(4096, [](double phi) {
        return make_qpoint({std::sin(phi)}, +1);
    });
    CHECK(extension_energy_spectral(s1, 1.0) == doctest::Approx(M_PI).epsilon(1e-5));

    AngularTrace s2 = trace_from_function(4096, [](double phi) {
        return make_qpoint({std::sin(2 * phi)}, +1);
    });
    CHECK(extension_energy_spectral(s2, 2.0) == doctest::Approx(2 * M_PI).epsilon(1e-5));

    AngularTrace f = fold_trace(4096);
    CHECK(extension_energy_spectral(f, 1.0) == doctest::Approx(2 * M_PI).epsilon(1e-5));

    const Mesh disk = make_disk_mesh(0, 0, 1, 129);
    CHECK(dirichlet_energy(homogeneous_extension(s1, 1.0, disk)) ==
          doctest::Approx(M_PI).epsilon(0.01));
    CHECK(dirichlet_energy(homogeneous_extension(s2, 2.0, disk)) ==
          doctest::Approx(2 * M_PI).epsilon(0.01));
    CHECK(dirichlet_energy(homogeneous_extension(f, 1.0, disk)) ==
          doctest::Approx(2 * M_PI).epsilon(0.01));
}

TEST_CASE("smoothed frequency tracks I on homogeneous fields") {
    SampledField fold = fold_field(make_disk_mesh(0, 0, 1, 101));
    for (double r : {0.5, 0.7, 0.9}) {
        SmoothedFrequencySample s = smoothed_frequency(fold, {0, 0}, r);
        CHECK(s.I_phi == doctest::Approx(1.0).epsilon(0.02));
    }

    SampledField z2 = sample_field(make_disk_mesh(0, 0, 1, 101), [](Vec2 p) {
        return make_qpoint({p[0] * p[0] - p[1] * p[1]}, +1);
    });
    FrequencyProfile p = profile(z2, {0, 0}, {0.8});
    SmoothedFrequencySample s = smoothed_frequency(z2, {0, 0}, 0.8);
    CHECK(s.I_phi == doctest::Approx(p.I[0]).epsilon(0.05));
    CHECK(s.I_phi == doctest::Approx(2.0).epsilon(0.03));

    // exact scale invariance
    for (double lam : {0.5, 2.0}) {
        SampledField scaled = fold;
        for (QPoint& t : scaled.values)
            for (double& v : t.values) v *= lam;
        SmoothedFrequencySample s0 = smoothed_frequency(fold, {0, 0}, 0.7);
        SmoothedFrequencySample s1 = smoothed_frequency(scaled, {0, 0}, 0.7);
        CHECK(std::abs(s1.I_phi - s0.I_phi) <= 1e-10 * std::abs(s0.I_phi));
    }

    SampledField c = sample_field(make_disk_mesh(0, 0, 1, 41),
                                  [](Vec2) { return make_qpoint({1.0, 3.0}, +1); });
    CHECK(smoothed_frequency(c, {0, 0}, 0.6).I_phi == doctest::Approx(0.0));
}
