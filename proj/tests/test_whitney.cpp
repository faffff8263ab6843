#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "doctest.h"
#include "qfreq/whitney.hpp"

using namespace qfreq;

namespace {

SampledField tilted_sheet(int n, double sx, double sy) {
    Mesh m = make_rect_mesh(-4, 4, -4, 4, n, n);
    return sample_field(std::move(m),
                        [=](Vec2 x) { return make_qpoint({sx * x[0] + sy * x[1]}, +1); });
}

SampledField bump_input(int n, double px, double py, double rho, double amp) {
    Mesh m = make_rect_mesh(-4, 4, -4, 4, n, n);
    return sample_field(std::move(m), [=](Vec2 x) {
        const double t =
            ((x[0] - px) * (x[0] - px) + (x[1] - py) * (x[1] - py)) / (rho * rho);
        return make_qpoint({t < 1.0 ? amp * (1.0 - t) * (1.0 - t) : 0.0}, +1);
    });
}

// Two sheets at separation c over a disk, hard cut: away from the rim the
// graph is two parallel flat sheets, zero excess but positive height.
SampledField step_input(int n, double px, double py, double rho, double c) {
    Mesh m = make_rect_mesh(-4, 4, -4, 4, n, n);
    return sample_field(std::move(m), [=](Vec2 x) {
        const double d2 = (x[0] - px) * (x[0] - px) + (x[1] - py) * (x[1] - py);
        return make_qpoint({0.0, d2 <= rho * rho ? c : 0.0}, +1);
    });
}

// Orthogonal projector onto the plane with unit normal nrm.
void projector(const double nrm[3], double P[3][3]) {
    for (int r = 0; r < 3; ++r)
        for (int cc = 0; cc < 3; ++cc) P[r][cc] = (r == cc ? 1.0 : 0.0) - nrm[r] * nrm[cc];
}

std::uint64_t key3(int j, std::int64_t ix, std::int64_t iy) {
    return (std::uint64_t(j) << 44) | (std::uint64_t(ix) << 22) | std::uint64_t(iy);
}

}  // namespace

TEST_CASE("projector distance matches explicit projection matrices") {
    const double slopes[] = {-1.5, -0.4, 0.0, 0.3, 2.0};
    for (double ax : slopes)
        for (double ay : slopes)
            for (double bx : slopes) {
                const double by = 0.7 * bx - 0.2;
                Plane3 a, b;
                a.normal = {-ax, -ay, 1.0};
                b.normal = {-bx, -by, 1.0};
                const double na = std::sqrt(1 + ax * ax + ay * ay);
                const double nb = std::sqrt(1 + bx * bx + by * by);
                const double ua[3] = {-ax / na, -ay / na, 1.0 / na};
                const double ub[3] = {-bx / nb, -by / nb, 1.0 / nb};
                double Pa[3][3], Pb[3][3];
                projector(ua, Pa);
                projector(ub, Pb);
                double frob2 = 0;
                for (int r = 0; r < 3; ++r)
                    for (int cc = 0; cc < 3; ++cc)
                        frob2 += (Pa[r][cc] - Pb[r][cc]) * (Pa[r][cc] - Pb[r][cc]);
                CHECK(projector_distance2(a, b) == doctest::Approx(frob2).epsilon(1e-12));
            }

    Plane3 e3, e1;
    e1.normal = {1.0, 0.0, 0.0};
    CHECK(projector_distance2(e3, e1) == doctest::Approx(2.0));
    CHECK(projector_distance2(e3, e3) == doctest::Approx(0.0));
    Plane3 zero;
    zero.normal = {0.0, 0.0, 0.0};
    CHECK_THROWS_AS(projector_distance2(zero, e3), std::invalid_argument);
}

TEST_CASE("graph current construction and validation") {
    GraphCurrent T = make_graph_current(bump_input(129, 0.5, 0.25, 1.5, 0.5));
    REQUIRE(T.sheets() == 1);
    const Mesh& m = T.g.mesh;
    // central differences of the smooth bump match the analytic slope
    const int i = (int)std::lround((0.875 - m.ax) / m.h);
    const int j = (int)std::lround((0.25 - m.ay) / m.h);
    const double x = m.ax + i * m.h;
    const double t = (x - 0.5) * (x - 0.5) / 2.25;
    const double gx_exact = 0.5 * 2.0 * (1.0 - t) * (-2.0 * (x - 0.5) / 2.25);
    const int n = m.node_at(i, j);
    CHECK(std::abs(T.grad_x[0][n] - gx_exact) < 5e-3);
    CHECK(std::abs(T.grad_y[0][n]) < 5e-3);
    CHECK(T.density[0][n] ==
          doctest::Approx(std::sqrt(1 + T.grad_x[0][n] * T.grad_x[0][n] +
                                    T.grad_y[0][n] * T.grad_y[0][n])));

    Mesh disk = make_disk_mesh(0, 0, 4, 65);
    SampledField on_disk = sample_field(disk, [](Vec2) { return make_qpoint({0.0}, +1); });
    CHECK_THROWS_AS(make_graph_current(on_disk), std::invalid_argument);

    Mesh wrong = make_rect_mesh(-2, 2, -2, 2, 33, 33);
    SampledField small = sample_field(wrong, [](Vec2) { return make_qpoint({0.0}, +1); });
    CHECK_THROWS_AS(make_graph_current(small), std::invalid_argument);
}

TEST_CASE("excess of flat and tilted sheets") {
    Plane3 flat;

    GraphCurrent zero = make_graph_current(tilted_sheet(65, 0.0, 0.0));
    CHECK(unoriented_excess(zero, {0, 0, 0}, 2.0, flat) == 0.0);
    CHECK(best_plane_excess(zero, {0, 0, 0}, 2.0).second == 0.0);

    const double s = 0.05;
    GraphCurrent tilt = make_graph_current(tilted_sheet(129, s, 0.0));
    const double E = unoriented_excess(tilt, {0, 0, 0}, 2.0, flat);
    CHECK(E == doctest::Approx(s * s).epsilon(0.01));

    Plane3 own;
    own.normal = {-s, 0.0, 1.0};
    CHECK(unoriented_excess(tilt, {0, 0, 0}, 2.0, own) < 1e-15);

    // empty ball: zero excess, but no plane to fit
    CHECK(unoriented_excess(tilt, {0.0, 0.0, 50.0}, 0.1, flat) == 0.0);
    CHECK_THROWS_AS(best_plane_excess(tilt, {0.0, 0.0, 50.0}, 0.1), std::runtime_error);
    CHECK_THROWS_AS(unoriented_excess(tilt, {0, 0, 0}, 0.0, flat), std::invalid_argument);
    CHECK_THROWS_AS(unoriented_excess(tilt, {0, 0, 0}, -1.0, flat), std::invalid_argument);
}

TEST_CASE("best plane recovery against a tilt grid search") {
    GraphCurrent tilt = make_graph_current(tilted_sheet(129, 0.3, 0.2));
    auto bp = best_plane_excess(tilt, {0, 0, 0}, 1.5);
    const double nn = std::sqrt(1.0 + 0.09 + 0.04);
    CHECK(std::abs(bp.first.normal[0] + 0.3 / nn) < 1e-9);
    CHECK(std::abs(bp.first.normal[1] + 0.2 / nn) < 1e-9);
    CHECK(std::abs(bp.first.normal[2] - 1.0 / nn) < 1e-9);
    CHECK(bp.second < 1e-14);

    // two sheets of opposite slope: the horizontal plane is optimal
    Mesh m = make_rect_mesh(-4, 4, -4, 4, 129, 129);
    SampledField two =
        sample_field(m, [](Vec2 x) { return make_qpoint({0.1 * x[0], -0.1 * x[0]}, +1); });
    GraphCurrent T = make_graph_current(std::move(two));
    auto bp2 = best_plane_excess(T, {0, 0, 0}, 1.5);
    CHECK(std::abs(bp2.first.normal[0]) < 1e-9);
    CHECK(std::abs(bp2.first.normal[1]) < 1e-9);

    for (const GraphCurrent* cur : {&tilt, &T}) {
        Plane3 flat;
        const double e_flat = unoriented_excess(*cur, {0, 0, 0}, 1.5, flat);
        const double e_best = best_plane_excess(*cur, {0, 0, 0}, 1.5).second;
        double grid_min = 1e30;
        for (int ia = -15; ia <= 15; ++ia)
            for (int ib = -15; ib <= 15; ++ib) {
                Plane3 pi;
                pi.normal = {-(0.3 / 15.0) * ia, -(0.3 / 15.0) * ib, 1.0};
                grid_min = std::min(grid_min, unoriented_excess(*cur, {0, 0, 0}, 1.5, pi));
            }
        CHECK(e_best <= grid_min + 1e-12);
        CHECK(grid_min - e_best <= 0.02 * e_flat + 1e-12);
    }
}

TEST_CASE("heights of model graphs") {
    Plane3 flat;

    GraphCurrent zero = make_graph_current(tilted_sheet(65, 0.0, 0.0));
    CHECK(height(zero, {0, 0, 0}, 1.0, flat) == 0.0);

    // two constant sheets: height is the separation, exactly
    const double c = 0.375;
    Mesh m = make_rect_mesh(-4, 4, -4, 4, 65, 65);
    SampledField two = sample_field(m, [=](Vec2) { return make_qpoint({0.0, c}, +1); });
    GraphCurrent T = make_graph_current(std::move(two));
    CHECK(height(T, {0.0, 0.0, c / 2.0}, 1.0, flat) == doctest::Approx(c).epsilon(1e-12));

    const double s = 0.05, r = 1.5;
    GraphCurrent tilt = make_graph_current(tilted_sheet(129, s, 0.0));
    CHECK(std::abs(height(tilt, {0, 0, 0}, r, flat) - 2.0 * r * s) < 3.0 * 0.0625 * s);

    CHECK(height(tilt, {0.0, 0.0, 50.0}, 0.1, flat) == 0.0);
}

TEST_CASE("refinement parameter validation") {
    GraphCurrent T = make_graph_current(tilted_sheet(33, 0.0, 0.0));
    WhitneyParams p;
    CHECK_NOTHROW(refine(T, p, 10));

    WhitneyParams bad = p;
    bad.M0 = 3;
    CHECK_THROWS_AS(refine(T, bad, 12), std::invalid_argument);
    bad = p;
    bad.beta2 = 0.3;
    CHECK_THROWS_AS(refine(T, bad, 12), std::invalid_argument);
    bad = p;
    bad.delta2 = 0.0;
    bad.beta2 = 0.0;
    CHECK_THROWS_AS(refine(T, bad, 12), std::invalid_argument);
    bad = p;
    bad.Ce = 0.0;
    CHECK_THROWS_AS(refine(T, bad, 12), std::invalid_argument);
    bad = p;
    bad.Ch = -1.0;
    CHECK_THROWS_AS(refine(T, bad, 12), std::invalid_argument);
    bad = p;
    bad.N0 = 9;  // sqrt(2) * 4 * 2^(7-9) > 1
    CHECK_THROWS_AS(refine(T, bad, 12), std::invalid_argument);
    bad = p;
    bad.c_sigma_sq = -0.5;
    CHECK_THROWS_AS(refine(T, bad, 12), std::invalid_argument);
    CHECK_THROWS_AS(refine(T, p, 9), std::invalid_argument);
}

TEST_CASE("flat graph never stops and is counted arithmetically") {
    Mesh m = make_rect_mesh(-4, 4, -4, 4, 65, 65);
    SampledField g = sample_field(m, [](Vec2) { return make_qpoint({0.0, 0.0}, +1); });
    GraphCurrent T = make_graph_current(std::move(g));
    CubeForest f = refine(T, WhitneyParams{}, 15);

    CHECK(f.params.m0 == 0.0);
    CHECK(f.stopped.empty());
    CHECK(f.father_rule_ok);
    REQUIRE(f.generations.size() == 6);
    unsigned long long expect = 1ULL << 24;
    for (const GenerationSummary& gs : f.generations) {
        CHECK(gs.cubes == expect);
        CHECK(gs.survivors == expect);
        CHECK(gs.we + gs.wh + gs.wn == 0);
        CHECK(gs.evaluated == 0);
        expect *= 4;
    }
    for (auto v : f.gamma_mask) REQUIRE(v == 1);

    FineContactReport rep = check_fine_cm(f, {{0.0, 0.0}, {3.0, -2.0}});
    CHECK(rep.pass);
    CHECK(rep.violations.empty());
}

TEST_CASE("bump forest satisfies the structural audits") {
    const double px = 0.5, py = 0.25;
    GraphCurrent T = make_graph_current(bump_input(129, px, py, 0.2, 1.0));
    WhitneyParams p;
    const int jmax = 12;
    CubeForest f = refine(T, p, jmax);

    CHECK(f.params.m0 > 0.0);
    CHECK(f.father_rule_ok);
    CHECK(!f.boundary_extension_used);
    REQUIRE(!f.stopped.empty());

    std::unordered_set<std::uint64_t> stopped_keys;
    unsigned long long n_e = 0, n_h = 0, n_n = 0;
    for (const CubeRecord& c : f.stopped) {
        stopped_keys.insert(key3(c.j, c.ix, c.iy));
        if (c.cls == 'e') ++n_e;
        if (c.cls == 'h') ++n_h;
        if (c.cls == 'n') ++n_n;
    }
    CHECK(n_e > 0);
    CHECK(n_n > 0);
    CHECK(n_e + n_h + n_n == f.stopped.size());

    // no stopped cube hides under another: interiors are disjoint
    for (const CubeRecord& c : f.stopped) {
        std::int64_t ax = c.ix, ay = c.iy;
        bool ancestor = false;
        for (int g = c.j - 1; g >= p.N0; --g) {
            ax >>= 1;
            ay >>= 1;
            if (stopped_keys.count(key3(g, ax, ay))) ancestor = true;
        }
        REQUIRE(!ancestor);
    }

    // excess stops cluster around the bump: the ball must reach active nodes
    for (const CubeRecord& c : f.stopped)
        if (c.cls == 'e') {
            const double R = 64.0 * p.M0 * std::sqrt(2.0) * c.half_side;
            const double d = std::hypot(c.center[0] - px, c.center[1] - py);
            REQUIRE(d <= R + 0.2 + 3.0 * 0.0625);
        }

    // neighbor stops touch a stopped cube of the previous generation
    for (const CubeRecord& c : f.stopped)
        if (c.cls == 'n') {
            bool touches = false;
            for (std::int64_t dy = -1; dy <= 1 && !touches; ++dy)
                for (std::int64_t dx = -1; dx <= 1 && !touches; ++dx)
                    if (stopped_keys.count(key3(c.j - 1, (c.ix >> 1) + dx, (c.iy >> 1) + dy)))
                        touches = true;
            REQUIRE(touches);
        }

    // generation bookkeeping
    REQUIRE(f.generations.size() == std::size_t(jmax - p.N0 + 1));
    for (std::size_t k = 0; k < f.generations.size(); ++k) {
        const GenerationSummary& gs = f.generations[k];
        CHECK(gs.survivors == gs.cubes - gs.we - gs.wh - gs.wn);
        if (k > 0) CHECK(gs.cubes == 4 * f.generations[k - 1].survivors);
        CHECK(gs.evaluated >= gs.we + gs.wh + gs.wn);
    }

    // the contact-set mask is exactly the complement of the stopped cubes
    const Mesh& m = T.g.mesh;
    std::vector<std::uint8_t> covered(m.n_nodes(), 0);
    for (const CubeRecord& c : f.stopped)
        for (int nj = 0; nj < m.ny; ++nj) {
            const double y = m.ay + nj * m.h;
            if (std::abs(y - c.center[1]) > c.half_side + 1e-12) continue;
            for (int ni = 0; ni < m.nx; ++ni) {
                const double x = m.ax + ni * m.h;
                if (std::abs(x - c.center[0]) <= c.half_side + 1e-12)
                    covered[m.node_at(ni, nj)] = 1;
            }
        }
    for (std::size_t i = 0; i < covered.size(); ++i) REQUIRE(f.gamma_mask[i] == 1 - covered[i]);

    // fine-scale contact check: a far mark passes, a mark on a stopped cube fails
    FineContactReport far = check_fine_cm(f, {{-3.5, -3.5}});
    CHECK(far.pass);
    FineContactReport close = check_fine_cm(f, {{f.stopped.front().center}});
    CHECK(!close.pass);
    REQUIRE(!close.violations.empty());
    CHECK(close.violations.front().dist == 0.0);
}

TEST_CASE("bump refinement is deterministic and shrinks under stricter constants") {
    GraphCurrent T = make_graph_current(bump_input(129, 0.5, 0.25, 0.2, 1.0));
    WhitneyParams p;
    CubeForest base = refine(T, p, 12);
    CubeForest again = refine(T, p, 12);
    CHECK(forest_to_string(base) == forest_to_string(again));

    WhitneyParams strict = p;
    strict.Ce = 2.0 * p.Ce;
    strict.Ch = 2.0 * p.Ch;
    CubeForest tight = refine(T, strict, 12);

    std::unordered_set<std::uint64_t> base_keys;
    double base_area = 0.0;
    for (const CubeRecord& c : base.stopped) {
        base_keys.insert(key3(c.j, c.ix, c.iy));
        base_area += 4.0 * c.half_side * c.half_side;
    }
    double tight_area = 0.0;
    for (const CubeRecord& c : tight.stopped) tight_area += 4.0 * c.half_side * c.half_side;
    CHECK(tight_area <= base_area + 1e-12);

    // every excess or height stop of the stricter run sits inside the base forest
    for (const CubeRecord& c : tight.stopped) {
        if (c.cls == 'n') continue;
        bool inside = false;
        std::int64_t ax = c.ix, ay = c.iy;
        for (int g = c.j; g >= base.params.N0; --g) {
            if (base_keys.count(key3(g, ax, ay))) inside = true;
            ax >>= 1;
            ay >>= 1;
        }
        REQUIRE(inside);
    }
}

TEST_CASE("separated flat sheets stop through the height rule") {
    GraphCurrent T = make_graph_current(step_input(129, -1.0, 0.5, 0.1, 0.05));
    WhitneyParams p;
    p.Ce = 1e12;  // excess rule silenced, only height and neighbors can stop
    CubeForest f = refine(T, p, 11);

    REQUIRE(!f.stopped.empty());
    unsigned long long n_e = 0, n_h = 0;
    double hmax = 0.0;
    for (const CubeRecord& c : f.stopped) {
        if (c.cls == 'e') ++n_e;
        if (c.cls == 'h') {
            ++n_h;
            hmax = std::max(hmax, c.height_val);
        }
    }
    CHECK(n_e == 0);
    CHECK(n_h > 0);
    CHECK(hmax >= 0.9 * 0.05);
    CHECK(hmax <= 2.0 * 0.05);
    CHECK(f.father_rule_ok);
}

TEST_CASE("forest export is structured and writable") {
    GraphCurrent T = make_graph_current(tilted_sheet(33, 0.0, 0.0));
    CubeForest f = refine(T, WhitneyParams{}, 11);
    const std::string s = forest_to_string(f);
    CHECK(s.rfind("whitney forest\n", 0) == 0);
    CHECK(s.find("gen 10 ") != std::string::npos);
    CHECK(s.find("gamma ") != std::string::npos);

    const char* path = "whitney_forest_test.txt";
    write_forest(path, f);
    std::FILE* fp = std::fopen(path, "rb");
    REQUIRE(fp != nullptr);
    std::fseek(fp, 0, SEEK_END);
    CHECK(std::ftell(fp) > 100);
    std::fclose(fp);
    std::remove(path);

    CHECK_THROWS_AS(write_forest("/nonexistent_dir_zz/f.txt", f), std::runtime_error);
}
