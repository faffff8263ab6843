#include "qfreq/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qfreq/acceptance.hpp"
#include "qfreq/epiperimetric.hpp"
#include "qfreq/field.hpp"
#include "qfreq/frequency.hpp"
#include "qfreq/homogeneous.hpp"
#include "qfreq/mesh.hpp"
#include "qfreq/minimize.hpp"
#include "qfreq/whitney.hpp"

namespace qfreq {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kPi = 3.14159265358979323846;

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string num17(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument(msg); }

const json* find(const json& j, const char* key) {
    const auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

double jnum(const json& j, const char* key, double dflt) {
    const json* p = find(j, key);
    if (!p) return dflt;
    if (!p->is_number()) bad(std::string("config key '") + key + "' must be a number");
    return p->get<double>();
}

long long jint(const json& j, const char* key, long long dflt) {
    const json* p = find(j, key);
    if (!p) return dflt;
    if (!p->is_number_integer()) bad(std::string("config key '") + key + "' must be an integer");
    return p->get<long long>();
}

std::string jstr_req(const json& j, const char* key) {
    const json* p = find(j, key);
    if (!p || !p->is_string()) bad(std::string("config key '") + key + "' must be a string");
    return p->get<std::string>();
}

std::vector<double> jnums(const json& j, const char* key) {
    const json* p = find(j, key);
    if (!p || !p->is_array()) bad(std::string("config key '") + key + "' must be an array");
    std::vector<double> v;
    for (const json& x : *p) {
        if (!x.is_number()) bad(std::string("config key '") + key + "' must hold numbers");
        v.push_back(x.get<double>());
    }
    return v;
}

Vec2 jvec2(const json& j, const char* key, Vec2 dflt) {
    if (!find(j, key)) return dflt;
    const std::vector<double> v = jnums(j, key);
    if (v.size() != 2) bad(std::string("config key '") + key + "' must be a pair [x, y]");
    return {v[0], v[1]};
}

QPoint jqpoint(const json& j, const char* key) {
    const json* p = find(j, key);
    if (!p || !p->is_object())
        bad(std::string("config key '") + key + "' must be {\"values\": [...], \"sign\": +-1}");
    std::vector<double> vals = jnums(*p, "values");
    if (vals.empty()) bad(std::string(key) + ".values must be nonempty");
    const long long sign = jint(*p, "sign", 1);
    if (sign != 1 && sign != -1) bad(std::string(key) + ".sign must be +1 or -1");
    return make_qpoint(std::move(vals), int(sign));
}

std::vector<double> radii_from(const json& j) {
    if (find(j, "radii")) {
        std::vector<double> r = jnums(j, "radii");
        if (r.empty()) bad("radii must be nonempty");
        return r;
    }
    const double lo = jnum(j, "r_lo", 0.0), hi = jnum(j, "r_hi", 0.0);
    const long long n = jint(j, "nr", 13);
    if (!(lo > 0.0) || !(hi > lo) || n < 2)
        bad("need a radii array, or 0 < r_lo < r_hi with nr >= 2");
    std::vector<double> r(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i)
        r[std::size_t(i)] = lo + (hi - lo) * double(i) / double(n - 1);
    return r;
}

struct Ctx {
    const ExperimentConfig& cfg;
    json params;
    std::ostream& status;
};

void ensure_outdir(const Ctx& c) {
    std::error_code ec;
    fs::create_directories(c.cfg.out_dir, ec);
}

std::ofstream open_report(const Ctx& c, const std::string& name) {
    ensure_outdir(c);
    const fs::path p = fs::path(c.cfg.out_dir) / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) bad("cannot open report file: " + p.string());
    char d[24];
    std::snprintf(d, sizeof d, "%016llx", static_cast<unsigned long long>(c.cfg.digest));
    f << "# qfreq " << c.cfg.subcommand << "\n";
    f << "# digest fnv1a64:" << d << "\n";
    f << "# config " << c.cfg.canonical << "\n";
    return f;
}

SolveParams solver_params(const Ctx& c) {
    SolveParams sp;
    sp.max_sweeps = int(jint(c.params, "max_sweeps", sp.max_sweeps));
    sp.tol = jnum(c.params, "tol", sp.tol);
    sp.restarts = int(jint(c.params, "restarts", sp.restarts));
    sp.rng_seed = unsigned(c.cfg.rng_seed);
    if (sp.max_sweeps < 1 || !(sp.tol > 0.0) || sp.restarts < 1)
        bad("solver needs max_sweeps >= 1, tol > 0, restarts >= 1");
    return sp;
}

// 1D boundary problem given inline: nodes, endpoints a < b, left/right data
SolveResult solve_interval_from(const Ctx& c) {
    const long long nodes = jint(c.params, "nodes", 201);
    const double a = jnum(c.params, "a", -1.0), b = jnum(c.params, "b", 1.0);
    if (nodes < 3 || nodes > 2000000 || !(a < b)) bad("need 3 <= nodes <= 2e6 and a < b");
    const QPoint left = jqpoint(c.params, "left");
    const QPoint right = jqpoint(c.params, "right");
    Mesh m = make_interval_mesh(a, b, int(nodes));
    const double mid = 0.5 * (a + b);
    BoundaryTrace tr = make_boundary_trace(
        m, [&](Vec2 x) { return x[0] > mid ? right : left; });
    return solve(tr, m, solver_params(c));
}

int run_classify1d(Ctx& c) {
    SampledField field;
    bool solved = false;
    SolveResult res;
    if (find(c.params, "field")) {
        field = read_field_file(jstr_req(c.params, "field"));
    } else {
        res = solve_interval_from(c);
        field = res.field;
        solved = true;
    }
    if (field.mesh.dim != 1) bad("classify1d needs a 1D field");
    const double norm_tol = jnum(c.params, "norm_tol", 0.02);
    if (!(norm_tol > 0.0)) bad("norm_tol must be positive");
    const OneDClassification cls = classify_1d(field, norm_tol);

    std::ofstream f = open_report(c, "classify1d.txt");
    f << "x0 " << (cls.x0 ? num17(*cls.x0) : "none") << "\n";
    f << "residual " << num17(cls.residual) << "\n";
    f << "invariants " << (cls.invariants_ok ? "ok" : cls.violation) << "\n";
    f << "a";
    for (double v : cls.a) f << ' ' << num17(v);
    f << "\nb";
    for (double v : cls.b) f << ' ' << num17(v);
    f << "\n";
    if (solved) {
        f << "energy " << num17(res.energy) << "\n";
        f << "sweeps " << res.sweeps << "\n";
        f << "converged " << (res.converged ? 1 : 0) << "\n";
    }
    c.status << "classify1d: x0 " << (cls.x0 ? num17(*cls.x0) : "none") << ", invariants "
             << (cls.invariants_ok ? "ok" : "violated") << "\n";
    return cls.x0.has_value() && cls.invariants_ok && (!solved || res.converged) ? 0 : 1;
}

int run_homogeneous(Ctx& c) {
    HomogeneousSpec spec;
    if (find(c.params, "spec")) {
        spec = read_homogeneous_spec(jstr_req(c.params, "spec"));
    } else {
        const long long alpha = jint(c.params, "alpha", 1);
        if (alpha < 1 || alpha > 16) bad("alpha must be in 1..16");
        spec.p = {int(alpha), jnum(c.params, "c_cos", 1.0), jnum(c.params, "c_sin", 0.0)};
        auto coeffs = [&](const char* key) {
            const json* p = find(c.params, key);
            if (!p || !p->is_array() || p->size() != std::size_t(alpha))
                bad(std::string(key) + " must hold one coefficient vector per component");
            std::vector<std::vector<double>> rows;
            for (std::size_t i = 0; i < p->size(); ++i) {
                if (!(*p)[i].is_array()) bad(std::string(key) + " must hold arrays");
                std::vector<double> row;
                for (const json& x : (*p)[i]) row.push_back(x.get<double>());
                rows.push_back(std::move(row));
            }
            return rows;
        };
        spec.a_plus = coeffs("a_plus");
        spec.a_minus = coeffs("a_minus");
    }
    const long long n = jint(c.params, "n", 257);
    if (n < 3 || n > 4097) bad("mesh size n must be in 3..4097");
    const Vec2 center = jvec2(c.params, "center", {0.0, 0.0});
    const double R = jnum(c.params, "radius", 1.0);
    if (!(R > 0.0)) bad("radius must be positive");
    const Mesh disk = make_disk_mesh(center[0], center[1], R, int(n));

    const SampledField u = build_homogeneous(spec, disk);
    const NodalComponents nc = components_of_nodal_partition(spec.p, disk);
    const StationarityReport st = check_stationarity(u);
    const IntegerFrequencyReport fr = measured_frequency_is_integer(u, center);
    ensure_outdir(c);
    write_field_file((fs::path(c.cfg.out_dir) / "homogeneous_field.txt").string(), u);

    std::ofstream f = open_report(c, "homogeneous.txt");
    f << "alpha " << spec.p.alpha << "\n";
    f << "components_plus " << nc.n_plus << "\ncomponents_minus " << nc.n_minus << "\n";
    f << "laplacian_residual " << num17(st.laplacian_residual) << "\n";
    f << "transmission_residual " << num17(st.transmission_residual) << "\n";
    f << "median_frequency " << num17(fr.median) << "\n";
    f << "nearest_integer " << fr.nearest << "\n";
    f << "distance " << num17(fr.distance) << "\n";
    f << "integer_frequency " << (fr.pass ? "pass" : "fail") << "\n";
    c.status << "homogeneous: alpha " << spec.p.alpha << ", median frequency "
             << num17(fr.median) << "\n";
    return fr.pass ? 0 : 1;
}

int run_frequency(Ctx& c) {
    const SampledField u = read_field_file(jstr_req(c.params, "field"));
    const Vec2 center = jvec2(c.params, "center", {0.0, 0.0});
    FrequencyProfile p = profile(u, center, radii_from(c.params));
    const double i0 = jnum(c.params, "i0", 0.0);
    if (i0 != 0.0) add_weiss(p, i0);

    std::ofstream f = open_report(c, "frequency.csv");
    f << (i0 != 0.0 ? "r,D,H,I,W" : "r,D,H,I") << "\n";
    bool finite = true;
    for (std::size_t k = 0; k < p.radii.size(); ++k) {
        f << num17(p.radii[k]) << ',' << num17(p.D[k]) << ',' << num17(p.H[k]) << ','
          << num17(p.I[k]);
        if (i0 != 0.0) f << ',' << num17(p.W[k]);
        f << "\n";
        finite = finite && std::isfinite(p.I[k]);
    }
    c.status << "frequency: I " << num17(p.I.front()) << " .. " << num17(p.I.back()) << "\n";
    return finite ? 0 : 1;
}

int run_weiss(Ctx& c) {
    const SampledField u = read_field_file(jstr_req(c.params, "field"));
    const Vec2 center = jvec2(c.params, "center", {0.0, 0.0});
    const double i0 = jnum(c.params, "i0", 0.0);
    if (!(i0 > 0.0)) bad("weiss needs i0 > 0");
    FrequencyProfile p = profile(u, center, radii_from(c.params));
    add_weiss(p, i0);
    const double tol = jnum(c.params, "tol", 3.0 * u.mesh.h);
    if (!(tol >= 0.0)) bad("tol must be nonnegative");
    const MonotoneReport mono = check_weiss_monotone(p, tol);

    std::ofstream f = open_report(c, "weiss.csv");
    f << "r,W\n";
    for (std::size_t k = 0; k < p.radii.size(); ++k)
        f << num17(p.radii[k]) << ',' << num17(p.W[k]) << "\n";
    f << "# monotone " << (mono.pass ? "pass" : "fail") << " worst_drop "
      << num17(mono.worst_drop) << " at_r " << num17(mono.at_r) << " tol " << num17(tol)
      << "\n";
    c.status << "weiss: monotone " << (mono.pass ? "pass" : "fail") << ", worst drop "
             << num17(mono.worst_drop) << "\n";
    return mono.pass ? 0 : 1;
}

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

int run_epi(Ctx& c) {
    BoundaryPartition bp;
    if (find(c.params, "partition"))
        bp = read_partition(jstr_req(c.params, "partition"));
    else
        bp = model_partition(jnum(c.params, "eps", 0.0));
    const double sigma = jnum(c.params, "sigma", 1.0 / 6.0);
    const double delta = jnum(c.params, "delta", 0.01);
    const long long K = jint(c.params, "K", 16);
    const long long k_inner = jint(c.params, "k_inner", 64);
    if (K < 1 || K > 4096 || k_inner < 1 || k_inner > 65536)
        bad("need 1 <= K <= 4096 and 1 <= k_inner <= 65536");
    const CompetitorReport rep = verify_epiperimetric(bp, sigma, delta, int(K), int(k_inner));

    std::ofstream f = open_report(c, "epi.txt");
    f << "sigma " << num17(rep.sigma) << "\n";
    f << "energy_competitor " << num17(rep.energy_w) << "\n";
    f << "energy_homogeneous " << num17(rep.energy_uI) << "\n";
    f << "h1 " << num17(rep.h1) << "\n";
    f << "W1 " << num17(rep.W1) << "\n";
    f << "gap " << num17(rep.gap) << "\n";
    f << "delta_measured " << num17(rep.delta_measured) << "\n";
    f << "trivially_satisfied " << (rep.trivially_satisfied ? 1 : 0) << "\n";
    f << "result " << (rep.pass ? "pass" : "fail") << "\n";
    c.status << "epi: gap " << num17(rep.gap) << ", delta " << num17(rep.delta_measured)
             << ", " << (rep.pass ? "pass" : "fail") << "\n";
    return rep.pass ? 0 : 1;
}

int run_solve(Ctx& c) {
    SolveResult res;
    if (find(c.params, "field")) {
        const SampledField u = read_field_file(jstr_req(c.params, "field"));
        BoundaryTrace tr;
        for (std::size_t i = 0; i < u.mesh.n_nodes(); ++i)
            if (u.mesh.boundary[i]) tr.values.push_back({int(i), u.values[i]});
        if (tr.values.empty()) bad("field mesh has no boundary nodes");
        if (u.mesh.kind == MeshKind::disk) {
            // rebuild the angular trace so the solver can seed the interior
            std::vector<std::pair<double, int>> order;
            for (const auto& [node, val] : tr.values) {
                double phi = std::atan2(u.mesh.coords[std::size_t(node)][1] - u.mesh.cy,
                                        u.mesh.coords[std::size_t(node)][0] - u.mesh.cx);
                if (phi < 0.0) phi += 2.0 * kPi;
                order.push_back({phi, node});
            }
            std::sort(order.begin(), order.end());
            AngularTrace at;
            for (const auto& [phi, node] : order) {
                at.angles.push_back(phi);
                at.points.push_back(u.values[std::size_t(node)]);
            }
            tr.angular = std::move(at);
        }
        res = solve(tr, u.mesh, solver_params(c));
    } else {
        res = solve_interval_from(c);
    }
    ensure_outdir(c);
    write_field_file((fs::path(c.cfg.out_dir) / "solved_field.txt").string(), res.field);

    std::ofstream hist = open_report(c, "energy_history.csv");
    hist << "sweep,energy\n";
    for (std::size_t s = 0; s < res.energy_history.size(); ++s)
        hist << s << ',' << num17(res.energy_history[s]) << "\n";

    std::ofstream f = open_report(c, "solve.txt");
    f << "energy " << num17(res.energy) << "\n";
    f << "sweeps " << res.sweeps << "\n";
    f << "converged " << (res.converged ? 1 : 0) << "\n";
    c.status << "solve: energy " << num17(res.energy) << ", sweeps " << res.sweeps << ", "
             << (res.converged ? "converged" : "not converged") << "\n";
    return res.converged ? 0 : 1;
}

int run_whitney(Ctx& c) {
    const SampledField g = read_field_file(jstr_req(c.params, "field"));
    const GraphCurrent T = make_graph_current(g);
    WhitneyParams wp;
    wp.N0 = int(jint(c.params, "N0", wp.N0));
    wp.M0 = int(jint(c.params, "M0", wp.M0));
    wp.Ce = jnum(c.params, "Ce", wp.Ce);
    wp.Ch = jnum(c.params, "Ch", wp.Ch);
    wp.delta2 = jnum(c.params, "delta2", wp.delta2);
    wp.beta2 = jnum(c.params, "beta2", wp.beta2);
    wp.m0 = jnum(c.params, "m0", wp.m0);
    wp.c_sigma_sq = jnum(c.params, "c_sigma_sq", wp.c_sigma_sq);
    const long long j_max = jint(c.params, "j_max", wp.N0 + 5);
    const CubeForest F = refine(T, wp, int(j_max));

    FineContactReport fc;
    bool have_marks = false;
    if (find(c.params, "marks")) {
        const json* m = find(c.params, "marks");
        std::vector<Vec2> marks;
        for (const json& x : *m) {
            if (!x.is_array() || x.size() != 2) bad("marks must hold [x, y] pairs");
            marks.push_back({x[0].get<double>(), x[1].get<double>()});
        }
        fc = check_fine_cm(F, marks);
        have_marks = true;
    }

    std::ofstream f = open_report(c, "whitney.txt");
    f << forest_to_string(F);
    if (have_marks) {
        f << "fine_cm " << (fc.pass ? "pass" : "fail") << " violations "
          << fc.violations.size() << "\n";
        for (const FineContactViolation& v : fc.violations)
            f << "violation mark " << v.mark << " cube " << v.cube.j << ' ' << v.cube.ix
              << ' ' << v.cube.iy << " dist " << num17(v.dist) << "\n";
    }
    c.status << "whitney: " << F.generations.size() << " generations, "
             << F.stopped.size() << " stopped cubes, father rule "
             << (F.father_rule_ok ? "ok" : "violated") << "\n";
    return F.father_rule_ok && (!have_marks || fc.pass) ? 0 : 1;
}

int run_selftest(Ctx& c) {
    std::ostringstream buf;
    const int failures = run_acceptance(buf, /*show_timing=*/false);
    std::ofstream f = open_report(c, "selftest.txt");
    f << buf.str();
    c.status << buf.str();
    return failures == 0 ? 0 : 1;
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& subcommand,
                                        const std::string& config_path,
                                        const std::string& out_override,
                                        const long long* seed_override) {
    ExperimentConfig cfg;
    cfg.subcommand = subcommand;
    cfg.config_path = config_path;

    json j = json::object();
    if (!config_path.empty()) {
        std::ifstream f(config_path, std::ios::binary);
        if (!f) bad("config file not found: " + config_path);
        try {
            f >> j;
        } catch (const json::exception& e) {
            bad("config parse error: " + std::string(e.what()));
        }
        if (!j.is_object()) bad("config root must be a JSON object");
    } else if (subcommand != "selftest") {
        bad("--config is required for " + subcommand);
    }

    if (const json* s = find(j, "subcommand")) {
        if (!s->is_string() || s->get<std::string>() != subcommand)
            bad("config subcommand disagrees with the command line");
    }
    if (!out_override.empty()) j["out"] = out_override;
    if (seed_override) {
        if (*seed_override < 0) bad("seed must be nonnegative");
        j["seed"] = *seed_override;
    }
    if (const json* o = find(j, "out")) {
        if (!o->is_string()) bad("config key 'out' must be a string");
        cfg.out_dir = o->get<std::string>();
    }
    if (const json* s = find(j, "seed")) {
        if (!s->is_number_integer() || s->get<long long>() < 0)
            bad("config key 'seed' must be a nonnegative integer");
        cfg.rng_seed = static_cast<unsigned long long>(s->get<long long>());
    }
    j["subcommand"] = subcommand;
    j["out"] = cfg.out_dir;
    j["seed"] = cfg.rng_seed;
    cfg.canonical = j.dump();
    cfg.digest = fnv1a64(cfg.canonical);

    for (const char* key : {"field", "spec", "partition"})
        if (const json* p = find(j, key)) {
            if (!p->is_string()) bad(std::string("config key '") + key + "' must be a path");
            if (!fs::exists(p->get<std::string>()))
                bad("input file not found: " + p->get<std::string>());
        }
    return cfg;
}

int run_experiment(const ExperimentConfig& cfg, std::ostream& status) {
    Ctx c{cfg, json::parse(cfg.canonical), status};
    if (cfg.subcommand == "classify1d") return run_classify1d(c);
    if (cfg.subcommand == "homogeneous") return run_homogeneous(c);
    if (cfg.subcommand == "frequency") return run_frequency(c);
    if (cfg.subcommand == "weiss") return run_weiss(c);
    if (cfg.subcommand == "epi") return run_epi(c);
    if (cfg.subcommand == "solve") return run_solve(c);
    if (cfg.subcommand == "whitney") return run_whitney(c);
    if (cfg.subcommand == "selftest") return run_selftest(c);
    bad("unknown subcommand: " + cfg.subcommand);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"numerical laboratory for Dirichlet-minimizing special Q-valued maps",
                 "qfreq"};
    app.require_subcommand(1);
    std::string config_path, out_dir;
    long long seed = 0;
    const std::pair<const char*, const char*> subs[] = {
        {"classify1d", "solve or load a 1D field and classify its two-sided linear profile"},
        {"homogeneous", "build a homogeneous field from a spec and audit it"},
        {"frequency", "radial frequency profile of a field"},
        {"weiss", "Weiss values of a field and their monotonicity"},
        {"epi", "epiperimetric competitor verification for a boundary partition"},
        {"solve", "relax the discrete energy with the boundary trace held fixed"},
        {"whitney", "dyadic cube refinement of a Q-sheeted graph"},
        {"selftest", "run the full acceptance suite"},
    };
    for (const auto& [name, desc] : subs) {
        CLI::App* s = app.add_subcommand(name, desc);
        s->add_option("--config", config_path, "JSON config file");
        s->add_option("--out", out_dir, "output directory (overrides the config key)");
        s->add_option("--seed", seed, "rng seed (overrides the config key)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "qfreq: " << e.what() << "\n";
        return 2;
    }
    CLI::App* sub = app.get_subcommands().front();
    try {
        const ExperimentConfig cfg = load_experiment_config(
            sub->get_name(), config_path, out_dir,
            sub->count("--seed") ? &seed : nullptr);
        return run_experiment(cfg, out);
    } catch (const std::exception& e) {
        err << "qfreq " << sub->get_name() << ": " << e.what() << "\n";
        return 2;
    }
}

}  // namespace qfreq
