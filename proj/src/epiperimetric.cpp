#include "qfreq/epiperimetric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qfreq {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
}  // namespace

double ArcSpectrum::eigenfunction(int k, double s) const {
    if (k < 1 || k > modes()) throw std::invalid_argument("eigenfunction: mode out of range");
    return std::sqrt(2.0 / theta) * std::sin(mu[k - 1] * s);
}

ArcSpectrum arc_eigen(double theta, int K) {
    if (!(theta > 0.0) || theta > kTwoPi + 1e-12)
        throw std::invalid_argument("arc_eigen: theta must lie in (0, 2 pi]");
    if (K < 1) throw std::invalid_argument("arc_eigen: K must be >= 1");
    ArcSpectrum sp;
    sp.theta = theta;
    sp.mu.resize(K);
    sp.lambda.resize(K);
    for (int k = 1; k <= K; ++k) {
        sp.mu[k - 1] = k * kPi / theta;
        sp.lambda[k - 1] = sp.mu[k - 1] * sp.mu[k - 1];
    }
    return sp;
}

void mark_main_arcs(BoundaryPartition& bp) {
    for (Arc& a : bp.arcs) a.main = false;
    for (int sign : {+1, -1}) {
        int best = -1;
        for (std::size_t i = 0; i < bp.arcs.size(); ++i) {
            if (bp.arcs[i].sign != sign) continue;
            if (best < 0 || bp.arcs[i].length() > bp.arcs[best].length() + 1e-15 ||
                (std::abs(bp.arcs[i].length() - bp.arcs[best].length()) <= 1e-15 &&
                 bp.arcs[i].start < bp.arcs[best].start))
                best = int(i);
        }
        if (best >= 0) bp.arcs[best].main = true;
    }
}

std::vector<double> fourier_on_arc(const std::vector<double>& u, const ArcSpectrum& sp) {
    const std::size_t n = u.size();
    if (n < 8) throw std::invalid_argument("fourier_on_arc: need at least 8 samples");
    double scale = 1.0;
    for (double v : u) scale = std::max(scale, std::abs(v));
    if (std::abs(u.front()) > 1e-8 * scale || std::abs(u.back()) > 1e-8 * scale)
        throw std::invalid_argument("fourier_on_arc: trace must vanish at the arc endpoints");
    const double ds = sp.theta / double(n - 1);
    std::vector<double> a(sp.modes(), 0.0);
    for (int k = 1; k <= sp.modes(); ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double w = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
            acc += w * u[j] * sp.eigenfunction(k, ds * double(j));
        }
        a[k - 1] = acc * ds;
    }
    return a;
}

std::pair<double, double> coefficients_AB(double sigma, double mu) {
    if (!(sigma > 0.0) || !(sigma < 1.0))
        throw std::invalid_argument("coefficients_AB: sigma must lie in (0,1)");
    if (!(mu > 0.0)) throw std::invalid_argument("coefficients_AB: mu must be positive");
    // A = sigma^-mu / (sigma^-mu - sigma^mu) rewritten to avoid overflow
    const double s2 = std::pow(sigma, 2.0 * mu);
    return {1.0 / (1.0 - s2), s2 / (1.0 - s2)};
}

namespace {

double killed_mode_factor(double sigma, double mu) {
    const double s2 = std::pow(sigma, 2.0 * mu);
    return mu * (1.0 + s2) / (1.0 - s2);
}

}  // namespace

double annulus_energy(const std::vector<double>& a, double sigma, const ArcSpectrum& sp,
                      bool kill_first_mode) {
    if (!(sigma > 0.0) || !(sigma < 1.0))
        throw std::invalid_argument("annulus_energy: sigma must lie in (0,1)");
    if (int(a.size()) > sp.modes())
        throw std::invalid_argument("annulus_energy: more coefficients than modes");
    double e = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (k == 0 && !kill_first_mode)
            e += (sp.lambda[0] + 1.0) * (1.0 - sigma * sigma) / 2.0 * a[0] * a[0];
        else
            e += killed_mode_factor(sigma, sp.mu[k]) * a[k] * a[k];
    }
    return e;
}

double inner_extension_energy(const std::vector<double>& a1_plus,
                              const std::vector<double>& a1_minus,
                              const std::optional<Arc>& f_plus,
                              const std::optional<Arc>& f_minus, double sigma, int k_inner) {
    if (!(sigma > 0.0) || !(sigma < 1.0))
        throw std::invalid_argument("inner_extension_energy: sigma must lie in (0,1)");
    if (k_inner < 1) throw std::invalid_argument("inner_extension_energy: k_inner must be >= 1");
    const double np = std::sqrt(std::inner_product(a1_plus.begin(), a1_plus.end(),
                                                   a1_plus.begin(), 0.0));
    const double nm = std::sqrt(std::inner_product(a1_minus.begin(), a1_minus.end(),
                                                   a1_minus.begin(), 0.0));
    if ((np == 0.0 || !f_plus) && (nm == 0.0 || !f_minus)) return 0.0;

    // glued boundary data on the circle of radius sigma, sampled densely;
    // the extension energy is scale invariant so the series needs no radius
    const int N = 8192;
    std::vector<double> g(N, 0.0);
    auto add_arc = [&](const Arc& arc, double amp) {
        const double root = std::sqrt(2.0 / arc.length());
        const double om = kPi / arc.length();
        for (int j = 0; j < N; ++j) {
            const double phi = kTwoPi * j / N;
            if (phi > arc.start && phi < arc.end)
                g[j] += amp * root * std::sin(om * (phi - arc.start));
        }
    };
    if (f_plus && np > 0.0) add_arc(*f_plus, sigma * np);
    if (f_minus && nm > 0.0) add_arc(*f_minus, -sigma * nm);

    double e = 0.0;
    for (int n = 1; n <= k_inner; ++n) {
        double al = 0.0, be = 0.0;
        for (int j = 0; j < N; ++j) {
            const double phi = kTwoPi * j / N;
            al += g[j] * std::cos(n * phi);
            be += g[j] * std::sin(n * phi);
        }
        al *= 2.0 / N;
        be *= 2.0 / N;
        e += n * kPi * (al * al + be * be);
    }
    return e;
}

bool step_one_mode_inequality(double lambda, double sigma, double delta) {
    if (!(lambda > 0.0)) throw std::invalid_argument("step_one_mode_inequality: lambda > 0");
    if (!(sigma > 0.0) || !(sigma < 1.0) || !(delta > 0.0) || !(delta < 1.0))
        throw std::invalid_argument("step_one_mode_inequality: sigma, delta must lie in (0,1)");
    const double mu = std::sqrt(lambda);
    const double lhs = (lambda + 1.0) * (1.0 - sigma * sigma - delta) / 2.0 + delta;
    return lhs >= killed_mode_factor(sigma, mu);
}

namespace {

void validate_partition(const BoundaryPartition& bp) {
    if (bp.arcs.size() != bp.traces.size())
        throw std::invalid_argument("partition: arc and trace counts differ");
    if (bp.arcs.empty()) throw std::invalid_argument("partition: no arcs");
    int mains_plus = 0, mains_minus = 0;
    for (std::size_t i = 0; i < bp.arcs.size(); ++i) {
        const Arc& arc = bp.arcs[i];
        if (!(arc.start >= -1e-12) || !(arc.end <= kTwoPi + 1e-12) || !(arc.end > arc.start))
            throw std::invalid_argument("partition: arc angles must satisfy 0 <= start < end <= 2 pi");
        if (arc.sign != +1 && arc.sign != -1)
            throw std::invalid_argument("partition: arc sign must be +1 or -1");
        if (arc.main) (arc.sign > 0 ? mains_plus : mains_minus) += 1;
        const auto& sheets = bp.traces[i];
        if (sheets.empty()) throw std::invalid_argument("partition: arc without sheets");
        const std::size_t n = sheets.front().size();
        if (n < 8) throw std::invalid_argument("partition: sheets need at least 8 samples");
        double scale = 1.0;
        for (const auto& s : sheets) {
            if (s.size() != n) throw std::invalid_argument("partition: ragged sheet sampling");
            for (double v : s) scale = std::max(scale, std::abs(v));
        }
        for (std::size_t j = 0; j < n; ++j) {
            double mean = 0.0;
            for (std::size_t s = 0; s + 1 < sheets.size(); ++s)
                if (sheets[s][j] > sheets[s + 1][j] + 1e-9 * scale)
                    throw std::invalid_argument("partition: sheets must be ordered");
            for (const auto& s : sheets) mean += s[j];
            if (std::abs(mean) > 1e-8 * scale * double(sheets.size()))
                throw std::invalid_argument("partition: sheet values must average to zero");
        }
    }
    if (mains_plus > 1 || mains_minus > 1)
        throw std::invalid_argument("partition: at most one main arc per sign");
    std::vector<std::size_t> order(bp.arcs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return bp.arcs[a].start < bp.arcs[b].start;
    });
    for (std::size_t k = 0; k + 1 < order.size(); ++k)
        if (bp.arcs[order[k]].end > bp.arcs[order[k + 1]].start + 1e-12)
            throw std::invalid_argument("partition: arcs overlap");
}

}  // namespace

CompetitorReport verify_epiperimetric(const BoundaryPartition& bp, double sigma,
                                      double delta_target, int K, int k_inner) {
    if (!(sigma > 0.0) || sigma > 0.5)
        throw std::invalid_argument("verify_epiperimetric: sigma must lie in (0, 1/2]");
    if (K < 2) throw std::invalid_argument("verify_epiperimetric: K must be >= 2");
    validate_partition(bp);

    CompetitorReport rep;
    rep.sigma = sigma;
    std::vector<double> a1_plus, a1_minus;
    std::optional<Arc> f_plus, f_minus;
    for (std::size_t i = 0; i < bp.arcs.size(); ++i) {
        const Arc& arc = bp.arcs[i];
        const ArcSpectrum sp = arc_eigen(arc.length(), K);
        for (const auto& sheet : bp.traces[i]) {
            const std::vector<double> a = fourier_on_arc(sheet, sp);
            for (int k = 0; k < sp.modes(); ++k) {
                rep.energy_uI += (sp.lambda[k] + 1.0) / 2.0 * a[k] * a[k];
                rep.h1 += a[k] * a[k];
            }
            rep.energy_w += annulus_energy(a, sigma, sp, !arc.main);
            if (arc.main) (arc.sign > 0 ? a1_plus : a1_minus).push_back(a[0]);
        }
        if (arc.main) (arc.sign > 0 ? f_plus : f_minus) = arc;
    }
    rep.energy_w += inner_extension_energy(a1_plus, a1_minus, f_plus, f_minus, sigma, k_inner);
    rep.W1 = rep.energy_uI - rep.h1;
    rep.gap = rep.energy_uI - rep.energy_w;
    rep.trivially_satisfied = rep.W1 <= 1e-9 * std::max(1.0, rep.h1);
    rep.delta_measured = rep.trivially_satisfied ? 0.0 : rep.gap / rep.W1;
    rep.pass = rep.trivially_satisfied || rep.gap >= delta_target * rep.W1;
    return rep;
}

}  // namespace qfreq
