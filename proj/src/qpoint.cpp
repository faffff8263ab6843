#include "qfreq/qpoint.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qfreq {

QPoint make_qpoint(std::vector<double> values, int sign) {
    if (values.empty()) throw std::invalid_argument("QPoint needs at least one value");
    if (sign != +1 && sign != -1) throw std::invalid_argument("sign must be +1 or -1");
    QPoint t{std::move(values), sign};
    canonicalize(t);
    return t;
}

QPoint splat(double c, std::size_t q) {
    if (q == 0) throw std::invalid_argument("q must be positive");
    return QPoint{std::vector<double>(q, c), +1};
}

void canonicalize(QPoint& t) {
    std::sort(t.values.begin(), t.values.end());
    if (is_collapsed(t)) t.sign = +1;
}

bool is_collapsed(const QPoint& t, double tol) {
    if (t.values.empty()) return true;
    auto [lo, hi] = std::minmax_element(t.values.begin(), t.values.end());
    return *hi - *lo <= tol;
}

double eta(const QPoint& t) {
    return std::accumulate(t.values.begin(), t.values.end(), 0.0) / double(t.q());
}

QPoint sub(const QPoint& t, double a) {
    QPoint out = t;
    for (double& v : out.values) v -= a;
    canonicalize(out);
    return out;
}

double g_metric(const QPoint& a, const QPoint& b) {
    if (a.q() != b.q()) throw std::invalid_argument("g_metric: mismatched Q");
    double s = 0.0;
    for (std::size_t i = 0; i < a.q(); ++i) {
        const double d = a.values[i] - b.values[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double gs_metric(const QPoint& a, const QPoint& b) {
    if (a.q() != b.q()) throw std::invalid_argument("gs_metric: mismatched Q");
    const int sa = is_collapsed(a) ? +1 : a.sign;
    const int sb = is_collapsed(b) ? +1 : b.sign;
    if (sa == sb) return g_metric(a, b);
    const double ea = eta(a), eb = eta(b);
    double s = double(a.q()) * (ea - eb) * (ea - eb);
    for (double v : a.values) s += (v - ea) * (v - ea);
    for (double v : b.values) s += (v - eb) * (v - eb);
    return std::sqrt(s);
}

double qnorm(const QPoint& t) { return g_metric(t, splat(0.0, t.q())); }

QPoint pos_part(const QPoint& t) {
    if (is_collapsed(t) || t.sign == +1) {
        QPoint out = t;
        out.sign = +1;
        canonicalize(out);
        return out;
    }
    return splat(eta(t), t.q());
}

QPoint neg_part(const QPoint& t) {
    if (!is_collapsed(t) && t.sign == -1) {
        QPoint out = t;
        out.sign = +1;
        return out;
    }
    return splat(eta(t), t.q());
}

}  // namespace qfreq
