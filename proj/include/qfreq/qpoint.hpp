#pragma once

#include <cstddef>
#include <vector>

namespace qfreq {

// Unordered Q-tuple of real values plus an orientation sign.
// Canonical form: values sorted ascending; if all values coincide the sign
// collapses to +1, so collapsed points of either sign compare equal.
struct QPoint {
    std::vector<double> values;
    int sign = +1;

    std::size_t q() const { return values.size(); }
};

// Tolerance used only when deciding whether a tuple is collapsed.
inline constexpr double kCollapseTol = 1e-12;

QPoint make_qpoint(std::vector<double> values, int sign);
QPoint splat(double c, std::size_t q);

void canonicalize(QPoint& t);
bool is_collapsed(const QPoint& t, double tol = kCollapseTol);

// Mean of the values.
double eta(const QPoint& t);

// Subtracts a from every value, keeping the sign.
QPoint sub(const QPoint& t, double a);

// Unordered-tuple distance; in 1D targets the sorted-order matching attains
// the minimum over permutations.
double g_metric(const QPoint& a, const QPoint& b);

// Signed distance: g_metric when canonical signs agree, otherwise the
// split form  |a (-) eta_a|^2 + |b (-) eta_b|^2 + Q (eta_a - eta_b)^2.
double gs_metric(const QPoint& a, const QPoint& b);

// Distance to Q copies of 0.
double qnorm(const QPoint& t);

// Positive part: t itself if sign is +1, else Q copies of eta(t).
QPoint pos_part(const QPoint& t);
// Negative part: mirror convention of pos_part.
QPoint neg_part(const QPoint& t);

}  // namespace qfreq
