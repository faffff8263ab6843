#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qfreq/field.hpp"

namespace qfreq {

// p(x) = r^alpha (c_cos cos(alpha phi) + c_sin sin(alpha phi)), evaluated in
// Cartesian form via z^alpha. |grad p| = alpha |c| r^(alpha-1), independent
// of the angle.
struct HarmonicPolynomial2D {
    int alpha = 1;
    double c_cos = 1.0;
    double c_sin = 0.0;

    double operator()(Vec2 x) const;
    double gradient_norm(Vec2 x) const;
};

// Sign partition of p on the nodes. label: 0 inside the resolution band
// |p| <= h |grad p|, +j / -j (1-based) on the j-th component of {p > 0} /
// {p < 0}. Components are numbered in node scan order. A degree-alpha
// polynomial must produce exactly alpha components of each sign.
struct NodalComponents {
    std::vector<int> label;
    int n_plus = 0;
    int n_minus = 0;
};

NodalComponents components_of_nodal_partition(const HarmonicPolynomial2D& p, const Mesh& mesh);

// One zero-sum coefficient vector per component of each sign. Components of
// opposite sign that touch along the nodal line must have coefficient
// vectors of equal norm.
struct HomogeneousSpec {
    HarmonicPolynomial2D p;
    std::vector<std::vector<double>> a_plus;
    std::vector<std::vector<double>> a_minus;
};

// u = (sum_i [[A_{j,i} p(x)]], sign of p) on the j-th component, Q[[0]]
// where p vanishes exactly. Invariant violations are rejected by name.
SampledField build_homogeneous(const HomogeneousSpec& spec, const Mesh& mesh);

struct OneDClassification {
    std::optional<double> x0;
    std::vector<double> a, b;  // sorted sheet slopes right / left of x0
    double residual = 0.0;
    bool invariants_ok = true;
    std::string violation;
};

// Locates the zero cluster of a 1D field. Each side is fit by linear sheets
// through the side's own zero crossing; x0 averages the two crossings.
// Checks that both slope vectors sum to zero and have equal norms within
// norm_tol. Two separated zero clusters is an error.
OneDClassification classify_1d(const SampledField& u, double norm_tol = 0.02);

struct StationarityReport {
    double gradient_constancy = 0.0;     // 1D: max deviation of |Du|^2 from its mean
    double laplacian_residual = 0.0;     // 2D: per-sheet 5-point residual away from the zero set
    double transmission_residual = 0.0;  // 2D: max mismatch of sum_i |grad u_i|^2 across the zero set
};

StationarityReport check_stationarity(const SampledField& u);

struct IntegerFrequencyReport {
    double median = 0.0;
    int nearest = 1;
    double distance = 0.0;
    bool pass = false;
};

// Median frequency over a decade of radii [r_hi/10, r_hi]; r_hi <= 0 selects
// 0.8 times the distance from the center to the boundary. Passes when the
// median is within 0.05 of a positive integer.
IntegerFrequencyReport measured_frequency_is_integer(const SampledField& u, Vec2 center,
                                                     double r_hi = 0.0);

// Text format: "homogeneous <alpha> <c_cos> <c_sin>", then one line per
// component "<+1|-1> <index> <Q coefficients>".
void write_homogeneous_spec(const std::string& path, const HomogeneousSpec& spec);
HomogeneousSpec read_homogeneous_spec(const std::string& path);

}  // namespace qfreq
