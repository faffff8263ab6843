#pragma once

#include <functional>
#include <vector>

#include "qfreq/field.hpp"

namespace qfreq {

// Radial profile of a field around a center: D(r) the ball energy, H(r) the
// boundary L2 mass, I = r D / H, and Weiss values W when a homogeneity I0 is
// declared. I and W are NaN where H vanishes.
struct FrequencyProfile {
    Vec2 center{0, 0};
    int dim = 2;
    double I0 = 0;  // 0 until add_weiss
    std::vector<double> radii, D, H, I, W;
};

FrequencyProfile profile(const SampledField& u, Vec2 x, std::vector<double> radii);

// W(r) = r^-(m+2I0-2) D(r) - I0 r^-(m+2I0-1) H(r)
void add_weiss(FrequencyProfile& p, double I0);

struct MonotoneReport {
    bool pass = true;
    double worst_drop = 0;  // largest decrease between consecutive samples
    double at_r = 0;
};
MonotoneReport check_weiss_monotone(const FrequencyProfile& p, double tol);

struct DecayReport {
    bool pass = true;
    double alpha_hat = 0;
    bool alpha_defined = false;
    double worst_excess = 0;
};
// checks W(s) <= (s/r_max)^alpha W(r_max) for all s
DecayReport check_weiss_decay(const FrequencyProfile& p, double alpha);

// Boundary data on the unit circle, sampled at increasing angles in [0, 2pi).
// Evaluation interpolates sheet values after sorted matching and takes the
// sign of the nearest sample.
struct AngularTrace {
    std::vector<double> angles;
    std::vector<QPoint> points;

    std::size_t q() const { return points.empty() ? 0 : points.front().q(); }
};

AngularTrace trace_from_function(int n_samples, const std::function<QPoint(double)>& f);
QPoint eval_trace(const AngularTrace& tr, double phi);

// u^I(x) = (r^I * trace values at x/r, trace sign at x/r), Q[0] at the origin.
SampledField homogeneous_extension(const AngularTrace& tr, double I, Mesh disk_mesh);

// Energy of the I-homogeneous extension over the unit disk from the boundary
// integral (|D_tau u|^2 + I^2 |u|^2) / (m + 2I - 2), m = 2.
double extension_energy_spectral(const AngularTrace& tr, double I);

struct SmoothedFrequencySample {
    Vec2 q{0, 0};
    double r = 0;
    double D_phi = 0, H_phi = 0, I_phi = 0;  // I_phi NaN when H_phi = 0
};

// Frequency with the piecewise linear radial weight: 1 on [0,1/2], 2-2t on
// (1/2,1], so the mass term uses -phi' = 2 on the outer annulus.
SmoothedFrequencySample smoothed_frequency(const SampledField& u, Vec2 q, double r);

// Median of I over a decade of radii [r_hi/10, r_hi], log-spaced.
double median_frequency(const SampledField& u, Vec2 x, double r_hi, int n_radii = 25);

}  // namespace qfreq
