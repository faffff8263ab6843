#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "qfreq/mesh.hpp"
#include "qfreq/qpoint.hpp"

namespace qfreq {

enum class RegionLabel { zero, plus, minus };

// A Q-point per mesh node, canonical.
struct SampledField {
    Mesh mesh;
    std::vector<QPoint> values;

    std::size_t q() const { return values.empty() ? 0 : values.front().q(); }
};

SampledField sample_field(Mesh mesh, const std::function<QPoint(Vec2)>& f);

// Edge-based discrete Dirichlet energy, sum over edges of
// cellvol * gs(u_a, u_b)^2 / h^2.
double dirichlet_energy(const SampledField& u);

// Same sum restricted to edges whose midpoint lies in the open ball B_r(x).
double dirichlet_energy_in_ball(const SampledField& u, Vec2 center, double r);

// Unsigned counterpart (distance g instead of gs) for derived sheets fields.
double dirichlet_energy_unsigned(const SampledField& u);

// Scalar field energy, sum over edges of cellvol * (da - db)^2 / h^2.
double scalar_dirichlet_energy(const Mesh& mesh, const std::vector<double>& v);

// Node labels of the canonical decomposition: plus/minus where the matching
// signed part has positive size, zero on collapsed points.
std::vector<RegionLabel> decompose(const SampledField& u);

struct Decomposition {
    SampledField plus;    // u+ (-) eta(u), sign +1 everywhere
    SampledField minus;   // u- (-) eta(u), sign +1 everywhere
    std::vector<double> mean;  // eta(u) per node
};

Decomposition canonical_parts(const SampledField& u);

// max over edges of gs(u_a, u_b) / h.
double lipschitz_estimate(const SampledField& u);

// Pointwise norm |u| per node.
std::vector<double> pointwise_norm(const SampledField& u);

// Text round trip. Format: one header line, then one line per kept node
// "x [y] s:v1,...,vQ". Values are canonicalized on read.
void write_field(std::ostream& os, const SampledField& u);
SampledField read_field(std::istream& is);
void write_field_file(const std::string& path, const SampledField& u);
SampledField read_field_file(const std::string& path);

std::string encode_qpoint(const QPoint& t);
QPoint decode_qpoint(const std::string& s);

}  // namespace qfreq
