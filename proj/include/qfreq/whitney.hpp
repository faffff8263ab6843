#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qfreq/field.hpp"

namespace qfreq {

// A 2-plane in R^3 given by its unit normal. pi_0 is the horizontal plane.
struct Plane3 {
    std::array<double, 3> normal{0.0, 0.0, 1.0};
};

// Squared Frobenius distance of the two orthogonal projection matrices,
// 2 (1 - (n_a . n_b)^2).
double projector_distance2(const Plane3& a, const Plane3& b);

// Q-sheeted graph over the square [-4,4]^2 with one height dimension.
// Sheets are the sorted node values; gradients are finite differences of the
// sorted sheets; mass density per sheet is sqrt(1 + |grad|^2). Outside the
// square the graph continues with the constant boundary values.
struct GraphCurrent {
    SampledField g;
    std::vector<std::vector<double>> grad_x;   // [sheet][node]
    std::vector<std::vector<double>> grad_y;   // [sheet][node]
    std::vector<std::vector<double>> density;  // [sheet][node]

    std::size_t sheets() const { return grad_x.size(); }
};

GraphCurrent make_graph_current(SampledField g);

// Mean squared projector distance to pi over the graph points inside the
// ball around q, weighted by sheet mass, normalized by 2 pi r^2. Empty
// intersection gives 0.
double unoriented_excess(const GraphCurrent& T, std::array<double, 3> q, double r,
                         const Plane3& pi);

// Minimizing plane via the top-2 eigenspace of the mass-weighted mean
// projector, and the excess against it. Empty ball is an error.
std::pair<Plane3, double> best_plane_excess(const GraphCurrent& T, std::array<double, 3> q,
                                            double r);

// Sup over pairs of graph points in the ball of their separation orthogonal
// to pi. Empty intersection gives 0.
double height(const GraphCurrent& T, std::array<double, 3> q, double r, const Plane3& pi);

struct WhitneyParams {
    int N0 = 10;
    int M0 = 4;
    double Ce = 1.0;
    double Ch = 1.0;
    double delta2 = 1.0 / 16.0;
    double beta2 = 1.0 / 4.0;  // must equal 4 delta2
    double m0 = 0.0;           // <= 0: computed as max(c_sigma_sq, global excess)
    double c_sigma_sq = 0.0;
};

struct CubeRecord {
    int j = 0;
    std::int64_t ix = 0, iy = 0;  // lattice index within generation j
    Vec2 center{0.0, 0.0};
    double half_side = 0.0;
    char cls = 'S';  // 'S' survivor, 'e' excess stop, 'h' height stop, 'n' neighbor stop
    double excess = 0.0;
    double height_val = 0.0;
    double anchor_z = 0.0;
};

struct GenerationSummary {
    int j = 0;
    unsigned long long cubes = 0;  // cubes with no stopped ancestor
    unsigned long long survivors = 0;
    unsigned long long we = 0, wh = 0, wn = 0;
    unsigned long long evaluated = 0;  // cubes classified explicitly
};

// Survivors are kept as per-generation counts; cubes in regions the balls
// cannot distinguish from a single flat sheet are never evaluated (their
// excess and height are exactly zero, so only the neighbor rule could stop
// them, which is checked by adjacency). Stopped cubes carry full records.
struct CubeForest {
    WhitneyParams params;  // effective values, m0 resolved
    int j_max = 0;
    std::vector<CubeRecord> stopped;  // all generations, sorted (j, iy, ix)
    std::vector<GenerationSummary> generations;
    bool father_rule_ok = true;
    bool boundary_extension_used = false;  // some ball sampled beyond the square
    std::vector<std::uint8_t> gamma_mask;  // per input node, 1 = contact set
};

CubeForest refine(const GraphCurrent& T, const WhitneyParams& params, int j_max);

struct FineContactViolation {
    std::size_t mark = 0;
    CubeRecord cube;
    double dist = 0.0;
};

struct FineContactReport {
    bool pass = true;
    std::vector<FineContactViolation> violations;
};

// Checks l(L) < dist(x, L) / (64 sqrt(2)) for every stopped cube and mark.
FineContactReport check_fine_cm(const CubeForest& forest, const std::vector<Vec2>& marks);

// Structured text export: parameter echo, per-generation counts, one line
// per stopped cube, then the contact-set node mask.
std::string forest_to_string(const CubeForest& f);
void write_forest(const std::string& path, const CubeForest& f);

}  // namespace qfreq
