#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "qfreq/field.hpp"
#include "qfreq/frequency.hpp"

namespace qfreq {

// Dirichlet data: one value per boundary node, each node exactly once.
// Disk meshes also carry the trace as a function of angle, which the solver
// uses to seed the interior.
struct BoundaryTrace {
    std::vector<std::pair<int, QPoint>> values;
    std::optional<AngularTrace> angular;
};

BoundaryTrace make_boundary_trace(const Mesh& mesh, const std::function<QPoint(Vec2)>& f);

struct SolveParams {
    int max_sweeps = 5000;
    double tol = 1e-10;  // stop when a sweep reduces energy by less than tol relative
    int restarts = 1;
    unsigned rng_seed = 1;
    bool enforce_zero_average = false;
};

struct SolveResult {
    SampledField field;
    std::vector<double> energy_history;  // entry s is the energy after sweep s
    double energy = 0.0;
    int sweeps = 0;
    bool converged = false;
};

// Exact minimizer of sum_k w_k gs(x, neighbor_k)^2 over x. For each sign the
// optimum is the weighted per-rank mean of sorted neighbor values, with
// opposite-sign neighbors entering as q copies of their mean; the cheaper of
// the two signs wins and ties keep the current sign. Empty weights mean 1.
QPoint local_node_update(const QPoint& current, const std::vector<QPoint>& neighbors,
                         const std::vector<double>& weights = {});

// Gauss-Seidel relaxation of the discrete energy with the trace held fixed.
// Attempt 0 seeds deterministically (1D: best single-interface profile, disk:
// degree-1 extension of the angular trace, otherwise nearest boundary value);
// further attempts seed interior nodes from random trace entries. Returns the
// best attempt; converged is false when it exhausted max_sweeps.
SolveResult solve(const BoundaryTrace& trace, const Mesh& mesh, const SolveParams& params);

}  // namespace qfreq
