#pragma once

#include <iosfwd>
#include <vector>

namespace qfreq {

// Dirichlet eigenvalues of -d2/ds2 on (0, theta): second-order finite
// differences on n interior points, Sturm-sequence bisection. Serves as the
// independent cross-check for the closed-form arc spectra.
std::vector<double> fd_dirichlet_eigenvalues(double theta, int n, int count);

// Runs the full acceptance suite, one line per criterion on `out`.
// Returns the number of failed criteria. Runtime budgets are always
// enforced; show_timing only controls whether elapsed seconds are printed,
// so reports stay byte-identical across runs.
int run_acceptance(std::ostream& out, bool show_timing = true);

}  // namespace qfreq
