#pragma once

#include "mahl/util.hpp"

#include <utility>
#include <vector>

namespace mahl {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0; // RMS residual in the fitted coordinates
    int count = 0;
};

/// Ordinary least squares y = slope x + intercept.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Least squares in log-log coordinates; pairs with y <= y_floor are dropped.
/// Throws DegenerateFamily if fewer than min_points usable pairs remain.
LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y,
                   int min_points = 3, double y_floor = 0.0);

/// Geometric ladder {from, from*step, ...} clipped at `to` (inclusive), step>1
/// descending from `from` down to `to` when to < from.
std::vector<double> geometric_ladder(double from, double to, int count);

/// Richardson-style extrapolation of a sequence f(t_k) on a descending
/// ladder toward t -> -inf assuming geometric convergence. Returns the
/// extrapolated limit; throws NonConvergentLadder when the tail is not
/// settling.
double extrapolate_limit(const std::vector<double>& values, double rel_tol = 1e-3);

} // namespace mahl
