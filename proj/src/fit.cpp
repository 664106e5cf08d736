#include "mahl/fit.hpp"

#include <cmath>

namespace mahl {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw DegenerateFamily("fit_line needs at least two points");
    const double n = double(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-30) throw DegenerateFamily("fit_line: degenerate abscissae");
    LineFit f;
    f.slope = (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    f.count = int(x.size());
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.slope * x[i] + f.intercept);
        ss += r * r;
    }
    f.residual = std::sqrt(ss / n);
    return f;
}

LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y,
                   int min_points, double y_floor) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] > 0.0 && y[i] > y_floor) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    }
    if (int(lx.size()) < min_points)
        throw DegenerateFamily("fit_loglog: not enough positive pairs");
    return fit_line(lx, ly);
}

std::vector<double> geometric_ladder(double from, double to, int count) {
    std::vector<double> out;
    if (count < 2) throw DegenerateFamily("ladder needs >= 2 points");
    const double q = std::pow(to / from, 1.0 / (count - 1));
    double v = from;
    for (int i = 0; i < count; ++i) {
        out.push_back(v);
        v *= q;
    }
    return out;
}

double extrapolate_limit(const std::vector<double>& values, double rel_tol) {
    if (values.size() < 3) throw NonConvergentLadder("ladder too short");
    const double a = values[values.size() - 3];
    const double b = values[values.size() - 2];
    const double c = values[values.size() - 1];
    const double d1 = b - a, d2 = c - b;
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(c), 1e-300});
    if (std::abs(d2) < 1e-14 * scale) return c;
    const double q = d2 / d1;
    if (!(std::abs(q) < 0.95))
        throw NonConvergentLadder("ladder differences not contracting");
    // geometric tail: limit = c + d2 * q / (1 - q)
    const double limit = c + d2 * q / (1.0 - q);
    if (std::abs(d2) > rel_tol * std::max(std::abs(limit), 1.0) * 10.0)
        throw NonConvergentLadder("ladder not settled within tolerance");
    return limit;
}

} // namespace mahl
