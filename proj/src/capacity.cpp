#include "mahl/capacity.hpp"
#include "mahl/kernels.hpp"
#include "mahl/regularization.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mahl {

CompactSet ball_set(const TorusGrid& g, std::size_t center, double radius,
                    const std::string& label) {
    CompactSet K;
    K.mask.assign(g.points(), 0);
    double xc[2 * kMaxDim], x[2 * kMaxDim];
    g.point(center, xc);
    for (std::size_t i = 0; i < K.mask.size(); ++i) {
        g.point(i, x);
        if (torus_distance(g, x, xc) <= radius) K.mask[i] = 1;
    }
    K.label = label.empty() ? ("ball_r" + std::to_string(radius)) : label;
    return K;
}

std::vector<CompactSet> ball_family(const TorusGrid& g, std::size_t center,
                                    const std::vector<double>& radii) {
    std::vector<CompactSet> fam;
    for (double r : radii) fam.push_back(ball_set(g, center, r));
    return fam;
}

CompactSet sublevel_set(const ScalarField& u, double level, const std::string& label) {
    CompactSet K;
    K.mask.assign(u.size(), 0);
    for (std::size_t i = 0; i < u.size(); ++i)
        if (u.v[i] < level) K.mask[i] = 1;
    K.label = label.empty() ? ("sublevel_" + std::to_string(level)) : label;
    return K;
}

// ---------------------------------------------------------------------------
// Projected SOR for the obstacle problem:
//   u <= ceil,  Delta u >= -4 n s   (s = per-axis metric scale),
//   equality off the contact set.
// Red-black ordering: deterministic and thread-partition independent.
// ---------------------------------------------------------------------------

ScalarField relative_extremal(const CompactSet& K, const KahlerBackground& bg,
                              const TorusGrid& g, const ExtremalOptions& opts) {
    if (!g.periodic()) throw GridMismatch("relative_extremal needs a periodic grid");
    if (K.mask.size() != g.points()) throw GridMismatch("mask size mismatch");

    std::vector<double> ceil_v(g.points(), 0.0);
    bool empty = true;
    for (std::size_t i = 0; i < K.mask.size(); ++i)
        if (K.mask[i]) {
            ceil_v[i] = -1.0;
            empty = false;
        }
    if (empty) return ScalarField::constant(g, 0.0);

    // n = 1: det(g + H) = 0 off K means Delta u = -4 g11 (g in diagonal form).
    // n >= 2: trace condition tr(g^{-1} H) = -n as the sweep target, certified
    // afterwards by the eigenvalue scan.
    double source = 0.0;
    for (int j = 0; j < bg.n; ++j) source += 4.0; // sum_j 4 g_jj / g_jj
    const double h2 = g.h * g.h;
    const int d = g.dims();
    const double omega = opts.omega > 0.0
                             ? opts.omega
                             : 2.0 / (1.0 + std::sin(std::numbers::pi * g.h));

    std::vector<double> u = ceil_v; // start at the obstacle
    std::vector<long long> stride(std::size_t(d), 1);
    for (int a = d - 2; a >= 0; --a) stride[std::size_t(a)] = stride[std::size_t(a) + 1] * g.N;

    // color of a point = parity of its index sum
    std::vector<std::uint8_t> color(g.points());
    {
        int c[2 * kMaxDim];
        for (std::size_t i = 0; i < color.size(); ++i) {
            g.decode(i, c);
            int s = 0;
            for (int a = 0; a < d; ++a) s += c[a];
            color[i] = std::uint8_t(s & 1);
        }
    }

    const double denom = 2.0 * d;
    double change = 1e300;
    int sweep = 0;
    while (change > opts.tol && sweep < opts.max_sweeps) {
        change = 0.0;
        for (int phase = 0; phase < 2; ++phase) {
            std::vector<double> deltas(g.points(), 0.0);
            par_for(g.points(), default_exec(), [&](std::size_t p) {
                if (color[p] != phase) return;
                int c[2 * kMaxDim];
                g.decode(p, c);
                double nb = 0.0;
                for (int a = 0; a < d; ++a) {
                    int up = c[a] + 1, dn = c[a] - 1;
                    if (up == g.N) up = 0;
                    if (dn < 0) dn = g.N - 1;
                    const long long base = (long long)p - c[a] * stride[std::size_t(a)];
                    nb += u[std::size_t(base + up * stride[std::size_t(a)])] +
                          u[std::size_t(base + dn * stride[std::size_t(a)])];
                }
                const double gs = (nb + source * h2) / denom;
                const double target = std::min(ceil_v[p], u[p] + omega * (gs - u[p]));
                deltas[p] = target - u[p];
            });
            for (std::size_t p = 0; p < deltas.size(); ++p) {
                if (deltas[p] != 0.0) {
                    u[p] += deltas[p];
                    change = std::max(change, std::abs(deltas[p]));
                }
            }
        }
        ++sweep;
    }
    if (change > opts.tol)
        throw NonConvergence("relative_extremal: SOR stalled at change " +
                             std::to_string(change));
    return ScalarField(g, std::move(u));
}

CapacityReport capacity_report(const CompactSet& K, const KahlerBackground& bg,
                               const TorusGrid& g, const ExtremalOptions& opts) {
    CapacityReport rep;
    if (K.empty()) {
        rep.capacity = 0.0;
        rep.competitor_best = 0.0;
        rep.extremal = ScalarField::constant(g, 0.0);
        return rep;
    }
    rep.extremal = relative_extremal(K, bg, g, opts);

    // all of X: the constant -1 is admissible and maximal; mass is exact
    bool all = true;
    for (auto b : K.mask)
        if (!b) {
            all = false;
            break;
        }
    if (all) {
        rep.capacity = bg.V_omega;
        rep.competitor_best = bg.V_omega;
        return rep;
    }

    MAReport ma = ma_density(rep.extremal, bg, true);
    std::vector<double> w(g.points(), 0.0);
    for (std::size_t i = 0; i < w.size(); ++i)
        if (K.mask[i]) w[i] = ma.density.v[i];
    rep.capacity = pairwise_sum(w) * g.cell_volume() * bg.det_g;

    // dictionary competitors: scaled copies of the extremal itself plus
    // smooth bumps; admissible means omega-psh with values in [-1, 0]
    double best = 0.0;
    for (double s : {0.5, 0.75, 1.0}) {
        std::vector<double> cand(g.points());
        for (std::size_t i = 0; i < cand.size(); ++i) cand[i] = s * rep.extremal.v[i];
        ScalarField rho(g, std::move(cand));
        PshCheck chk = is_omega_psh(rho, bg, 10.0 * g.h * g.h);
        if (!chk.psh) continue;
        MAReport m = ma_density(rho, bg, true);
        std::vector<double> wm(g.points(), 0.0);
        for (std::size_t i = 0; i < wm.size(); ++i)
            if (K.mask[i]) wm[i] = m.density.v[i];
        best = std::max(best, pairwise_sum(wm) * g.cell_volume() * bg.det_g);
    }
    rep.competitor_best = best;
    return rep;
}

double capacity(const CompactSet& K, const KahlerBackground& bg, const TorusGrid& g) {
    return capacity_report(K, bg, g).capacity;
}

HAlphaFit h_alpha_fit(const GridMeasure& mu, const std::vector<CompactSet>& family,
                      const KahlerBackground& bg) {
    if (family.size() < 6)
        throw DegenerateFamily("h_alpha_fit needs >= 6 sets");
    const TorusGrid& g = mu.density.grid;
    HAlphaFit fit;
    for (const CompactSet& K : family) {
        fit.capacities.push_back(capacity(K, bg, g));
        fit.masses.push_back(mu.mass_on(K.mask));
    }
    // sanity: need a usable spread of positive capacities
    double cmin = 1e300, cmax = 0.0;
    for (double c : fit.capacities) {
        if (c <= 0.0) continue;
        cmin = std::min(cmin, c);
        cmax = std::max(cmax, c);
    }
    if (!(cmax > 0.0) || cmin >= cmax)
        throw DegenerateFamily("h_alpha_fit: degenerate capacity family");
    fit.cap_span_decades = std::log10(cmax / cmin);
    if (fit.cap_span_decades < 0.05)
        throw DegenerateFamily("h_alpha_fit: capacity span too narrow to fit");
    fit.narrow_span = fit.cap_span_decades < 2.0;

    LineFit lf = fit_loglog(fit.capacities, fit.masses, 4, 0.0);
    fit.alpha = lf.slope - 1.0;
    fit.C_alpha = std::exp(lf.intercept);
    fit.residual = lf.residual;

    // H(infinity) trend: split the family by capacity and compare window
    // slopes; growth toward small sets is the reported trend.
    std::vector<std::size_t> order(fit.capacities.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return fit.capacities[a] < fit.capacities[b];
    });
    const std::size_t m = order.size();
    auto window_slope = [&](std::size_t lo, std::size_t hi) {
        std::vector<double> cs, ms;
        for (std::size_t i = lo; i < hi; ++i) {
            cs.push_back(fit.capacities[order[i]]);
            ms.push_back(fit.masses[order[i]]);
        }
        return fit_loglog(cs, ms, 3, 0.0).slope;
    };
    if (m >= 8) {
        const double small_scale = window_slope(0, m / 2 + 1);
        const double large_scale = window_slope(m / 2, m);
        fit.h_infinity_trend = small_scale > large_scale - 0.05;
    } else {
        fit.h_infinity_trend = fit.alpha > 0.0;
    }
    return fit;
}

DominationReport domination_check(const GridMeasure& mu, const ScalarField& f,
                                  double p, const std::vector<CompactSet>& family,
                                  const KahlerBackground& bg) {
    (void)p;
    DominationReport rep;
    rep.mu_fit = h_alpha_fit(mu, family, bg);
    // reuse the capacities; fit int_K f dmu against them
    GridMeasure fmu = [&] {
        std::vector<double> dens(f.size());
        for (std::size_t i = 0; i < dens.size(); ++i)
            dens[i] = std::max(f.v[i], 0.0) * mu.density.v[i];
        std::vector<GridMeasure::Atom> atoms;
        for (const auto& a : mu.atoms)
            atoms.push_back({a.point, std::max(f.v[a.point], 0.0) * a.mass});
        return GridMeasure::with_atoms(ScalarField(f.grid, std::move(dens)),
                                       std::move(atoms));
    }();
    HAlphaFit ffit;
    ffit.capacities = rep.mu_fit.capacities;
    for (const CompactSet& K : family) ffit.masses.push_back(fmu.mass_on(K.mask));
    LineFit lf = fit_loglog(ffit.capacities, ffit.masses, 4, 0.0);
    ffit.alpha = lf.slope - 1.0;
    ffit.C_alpha = std::exp(lf.intercept);
    ffit.residual = lf.residual;
    ffit.cap_span_decades = rep.mu_fit.cap_span_decades;
    ffit.narrow_span = rep.mu_fit.narrow_span;
    rep.fmu_fit = ffit;
    return rep;
}

} // namespace mahl
