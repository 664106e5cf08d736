#include "mahl/regularization.hpp"
#include "mahl/fft_poisson.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mahl {

double KernelSpec::rho(double t) const {
    if (t < 0.0 || t >= 1.0 - 1e-12) return 0.0;
    return eta / ((1.0 - t) * (1.0 - t)) * std::exp(1.0 / (t - 1.0));
}

double sphere_area(int m) {
    // m = 2n-1: sigma_{2n-1} = 2 pi^n / (n-1)!
    const int n = (m + 1) / 2;
    double fact = 1.0;
    for (int i = 2; i < n; ++i) fact *= i;
    return 2.0 * std::pow(std::numbers::pi, n) / fact;
}

double ball_volume(int m) {
    const int n = m / 2;
    double fact = 1.0;
    for (int i = 2; i <= n; ++i) fact *= i;
    return std::pow(std::numbers::pi, n) / fact;
}

KernelSpec normalize_kernel(int n) {
    const double sigma = sphere_area(2 * n - 1);
    auto unweighted = [](double r) {
        const double t = r * r;
        if (t >= 1.0 - 1e-12) return 0.0;
        return std::exp(1.0 / (t - 1.0)) / ((1.0 - t) * (1.0 - t));
    };
    const double radial = adaptive_simpson(
        [&](double r) { return std::pow(r, 2 * n - 1) * unweighted(r); }, 0.0, 1.0,
        1e-13);
    KernelSpec k;
    k.n = n;
    k.eta = 1.0 / (sigma * radial);
    return k;
}

double KernelSpec::second_moment() const {
    const double sigma = sphere_area(2 * n - 1);
    const KernelSpec& self = *this;
    return sigma * adaptive_simpson(
                       [&](double r) {
                           return std::pow(r, 2 * n + 1) * self.rho(r * r);
                       },
                       0.0, 1.0, 1e-13);
}

namespace {

BallStencil kernel_stencil(const TorusGrid& g, double delta, const KernelSpec& kernel) {
    BallStencil s = ball_stencil(g, delta, true);
    const double inv_d2 = 1.0 / (delta * delta);
    double sum = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        s.weight[i] = kernel.rho(s.r2[i] * inv_d2);
        sum += s.weight[i];
    }
    if (!(sum > 0.0)) throw DeltaTooSmall("kernel support resolves no grid point");
    s.weight_sum = sum;
    return s;
}

void require_delta(const TorusGrid& g, double delta, double min_cells) {
    if (delta < min_cells * g.h - 1e-15)
        throw DeltaTooSmall("delta = " + std::to_string(delta) + " below " +
                            std::to_string(min_cells) + "h");
}

} // namespace

ScalarField delta_regularize(const ScalarField& u, double delta,
                             const KernelSpec& kernel, Exec exec) {
    require_delta(u.grid, delta, 2.0);
    if (kernel.n != u.grid.n) throw GridMismatch("kernel dimension mismatch");
    BallStencil s = kernel_stencil(u.grid, delta, kernel);
    std::vector<double> out;
    stencil_average(u, s, out, exec);
    return ScalarField(u.grid, std::move(out));
}

ScalarField ball_average(const ScalarField& u, double delta, Exec exec) {
    require_delta(u.grid, delta, 2.0);
    BallStencil s = ball_stencil(u.grid, delta, true);
    std::vector<double> out;
    stencil_average(u, s, out, exec);
    return ScalarField(u.grid, std::move(out));
}

ScalarField sup_convolution(const ScalarField& u, double delta, Exec exec) {
    require_delta(u.grid, delta, 1.0);
    BallStencil s = ball_stencil(u.grid, delta, true);
    std::vector<double> out;
    stencil_max(u, s, out, exec);
    return ScalarField(u.grid, std::move(out));
}

// ---------------------------------------------------------------------------
// Jensen formula. Swapping the r- and t-integrals in
//   (2n / (delta^{2n} sigma)) int_0^delta r^{2n-1} int_0^r t^{1-2n} m(t) dt dr
// with m(t) = int_{|zeta|<=t} Delta u dV gives
//   int_{B_delta} G(|zeta|) Delta u(z+zeta) dV,
// G(r) = (1/(sigma delta^{2n})) [ delta^{2n} A(r) - (delta^2 - r^2)/2 ],
// A(r) = log(delta/r)            (n = 1)
//      = (r^{2-2n} - delta^{2-2n}) / (2n-2)   (n >= 2).
// ---------------------------------------------------------------------------

namespace {

double green_A(int n, double r, double delta) {
    if (n == 1) return std::log(delta / r);
    return (std::pow(r, 2 - 2 * n) - std::pow(delta, 2 - 2 * n)) / double(2 * n - 2);
}

double green_kernel(int n, double r, double delta) {
    const double sigma = sphere_area(2 * n - 1);
    const double d2n = std::pow(delta, 2 * n);
    return (d2n * green_A(n, r, delta) - 0.5 * (delta * delta - r * r)) /
           (sigma * d2n);
}

// average of G over the equal-volume ball of the center cell
double green_center_average(int n, double h, double delta) {
    const double v = ball_volume(2 * n);
    const double rho0 = h * std::pow(v, -1.0 / (2 * n)); // equal-volume radius
    if (n == 1) {
        // (1/pi) [ 1/2 log(delta/rho0) + rho0^2 / (8 delta^2) ]
        return (0.5 * std::log(delta / rho0) + rho0 * rho0 / (8.0 * delta * delta)) /
               std::numbers::pi;
    }
    const double sigma = sphere_area(2 * n - 1);
    const double mass = adaptive_simpson(
        [&](double r) {
            return sigma * std::pow(r, 2 * n - 1) * green_kernel(n, r, delta);
        },
        0.0, rho0, 1e-13);
    return mass / (v * std::pow(rho0, 2 * n));
}

} // namespace

double jensen_rhs(const ScalarField& u, std::size_t z, double delta, Exec exec) {
    const TorusGrid& g = u.grid;
    require_delta(g, delta, 2.0);
    const int margin_needed = int(std::ceil(2.0 * delta / g.h)) + 1;
    if (!g.periodic() && !g.interior(z, margin_needed))
        throw PatchTooSmall("jensen_rhs needs a patch radius >= 2 delta around z");

    ScalarField lap = SpectralPoisson::apply_laplacian(u);
    BallStencil s = ball_stencil(g, delta, true);

    const int n = g.n;
    int c[2 * kMaxDim];
    g.decode(z, c);
    std::vector<long long> stride(std::size_t(g.dims()), 1);
    for (int a = g.dims() - 2; a >= 0; --a)
        stride[std::size_t(a)] = stride[std::size_t(a) + 1] * g.N;

    const double g0 = green_center_average(n, g.h, delta);
    std::vector<double> terms(s.size());
    par_for(s.size(), exec, [&](std::size_t t) {
        long long q = 0;
        for (int a = 0; a < g.dims(); ++a) {
            int ci = c[a] + s.offsets[t][std::size_t(a)];
            if (g.periodic()) {
                ci %= g.N;
                if (ci < 0) ci += g.N;
            }
            q += ci * stride[std::size_t(a)];
        }
        const double r = std::sqrt(s.r2[t]);
        const double G = (s.r2[t] == 0.0) ? g0 : green_kernel(n, r, delta);
        terms[t] = G * lap.v[std::size_t(q)];
    });
    return pairwise_sum(terms) * g.cell_volume();
}

// ---------------------------------------------------------------------------
// Kiselman-Legendre
// ---------------------------------------------------------------------------

KLResult kiselman_legendre(const ScalarField& u, const KLParams& params,
                           const KernelSpec& kernel, double mono_tol, Exec exec) {
    const TorusGrid& g = u.grid;
    const double h = g.h;
    if (mono_tol < 0.0) mono_tol = 10.0 * h * h;
    require_delta(g, params.delta, 2.0);

    std::vector<double> ladder;
    for (double t = params.delta; t >= 2.0 * h * (1.0 - 1e-12); t /= params.t_ratio)
        ladder.push_back(t);
    if (ladder.size() < 2)
        throw DeltaTooSmall("t-ladder collapsed: delta too close to 2h");

    std::vector<ScalarField> rho_t;
    rho_t.reserve(ladder.size());
    for (double t : ladder) rho_t.push_back(delta_regularize(u, t, kernel, exec));

    const std::size_t total = g.points();
    const int mask_margin =
        g.periodic() ? 0 : int(std::ceil(params.delta / h)) + 1;

    // monotonicity of F(z,t) = rho_t u + K t^2 along the descending ladder
    double worst = -1e300;
    std::size_t worst_pt = 0;
    std::size_t worst_pair = 0;
    for (std::size_t k = 0; k + 1 < ladder.size(); ++k) {
        const double pen_hi = params.K * ladder[k] * ladder[k];
        const double pen_lo = params.K * ladder[k + 1] * ladder[k + 1];
        for (std::size_t p = 0; p < total; ++p) {
            if (mask_margin && !g.interior(p, mask_margin)) continue;
            const double jump =
                (rho_t[k + 1].v[p] + pen_lo) - (rho_t[k].v[p] + pen_hi);
            if (jump > worst) {
                worst = jump;
                worst_pt = p;
                worst_pair = k;
            }
        }
    }
    if (worst > mono_tol)
        throw MonotonicityViolation(
            "rho_t u + K t^2 not increasing: jump " + std::to_string(worst) +
            " at point " + std::to_string(worst_pt) + ", ladder pair " +
            std::to_string(worst_pair));

    KLResult res;
    res.ladder = ladder;
    res.worst_monotonicity = worst;

    std::vector<double> tr(total), am(total), lam(total);
    const double Kd2 = params.K * params.delta * params.delta;
    par_for(total, exec, [&](std::size_t p) {
        double best = 1e300;
        double best_t = ladder[0];
        for (std::size_t k = 0; k < ladder.size(); ++k) {
            const double t = ladder[k];
            const double val = rho_t[k].v[p] + params.K * t * t - Kd2 -
                               params.c * std::log(t / params.delta);
            if (val < best) {
                best = val;
                best_t = t;
            }
        }
        tr[p] = best;
        am[p] = best_t;
        const double f0 = rho_t[0].v[p] + params.K * ladder[0] * ladder[0];
        const double f1 = rho_t[1].v[p] + params.K * ladder[1] * ladder[1];
        lam[p] = (f0 - f1) / std::log(ladder[0] / ladder[1]);
    });
    res.transform = ScalarField(g, std::move(tr));
    res.argmin_t = ScalarField(g, std::move(am));
    res.lambda_delta = ScalarField(g, std::move(lam));
    return res;
}

SlackReport hessian_bound_check(KLResult& result, const KLParams& params,
                                const KahlerBackground& bg, Exec exec) {
    const TorusGrid& g = result.transform.grid;
    HermitianField H = complex_hessian(result.transform, exec);
    const int n = H.n;
    const std::size_t total = g.points();
    const int margin = g.periodic() ? 0 : int(std::ceil(params.delta / g.h)) + 2;
    std::vector<double> slack(total, 1e300);
    par_for(total, exec, [&](std::size_t p) {
        if (margin && !g.interior(p, margin)) return;
        cplx a[kMaxDim * (kMaxDim + 1) / 2];
        const cplx* hp = H.row(p);
        std::size_t t = 0;
        for (int j = 0; j < n; ++j)
            for (int k = j; k < n; ++k, ++t) a[t] = bg.gij(j, k) + hp[t];
        double eig[kMaxDim];
        herm_eigenvalues(n, a, eig);
        const double bound =
            -(params.A * std::min(params.c, result.lambda_delta.v[p]) +
              params.K * params.delta * params.delta);
        slack[p] = eig[0] - bound;
    });
    MinLoc m = reduce_min(slack, exec);
    SlackReport rep;
    rep.slack = m.value;
    rep.worst = m.index;
    rep.bound_at_worst =
        -(params.A * std::min(params.c, result.lambda_delta.v[m.index]) +
          params.K * params.delta * params.delta);
    result.hessian_slack = m.value;
    result.slack_point = m.index;
    return rep;
}

double lambda_slope(const ScalarField& u, std::size_t z, double t,
                    const KernelSpec& kernel, double K, Exec exec) {
    const double r = std::pow(2.0, 0.125);
    const TorusGrid& g = u.grid;
    if (t / r < 2.0 * g.h || t * r > 0.5)
        throw TOutOfRange("lambda_slope: t outside the resolvable ladder");
    ScalarField lo = delta_regularize(u, t / r, kernel, exec);
    ScalarField hi = delta_regularize(u, t * r, kernel, exec);
    const double f_lo = lo.v[z] + K * (t / r) * (t / r);
    const double f_hi = hi.v[z] + K * (t * r) * (t * r);
    return (f_hi - f_lo) / (2.0 * std::log(r));
}

double l1_gap(const ScalarField& u, double delta, const KernelSpec& kernel, Exec exec) {
    // The signed integral vanishes identically on the torus (translation
    // invariant kernel), so the L^1 gap is the norm int |rho_delta u - u| dV,
    // which is what the stability step consumes. For genuinely psh fields the
    // two coincide.
    ScalarField reg = delta_regularize(u, delta, kernel, exec);
    std::vector<double> diff(u.size());
    for (std::size_t i = 0; i < diff.size(); ++i)
        diff[i] = std::abs(reg.v[i] - u.v[i]);
    return pairwise_sum(diff) * u.grid.cell_volume();
}

double l1_gap_measure(const ScalarField& u, double delta, const KernelSpec& kernel,
                      const GridMeasure& mu, Exec exec) {
    ScalarField reg = delta_regularize(u, delta, kernel, exec);
    std::vector<double> diff(u.size());
    for (std::size_t i = 0; i < diff.size(); ++i)
        diff[i] = std::abs(reg.v[i] - u.v[i]) * mu.density.v[i];
    double s = pairwise_sum(diff) * u.grid.cell_volume();
    for (const auto& a : mu.atoms) s += std::abs(reg.v[a.point] - u.v[a.point]) * a.mass;
    return s;
}

} // namespace mahl
