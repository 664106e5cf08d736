#include "mahl/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mahl {

namespace {
Exec g_exec = Exec::parallel;
}

Exec default_exec() { return g_exec; }
void set_default_exec(Exec e) { g_exec = e; }

void set_thread_count(int k) {
#ifdef _OPENMP
    if (k >= 1) omp_set_num_threads(k);
#else
    (void)k;
#endif
    g_exec = Exec::parallel;
}

BallStencil ball_stencil(const TorusGrid& g, double radius, bool include_zero) {
    BallStencil s;
    s.grid = g;
    s.radius = radius;
    const int reach = int(std::floor(radius / g.h + 1e-12));
    if (g.periodic() && 2 * reach + 1 > g.N)
        throw DeltaTooSmall("stencil radius exceeds half the torus period");
    const int d = g.dims();
    std::array<int, 2 * kMaxDim> w{};
    for (int a = 0; a < d; ++a) w[std::size_t(a)] = -reach;
    const double r2max = radius * radius * (1.0 + 1e-14);
    int maxabs = 0;
    while (true) {
        double r2 = 0.0;
        bool zero = true;
        for (int a = 0; a < d; ++a) {
            const double x = w[std::size_t(a)] * g.h;
            r2 += x * x;
            if (w[std::size_t(a)] != 0) zero = false;
        }
        if (r2 <= r2max && (include_zero || !zero)) {
            s.offsets.push_back(w);
            s.r2.push_back(r2);
            for (int a = 0; a < d; ++a)
                maxabs = std::max(maxabs, std::abs(w[std::size_t(a)]));
        }
        // odometer
        int a = d - 1;
        while (a >= 0 && w[std::size_t(a)] == reach) {
            w[std::size_t(a)] = -reach;
            --a;
        }
        if (a < 0) break;
        ++w[std::size_t(a)];
    }
    // sort by (r2, offsets lexicographic) for deterministic radial ordering
    std::vector<std::size_t> order(s.offsets.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (s.r2[a] != s.r2[b]) return s.r2[a] < s.r2[b];
        return s.offsets[a] < s.offsets[b];
    });
    BallStencil sorted;
    sorted.grid = g;
    sorted.radius = radius;
    sorted.reach = maxabs;
    sorted.offsets.reserve(order.size());
    sorted.r2.reserve(order.size());
    for (std::size_t i : order) {
        sorted.offsets.push_back(s.offsets[i]);
        sorted.r2.push_back(s.r2[i]);
    }
    sorted.weight.assign(order.size(), 1.0);
    sorted.weight_sum = double(order.size());
    return sorted;
}

namespace {

// Precomputed wrapped shift tables: shifted[a][c] = index c + w_a (wrapped or
// flagged -1 out of range on patches).
struct ShiftPlan {
    const TorusGrid& g;
    std::vector<long long> stride; // linear stride per axis
    explicit ShiftPlan(const TorusGrid& grid) : g(grid) {
        const int d = g.dims();
        stride.assign(std::size_t(d), 1);
        for (int a = d - 2; a >= 0; --a)
            stride[std::size_t(a)] = stride[std::size_t(a) + 1] * g.N;
    }
};

// Neighbor index; same arithmetic in the serial and parallel paths.
inline std::size_t shifted_index(const TorusGrid& g, const int* c,
                                 const std::array<int, 2 * kMaxDim>& w,
                                 const std::vector<long long>& stride) {
    long long q = 0;
    for (int a = 0; a < g.dims(); ++a) {
        int ci = c[a] + w[std::size_t(a)];
        if (g.periodic()) {
            ci %= g.N;
            if (ci < 0) ci += g.N;
        }
        q += ci * stride[std::size_t(a)];
    }
    return std::size_t(q);
}

} // namespace

void stencil_average_serial(const ScalarField& u, const BallStencil& s,
                            std::vector<double>& out) {
    out.assign(u.size(), 0.0);
    const double inv = 1.0 / s.weight_sum;
    const TorusGrid& g = u.grid;
    ShiftPlan plan(g);
    int c[2 * kMaxDim];
    for (std::size_t p = 0; p < g.points(); ++p) {
        if (!g.periodic() && !g.interior(p, s.reach)) {
            out[p] = u.v[p];
            continue;
        }
        g.decode(p, c);
        KahanSum k;
        for (std::size_t t = 0; t < s.size(); ++t)
            k.add(s.weight[t] * u.v[shifted_index(g, c, s.offsets[t], plan.stride)]);
        out[p] = k.value() * inv;
    }
}

void stencil_average(const ScalarField& u, const BallStencil& s,
                     std::vector<double>& out, Exec exec) {
    if (exec == Exec::serial) {
        stencil_average_serial(u, s, out);
        return;
    }
    out.assign(u.size(), 0.0);
    const double inv = 1.0 / s.weight_sum;
    const TorusGrid& g = u.grid;
    ShiftPlan plan(g);
    par_for(u.size(), Exec::parallel, [&](std::size_t p) {
        if (!g.periodic() && !g.interior(p, s.reach)) {
            out[p] = u.v[p];
            return;
        }
        int c[2 * kMaxDim];
        g.decode(p, c);
        KahanSum k;
        for (std::size_t t = 0; t < s.size(); ++t)
            k.add(s.weight[t] * u.v[shifted_index(g, c, s.offsets[t], plan.stride)]);
        out[p] = k.value() * inv;
    });
}

void stencil_max_serial(const ScalarField& u, const BallStencil& s,
                        std::vector<double>& out) {
    out.assign(u.size(), 0.0);
    const TorusGrid& g = u.grid;
    ShiftPlan plan(g);
    int c[2 * kMaxDim];
    for (std::size_t p = 0; p < g.points(); ++p) {
        if (!g.periodic() && !g.interior(p, s.reach)) {
            out[p] = u.v[p];
            continue;
        }
        g.decode(p, c);
        double m = u.v[p];
        for (std::size_t t = 0; t < s.size(); ++t)
            m = std::max(m, u.v[shifted_index(g, c, s.offsets[t], plan.stride)]);
        out[p] = m;
    }
}

void stencil_max(const ScalarField& u, const BallStencil& s,
                 std::vector<double>& out, Exec exec) {
    if (exec == Exec::serial) {
        stencil_max_serial(u, s, out);
        return;
    }
    out.assign(u.size(), 0.0);
    const TorusGrid& g = u.grid;
    ShiftPlan plan(g);
    par_for(u.size(), Exec::parallel, [&](std::size_t p) {
        if (!g.periodic() && !g.interior(p, s.reach)) {
            out[p] = u.v[p];
            return;
        }
        int c[2 * kMaxDim];
        g.decode(p, c);
        double m = u.v[p];
        for (std::size_t t = 0; t < s.size(); ++t)
            m = std::max(m, u.v[shifted_index(g, c, s.offsets[t], plan.stride)]);
        out[p] = m;
    });
}

void offset_sup_diff_serial(const ScalarField& u, const BallStencil& s,
                            std::vector<double>& out) {
    out.assign(s.size(), 0.0);
    const TorusGrid& g = u.grid;
    ShiftPlan plan(g);
    int c[2 * kMaxDim];
    for (std::size_t t = 0; t < s.size(); ++t) {
        double m = 0.0;
        for (std::size_t p = 0; p < g.points(); ++p) {
            if (!g.periodic() && !g.interior(p, s.reach)) continue;
            g.decode(p, c);
            const double d =
                std::abs(u.v[shifted_index(g, c, s.offsets[t], plan.stride)] - u.v[p]);
            m = std::max(m, d);
        }
        out[t] = m;
    }
}

void offset_sup_diff(const ScalarField& u, const BallStencil& s,
                     std::vector<double>& out, Exec exec) {
    if (exec == Exec::serial) {
        offset_sup_diff_serial(u, s, out);
        return;
    }
    out.assign(s.size(), 0.0);
    const TorusGrid& g = u.grid;
    ShiftPlan plan(g);
    // parallel over offsets: each offset's sup is an exact (order-free) max
    par_for(s.size(), Exec::parallel, [&](std::size_t t) {
        double m = 0.0;
        int c[2 * kMaxDim];
        for (std::size_t p = 0; p < g.points(); ++p) {
            if (!g.periodic() && !g.interior(p, s.reach)) continue;
            g.decode(p, c);
            const double d =
                std::abs(u.v[shifted_index(g, c, s.offsets[t], plan.stride)] - u.v[p]);
            m = std::max(m, d);
        }
        out[t] = m;
    });
}

// ---------------------------------------------------------------------------
// complex Hessian sweep
// ---------------------------------------------------------------------------

std::size_t herm_packed_size(int n) { return std::size_t(n) * (n + 1) / 2; }

namespace {

// d2u/dz_j dz_bar_k = 1/4 [ u_{x_j x_k} + u_{y_j y_k} + i (u_{x_j y_k} - u_{y_j x_k}) ]
// Central differences; pure second along the diagonal, cross terms otherwise.
struct HessCtx {
    const TorusGrid& g;
    const std::vector<double>& u;
    std::vector<long long> stride;
    double inv_h2, inv_4h2;

    HessCtx(const TorusGrid& grid, const std::vector<double>& vals)
        : g(grid), u(vals) {
        const int d = g.dims();
        stride.assign(std::size_t(d), 1);
        for (int a = d - 2; a >= 0; --a)
            stride[std::size_t(a)] = stride[std::size_t(a) + 1] * g.N;
        inv_h2 = 1.0 / (g.h * g.h);
        inv_4h2 = 0.25 * inv_h2;
    }

    std::size_t shift1(const int* c, int axis, int step) const {
        long long q = 0;
        for (int a = 0; a < g.dims(); ++a) {
            int ci = c[a] + (a == axis ? step : 0);
            if (g.periodic()) {
                ci %= g.N;
                if (ci < 0) ci += g.N;
            }
            q += ci * stride[std::size_t(a)];
        }
        return std::size_t(q);
    }
    std::size_t shift2(const int* c, int a1, int s1, int a2, int s2) const {
        long long q = 0;
        for (int a = 0; a < g.dims(); ++a) {
            int ci = c[a] + (a == a1 ? s1 : 0) + (a == a2 ? s2 : 0);
            if (g.periodic()) {
                ci %= g.N;
                if (ci < 0) ci += g.N;
            }
            q += ci * stride[std::size_t(a)];
        }
        return std::size_t(q);
    }

    double dxx(const int* c, std::size_t p, int axis) const {
        return (u[shift1(c, axis, +1)] - 2.0 * u[p] + u[shift1(c, axis, -1)]) * inv_h2;
    }
    double dxy(const int* c, int a1, int a2) const {
        return (u[shift2(c, a1, +1, a2, +1)] - u[shift2(c, a1, +1, a2, -1)] -
                u[shift2(c, a1, -1, a2, +1)] + u[shift2(c, a1, -1, a2, -1)]) *
               inv_4h2;
    }

    void emit(std::size_t p, cplx* row) const {
        int c[2 * kMaxDim];
        g.decode(p, c);
        const int n = g.n;
        std::size_t t = 0;
        for (int j = 0; j < n; ++j) {
            for (int k = j; k < n; ++k, ++t) {
                const int xj = 2 * j, yj = 2 * j + 1;
                const int xk = 2 * k, yk = 2 * k + 1;
                double re, im;
                if (j == k) {
                    re = dxx(c, p, xj) + dxx(c, p, yj);
                    im = 0.0;
                } else {
                    re = dxy(c, xj, xk) + dxy(c, yj, yk);
                    im = dxy(c, xj, yk) - dxy(c, yj, xk);
                }
                row[t] = 0.25 * cplx(re, im);
            }
        }
    }
};

} // namespace

void hessian_sweep_serial(const ScalarField& u, std::vector<cplx>& out) {
    const TorusGrid& g = u.grid;
    const std::size_t m = herm_packed_size(g.n);
    out.assign(g.points() * m, cplx(0.0, 0.0));
    HessCtx ctx(g, u.v);
    for (std::size_t p = 0; p < g.points(); ++p) {
        if (!g.periodic() && !g.interior(p, 1)) continue;
        ctx.emit(p, out.data() + p * m);
    }
}

void hessian_sweep(const ScalarField& u, std::vector<cplx>& out, Exec exec) {
    if (exec == Exec::serial) {
        hessian_sweep_serial(u, out);
        return;
    }
    const TorusGrid& g = u.grid;
    const std::size_t m = herm_packed_size(g.n);
    out.assign(g.points() * m, cplx(0.0, 0.0));
    HessCtx ctx(g, u.v);
    par_for(g.points(), Exec::parallel, [&](std::size_t p) {
        if (!g.periodic() && !g.interior(p, 1)) return;
        ctx.emit(p, out.data() + p * m);
    });
}

double reduce_sum(std::span<const double> xs) { return pairwise_sum(xs); }

MinLoc reduce_min_serial(std::span<const double> xs) {
    MinLoc m{xs[0], 0};
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (xs[i] < m.value) m = {xs[i], i};
    return m;
}

MinLoc reduce_min(std::span<const double> xs, Exec exec) {
    if (exec == Exec::serial || xs.size() < 4096) return reduce_min_serial(xs);
    MinLoc global{xs[0], 0};
#pragma omp parallel
    {
        MinLoc local{xs[0], 0};
#pragma omp for schedule(static) nowait
        for (long long i = 0; i < (long long)xs.size(); ++i)
            if (xs[std::size_t(i)] < local.value ||
                (xs[std::size_t(i)] == local.value && std::size_t(i) < local.index))
                local = {xs[std::size_t(i)], std::size_t(i)};
#pragma omp critical
        {
            if (local.value < global.value ||
                (local.value == global.value && local.index < global.index))
                global = local;
        }
    }
    return global;
}

MinLoc reduce_max_serial(std::span<const double> xs) {
    MinLoc m{xs[0], 0};
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (xs[i] > m.value) m = {xs[i], i};
    return m;
}

MinLoc reduce_max(std::span<const double> xs, Exec exec) {
    if (exec == Exec::serial || xs.size() < 4096) return reduce_max_serial(xs);
    MinLoc global{xs[0], 0};
#pragma omp parallel
    {
        MinLoc local{xs[0], 0};
#pragma omp for schedule(static) nowait
        for (long long i = 0; i < (long long)xs.size(); ++i)
            if (xs[std::size_t(i)] > local.value ||
                (xs[std::size_t(i)] == local.value && std::size_t(i) < local.index))
                local = {xs[std::size_t(i)], std::size_t(i)};
#pragma omp critical
        {
            if (local.value > global.value ||
                (local.value == global.value && local.index < global.index))
                global = local;
        }
    }
    return global;
}

} // namespace mahl
