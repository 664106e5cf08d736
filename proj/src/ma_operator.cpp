#include "mahl/ma_operator.hpp"

#include <algorithm>
#include <cmath>

namespace mahl {

namespace {

// Unpack upper triangle to full row-major n x n.
void unpack(int n, const cplx* a, cplx* full) {
    std::size_t t = 0;
    for (int j = 0; j < n; ++j)
        for (int k = j; k < n; ++k, ++t) {
            full[std::size_t(j) * n + k] = a[t];
            full[std::size_t(k) * n + j] = std::conj(a[t]);
        }
}

// Cyclic Jacobi for complex Hermitian matrices; deterministic sweep order.
void jacobi_eigenvalues(int n, const cplx* a, double* eig) {
    cplx m[kMaxDim * kMaxDim];
    unpack(n, a, m);
    auto at = [&](int i, int j) -> cplx& { return m[std::size_t(i) * n + j]; };
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += std::norm(at(p, q));
        if (off < 1e-30) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                const cplx apq = at(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double app = at(p, p).real(), aqq = at(q, q).real();
                // phase to make the pivot real, then a real Jacobi rotation
                const cplx phase = apq / std::abs(apq);
                const double g = std::abs(apq);
                const double theta = 0.5 * std::atan2(2.0 * g, aqq - app);
                const double c = std::cos(theta), s = std::sin(theta);
                for (int k = 0; k < n; ++k) {
                    const cplx mkp = at(k, p), mkq = at(k, q);
                    at(k, p) = c * mkp - s * std::conj(phase) * mkq;
                    at(k, q) = s * phase * mkp + c * mkq;
                }
                for (int k = 0; k < n; ++k) {
                    const cplx mpk = at(p, k), mqk = at(q, k);
                    at(p, k) = c * mpk - s * phase * mqk;
                    at(q, k) = s * std::conj(phase) * mpk + c * mqk;
                }
            }
    }
    for (int i = 0; i < n; ++i) eig[i] = at(i, i).real();
    std::sort(eig, eig + n);
}

} // namespace

void herm_eigenvalues(int n, const cplx* a, double* eig) {
    if (n == 1) {
        eig[0] = a[0].real();
        return;
    }
    if (n == 2) {
        const double p = a[0].real(), q = a[2].real();
        const double tr = p + q;
        const double det = p * q - std::norm(a[1]);
        double disc = tr * tr - 4.0 * det;
        disc = disc > 0.0 ? std::sqrt(disc) : 0.0;
        eig[0] = 0.5 * (tr - disc);
        eig[1] = 0.5 * (tr + disc);
        return;
    }
    jacobi_eigenvalues(n, a, eig);
}

HermitianField complex_hessian(const ScalarField& u, Exec exec) {
    if (u.grid.N < 8) throw InvalidResolution("grid too coarse for the Hessian stencil");
    HermitianField H;
    H.grid = u.grid;
    H.n = u.grid.n;
    hessian_sweep(u, H.packed, exec);
    return H;
}

namespace {

struct EigScan {
    std::vector<double> density;   // det(g+H)/det g, possibly clamped
    std::vector<double> min_eig;   // raw min eigenvalue of g+H
    std::size_t violations = 0;
};

EigScan scan_metric_eigenvalues(const HermitianField& H, const KahlerBackground& bg,
                                bool clamp_negative, Exec exec) {
    const int n = H.n;
    const std::size_t total = H.grid.points();
    EigScan out;
    out.density.assign(total, 1.0);
    out.min_eig.assign(total, 1e300);
    std::vector<std::uint8_t> violated(total, 0);
    par_for(total, exec, [&](std::size_t p) {
        if (!H.grid.periodic() && !H.grid.interior(p, 1)) {
            // off-interior patch points stay at the background metric
            double eig[kMaxDim];
            cplx gm[kMaxDim * (kMaxDim + 1) / 2];
            std::size_t t = 0;
            for (int j = 0; j < n; ++j)
                for (int k = j; k < n; ++k, ++t) gm[t] = bg.gij(j, k);
            herm_eigenvalues(n, gm, eig);
            out.min_eig[p] = eig[0];
            double det = 1.0;
            for (int i = 0; i < n; ++i) det *= eig[i];
            out.density[p] = det / bg.det_g;
            return;
        }
        cplx a[kMaxDim * (kMaxDim + 1) / 2];
        const cplx* hp = H.row(p);
        std::size_t t = 0;
        for (int j = 0; j < n; ++j)
            for (int k = j; k < n; ++k, ++t) a[t] = bg.gij(j, k) + hp[t];
        double eig[kMaxDim];
        herm_eigenvalues(n, a, eig);
        out.min_eig[p] = eig[0];
        double det = 1.0;
        for (int i = 0; i < n; ++i) {
            double e = eig[i];
            if (e < 0.0) {
                violated[p] = 1;
                if (clamp_negative) e = 0.0;
            }
            det *= e;
        }
        out.density[p] = det / bg.det_g;
    });
    for (std::size_t p = 0; p < total; ++p) out.violations += violated[p];
    return out;
}

} // namespace

MAReport ma_density(const ScalarField& u, const KahlerBackground& bg, bool clamp,
                    double tol_psh, Exec exec) {
    if (tol_psh < 0.0) tol_psh = 10.0 * u.grid.h * u.grid.h;
    HermitianField H = complex_hessian(u, exec);
    EigScan scan = scan_metric_eigenvalues(H, bg, clamp, exec);
    MinLoc worst = reduce_min(scan.min_eig, exec);
    if (!clamp && worst.value < -tol_psh)
        throw NotOmegaPsh("input is not omega-psh (min eigenvalue " +
                              std::to_string(worst.value) + " at point " +
                              std::to_string(worst.index) + ")",
                          worst.value, worst.index);
    MAReport rep;
    rep.density = ScalarField(u.grid, std::move(scan.density));
    rep.min_eigenvalue = worst.value;
    rep.worst_point = worst.index;
    rep.psh_violations = scan.violations;
    rep.clamped = clamp;
    return rep;
}

PshCheck is_omega_psh(const ScalarField& u, const KahlerBackground& bg, double tol,
                      Exec exec) {
    HermitianField H = complex_hessian(u, exec);
    EigScan scan = scan_metric_eigenvalues(H, bg, true, exec);
    MinLoc worst = reduce_min(scan.min_eig, exec);
    return PshCheck{worst.value >= -tol, worst.value, worst.index};
}

ComparisonReport comparison_check(const ScalarField& u, const ScalarField& v,
                                  const KahlerBackground& bg, double s,
                                  double tol_mass) {
    if (!(u.grid == v.grid)) throw GridMismatch("comparison_check: grids differ");
    if (tol_mass < 0.0) tol_mass = 10.0 * u.grid.h * u.grid.h;
    MAReport mu = ma_density(u, bg, false);
    MAReport mv = ma_density(v, bg, false);
    const std::size_t total = u.size();
    std::vector<double> wu(total, 0.0), wv(total, 0.0);
    std::size_t count = 0;
    for (std::size_t p = 0; p < total; ++p) {
        if (u.v[p] > v.v[p] + s) {
            wu[p] = mu.density.v[p];
            wv[p] = mv.density.v[p];
            ++count;
        }
    }
    ComparisonReport rep;
    const double w = u.grid.cell_volume() * bg.det_g;
    rep.mass_u = pairwise_sum(wu) * w;
    rep.mass_v = pairwise_sum(wv) * w;
    rep.set_points = count;
    rep.tol_mass = tol_mass;
    rep.holds = rep.mass_u <= rep.mass_v + tol_mass;
    return rep;
}

ProductPotential product_potential(const ScalarField& u1, const ScalarField& u2) {
    const TorusGrid& g1 = u1.grid;
    const TorusGrid& g2 = u2.grid;
    if (!g1.periodic() || !g2.periodic())
        throw GridMismatch("product_potential requires periodic factors");
    if (g1.N != g2.N)
        throw GridMismatch("product_potential: factor resolutions differ");
    const int n1 = g1.n, n2 = g2.n, n = n1 + n2;
    if (n > kMaxDim) throw InvalidResolution("product dimension exceeds kMaxDim");

    // binomial(n1+n2, n1)
    double binom = 1.0;
    for (int i = 1; i <= n1; ++i) binom = binom * (n2 + i) / i;
    const double scale = std::pow(binom, -1.0 / double(n));

    TorusGrid g = make_grid(n, g1.N, GridKind::periodic);
    std::vector<double> vals(g.points());
    // product index: axes (x1..y_{n1}) from u1, the rest from u2
    const std::size_t pts2 = g2.points();
    par_for(g.points(), default_exec(), [&](std::size_t p) {
        std::size_t i2 = p % pts2;
        std::size_t i1 = p / pts2;
        vals[p] = scale * (u1.v[i1] + u2.v[i2]);
    });

    ProductPotential out;
    out.u = ScalarField(g, std::move(vals));
    std::vector<double> diag(std::size_t(n), scale);
    out.bg = diagonal_background(n, diag);
    return out;
}

} // namespace mahl
