#include "mahl/corpus.hpp"
#include "mahl/fft_poisson.hpp"

#include <algorithm>
#include <cmath>

namespace mahl {

ScalarField random_trig_field(const TorusGrid& g, Rng& rng, int kmax, double amp) {
    FieldDescriptor d;
    d.kind = "trig";
    const int modes = 4 + int(rng.below(4));
    for (int m = 0; m < modes; ++m) {
        FieldDescriptor::Mode mode;
        mode.amp = amp * rng.uniform(0.2, 1.0);
        mode.k.resize(std::size_t(g.dims()));
        bool nonzero = false;
        for (int a = 0; a < g.dims(); ++a) {
            mode.k[std::size_t(a)] = int(rng.below(std::uint64_t(2 * kmax + 1))) - kmax;
            if (mode.k[std::size_t(a)] != 0) nonzero = true;
        }
        if (!nonzero) mode.k[0] = 1;
        mode.phase = rng.uniform(0.0, 6.283185307179586);
        d.modes.push_back(std::move(mode));
    }
    return sample_field(g, d);
}

namespace {

double min_hessian_eigenvalue(const ScalarField& u) {
    HermitianField H = complex_hessian(u);
    const int n = u.grid.n;
    double worst = 1e300;
    for (std::size_t p = 0; p < u.grid.points(); ++p) {
        if (!u.grid.periodic() && !u.grid.interior(p, 1)) continue;
        double eig[kMaxDim];
        herm_eigenvalues(n, H.row(p), eig);
        worst = std::min(worst, eig[0]);
    }
    return worst;
}

double min_laplacian(const ScalarField& u) {
    ScalarField lap = SpectralPoisson::apply_laplacian(u);
    double worst = 1e300;
    for (std::size_t p = 0; p < u.size(); ++p) {
        if (!u.grid.periodic() && !u.grid.interior(p, 1)) continue;
        worst = std::min(worst, lap.v[p]);
    }
    return worst;
}

ScalarField smooth_pole_seed(const TorusGrid& g, Rng& rng) {
    FieldDescriptor pole;
    pole.kind = "smooth_log_pole";
    pole.eps = rng.uniform(0.05, 0.12);
    pole.weight = rng.uniform(0.5, 1.5);
    pole.center.resize(std::size_t(g.dims()));
    for (int a = 0; a < g.dims(); ++a) {
        // snap pole centers to the grid so concentration points are indexable
        const int c = int(rng.below(std::uint64_t(g.N)));
        pole.center[std::size_t(a)] = g.coord(c);
    }
    return sample_field(g, pole);
}

} // namespace

std::vector<ScalarField> corpus_omega_psh(const TorusGrid& g, const KahlerBackground& bg,
                                          int count, std::uint64_t seed, double margin,
                                          double subharmonic_defect) {
    (void)bg; // flat identity backgrounds only; the cone scaling measures H directly
    Rng rng(seed);
    std::vector<ScalarField> out;
    while (int(out.size()) < count) {
        const int variant = int(out.size()) % 3;
        ScalarField seed_field =
            variant == 0   ? random_trig_field(g, rng, 2, 1.0)
            : variant == 1 ? smooth_pole_seed(g, rng)
                           : [&] {
                                 ScalarField a = random_trig_field(g, rng, 1, 0.7);
                                 ScalarField b = smooth_pole_seed(g, rng);
                                 std::vector<double> v(a.size());
                                 for (std::size_t i = 0; i < v.size(); ++i)
                                     v[i] = a.v[i] + b.v[i];
                                 return ScalarField(g, std::move(v));
                             }();
        const double m = min_hessian_eigenvalue(seed_field);
        double s = m < 0.0 ? (1.0 - margin) / std::abs(m) : 1.0;
        if (subharmonic_defect >= 0.0) {
            const double lap_min = min_laplacian(seed_field);
            if (lap_min < 0.0)
                s = std::min(s, 4.0 * g.n * subharmonic_defect / std::abs(lap_min));
        }
        std::vector<double> v(seed_field.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = s * seed_field.v[i];
        out.emplace_back(g, std::move(v));
    }
    return out;
}

std::vector<ScalarField> corpus_psh_patch(const TorusGrid& g, int count,
                                          std::uint64_t seed, double margin) {
    if (g.periodic())
        throw GridMismatch("genuinely psh corpora need patch grids");
    Rng rng(seed);
    std::vector<ScalarField> out;
    FieldDescriptor quad;
    quad.kind = "dist_power";
    quad.exponent = 2.0;
    ScalarField d2 = sample_field(g, quad);
    while (int(out.size()) < count) {
        ScalarField base = random_trig_field(g, rng, 2, 0.5);
        const double m = min_hessian_eigenvalue(base);
        // add c |z|^2 to push H(u) above margin (H(|z|^2) = I)
        const double c = std::max(0.0, -m) + margin;
        std::vector<double> v(base.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = base.v[i] + c * d2.v[i];
        out.emplace_back(g, std::move(v));
    }
    return out;
}

std::vector<ScalarField> corpus_c2(const TorusGrid& g, int count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<ScalarField> out;
    for (int i = 0; i < count; ++i) out.push_back(random_trig_field(g, rng, 3, 0.8));
    return out;
}

std::vector<ScalarField> corpus_psh01(const TorusGrid& g, int count, std::uint64_t seed) {
    std::vector<ScalarField> raw = corpus_psh_patch(g, count, seed, 0.05);
    for (ScalarField& u : raw) {
        const double lo = u.inf(), hi = u.sup();
        const double scale = hi > lo ? 1.0 / (hi - lo) : 1.0;
        for (double& x : u.v) x = (x - lo) * scale;
    }
    return raw;
}

std::vector<ScalarField> corpus_log_poles(const TorusGrid& g,
                                          const std::vector<std::size_t>& centers,
                                          double moll_scale) {
    std::vector<ScalarField> out;
    FieldDescriptor quad;
    quad.kind = "dist_power";
    quad.exponent = 2.0;
    ScalarField d2 = sample_field(g, quad);
    for (std::size_t c : centers) {
        double xc[2 * kMaxDim];
        g.point(c, xc);
        FieldDescriptor pole;
        pole.kind = "smooth_log_pole";
        pole.eps = moll_scale;
        pole.weight = 1.0;
        pole.center.assign(xc, xc + g.dims());
        ScalarField u = sample_field(g, pole);
        // patch psh-ness restored with a quadratic cushion
        const double m = min_hessian_eigenvalue(u);
        const double cush = std::max(0.0, -m) + 0.02;
        for (std::size_t i = 0; i < u.size(); ++i) u.v[i] += cush * d2.v[i];
        out.push_back(std::move(u));
    }
    return out;
}

} // namespace mahl
