#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mahl/corpus.hpp"
#include "mahl/solver.hpp"

#include <cmath>
#include <numbers>

using namespace mahl;

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;

ScalarField normalized_density(const TorusGrid& g, const FieldDescriptor& d) {
    ScalarField f = sample_field(g, d);
    for (double& x : f.v) x = std::max(x, 0.0);
    const double mass = f.integral();
    for (double& x : f.v) x /= mass;
    return f;
}
} // namespace

TEST_CASE("poisson fft closed forms") {
    TorusGrid g = make_grid(1, 256, GridKind::periodic);
    SpectralPoisson sp(g);

    // zero in, zero out
    ScalarField z = sp.solve_poisson(ScalarField::constant(g, 0.0));
    CHECK(std::abs(z.sup()) <= 1e-14);
    CHECK(std::abs(z.inf()) <= 1e-14);

    // cos(2 pi x) is an eigenfunction: u = -cos(2 pi x)/(4 pi^2) up to the
    // O(h^2) symbol deviation, and Delta_h u = g to machine precision
    FieldDescriptor d;
    d.kind = "trig";
    d.modes.push_back({1.0, {1, 0}, 0.0});
    ScalarField rhs = sample_field(g, d);
    ScalarField u = sp.solve_poisson(rhs);
    double x[2];
    double worst_analytic = 0.0;
    for (std::size_t i = 0; i < g.points(); ++i) {
        g.point(i, x);
        const double analytic = -std::cos(two_pi * x[0]) / (4.0 * std::numbers::pi *
                                                            std::numbers::pi);
        worst_analytic = std::max(worst_analytic, std::abs(u.v[i] - analytic));
    }
    CHECK(worst_analytic <= 1e-4); // h^2-level symbol deviation at N=256
    ScalarField lap = SpectralPoisson::apply_laplacian(u);
    double worst_exact = 0.0;
    for (std::size_t i = 0; i < g.points(); ++i)
        worst_exact = std::max(worst_exact, std::abs(lap.v[i] - rhs.v[i]));
    CHECK(worst_exact <= 1e-10);

    // random mean-zero rhs: exact discrete inversion
    Rng rng(5);
    std::vector<double> rv(g.points());
    for (double& v : rv) v = rng.uniform(-1.0, 1.0);
    const double mean = pairwise_sum(rv) / double(rv.size());
    for (double& v : rv) v -= mean;
    ScalarField rrand(g, std::move(rv));
    ScalarField urand = sp.solve_poisson(rrand);
    ScalarField lap2 = SpectralPoisson::apply_laplacian(urand);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.points(); ++i)
        worst = std::max(worst, std::abs(lap2.v[i] - rrand.v[i]));
    CHECK(worst <= 1e-10);
    CHECK(std::abs(urand.mean()) <= 1e-12);

    CHECK_THROWS_AS(sp.solve_poisson(ScalarField::constant(g, 0.5)), NonzeroMean);
}

TEST_CASE("solve_ma trivial and linear cases") {
    TorusGrid g = make_grid(1, 128, GridKind::periodic);
    KahlerBackground bg = flat_background(1);

    // f = 1: u = 0 after the initial check
    SolveResult flat = solve_ma(ScalarField::constant(g, 1.0), bg, {});
    CHECK(flat.iterations == 0);
    CHECK(flat.u.sup() == 0.0);
    CHECK(std::abs(flat.u.inf()) <= 1e-12);

    // n=1: the discrete equation is affine, the FFT oracle is exact
    FieldDescriptor d;
    d.kind = "trig";
    d.modes.push_back({0.3, {1, 0}, 0.0});
    FieldDescriptor one;
    one.kind = "constant";
    one.value = 1.0;
    FieldDescriptor fd;
    fd.kind = "sum";
    fd.terms = {one, d};
    ScalarField f = normalized_density(g, fd);
    SolveResult sol = solve_ma(f, bg, {});
    CHECK(sol.residual <= 10.0 * g.h * g.h);
    CHECK(sol.psh_certificate >= -10.0 * g.h * g.h);
    CHECK(sol.u.sup() == 0.0);

    std::vector<double> rhs(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) rhs[i] = 4.0 * (f.v[i] - 1.0);
    const double mean = pairwise_sum(rhs) / double(rhs.size());
    for (double& v : rhs) v -= mean;
    ScalarField oracle = solve_poisson_fft(ScalarField(g, std::move(rhs)));
    const double shift = oracle.sup();
    double worst = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        worst = std::max(worst, std::abs(sol.u.v[i] - (oracle.v[i] - shift)));
    CHECK(worst <= 10.0 * g.h * g.h);

    // mass mismatch rejected
    ScalarField bad = ScalarField::constant(g, 0.9);
    CHECK_THROWS_AS(solve_ma(bad, bg, {}), MassMismatch);

    // density vanishing on most of the torus rejected
    std::vector<double> dead(g.points(), 0.0);
    for (std::size_t i = 0; i < g.points() / 4; ++i) dead[i] = 4.0;
    CHECK_THROWS_AS(solve_ma(ScalarField(g, std::move(dead)), bg, {}),
                    DegenerateDensity);
}

TEST_CASE("solve_ma equivariance under translation") {
    TorusGrid g = make_grid(1, 64, GridKind::periodic);
    KahlerBackground bg = flat_background(1);
    FieldDescriptor peak;
    peak.kind = "dist_power";
    peak.exponent = -0.8;
    peak.r_floor = 2.0 * g.h;
    peak.center = {0.25, 0.5};
    ScalarField f1 = normalized_density(g, peak);
    peak.center = {0.75, 0.5}; // translate by half a period in x
    ScalarField f2 = normalized_density(g, peak);

    SolveResult s1 = solve_ma(f1, bg, {});
    SolveResult s2 = solve_ma(f2, bg, {});
    const int shift = g.N / 2;
    double worst = 0.0;
    int c[2];
    for (std::size_t i = 0; i < g.points(); ++i) {
        g.decode(i, c);
        c[0] = (c[0] + shift) % g.N;
        worst = std::max(worst, std::abs(s1.u.v[i] - s2.u.v[g.encode(c)]));
    }
    CHECK(worst <= 20.0 * g.h * g.h);
}

TEST_CASE("lp norms") {
    TorusGrid g = make_grid(1, 64, GridKind::periodic);
    CHECK(lp_norm(ScalarField::constant(g, 1.0), 3.0) ==
          doctest::Approx(1.0).epsilon(1e-12));

    // indicator of half the torus, p = 2: (1/2)^{1/2}
    std::vector<double> half(g.points(), 0.0);
    int c[2];
    for (std::size_t i = 0; i < g.points(); ++i) {
        g.decode(i, c);
        if (c[0] < g.N / 2) half[i] = 1.0;
    }
    CHECK(lp_norm(ScalarField(g, std::move(half)), 2.0) ==
          doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));

    // clipped radial density: lambda p < 2n converges, stable as the clip
    // floor descends (floors stay above the grid scale)
    TorusGrid gf = make_grid(1, 128, GridKind::periodic);
    FieldDescriptor d;
    d.kind = "dist_power";
    d.exponent = -0.75;
    std::vector<double> values;
    for (double floor : {0.08, 0.04, 0.02}) {
        d.r_floor = floor;
        values.push_back(lp_norm(sample_field(gf, d), 2.0));
    }
    CHECK(std::abs(values[2] - values[1]) <= std::abs(values[1] - values[0]));
    CHECK(std::abs(values[2] - values[1]) <= 0.05 * values[2]);
}

TEST_CASE("theorem-a pipeline smoke (smooth entry)") {
    TorusGrid g = make_grid(1, 64, GridKind::periodic);
    FieldDescriptor one;
    one.kind = "constant";
    one.value = 1.0;
    std::vector<TheoremAEntry> family = {{"uniform", one, 2.0}};
    auto rows = theorem_a_experiment(g, family, {});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].bound == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(rows[0].capped);             // smooth solution, fit capped at 1
    CHECK(rows[0].fitted_alpha == 1.0);
    CHECK(rows[0].fitted_alpha >= 0.9 * rows[0].bound);
}

TEST_CASE("lp property experiment composes") {
    TorusGrid g = make_grid(1, 64, GridKind::periodic);
    KahlerBackground bg = flat_background(1);

    // psi = 0, f = 1: the solution is 0
    LpPropertyResult base = lp_property_experiment(
        ScalarField::constant(g, 0.0), ScalarField::constant(g, 1.0), 2.0, bg, {});
    CHECK(std::abs(base.solve.u.inf()) <= 1e-12);
    CHECK(base.fit.capped);

    // psi from a singular solve, f a bounded weight (the convexity case)
    FieldDescriptor d;
    d.kind = "dist_power";
    d.exponent = -1.0;
    d.r_floor = 2.0 * g.h;
    ScalarField fsing = normalized_density(g, d);
    SolveResult psi = solve_ma(fsing, bg, {});
    // weight 0 <= f <= 2^{n-1} = 1 against MA(psi), renormalized
    FieldDescriptor w;
    w.kind = "trig";
    w.value = 1.0;
    w.modes.push_back({0.4, {0, 1}, 0.3});
    ScalarField weight = sample_field(g, w);
    MAReport mpsi = ma_density(psi.u, bg, false);
    std::vector<double> prod(weight.size());
    for (std::size_t i = 0; i < prod.size(); ++i)
        prod[i] = weight.v[i] * mpsi.density.v[i];
    const double mass = ScalarField(g, prod).integral();
    for (double& v : weight.v) v /= mass;
    LpPropertyResult res = lp_property_experiment(psi.u, weight, 2.0, bg, {});
    CHECK(res.solve.residual <= 10.0 * g.h * g.h);
    CHECK(res.fit.alpha > 0.0);
}

TEST_CASE("singular measure solve") {
    TorusGrid g = make_grid(1, 128, GridKind::periodic);
    KahlerBackground bg = flat_background(1);

    // atoms rejected up front
    GridMeasure atomic = GridMeasure::with_atoms(
        ScalarField::constant(g, 0.5), {{g.points() / 2, 0.5}});
    CHECK_THROWS_AS(singular_measure_solve(atomic, bg, {}), HInfinityFailed);

    // smoothed measure on a circle: H(infinity) passes, exponent finite,
    // cross-checked against the FFT oracle (n = 1 linearity)
    FieldDescriptor ring;
    ring.kind = "ring";
    ring.radius = 0.2;
    ring.width = 3.0 * g.h;
    ring.center = {0.5, 0.5};
    ScalarField rf = sample_field(g, ring);
    const double mass = rf.integral();
    for (double& v : rf.v) v /= mass;
    GridMeasure mu = GridMeasure::from_density(rf);
    SingularSolveResult res = singular_measure_solve(mu, bg, {});
    CHECK(res.solve.residual <= 10.0 * g.h * g.h);
    CHECK(res.fit.alpha > 0.3);
    CHECK(res.measured_b > 0.5);

    std::vector<double> rhs(rf.size());
    for (std::size_t i = 0; i < rf.size(); ++i) rhs[i] = 4.0 * (rf.v[i] - 1.0);
    const double mean = pairwise_sum(rhs) / double(rhs.size());
    for (double& v : rhs) v -= mean;
    ScalarField oracle = solve_poisson_fft(ScalarField(g, std::move(rhs)));
    const double shift = oracle.sup();
    double worst = 0.0;
    for (std::size_t i = 0; i < rf.size(); ++i)
        worst = std::max(worst, std::abs(res.solve.u.v[i] - (oracle.v[i] - shift)));
    CHECK(worst <= 10.0 * g.h * g.h);
}

TEST_CASE("oracle equivalence over random densities") {
    TorusGrid g = make_grid(1, 128, GridKind::periodic);
    KahlerBackground bg = flat_background(1);
    Rng rng(99);
    for (int trial = 0; trial < 5; ++trial) {
        ScalarField noise = random_trig_field(g, rng, 3, 0.15);
        std::vector<double> fv(noise.size());
        for (std::size_t i = 0; i < fv.size(); ++i) fv[i] = 1.0 + noise.v[i];
        ScalarField f(g, std::move(fv));
        CHECK(f.inf() > 0.0);
        const double mass = f.integral();
        for (double& v : f.v) v /= mass;

        SolveResult sol = solve_ma(f, bg, {});
        std::vector<double> rhs(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) rhs[i] = 4.0 * (f.v[i] - 1.0);
        const double mean = pairwise_sum(rhs) / double(rhs.size());
        for (double& v : rhs) v -= mean;
        ScalarField oracle = solve_poisson_fft(ScalarField(g, std::move(rhs)));
        const double shift = oracle.sup();
        double worst = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i)
            worst = std::max(worst, std::abs(sol.u.v[i] - (oracle.v[i] - shift)));
        CHECK(worst <= 10.0 * g.h * g.h);
        CHECK(sol.monotone_after_10);
    }
}
