#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mahl/corpus.hpp"
#include "mahl/holder_metrics.hpp"
#include "mahl/radial_toric.hpp"
#include "mahl/solver.hpp"

#include <cmath>

using namespace mahl;

TEST_CASE("modulus of continuity closed forms") {
    TorusGrid g = make_grid(1, 128, GridKind::periodic);
    auto ladder = default_modulus_ladder(g);

    // constants: all zeros
    ModulusTable zt = modulus_of_continuity(ScalarField::constant(g, 2.0), ladder);
    for (double w : zt.omega) CHECK(w == 0.0);

    // dist^{1/2}: omega(r) = r^{1/2} at grid resolution
    FieldDescriptor d;
    d.kind = "dist_power";
    d.exponent = 0.5;
    ScalarField u = sample_field(g, d);
    ModulusTable t = modulus_of_continuity(u, ladder);
    for (std::size_t i = 0; i < t.r.size(); ++i) {
        CHECK(t.omega[i] <= std::pow(t.r[i], 0.5) + 1e-12);
        CHECK(t.omega[i] >= std::pow(t.r[i] - 2.0 * g.h, 0.5) - 1e-12);
    }

    // Lipschitz bound for a trig field
    Rng rng(8);
    ScalarField trig = random_trig_field(g, rng, 2, 0.5);
    // crude Lipschitz constant from the max gradient of modes: sum |amp| 2 pi |k|
    ModulusTable lt = modulus_of_continuity(trig, ladder);
    for (std::size_t i = 1; i < lt.r.size(); ++i)
        CHECK(lt.omega[i] <= 60.0 * lt.r[i]);

    CHECK_THROWS_AS(modulus_of_continuity(u, {0.5 * g.h}), LadderOutOfRange);
    CHECK_THROWS_AS(modulus_of_continuity(u, {0.9}), LadderOutOfRange);
}

TEST_CASE("holder fit estimator soundness") {
    TorusGrid g = make_grid(1, 256, GridKind::periodic);
    auto ladder = default_modulus_ladder(g);
    for (double a : {0.25, 0.5, 0.75, 1.0}) {
        FieldDescriptor d;
        d.kind = "dist_power";
        d.exponent = a;
        HolderFit fit = holder_fit(sample_field(g, d), ladder);
        CHECK(std::abs(fit.alpha - a) <= 0.05);
    }

    // smooth fields cap at 1 with the flag set
    FieldDescriptor s;
    s.kind = "trig";
    s.modes.push_back({0.5, {1, 0}, 0.1});
    HolderFit smooth = holder_fit(sample_field(g, s), ladder);
    CHECK(smooth.capped);
    CHECK(smooth.alpha == 1.0);
}

TEST_CASE("example 5.5 potential: drift flag") {
    TorusGrid g = make_grid(1, 256, GridKind::periodic);
    FieldDescriptor d;
    d.kind = "radial_chi";
    d.profile = {{"kind", "example55"}};
    // chi(-inf) = 0: the profile evaluates finitely at the pole, no clip
    ScalarField u = sample_field(g, d);
    HolderFit fit = holder_fit(u, default_modulus_ladder(g, 12));
    CHECK(fit.drift_flag);     // window slopes collapse toward zero
    CHECK(fit.alpha <= 0.45);  // far from any honest Hoelder exponent
}

TEST_CASE("exceptional sets") {
    TorusGrid g = make_grid(1, 128, GridKind::periodic);
    KernelSpec kernel = normalize_kernel(1);
    KahlerBackground bg = flat_background(1);

    // constants: empty for every (delta, alpha)
    ExceptionalSet es =
        exceptional_set(ScalarField::constant(g, 1.0), 0.05, 0.5, kernel);
    CHECK(es.volume_fraction == 0.0);

    auto corpus = corpus_omega_psh(g, bg, 3, 55);
    // Chebyshev link: volume(E) <= l1_gap / delta^alpha, exact inequality
    for (const auto& u : corpus) {
        for (double delta : {0.03, 0.06, 0.1}) {
            const double alpha = 0.8;
            ExceptionalSet e = exceptional_set(u, delta, alpha, kernel);
            const double gap = l1_gap(u, delta, kernel);
            CHECK(e.volume_fraction <= gap / std::pow(delta, alpha) + 1e-15);
        }
    }

    // alpha < 2: volume fraction decays along the delta ladder at rate
    // >= delta^{2-alpha} (Chebyshev from the quadratic gap)
    {
        const ScalarField& u = corpus[0];
        const double alpha = 0.5;
        const double v_big = exceptional_set(u, 0.1, alpha, kernel).volume_fraction;
        const double v_small = exceptional_set(u, 0.025, alpha, kernel).volume_fraction;
        CHECK(v_small <= std::max(v_big * std::pow(0.25, 2.0 - alpha) * 4.0, 1e-12));
    }

    // alpha > 2: the quadratic gap exceeds delta^alpha at small delta
    {
        FieldDescriptor d2;
        d2.kind = "smooth_dist2";
        d2.coef = 0.5;
        d2.center = {0.5, 0.5};
        ScalarField u = sample_field(g, d2);
        ExceptionalSet e = exceptional_set(u, 0.03, 2.5, kernel);
        CHECK(e.volume_fraction > 0.0);
    }
}

TEST_CASE("characterization test (thm 4.3 iii)") {
    TorusGrid p = make_grid(1, 128, GridKind::patch);
    std::vector<double> deltas = geometric_ladder(0.08, 3.0 * p.h, 5);

    // chart K: the centered half-width-0.25 square
    std::vector<std::uint8_t> K(p.points(), 0);
    double x[2];
    for (std::size_t i = 0; i < K.size(); ++i) {
        p.point(i, x);
        if (std::abs(x[0]) <= 0.25 && std::abs(x[1]) <= 0.25) K[i] = 1;
    }

    // uniform measure, u = |z|^2: the left side is c delta^2 mu(K)
    GridMeasure uniform = GridMeasure::from_density(ScalarField::constant(p, 1.0));
    FieldDescriptor d2;
    d2.kind = "dist_power";
    d2.exponent = 2.0;
    std::vector<ScalarField> quad = {sample_field(p, d2)};
    CharIIIResult r = char_iii_test(quad, uniform, K, deltas);
    CHECK(r.alpha == doctest::Approx(2.0).epsilon(0.05));
    CHECK(r.pass);

    // constants impose no constraint
    std::vector<ScalarField> consts = {ScalarField::constant(p, 1.0)};
    CHECK_THROWS_AS(char_iii_test(consts, uniform, K, deltas), DegenerateFamily);

    // atomic measure vs sharpening log poles: fitted exponent collapses
    int cc[2] = {p.N / 2, p.N / 2};
    const std::size_t center = p.encode(cc);
    GridMeasure atomic = GridMeasure::with_atoms(
        ScalarField::constant(p, 0.5), {{center, 0.5}});
    std::vector<CharIIIResult> ladder;
    for (double m0 : {8.0 * p.h, 4.0 * p.h, 2.0 * p.h}) {
        auto poles = corpus_log_poles(p, {center}, m0);
        ladder.push_back(char_iii_test(poles, atomic, K, deltas));
    }
    CHECK(ladder[2].alpha < ladder[0].alpha);
    CHECK(char_iii_verdict(ladder) == Verdict::FAIL);

    // the same sharpening ladder on the uniform measure stays PASS
    std::vector<CharIIIResult> uladder;
    for (double m0 : {8.0 * p.h, 4.0 * p.h, 2.0 * p.h}) {
        auto poles = corpus_log_poles(p, {center}, m0);
        uladder.push_back(char_iii_test(poles, uniform, K, deltas));
    }
    CHECK(char_iii_verdict(uladder) == Verdict::PASS);
}

TEST_CASE("dim1 equivalences") {
    TorusGrid g = make_grid(1, 128, GridKind::periodic);
    KahlerBackground bg = flat_background(1);
    std::vector<double> ladder = geometric_ladder(3.0 * g.h, 0.12, 6);

    // phi = 0: uniform measure, all three PASS
    GridMeasure uniform = GridMeasure::from_density(ScalarField::constant(g, 1.0));
    Dim1Report flat = dim1_equivalence(ScalarField::constant(g, 0.0), uniform, ladder);
    CHECK(flat.verdict == Verdict::PASS);

    // singular-but-Hoelder solution: solve MA(phi) = c dist^{-lambda}
    FieldDescriptor d;
    d.kind = "dist_power";
    d.exponent = -1.2;
    d.r_floor = 2.0 * g.h;
    d.center = {0.5, 0.5};
    ScalarField f = sample_field(g, d);
    const double mass = f.integral();
    for (double& v : f.v) v /= mass;
    SolveResult sol = solve_ma(f, bg, {});
    MAReport ma = ma_density(sol.u, bg, false);
    Dim1Report rep = dim1_equivalence(sol.u, GridMeasure::from_density(ma.density), ladder);
    CHECK(rep.verdict == Verdict::PASS);
    CHECK(rep.holder.alpha > 0.3);
    CHECK(rep.ball_mass_alpha > 0.3);
    CHECK(rep.shell_alpha > 0.3);

    // atomic measure with the clipped pole: consistent FAIL
    int cc[2] = {g.N / 2, g.N / 2};
    const std::size_t center = g.encode(cc);
    FieldDescriptor pole;
    pole.kind = "log_dist";
    pole.center = {0.5, 0.5};
    pole.floor = -30.0; // deep clip: modulus is flat at every ladder scale
    ScalarField phi = sample_field(g, pole);
    GridMeasure atomic =
        GridMeasure::with_atoms(ScalarField::constant(g, 0.5), {{center, 0.5}});
    Dim1Report bad = dim1_equivalence(phi, atomic, ladder);
    CHECK(bad.verdict == Verdict::FAIL);
}

TEST_CASE("remark 4.2 growth equivalences") {
    TorusGrid p = make_grid(1, 512, GridKind::patch);
    int cc[2] = {p.N / 2, p.N / 2};
    const std::size_t center = p.encode(cc);
    std::vector<double> ladder = geometric_ladder(16.0 * p.h, 0.24, 6);

    // dist^a: all three exponents agree within the 0.1 band
    for (double a : {0.5, 0.75}) {
        FieldDescriptor d;
        d.kind = "dist_power";
        d.exponent = a;
        Remark42Report rep = remark_4_2_checks(sample_field(p, d), center, ladder);
        CHECK(rep.sup_alpha == doctest::Approx(a).epsilon(0.1 / a));
        CHECK(rep.consistent);
    }

    // harmonic: Laplacian mass ~ 0, smooth growth fits >= 1
    std::vector<double> h(p.points());
    double x[2];
    for (std::size_t i = 0; i < h.size(); ++i) {
        p.point(i, x);
        h[i] = x[0] * x[0] - x[1] * x[1] + 0.3 * x[0];
    }
    Remark42Report hrep = remark_4_2_checks(ScalarField(p, std::move(h)), center, ladder);
    CHECK(hrep.sup_alpha >= 0.9);
    CHECK(std::isnan(hrep.mass_alpha)); // no mass to fit
    // the mean-value property makes (2) either vacuous or smooth
    CHECK((std::isnan(hrep.mean_alpha) || hrep.mean_alpha >= 0.9));

    // log dist: mass constant in delta, exponent 0: not Hoelder
    FieldDescriptor ld;
    ld.kind = "log_dist";
    ld.floor = std::log(0.5 * p.h);
    Remark42Report lrep = remark_4_2_checks(sample_field(p, ld), center, ladder);
    CHECK(std::abs(lrep.mass_alpha) <= 0.1);

    // non-subharmonic input rejected
    FieldDescriptor neg;
    neg.kind = "dist_power";
    neg.exponent = 2.0;
    neg.coef = -1.0;
    CHECK_THROWS_AS(remark_4_2_checks(sample_field(p, neg), center, ladder),
                    NotSubharmonic);
}
