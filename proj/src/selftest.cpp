#include "mahl/selftest.hpp"

#include "mahl/capacity.hpp"
#include "mahl/corpus.hpp"
#include "mahl/fft_poisson.hpp"
#include "mahl/geometry_appendix.hpp"
#include "mahl/holder_metrics.hpp"
#include "mahl/radial_toric.hpp"
#include "mahl/regularization.hpp"
#include "mahl/solver.hpp"

#include <cmath>

namespace mahl {

namespace {

void check(SelftestReport& rep, const std::string& suite, const std::string& name,
           double value, double threshold, bool pass) {
    rep.checks.push_back({suite, name, pass, value, threshold});
}

// value <= threshold
void check_le(SelftestReport& rep, const std::string& suite, const std::string& name,
              double value, double threshold) {
    check(rep, suite, name, value, threshold, value <= threshold);
}

void check_ge(SelftestReport& rep, const std::string& suite, const std::string& name,
              double value, double threshold) {
    check(rep, suite, name, value, threshold, value >= threshold);
}

} // namespace

SelftestReport run_selftest(const std::filesystem::path& out_dir, std::uint64_t seed) {
    SelftestReport rep;
    RunManifest manifest(out_dir, "selftest");

    // field_core: IO round trip, metric axioms, exact unit volume
    {
        TorusGrid g = make_grid(1, 64, GridKind::periodic);
        Rng rng(seed);
        ScalarField f = random_trig_field(g, rng, 3, 1.0);
        const auto path = out_dir / "selftest_field.mfield";
        field_io_write(f, path.string());
        ScalarField back = field_io_read(path.string());
        bool identical = back.v == f.v;
        check(rep, "field_core", "io_round_trip_bit_exact", identical ? 0.0 : 1.0, 0.0,
              identical);
        manifest.add_artifact(path);

        check_le(rep, "field_core", "unit_volume_exact",
                 std::abs(ScalarField::constant(g, 1.0).integral() - 1.0), 1e-12);

        double worst_tri = 0.0;
        for (int i = 0; i < 32; ++i) {
            const std::size_t a = rng.below(g.points());
            const std::size_t b = rng.below(g.points());
            const std::size_t c = rng.below(g.points());
            const double ab = torus_distance(g, a, b);
            const double ba = torus_distance(g, b, a);
            worst_tri = std::max(worst_tri, std::abs(ab - ba));
            worst_tri = std::max(
                worst_tri, ab - (torus_distance(g, a, c) + torus_distance(g, c, b)));
        }
        check_le(rep, "field_core", "torus_metric_axioms", worst_tri, 1e-12);
    }

    // ma_operator: mass conservation + product property
    {
        TorusGrid g = make_grid(1, 64, GridKind::periodic);
        KahlerBackground bg = flat_background(1);
        Rng rng(seed + 1);
        auto corpus = corpus_omega_psh(g, bg, 3, seed + 1);
        double worst_mass = 0.0;
        for (const auto& u : corpus) {
            MAReport ma = ma_density(u, bg, false);
            worst_mass =
                std::max(worst_mass, std::abs(ma.density.integral() - bg.V_omega));
        }
        check_le(rep, "ma_operator", "mass_conservation", worst_mass,
                 10.0 * g.h * g.h);

        TorusGrid g2 = make_grid(1, 32, GridKind::periodic);
        FieldDescriptor d;
        d.kind = "trig";
        FieldDescriptor::Mode m;
        m.amp = 3e-3;
        m.k = {1, 0};
        m.phase = 0.0;
        d.modes.push_back(m);
        ScalarField u1 = sample_field(g2, d);
        ScalarField u2 = ScalarField::constant(g2, 0.0);
        ProductPotential prod = product_potential(u1, u2);
        MAReport ma1 = ma_density(u1, flat_background(1), false);
        MAReport map = ma_density(prod.u, prod.bg, false);
        double worst = 0.0;
        const std::size_t pts2 = g2.points();
        for (std::size_t p = 0; p < prod.u.size(); ++p) {
            const double expect = ma1.density.v[p / pts2];
            worst = std::max(worst, std::abs(map.density.v[p] - expect));
        }
        check_le(rep, "ma_operator", "product_property", worst, 10.0 * g2.h * g2.h);
    }

    // regularization: kernel mass, lower bounds, Jensen
    {
        for (int n = 1; n <= 3; ++n) {
            KernelSpec k = normalize_kernel(n);
            const double sigma = sphere_area(2 * n - 1);
            const double mass = sigma * adaptive_simpson(
                                            [&](double r) {
                                                return std::pow(r, 2 * n - 1) *
                                                       k.rho(r * r);
                                            },
                                            0.0, 1.0, 1e-12);
            check_le(rep, "regularization", "kernel_unit_mass_n" + std::to_string(n),
                     std::abs(mass - 1.0), 1e-8);
        }

        TorusGrid pg = make_grid(1, 128, GridKind::patch);
        KernelSpec kernel = normalize_kernel(1);
        auto psh = corpus_psh_patch(pg, 3, seed + 2);
        double lower = 0.0, mono = 0.0;
        for (const auto& u : psh) {
            ScalarField r1 = delta_regularize(u, 0.05, kernel);
            ScalarField r2 = delta_regularize(u, 0.08, kernel);
            ScalarField avg = ball_average(u, 0.05);
            const int margin = int(std::ceil(0.08 / pg.h)) + 1;
            for (std::size_t i = 0; i < u.size(); ++i) {
                if (!pg.interior(i, margin)) continue;
                lower = std::max(lower, u.v[i] - r1.v[i]);
                lower = std::max(lower, u.v[i] - avg.v[i]);
                mono = std::max(mono, r1.v[i] - r2.v[i]);
            }
        }
        check_le(rep, "regularization", "psh_lower_bound", lower, 1e-12);
        check_le(rep, "regularization", "delta_monotonicity", mono,
                 10.0 * pg.h * pg.h);

        auto c2 = corpus_c2(pg, 2, seed + 3);
        double jensen_worst = 0.0;
        int c[2] = {pg.N / 2, pg.N / 2};
        const std::size_t center = pg.encode(c);
        for (const auto& u : c2) {
            const double delta = 0.1;
            const double lhs = ball_average(u, delta).v[center] - u.v[center];
            const double rhs = jensen_rhs(u, center, delta);
            jensen_worst = std::max(jensen_worst, std::abs(rhs - lhs) / u.osc());
        }
        check_le(rep, "regularization", "jensen_identity", jensen_worst, 1e-3);
    }

    // solver: oracle equivalence at n=1
    {
        TorusGrid g = make_grid(1, 64, GridKind::periodic);
        KahlerBackground bg = flat_background(1);
        Rng rng(seed + 4);
        double worst = 0.0;
        for (int trial = 0; trial < 3; ++trial) {
            ScalarField noise = random_trig_field(g, rng, 2, 0.1);
            std::vector<double> fv(noise.size());
            for (std::size_t i = 0; i < fv.size(); ++i) fv[i] = 1.0 + noise.v[i];
            ScalarField f(g, std::move(fv));
            const double mass = f.integral();
            for (double& x : f.v) x /= mass;
            SolveResult sol = solve_ma(f, bg, {});
            // oracle: Delta u = 4(f-1), sup-normalized
            std::vector<double> rhs(f.size());
            for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = 4.0 * (f.v[i] - 1.0);
            const double mean = pairwise_sum(rhs) / double(rhs.size());
            for (double& x : rhs) x -= mean;
            ScalarField oracle = solve_poisson_fft(ScalarField(g, std::move(rhs)));
            const double shift = oracle.sup();
            double err = 0.0;
            for (std::size_t i = 0; i < oracle.size(); ++i)
                err = std::max(err, std::abs(sol.u.v[i] - (oracle.v[i] - shift)));
            worst = std::max(worst, err);
        }
        check_le(rep, "solver", "fft_oracle_equivalence", worst, 10.0 * g.h * g.h);
    }

    // capacity: normalization and monotonicity
    {
        TorusGrid g = make_grid(1, 32, GridKind::periodic);
        KahlerBackground bg = flat_background(1);
        CompactSet all;
        all.mask.assign(g.points(), 1);
        all.label = "X";
        check_le(rep, "capacity", "cap_X_equals_volume",
                 std::abs(capacity(all, bg, g) - bg.V_omega), 1e-8);
        CompactSet none;
        none.mask.assign(g.points(), 0);
        none.label = "empty";
        check_le(rep, "capacity", "cap_empty_zero", capacity(none, bg, g), 0.0);

        int c[2] = {g.N / 2, g.N / 2};
        const std::size_t center = g.encode(c);
        const double c_small = capacity(ball_set(g, center, 0.08), bg, g);
        const double c_big = capacity(ball_set(g, center, 0.2), bg, g);
        check_le(rep, "capacity", "ball_monotonicity", c_small - c_big,
                 10.0 * g.h * g.h);
    }

    // radial/toric: Stokes mass and projector identities
    {
        RadialProfile prof =
            RadialProfile::make({{"kind", "exp_power"}, {"eps0", 1.0}}, 1);
        RadialMAMeasure m = radial_ma(prof, 1);
        double worst = 0.0;
        for (double r : {0.05, 0.15, 0.4}) {
            BallMass bm = ball_mass(m, r);
            worst = std::max(worst, std::abs(bm.mass - bm.stokes) /
                                        std::max(bm.stokes, 1e-300));
        }
        check_le(rep, "radial_toric", "stokes_mass_identity", worst, 1e-6);

        TorusGrid pg = make_grid(1, 64, GridKind::patch);
        auto corpus = corpus_psh01(pg, 2, seed + 5);
        double idem = 0.0, mono_t = 0.0;
        for (const auto& u : corpus) {
            ScalarField tu = toric_average(u);
            ScalarField ttu = toric_average(tu);
            for (std::size_t i = 0; i < u.size(); ++i)
                idem = std::max(idem, std::abs(ttu.v[i] - tu.v[i]));
        }
        // monotone: u <= u + 0.25 translates to Tu <= T(u+0.25)
        {
            const ScalarField& u = corpus[0];
            std::vector<double> v(u.size());
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = u.v[i] + 0.25;
            ScalarField tu = toric_average(u);
            ScalarField tv = toric_average(ScalarField(pg, std::move(v)));
            for (std::size_t i = 0; i < u.size(); ++i)
                mono_t = std::max(mono_t, tu.v[i] - tv.v[i]);
        }
        check_le(rep, "radial_toric", "toric_projector_idempotent", idem, 1e-10);
        check_le(rep, "radial_toric", "toric_projector_monotone", mono_t, 0.0);
    }

    // holder: estimator soundness on dist^a + Chebyshev link
    {
        TorusGrid g = make_grid(1, 128, GridKind::periodic);
        KernelSpec kernel = normalize_kernel(1);
        double worst = 0.0;
        for (double a : {0.5, 1.0}) {
            FieldDescriptor d;
            d.kind = "dist_power";
            d.exponent = a; // positive power: no clip floor needed
            ScalarField u = sample_field(g, d);
            HolderFit fit = holder_fit(u, default_modulus_ladder(g));
            worst = std::max(worst, std::abs(fit.alpha - a));
        }
        check_le(rep, "holder_metrics", "dist_power_estimator", worst, 0.05);

        auto corpus = corpus_omega_psh(g, flat_background(1), 2, seed + 6);
        double cheb = 0.0;
        for (const auto& u : corpus) {
            const double delta = 0.08, alpha = 0.8;
            ExceptionalSet es = exceptional_set(u, delta, alpha, kernel);
            const double gap = l1_gap(u, delta, kernel);
            cheb = std::max(cheb,
                            es.volume_fraction - gap / std::pow(delta, alpha));
        }
        check_le(rep, "holder_metrics", "chebyshev_link", cheb, 1e-12);
    }

    // geometry: flat exactness, sphere closed forms, transport isometry
    {
        ModelMetric flat = ModelMetric::flat_metric();
        GeodesicPath p = geodesic_integrate(flat, {0.1, 0.2}, {0.3, -0.1}, 1.0, 65);
        double worst = 0.0;
        for (const auto& s : p.samples) {
            const cplx expect = cplx{0.1, 0.2} + s.t * cplx{0.3, -0.1};
            worst = std::max(worst, std::abs(s.z - expect));
        }
        check_le(rep, "geometry", "flat_geodesic_exact", worst, 1e-10);

        const double R0 = 1.5;
        ModelMetric sph = ModelMetric::sphere_metric(R0);
        GeodesicPath gp = geodesic_integrate(sph, {0.0, 0.0}, {0.25, 0.0}, 1.0, 65);
        check_le(rep, "geometry", "sphere_energy_drift", gp.energy_drift, 1e-8);
        JacobiState js = jacobi_integrate(sph, gp, {0.0, 0.0}, {0.0, 0.1});
        GronwallReport gr = gronwall_bound_check(js, R0);
        check_ge(rep, "geometry", "gronwall_slack", gr.min_slack, -1e-9);

        std::vector<cplx> w = parallel_transport(sph, gp, {0.0, 0.05});
        double iso = 0.0;
        const double norm0 = sph.lambda(gp.z0) * std::abs(w[0]);
        for (std::size_t k = 0; k < w.size(); ++k) {
            const double nk = sph.lambda(gp.samples[k].z) * std::abs(w[k]);
            iso = std::max(iso, std::abs(nk - norm0));
        }
        check_le(rep, "geometry", "transport_isometry", iso, 1e-8);
    }

    // artifacts
    {
        CsvWriter csv(out_dir / "selftest.csv",
                      {"suite", "check", "value", "threshold", "status"});
        for (const auto& c : rep.checks)
            csv.row({c.suite, c.name, c.value, c.threshold,
                     std::string(c.pass ? "PASS" : "FAIL")});
        csv.close();
        manifest.add_artifact(out_dir / "selftest.csv");

        json verdict;
        verdict["test"] = "selftest";
        verdict["verdict"] = rep.all_pass() ? "PASS" : "FAIL";
        verdict["checks"] = rep.checks.size();
        verdict["seed"] = seed;
        write_json_file(out_dir / "selftest_verdict.json", verdict);
        manifest.add_artifact(out_dir / "selftest_verdict.json");

        TorusGrid g = make_grid(1, 32, GridKind::periodic);
        Rng rng(seed + 7);
        ScalarField extra = random_trig_field(g, rng, 2, 1.0);
        field_io_write(extra, (out_dir / "selftest_field2.mfield").string());
        manifest.add_artifact(out_dir / "selftest_field2.mfield");

        manifest.set_config({{"seed", seed}});
        manifest.write();
    }
    return rep;
}

} // namespace mahl
