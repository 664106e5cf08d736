#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mahl/corpus.hpp"
#include "mahl/field_core.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

using namespace mahl;

TEST_CASE("make_grid basics") {
    TorusGrid g = make_grid(1, 64, GridKind::periodic);
    CHECK(g.points() == 4096);
    CHECK(g.h == 1.0 / 64);
    CHECK(g.h * g.N == 1.0); // exact in binary

    TorusGrid g2 = make_grid(2, 16, GridKind::periodic);
    CHECK(g2.points() == 65536);

    CHECK_THROWS_AS(make_grid(1, 12, GridKind::periodic), InvalidResolution);
    CHECK_THROWS_AS(make_grid(1, 4, GridKind::periodic), InvalidResolution);
}

TEST_CASE("sampling basics") {
    TorusGrid g = make_grid(1, 32, GridKind::periodic);
    FieldDescriptor zero;
    zero.kind = "constant";
    zero.value = 0.0;
    ScalarField z = sample_field(g, zero);
    CHECK(z.sup() == 0.0);
    CHECK(z.inf() == 0.0);

    TorusGrid p = make_grid(1, 32, GridKind::patch);
    FieldDescriptor d2;
    d2.kind = "dist_power";
    d2.exponent = 2.0;
    ScalarField q = sample_field(p, d2);
    CHECK(q.inf() == 0.0); // min at the center point
    int c[2] = {16, 16};
    CHECK(q.v[p.encode(c)] == 0.0);

    // log|z| with the clip disabled blows up at the grid point at 0
    FieldDescriptor logd;
    logd.kind = "log_dist";
    logd.floor = -std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(sample_field(p, logd), NonFinite);

    // with the default floor it is clipped and the clip is counted
    logd.floor = -1e12;
    SampleReport rep = sample(p, logd);
    CHECK(rep.clipped == 1);
}

TEST_CASE("torus distance") {
    TorusGrid g = make_grid(1, 64, GridKind::periodic);
    double a[2] = {0.0, 0.0}, b[2] = {0.9, 0.0}, c[2] = {0.5, 0.5};
    CHECK(torus_distance(g, a, a) == 0.0);
    CHECK(torus_distance(g, a, b) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(torus_distance(g, a, c) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));

    // metric axioms on random triples
    Rng rng(7);
    for (int k = 0; k < 64; ++k) {
        const std::size_t i = rng.below(g.points());
        const std::size_t j = rng.below(g.points());
        const std::size_t l = rng.below(g.points());
        CHECK(torus_distance(g, i, j) == torus_distance(g, j, i));
        CHECK(torus_distance(g, i, j) <=
              torus_distance(g, i, l) + torus_distance(g, l, j) + 1e-12);
    }
}

TEST_CASE("unit volume exact on every grid size") {
    for (int N : {8, 16, 32, 64, 128}) {
        TorusGrid g = make_grid(1, N, GridKind::periodic);
        CHECK(std::abs(ScalarField::constant(g, 1.0).integral() - 1.0) <= 1e-12);
    }
    TorusGrid g2 = make_grid(2, 16, GridKind::periodic);
    CHECK(std::abs(ScalarField::constant(g2, 1.0).integral() - 1.0) <= 1e-12);
}

TEST_CASE("field io round trip") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "mahl_io_test";
    fs::create_directories(dir);

    TorusGrid g = make_grid(1, 8, GridKind::periodic);
    ScalarField zeros = ScalarField::constant(g, 0.0);
    const std::string path = (dir / "zeros.mfield").string();
    field_io_write(zeros, path);
    ScalarField back = field_io_read(path);
    CHECK(back.v == zeros.v);

    // 100 random fields, bit-identical round trips
    Rng rng(42);
    for (int k = 0; k < 100; ++k) {
        std::vector<double> vals(g.points());
        for (double& x : vals) x = rng.uniform(-5.0, 5.0);
        ScalarField f(g, std::move(vals));
        field_io_write(f, path);
        ScalarField r = field_io_read(path);
        REQUIRE(r.v == f.v);
    }

    // wrong magic
    {
        FILE* fp = std::fopen(path.c_str(), "wb");
        std::fputs("{\"magic\":\"other\",\"version\":1,\"n\":1,\"N\":8,\"kind\":\"periodic\"}\n", fp);
        std::fclose(fp);
        CHECK_THROWS_AS(field_io_read(path), FormatError);
    }
    // truncated payload
    {
        field_io_write(zeros, path);
        fs::resize_file(path, fs::file_size(path) - 16);
        CHECK_THROWS_AS(field_io_read(path), FormatError);
    }
}

TEST_CASE("field rejects non-finite values") {
    TorusGrid g = make_grid(1, 8, GridKind::periodic);
    std::vector<double> vals(g.points(), 0.0);
    vals[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(ScalarField(g, std::move(vals)), NonFinite);
}

TEST_CASE("grid measure totals") {
    TorusGrid g = make_grid(1, 32, GridKind::periodic);
    ScalarField dens = ScalarField::constant(g, 1.0);
    GridMeasure m = GridMeasure::from_density(dens);
    CHECK(std::abs(m.total - 1.0) <= 1e-10);

    GridMeasure ma = GridMeasure::with_atoms(ScalarField::constant(g, 0.5), {{7, 0.5}});
    CHECK(std::abs(ma.total - 1.0) <= 1e-10);

    std::vector<std::uint8_t> mask(g.points(), 0);
    mask[7] = 1;
    CHECK(ma.mass_on(mask) ==
          doctest::Approx(0.5 + 0.5 * g.cell_volume()).epsilon(1e-12));

    CHECK_THROWS_AS(GridMeasure::from_density(ScalarField::constant(g, -1.0)),
                    MahlError);
}

TEST_CASE("descriptor json round trip") {
    FieldDescriptor d;
    d.kind = "sum";
    FieldDescriptor t1;
    t1.kind = "trig";
    t1.modes.push_back({0.5, {1, 0}, 0.25});
    FieldDescriptor t2;
    t2.kind = "dist_power";
    t2.coef = 2.0;
    t2.exponent = -1.5;
    t2.r_floor = 0.01;
    t2.center = {0.5, 0.5};
    d.terms = {t1, t2};

    FieldDescriptor back = FieldDescriptor::from_json(d.to_json());
    TorusGrid g = make_grid(1, 32, GridKind::periodic);
    ScalarField a = sample_field(g, d);
    ScalarField b = sample_field(g, back);
    CHECK(a.v == b.v);
}

TEST_CASE("pairwise sum is order-robust") {
    Rng rng(3);
    std::vector<double> xs(4097);
    for (double& x : xs) x = rng.uniform(-1.0, 1.0) * std::pow(10.0, rng.uniform(-8, 8));
    const double s1 = pairwise_sum(xs);
    long double ref = 0.0L;
    for (double x : xs) ref += (long double)x;
    CHECK(std::abs(s1 - double(ref)) <= 1e-9 * std::abs(double(ref)) + 1e-9);
}
