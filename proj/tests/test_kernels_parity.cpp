#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mahl/corpus.hpp"
#include "mahl/kernels.hpp"

using namespace mahl;

// The OpenMP kernels must reproduce the serial reference bit for bit: all
// per-point work is independent and reductions run through the same
// deterministic pass, so any divergence is a bug.

namespace {

ScalarField random_field(const TorusGrid& g, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> vals(g.points());
    for (double& x : vals) x = rng.uniform(-2.0, 2.0);
    return ScalarField(g, std::move(vals));
}

} // namespace

TEST_CASE("stencil average parity") {
    for (GridKind kind : {GridKind::periodic, GridKind::patch}) {
        TorusGrid g = make_grid(1, 64, kind);
        ScalarField u = random_field(g, 11);
        BallStencil s = ball_stencil(g, 0.07, true);
        std::vector<double> serial, parallel;
        stencil_average_serial(u, s, serial);
        stencil_average(u, s, parallel, Exec::parallel);
        REQUIRE(serial == parallel);
    }
}

TEST_CASE("stencil max parity") {
    TorusGrid g = make_grid(1, 64, GridKind::periodic);
    ScalarField u = random_field(g, 12);
    BallStencil s = ball_stencil(g, 0.1, true);
    std::vector<double> serial, parallel;
    stencil_max_serial(u, s, serial);
    stencil_max(u, s, parallel, Exec::parallel);
    REQUIRE(serial == parallel);
}

TEST_CASE("offset sup diff parity") {
    TorusGrid g = make_grid(1, 32, GridKind::periodic);
    ScalarField u = random_field(g, 13);
    BallStencil s = ball_stencil(g, 0.15, false);
    std::vector<double> serial, parallel;
    offset_sup_diff_serial(u, s, serial);
    offset_sup_diff(u, s, parallel, Exec::parallel);
    REQUIRE(serial == parallel);
}

TEST_CASE("hessian sweep parity") {
    for (int n : {1, 2}) {
        TorusGrid g = make_grid(n, n == 1 ? 64 : 16, GridKind::periodic);
        ScalarField u = random_field(g, 14 + std::uint64_t(n));
        std::vector<cplx> serial, parallel;
        hessian_sweep_serial(u, serial);
        hessian_sweep(u, parallel, Exec::parallel);
        REQUIRE(serial == parallel);
    }
}

TEST_CASE("reduction parity and tie-breaking") {
    Rng rng(15);
    std::vector<double> xs(10000);
    for (double& x : xs) x = rng.uniform(-1.0, 1.0);
    xs[123] = -5.0;
    xs[4567] = -5.0; // tie resolved toward the lower index
    MinLoc serial = reduce_min_serial(xs);
    MinLoc parallel = reduce_min(xs, Exec::parallel);
    CHECK(serial.value == parallel.value);
    CHECK(serial.index == parallel.index);
    CHECK(serial.index == 123);

    xs[88] = 9.0;
    xs[9999] = 9.0;
    MinLoc ms = reduce_max_serial(xs);
    MinLoc mp = reduce_max(xs, Exec::parallel);
    CHECK(ms.value == mp.value);
    CHECK(ms.index == mp.index);
    CHECK(ms.index == 88);
}

TEST_CASE("ball stencil geometry") {
    TorusGrid g = make_grid(1, 64, GridKind::periodic);
    BallStencil s = ball_stencil(g, 2.5 * g.h, true);
    // offsets within radius 2.5h of the 2d lattice: 21 points (|w|^2 <= 6.25 h^2)
    CHECK(s.size() == 21);
    // sorted by radius
    for (std::size_t i = 1; i < s.size(); ++i) CHECK(s.r2[i] >= s.r2[i - 1]);
    // symmetric: for every offset its negation is present (kernel symmetry)
    for (std::size_t i = 0; i < s.size(); ++i) {
        auto neg = s.offsets[i];
        for (auto& x : neg) x = -x;
        bool found = false;
        for (std::size_t j = 0; j < s.size() && !found; ++j)
            if (s.offsets[j] == neg) found = true;
        CHECK(found);
    }
    CHECK_THROWS_AS(ball_stencil(g, 0.6, true), DeltaTooSmall);
}
