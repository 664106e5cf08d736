// Benchmark of the OpenMP kernels against their serial reference
// implementations. Also asserts bit-parity on every run: any divergence
// between the two paths is a correctness bug, not a performance question.

#include "mahl/corpus.hpp"
#include "mahl/kernels.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace mahl;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class F>
double time_best_of(int reps, const F& f) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, seconds_since(t0));
    }
    return best;
}

} // namespace

int main(int argc, char** argv) {
    int N = 256;
    int reps = 3;
    if (argc > 1) N = std::atoi(argv[1]);
    if (argc > 2) reps = std::atoi(argv[2]);

    TorusGrid g = make_grid(1, N, GridKind::periodic);
    Rng rng(7);
    std::vector<double> vals(g.points());
    for (double& x : vals) x = rng.uniform(-1.0, 1.0);
    ScalarField u(g, std::move(vals));

    int threads = 1;
#ifdef _OPENMP
    threads = omp_get_max_threads();
#endif
    std::printf("kernel benchmark: n=1 N=%d (%zu points), %d thread(s)\n", N,
                g.points(), threads);
    std::printf("%-22s %12s %12s %8s %s\n", "kernel", "serial[s]", "parallel[s]",
                "speedup", "parity");

    auto report = [&](const char* name, double ts, double tp, bool parity) {
        std::printf("%-22s %12.4f %12.4f %8.2f %s\n", name, ts, tp, ts / tp,
                    parity ? "bit-exact" : "MISMATCH");
        return parity;
    };

    bool all_ok = true;
    {
        BallStencil s = ball_stencil(g, 0.05, true);
        std::vector<double> a, b;
        const double ts = time_best_of(reps, [&] { stencil_average_serial(u, s, a); });
        const double tp =
            time_best_of(reps, [&] { stencil_average(u, s, b, Exec::parallel); });
        all_ok &= report("stencil_average", ts, tp, a == b);
    }
    {
        BallStencil s = ball_stencil(g, 0.05, true);
        std::vector<double> a, b;
        const double ts = time_best_of(reps, [&] { stencil_max_serial(u, s, a); });
        const double tp =
            time_best_of(reps, [&] { stencil_max(u, s, b, Exec::parallel); });
        all_ok &= report("stencil_max", ts, tp, a == b);
    }
    {
        BallStencil s = ball_stencil(g, 0.1, false);
        std::vector<double> a, b;
        const double ts = time_best_of(reps, [&] { offset_sup_diff_serial(u, s, a); });
        const double tp =
            time_best_of(reps, [&] { offset_sup_diff(u, s, b, Exec::parallel); });
        all_ok &= report("offset_sup_diff", ts, tp, a == b);
    }
    {
        std::vector<cplx> a, b;
        const double ts = time_best_of(reps, [&] { hessian_sweep_serial(u, a); });
        const double tp =
            time_best_of(reps, [&] { hessian_sweep(u, b, Exec::parallel); });
        all_ok &= report("hessian_sweep", ts, tp, a == b);
    }
    {
        MinLoc a{}, b{};
        const double ts = time_best_of(reps, [&] { a = reduce_min_serial(u.v); });
        const double tp =
            time_best_of(reps, [&] { b = reduce_min(u.v, Exec::parallel); });
        all_ok &= report("reduce_min", ts, tp,
                         a.value == b.value && a.index == b.index);
    }
    return all_ok ? 0 : 1;
}
