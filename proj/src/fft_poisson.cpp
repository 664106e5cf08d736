#include "mahl/fft_poisson.hpp"
#include "mahl/kernels.hpp"

#include <cmath>
#include <numbers>

#include <fftw3.h>

namespace mahl {

struct SpectralPoisson::Impl {
    std::vector<int> dims;
    fftw_complex* buf = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    std::vector<double> axis_symbol; // per-axis -lambda_k = (2 - 2 cos(2 pi k / N)) / h^2

    ~Impl() {
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        if (buf) fftw_free(buf);
    }
};

SpectralPoisson::SpectralPoisson(const TorusGrid& g) : grid_(g), impl_(new Impl) {
    if (!g.periodic()) throw GridMismatch("spectral solver needs a periodic grid");
    const int rank = g.dims();
    impl_->dims.assign(std::size_t(rank), g.N);
    const std::size_t total = g.points();
    impl_->buf = fftw_alloc_complex(total);
    impl_->fwd = fftw_plan_dft(rank, impl_->dims.data(), impl_->buf, impl_->buf,
                               FFTW_FORWARD, FFTW_ESTIMATE);
    impl_->bwd = fftw_plan_dft(rank, impl_->dims.data(), impl_->buf, impl_->buf,
                               FFTW_BACKWARD, FFTW_ESTIMATE);
    impl_->axis_symbol.resize(std::size_t(g.N));
    const double inv_h2 = double(g.N) * double(g.N);
    for (int k = 0; k < g.N; ++k)
        impl_->axis_symbol[std::size_t(k)] =
            (2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * k / g.N)) * inv_h2;
}

SpectralPoisson::~SpectralPoisson() = default;

ScalarField SpectralPoisson::solve_symbol(const ScalarField& rhs, double shift,
                                          bool zero_mean) const {
    if (!(rhs.grid == grid_)) throw GridMismatch("rhs grid mismatch");
    const std::size_t total = grid_.points();
    for (std::size_t i = 0; i < total; ++i) {
        impl_->buf[i][0] = rhs.v[i];
        impl_->buf[i][1] = 0.0;
    }
    fftw_execute(impl_->fwd);

    // Delta_h has symbol -sum_a axis_symbol[k_a]; we solve
    // (shift - Delta_h) u = rhs, i.e. divide by (shift + sum axis_symbol).
    const int d = grid_.dims();
    const double norm = 1.0 / double(total);
    int k[2 * kMaxDim] = {0};
    for (std::size_t i = 0; i < total; ++i) {
        double sym = shift;
        for (int a = 0; a < d; ++a) sym += impl_->axis_symbol[std::size_t(k[a])];
        double factor;
        if (i == 0) {
            factor = zero_mean ? 0.0 : (shift > 0.0 ? 1.0 / shift : 0.0);
        } else {
            factor = 1.0 / sym;
        }
        impl_->buf[i][0] *= factor * norm;
        impl_->buf[i][1] *= factor * norm;
        int a = d - 1;
        while (a >= 0 && ++k[a] == grid_.N) k[a--] = 0;
    }
    fftw_execute(impl_->bwd);

    std::vector<double> out(total);
    for (std::size_t i = 0; i < total; ++i) out[i] = impl_->buf[i][0];
    return ScalarField(grid_, std::move(out));
}

ScalarField SpectralPoisson::solve_poisson(const ScalarField& rhs) const {
    const double mean = rhs.mean();
    const double scale = std::max(1.0, rhs.sup() - rhs.inf());
    if (std::abs(mean) > 1e-10 * scale)
        throw NonzeroMean("poisson rhs has nonzero mean " + std::to_string(mean));
    // solve -(-Delta) u = rhs  =>  u_hat = -rhs_hat / sum_sym
    ScalarField neg = rhs;
    for (double& x : neg.v) x = -x;
    return solve_symbol(neg, 0.0, true);
}

ScalarField SpectralPoisson::solve_shifted(double c, const ScalarField& rhs) const {
    if (!(c > 0.0)) throw MahlError("solve_shifted needs a positive shift");
    return solve_symbol(rhs, c, false);
}

ScalarField SpectralPoisson::apply_laplacian(const ScalarField& u) {
    const TorusGrid& g = u.grid;
    const double inv_h2 = 1.0 / (g.h * g.h);
    std::vector<double> out(u.size(), 0.0);
    std::vector<long long> stride(std::size_t(g.dims()), 1);
    for (int a = g.dims() - 2; a >= 0; --a)
        stride[std::size_t(a)] = stride[std::size_t(a) + 1] * g.N;
    par_for(u.size(), default_exec(), [&](std::size_t p) {
        if (!g.periodic() && !g.interior(p, 1)) return;
        int c[2 * kMaxDim];
        g.decode(p, c);
        double acc = 0.0;
        for (int a = 0; a < g.dims(); ++a) {
            int up = c[a] + 1, dn = c[a] - 1;
            if (g.periodic()) {
                if (up == g.N) up = 0;
                if (dn < 0) dn = g.N - 1;
            }
            const long long base = (long long)p - c[a] * stride[std::size_t(a)];
            acc += u.v[std::size_t(base + up * stride[std::size_t(a)])] +
                   u.v[std::size_t(base + dn * stride[std::size_t(a)])] - 2.0 * u.v[p];
        }
        out[p] = acc * inv_h2;
    });
    return ScalarField(g, std::move(out));
}

} // namespace mahl
