#pragma once

#include "mahl/field_core.hpp"

#include <memory>

namespace mahl {

// ---------------------------------------------------------------------------
// Spectral inversion of the discrete (5-point per axis) Laplacian on the
// periodic grid, rank 2n complex DFT via FFTW.  Plans use FFTW_ESTIMATE so
// that planning is deterministic run to run (artifact byte-determinism).
// ---------------------------------------------------------------------------

class SpectralPoisson {
  public:
    explicit SpectralPoisson(const TorusGrid& g);
    ~SpectralPoisson();
    SpectralPoisson(const SpectralPoisson&) = delete;
    SpectralPoisson& operator=(const SpectralPoisson&) = delete;

    /// Solve Delta_h u = rhs with mean(u) = 0. Requires mean(rhs) ~ 0
    /// (throws NonzeroMean beyond 1e-10 * osc scale).
    ScalarField solve_poisson(const ScalarField& rhs) const;

    /// Solve (c I - Delta_h) u = rhs for c > 0 (the linearly implicit flow
    /// step); the zero mode is damped by 1/c.
    ScalarField solve_shifted(double c, const ScalarField& rhs) const;

    /// Apply the discrete Laplacian (stencil, not spectral) — shared by the
    /// residual checks.
    static ScalarField apply_laplacian(const ScalarField& u);

    const TorusGrid& grid() const { return grid_; }

  private:
    ScalarField solve_symbol(const ScalarField& rhs, double shift, bool zero_mean) const;

    TorusGrid grid_;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace mahl
