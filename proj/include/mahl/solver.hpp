#pragma once

#include "mahl/fft_poisson.hpp"
#include "mahl/field_core.hpp"
#include "mahl/holder_metrics.hpp"
#include "mahl/ma_operator.hpp"

namespace mahl {

// ---------------------------------------------------------------------------
// MA(u) = f on the flat torus, sup-normalized.  Default scheme: pseudo-time
// log-density flow du/dtau = log MA(u) - log max(f, floor), integrated
// linearly-implicitly through the FFT ((4/tau - Delta) v = 4 r), with
// density-space Newton steps once the residual is below the switch
// threshold.  At n = 1 the discrete equation is affine in u, so the warm
// start (Delta u0 = 4n(f^{1/n}-1)) already solves it and Newton converges in
// one step otherwise.
// ---------------------------------------------------------------------------

enum class SolveScheme { flow, newton_flow };

struct SolveOptions {
    SolveScheme scheme = SolveScheme::newton_flow;
    double tau0 = 1.0;            // initial pseudo-time step
    int max_iterations = 200;
    double tolerance = -1.0;      // sup |log MA(u) - log f|; default 10 h^2
    bool clamp = true;            // clamp eigenvalues during iteration
    double newton_switch = 1e3;   // engage Newton below this residual
    double f_floor = 1e-8;        // floor inside the logs
};

struct SolveResult {
    ScalarField u;            // sup u = 0 exactly
    double residual = 0.0;    // strict-mode sup |log MA(u) - log f|
    int iterations = 0;
    double psh_certificate = 0.0; // min eigenvalue of g + H(u)
    bool monotone_after_10 = true;
    std::size_t clip_reports = 0; // clipped descriptor points, when known
};

/// FFT oracle for the n=1 linear case (and the solver preconditioner):
/// discrete Laplacian inverted spectrally, mean-zero solution.
ScalarField solve_poisson_fft(const ScalarField& g);

/// Solve MA(u) = f for a nonnegative density with int f dV_g = V_omega
/// (1e-8 relative). Throws MassMismatch / DegenerateDensity / NonConvergence.
SolveResult solve_ma(const ScalarField& f, const KahlerBackground& bg,
                     const SolveOptions& opts = {});

/// (int f^p dV)^{1/p} by compensated summation.
double lp_norm(const ScalarField& f, double p);
/// same against a measure
double lp_norm_measure(const ScalarField& f, double p, const GridMeasure& mu);

// ---------------------------------------------------------------------------
// Experiment pipelines.
// ---------------------------------------------------------------------------

struct TheoremAEntry {
    std::string label;
    FieldDescriptor density;
    double p = 2.0;
};

struct TheoremARow {
    std::string label;
    int n = 1, N = 0;
    double p = 0, q = 0, bound = 0;
    double fitted_alpha = 0, fit_residual = 0;
    bool capped = false;
    double solver_residual = 0;
    int iterations = 0;
    double seconds = 0;
    // exceptional-set pipeline components (E(delta, alpha0) ladder)
    std::vector<double> e_deltas;
    std::vector<double> e_volumes;
    double stability_gap = 0; // ||u - v||_inf for the modified density g
};

std::vector<TheoremARow> theorem_a_experiment(const TorusGrid& grid,
                                              const std::vector<TheoremAEntry>& family,
                                              const SolveOptions& opts = {});

struct LpPropertyResult {
    SolveResult solve;
    HolderFit fit;
};

/// Corollary 4.4 pipeline: solve MA(phi) = f * MA(psi).
LpPropertyResult lp_property_experiment(const ScalarField& psi, const ScalarField& f,
                                        double p, const KahlerBackground& bg,
                                        const SolveOptions& opts = {});

struct SingularSolveResult {
    SolveResult solve;
    HolderFit fit;
    double h_alpha_slope = 0.0; // capacity-domination slope of mu
    double measured_b = 0.0;    // L1(mu) regularization gap exponent
};

/// Proposition 3.3 pipeline: atom-free but concentrated measures. H(infinity)
/// is pre-checked through the capacity fit; HInfinityFailed on rejection.
SingularSolveResult singular_measure_solve(const GridMeasure& mu,
                                           const KahlerBackground& bg,
                                           const SolveOptions& opts = {});

} // namespace mahl
