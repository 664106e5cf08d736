#pragma once

#include "mahl/field_core.hpp"
#include "mahl/kernels.hpp"
#include "mahl/ma_operator.hpp"

namespace mahl {

// ---------------------------------------------------------------------------
// The smoothing kernel rho(t) = eta (1-t)^{-2} exp(1/(t-1)) on [0,1), zero
// beyond, with eta normalized so that int_{C^n} rho(|z|^2) dV = 1.  On the
// flat torus exp_z(zeta) = z + zeta, so the delta-regularization is a plain
// mollification against this kernel.
// ---------------------------------------------------------------------------

struct KernelSpec {
    int n = 1;
    double eta = 1.0;

    double rho(double t) const;           // includes eta
    double second_moment() const;          // int |z|^2 rho(|z|^2) dV
};

/// eta from adaptive radial quadrature; unit mass holds to 1e-8.
KernelSpec normalize_kernel(int n);

double sphere_area(int real_dim_minus_1); // sigma_{2n-1} = 2 pi^n / (n-1)!
double ball_volume(int real_dim);         // v_{2n} = pi^n / n!

/// rho_delta u: kernel-weighted average over the grid ball |w| <= delta, with
/// the discrete kernel renormalized to unit mass (constants are reproduced
/// exactly). delta >= 2h required.
ScalarField delta_regularize(const ScalarField& u, double delta,
                             const KernelSpec& kernel, Exec exec = default_exec());

/// Uniform average over the discrete ball; delta >= 2h.
ScalarField ball_average(const ScalarField& u, double delta, Exec exec = default_exec());

/// Pointwise sup over the discrete ball; delta >= h.
ScalarField sup_convolution(const ScalarField& u, double delta, Exec exec = default_exec());

/// Jensen right-hand side at grid point z (patch charts):
///   (2n / (delta^{2n} sigma_{2n-1})) int_0^delta r^{2n-1} int_0^r t^{1-2n}
///       int_{|zeta|<=t} Delta u(z+zeta) dV dt dr.
/// Evaluated through the exact Fubini reduction to the ball Green kernel
/// G_delta(|zeta|) (the t- and r-integrals are carried out in closed form;
/// the remaining sum runs over the grid ball, with the center cell averaged
/// analytically because G has an integrable singularity there).
double jensen_rhs(const ScalarField& u, std::size_t z, double delta,
                  Exec exec = default_exec());

struct KLParams {
    double c = 0.0;      // level
    double delta = 0.1;  // scale
    double K = 0.0;      // monotonicity constant (flat torus: 0 admissible)
    double A = 0.0;      // curvature lower-bound constant
    double t_ratio = 1.189207115002721; // 2^{1/4}, ladder ratio
};

struct KLResult {
    ScalarField transform;     // u_{c,delta}
    ScalarField argmin_t;      // minimizing ladder t per point
    ScalarField lambda_delta;  // d/dlog t (U + K t^2) at t = delta (ladder backward difference)
    std::vector<double> ladder;
    double worst_monotonicity = 0.0; // most positive F(t_smaller) - F(t_larger)
    double hessian_slack = 0.0;      // filled by hessian_bound_check
    std::size_t slack_point = 0;
};

/// Kiselman-Legendre transform with level c over the geometric t-ladder
/// {delta * ratio^{-k}} floored at 2h. Monotonicity of t -> rho_t u + K t^2
/// is asserted along the ladder; violations beyond tol (default 10 h^2)
/// throw MonotonicityViolation.
KLResult kiselman_legendre(const ScalarField& u, const KLParams& params,
                           const KernelSpec& kernel, double mono_tol = -1.0,
                           Exec exec = default_exec());

struct SlackReport {
    double slack = 0.0;       // min over grid of (min eig (g+H) - bound)
    std::size_t worst = 0;
    double bound_at_worst = 0.0;
};

/// Per-point bound -(A min{c, lambda(z,delta)} + K delta^2) against the
/// smallest eigenvalue of g + H(u_{c,delta}); flat torus with A = K = 0
/// asserts the transform stays omega-psh up to the stencil tolerance.
SlackReport hessian_bound_check(KLResult& result, const KLParams& params,
                                const KahlerBackground& bg, Exec exec = default_exec());

/// Centered finite-difference log-slope of t -> rho_t u(z) + K t^2 along the
/// geometric grid (ratio 2^{1/8}); throws TOutOfRange when t/r drops below 2h.
double lambda_slope(const ScalarField& u, std::size_t z, double t,
                    const KernelSpec& kernel, double K = 0.0,
                    Exec exec = default_exec());

/// int |rho_delta u - u| dV. The signed integral is identically zero on the
/// flat torus (convolution), so the gap is taken in L^1 norm, matching the
/// form the stability step consumes; invariant under additive shifts, so the
/// lemma's min-normalization is a no-op.
double l1_gap(const ScalarField& u, double delta, const KernelSpec& kernel,
              Exec exec = default_exec());

/// Same gap in L^1(mu).
double l1_gap_measure(const ScalarField& u, double delta, const KernelSpec& kernel,
                      const GridMeasure& mu, Exec exec = default_exec());

} // namespace mahl
