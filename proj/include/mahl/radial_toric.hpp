#pragma once

#include "mahl/capacity.hpp"
#include "mahl/field_core.hpp"
#include "mahl/fit.hpp"
#include "mahl/holder_metrics.hpp"

namespace mahl {

// ---------------------------------------------------------------------------
// Radial profiles chi(t), t = log r: convex increasing, with closed-form
// derivatives per kind. JSON kinds:
//   exp_power   chi = (n/eps0) e^{(eps0/n) t}                (bounded, nu = 0)
//   even_poly   chi = sum_k c_k e^{2kt}  (|z|^{2k} mixtures; smooth at 0)
//   smooth_max  chi = smoothmax(t, level; softness)          (bounded, nu = 0)
//   kink        chi = smoothmax(nu t, slope2 (t - t0) + nu t0; softness)
//               (unbounded, Lelong number nu; the mollified-kink atom witness)
//   example55   chi = exp(-sqrt(-t)), t <= -1/4              (bounded, nu = 0,
//               sub-polynomial modulus: the non-Hoelder witness)
//   table       piecewise-linear knots (t[], chi[])
// ---------------------------------------------------------------------------

struct RadialProfile {
    json spec;
    int n = 1; // ambient complex dimension

    double chi(double t) const;
    double chi_p(double t) const;  // first derivative
    double chi_pp(double t) const; // second derivative
    double declared_nu() const;    // lim_{t->-inf} chi'
    bool bounded() const;          // chi(-inf) > -inf
    double chi_at_minus_inf() const;

    static RadialProfile make(const json& spec, int n);
};

/// Convexity/monotonicity validation on a t-ladder; throws NotConvex.
void validate_profile(const RadialProfile& p, double t_lo = -40.0, double t_hi = -0.3);

/// Closed-form radial Monge-Ampere measure in (dd^c) units (the atom
/// carries exactly nu^n, the Stokes ball mass is chi'(log r)^n):
///   (dd^c u)^n = nu^n delta_0 + c_n (chi' o L)^{n-1} (chi'' o L) dV / |z|^{2n},
/// c_n = n / sigma_{2n-1}.
struct RadialMAMeasure {
    RadialProfile profile;
    double atom = 0.0; // nu^n
    double c_n = 0.0;

    /// radial density against dV at radius r = e^t
    double density(double t) const;
};

RadialMAMeasure radial_ma(const RadialProfile& profile, int n);

/// Extrapolated limit of chi' along a descending t-ladder.
double lelong_number(const RadialProfile& profile);

/// atom + adaptive quadrature of the radial density over |z| <= r, with the
/// analytic tail below the quadrature floor; the Stokes cross-check value is
/// chi'(log r)^n.
struct BallMass {
    double mass = 0.0;
    double stokes = 0.0; // chi'(log r)^n + 0 (the atom is inside already)
};
BallMass ball_mass(const RadialMAMeasure& m, double r);

/// Conversion between the closed-form (dd^c) units and grid det-H units,
/// calibrated on chi = e^{2t} (u = |z|^2) and frozen per dimension.
double calibrate_radial_scale(int n, int N);

struct RadialEquivalenceReport {
    double eps_integrability = 0.0; // (ii) largest converged eps on the ladder
    double eps_ball_mass = 0.0;     // (iii) fitted ball-mass exponent
    double holder_delta = 0.0;      // (iv) fitted modulus exponent of chi
    bool holder_degenerate = false; // (iv) drifts to zero (Example 5.5 regime)
    bool consistent = false;
};

/// Proposition 5.2 battery for bounded nu = 0 profiles.
RadialEquivalenceReport radial_equivalence_report(const RadialProfile& profile,
                                                  const std::vector<double>& eps_ladder);

// ---------------------------------------------------------------------------
// Toric machinery on polydisk patches.
// ---------------------------------------------------------------------------

/// Angular average. Implemented as the exact lattice-orbit projector: grid
/// points are grouped by their per-factor squared radii (exact integers) and
/// averaged per class. This makes T a true projector (T o T = T to roundoff),
/// exactly monotone and the identity on rotation-invariant fields; the
/// M-angle interpolated quadrature of the continuum definition is kept as a
/// consistency oracle in the tests.
ScalarField toric_average(const ScalarField& u);

/// M-angle interpolated circle average at one grid point (test oracle).
double toric_average_quadrature(const ScalarField& u, std::size_t p, int angles = 64);

/// Strip masses mu(Delta x ... x Delta_j(r) x ... x Delta) per factor.
std::vector<double> strip_masses(const GridMeasure& mu, int factor,
                                 const std::vector<double>& radii);

struct ToricBoundReport {
    double worst_exponent = 0.0;  // fitted decay of int (ball-avg u - u) dmu
    double strip_alpha = 0.0;     // measured strip exponent
    double beta_bound = 0.0;      // alpha / (alpha + 2) for the declared alpha
    std::vector<double> member_exponents;
};

/// Proposition 5.3: for a toric measure with strip exponent alpha, the decay
/// int_{Delta_n(t)} [ball-avg u - u] dmu <= C delta^beta, beta = alpha/(alpha+2).
/// The strip condition is pre-verified; StripConditionFailed below alpha_min.
ToricBoundReport toric_bound_check(const GridMeasure& mu,
                                   std::span<const ScalarField> corpus01,
                                   const std::vector<double>& deltas,
                                   double declared_alpha, double poly_radius = 0.25);

struct ToricVerdict {
    Verdict verdict = Verdict::INCONCLUSIVE;
    double strip_alpha = 0.0;
    double h_alpha_slope = 0.0;
    bool h_infinity_trend = false;
    double bound_exponent = 0.0;
};

/// Corollary 5.4 composite verdict for a toric measure.
ToricVerdict toric_verdict(const GridMeasure& mu, std::span<const ScalarField> corpus01,
                           const std::vector<double>& deltas, double declared_alpha);

} // namespace mahl
