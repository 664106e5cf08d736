#pragma once

#include "mahl/field_core.hpp"

#include <complex>
#include <vector>

namespace mahl {

// ---------------------------------------------------------------------------
// Model metrics on a 1-complex-dimensional patch: conformal ds = lambda |dz|.
//   flat          lambda = 1, curvature 0
//   sphere(R0)    lambda = 2 / (1 + R0^2 |z|^2), Gauss curvature R0^2
//   conformal     lambda = exp(q), q = a Re z + b Im z + c |z|^2 + d Re(z^2);
//                 curvature -4c e^{-2q}
// ---------------------------------------------------------------------------

struct ModelMetric {
    enum class Kind { flat, sphere, conformal };
    Kind kind = Kind::flat;
    double R0 = 1.0;                          // sphere curvature = R0^2
    double qa = 0, qb = 0, qc = 0, qd = 0;    // conformal exponent coefficients

    double lambda(cplx z) const;
    cplx dlog_lambda(cplx z) const;  // d/dz log lambda
    cplx d2log_lambda(cplx z) const; // d^2/dz^2 log lambda (normal charts)
    double curvature(cplx z) const;
    double curvature_bound() const; // sup |K| on the working patch (|z| <= 1)

    static ModelMetric flat_metric();
    static ModelMetric sphere_metric(double R0);
    static ModelMetric conformal_metric(double a, double b, double c, double d);
    json to_json() const;
    static ModelMetric from_json(const json& j);
};

struct PathSample {
    double t;
    cplx z;
    cplx zdot; // coordinate velocity
};

struct GeodesicPath {
    ModelMetric metric;
    cplx z0, v0; // initial point and coordinate velocity
    double T = 1.0;
    double speed = 0.0;        // |gamma'|_g = lambda(z0) |v0|
    double energy_drift = 0.0; // max relative speed drift along the samples
    std::vector<PathSample> samples;
};

/// Adaptive RK45 integration of z'' + 2 (dlog lambda) z'^2 = 0; samples on a
/// uniform t-lattice. Degenerate zeta = 0 yields the constant path.
GeodesicPath geodesic_integrate(const ModelMetric& metric, cplx z0, cplx v0, double T,
                                int n_samples = 129, double tol = 1e-10);

struct JacobiState {
    GeodesicPath path;
    // components in the parallel frame (e1 = gamma'/|gamma'|, e2 = i e1):
    std::vector<double> a, a_dot; // tangential
    std::vector<double> b, b_dot; // normal: b'' = -K(gamma) speed^2 b
    cplx v0, v1;                  // initial value / covariant derivative (coords)
    double residual_estimate = 0.0; // step-doubling error proxy
    /// v(t) as a coordinate vector at gamma(t)
    cplx v_coord(std::size_t sample) const;
    /// frame components = parallel transport back to T_z X
    cplx v_frame(std::size_t sample) const {
        return {a[sample], b[sample]};
    }
};

JacobiState jacobi_integrate(const ModelMetric& metric, const GeodesicPath& path,
                             cplx v0, cplx v1, double tol = 1e-10);

/// Parallel transport of w0 along the geodesic by the connection ODE
/// w' = -2 (dlog lambda) zdot w; returns coordinate vectors at the samples.
std::vector<cplx> parallel_transport(const ModelMetric& metric,
                                     const GeodesicPath& path, cplx w0,
                                     double tol = 1e-10);

/// tau^{-1}-transported differential of exp: v(1) in the initial frame for
/// the Cauchy data v(0) = h, Dv(0) = w1.
cplx exp_differential(const ModelMetric& metric, cplx z, cplx zeta, cplx h, cplx w1);

struct GronwallReport {
    double min_slack = 0.0;     // min over samples of bound - deviation
    double max_deviation = 0.0; // max |v~(t) - v0 - v1 t|
};

/// |v~(t) - v0 - v1 t| against the cosh/sinh comparison bound with curvature
/// bound R0^2.
GronwallReport gronwall_bound_check(const JacobiState& state, double R0);

struct TaylorReport {
    std::vector<double> scales;
    std::vector<double> residuals; // max over directions per scale
    double order = 0.0;            // fitted decay order
};

/// Third-order expansion of exp at the center of a numerically constructed
/// holomorphic normal chart: residual of exp_z(zeta) - zeta - (K/12)|zeta|^2 zeta
/// over the given |zeta| ladder; NormalCoordinatesFailure when the chart does
/// not normalize the metric.
TaylorReport taylor_expansion_check(const ModelMetric& metric, cplx z0,
                                    const std::vector<double>& ladder,
                                    int directions = 8);

} // namespace mahl
