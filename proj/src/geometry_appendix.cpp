#include "mahl/geometry_appendix.hpp"
#include "mahl/fit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mahl {

double ModelMetric::lambda(cplx z) const {
    switch (kind) {
        case Kind::flat: return 1.0;
        case Kind::sphere: return 2.0 / (1.0 + R0 * R0 * std::norm(z));
        case Kind::conformal: {
            const double x = z.real(), y = z.imag();
            return std::exp(qa * x + qb * y + qc * (x * x + y * y) +
                            qd * (x * x - y * y));
        }
    }
    return 1.0;
}

cplx ModelMetric::dlog_lambda(cplx z) const {
    switch (kind) {
        case Kind::flat: return {0.0, 0.0};
        case Kind::sphere:
            return -R0 * R0 * std::conj(z) / (1.0 + R0 * R0 * std::norm(z));
        case Kind::conformal: {
            const double x = z.real(), y = z.imag();
            const double qx = qa + 2.0 * (qc + qd) * x;
            const double qy = qb + 2.0 * (qc - qd) * y;
            return 0.5 * cplx(qx, -qy);
        }
    }
    return {0.0, 0.0};
}

cplx ModelMetric::d2log_lambda(cplx z) const {
    switch (kind) {
        case Kind::flat: return {0.0, 0.0};
        case Kind::sphere: {
            const double den = 1.0 + R0 * R0 * std::norm(z);
            return R0 * R0 * R0 * R0 * std::conj(z) * std::conj(z) / (den * den);
        }
        case Kind::conformal: return {qd, 0.0};
    }
    return {0.0, 0.0};
}

double ModelMetric::curvature(cplx z) const {
    switch (kind) {
        case Kind::flat: return 0.0;
        case Kind::sphere: return R0 * R0;
        case Kind::conformal: {
            const double l = lambda(z);
            return -4.0 * qc / (l * l);
        }
    }
    return 0.0;
}

double ModelMetric::curvature_bound() const {
    if (kind == Kind::flat) return 0.0;
    if (kind == Kind::sphere) return R0 * R0;
    double worst = 0.0;
    for (double x = -1.0; x <= 1.0; x += 0.125)
        for (double y = -1.0; y <= 1.0; y += 0.125)
            worst = std::max(worst, std::abs(curvature({x, y})));
    return worst;
}

ModelMetric ModelMetric::flat_metric() { return {}; }

ModelMetric ModelMetric::sphere_metric(double R0) {
    ModelMetric m;
    m.kind = Kind::sphere;
    m.R0 = R0;
    return m;
}

ModelMetric ModelMetric::conformal_metric(double a, double b, double c, double d) {
    ModelMetric m;
    m.kind = Kind::conformal;
    m.qa = a;
    m.qb = b;
    m.qc = c;
    m.qd = d;
    return m;
}

json ModelMetric::to_json() const {
    switch (kind) {
        case Kind::flat: return {{"kind", "flat"}};
        case Kind::sphere: return {{"kind", "sphere"}, {"R0", R0}};
        default:
            return {{"kind", "conformal"}, {"a", qa}, {"b", qb}, {"c", qc}, {"d", qd}};
    }
}

ModelMetric ModelMetric::from_json(const json& j) {
    const std::string kind = j.value("kind", "flat");
    if (kind == "flat") return flat_metric();
    if (kind == "sphere") return sphere_metric(j.value("R0", 1.0));
    if (kind == "conformal")
        return conformal_metric(j.value("a", 0.0), j.value("b", 0.0), j.value("c", 0.0),
                                j.value("d", 0.0));
    throw ConfigError("unknown metric kind " + kind);
}

// ---------------------------------------------------------------------------
// RK45 (Dormand-Prince) on a small fixed-size state.
// ---------------------------------------------------------------------------

namespace {

constexpr int kMaxState = 8;

struct Rhs {
    const ModelMetric* metric;
    int mode; // 0 geodesic(4), 1 +jacobi(8), 2 +transport(8: w real/imag in 4..6)

    void operator()(const double* y, double* dy) const {
        const cplx z{y[0], y[1]}, w{y[2], y[3]};
        const cplx acc = -2.0 * metric->dlog_lambda(z) * w * w;
        dy[0] = w.real();
        dy[1] = w.imag();
        dy[2] = acc.real();
        dy[3] = acc.imag();
        if (mode == 1) {
            const double l = metric->lambda(z);
            const double s2 = l * l * std::norm(w);
            const double K = metric->curvature(z);
            dy[4] = y[5];
            dy[5] = 0.0;               // tangential Jacobi
            dy[6] = y[7];
            dy[7] = -K * s2 * y[6];    // normal Jacobi
        } else if (mode == 2) {
            const cplx wt{y[4], y[5]};
            const cplx dwt = -2.0 * metric->dlog_lambda(z) * w * wt;
            dy[4] = dwt.real();
            dy[5] = dwt.imag();
            dy[6] = 0.0;
            dy[7] = 0.0;
        } else {
            dy[4] = dy[5] = dy[6] = dy[7] = 0.0;
        }
    }
};

// Dormand-Prince 5(4) coefficients
void rk45_step(const Rhs& f, const double* y, double h, double* out5, double* err) {
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    (void)c2;
    (void)c3;
    (void)c4;
    (void)c5;

    double k1[kMaxState], k2[kMaxState], k3[kMaxState], k4[kMaxState], k5[kMaxState],
        k6[kMaxState], k7[kMaxState], tmp[kMaxState];
    f(y, k1);
    for (int i = 0; i < kMaxState; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    f(tmp, k2);
    for (int i = 0; i < kMaxState; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    f(tmp, k3);
    for (int i = 0; i < kMaxState; ++i)
        tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    f(tmp, k4);
    for (int i = 0; i < kMaxState; ++i)
        tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    f(tmp, k5);
    for (int i = 0; i < kMaxState; ++i)
        tmp[i] = y[i] +
                 h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    f(tmp, k6);
    for (int i = 0; i < kMaxState; ++i)
        out5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                              b6 * k6[i]);
    f(out5, k7);
    for (int i = 0; i < kMaxState; ++i)
        err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                      e7 * k7[i]);
}

// integrate from t0 to t1, in place
void rk45_integrate(const Rhs& f, double* y, double t0, double t1, double tol) {
    if (t1 == t0) return;
    double t = t0;
    double h = (t1 - t0) * 0.1;
    int steps = 0;
    while ((t1 - t) * (t1 - t0) > 0.0) {
        if ((t + h - t1) * (t1 - t0) > 0.0) h = t1 - t;
        double out[kMaxState], err[kMaxState];
        rk45_step(f, y, h, out, err);
        double scale = 0.0, emax = 0.0;
        for (int i = 0; i < kMaxState; ++i) {
            scale = std::max(scale, std::abs(y[i]));
            emax = std::max(emax, std::abs(err[i]));
        }
        const double bound = tol * std::max(1.0, scale);
        if (emax <= bound) {
            for (int i = 0; i < kMaxState; ++i) y[i] = out[i];
            t += h;
            h *= std::min(4.0, 0.9 * std::pow(bound / std::max(emax, 1e-300), 0.2));
        } else {
            h *= std::max(0.1, 0.9 * std::pow(bound / emax, 0.2));
        }
        if (std::abs(h) < 1e-15 || ++steps > 2000000)
            throw IntegratorFailure("RK45 step collapse");
    }
}

} // namespace

GeodesicPath geodesic_integrate(const ModelMetric& metric, cplx z0, cplx v0, double T,
                                int n_samples, double tol) {
    GeodesicPath path;
    path.metric = metric;
    path.z0 = z0;
    path.v0 = v0;
    path.T = T;
    path.speed = metric.lambda(z0) * std::abs(v0);
    path.samples.resize(std::size_t(n_samples));
    if (std::abs(v0) == 0.0) {
        for (int k = 0; k < n_samples; ++k)
            path.samples[std::size_t(k)] = {T * k / (n_samples - 1), z0, {0.0, 0.0}};
        return path;
    }
    Rhs f{&metric, 0};
    double y[kMaxState] = {z0.real(), z0.imag(), v0.real(), v0.imag(), 0, 0, 0, 0};
    double drift = 0.0;
    for (int k = 0; k < n_samples; ++k) {
        const double tk = T * k / (n_samples - 1);
        if (k > 0) rk45_integrate(f, y, T * (k - 1) / (n_samples - 1), tk, tol);
        const cplx z{y[0], y[1]}, w{y[2], y[3]};
        path.samples[std::size_t(k)] = {tk, z, w};
        const double sp = metric.lambda(z) * std::abs(w);
        drift = std::max(drift, std::abs(sp - path.speed) / std::max(path.speed, 1e-300));
    }
    path.energy_drift = drift;
    return path;
}

cplx JacobiState::v_coord(std::size_t sample) const {
    const PathSample& s = path.samples[sample];
    if (std::abs(s.zdot) == 0.0) return {a[sample], b[sample]};
    // e1 in coordinates: unit g-norm along the geodesic direction
    const cplx e1 = s.zdot / (std::abs(s.zdot) * path.metric.lambda(s.z));
    return cplx{a[sample], b[sample]} * e1;
}

JacobiState jacobi_integrate(const ModelMetric& metric, const GeodesicPath& path,
                             cplx v0, cplx v1, double tol) {
    JacobiState st;
    st.path = path;
    st.v0 = v0;
    st.v1 = v1;
    const std::size_t m = path.samples.size();
    st.a.resize(m);
    st.a_dot.resize(m);
    st.b.resize(m);
    st.b_dot.resize(m);
    if (std::abs(path.v0) == 0.0) throw IntegratorFailure("jacobi needs zeta != 0");

    // frame components of the initial data: e1(0) has coordinate form
    // v0_coord / (lambda |v0_coord|) scaled to unit g-norm
    const cplx e1_coord = path.v0 / std::abs(path.v0) / metric.lambda(path.z0);
    auto to_frame = [&](cplx vec) {
        // vec = (alpha + i beta) e1_coord
        const cplx comp = vec / e1_coord;
        return comp;
    };
    const cplx f0 = to_frame(v0), f1 = to_frame(v1);

    Rhs f{&metric, 1};
    double y[kMaxState] = {path.z0.real(), path.z0.imag(), path.v0.real(),
                           path.v0.imag(), f0.real(),      f1.real(),
                           f0.imag(),      f1.imag()};
    // step-doubling residual proxy on the full interval
    double y_coarse[kMaxState];
    std::copy(y, y + kMaxState, y_coarse);
    rk45_integrate(f, y_coarse, 0.0, path.T, tol * 100.0);

    for (std::size_t k = 0; k < m; ++k) {
        if (k > 0)
            rk45_integrate(f, y, path.samples[k - 1].t, path.samples[k].t, tol);
        st.a[k] = y[4];
        st.a_dot[k] = y[5];
        st.b[k] = y[6];
        st.b_dot[k] = y[7];
    }
    st.residual_estimate =
        std::max(std::abs(y_coarse[4] - st.a[m - 1]), std::abs(y_coarse[6] - st.b[m - 1]));
    return st;
}

std::vector<cplx> parallel_transport(const ModelMetric& metric,
                                     const GeodesicPath& path, cplx w0, double tol) {
    const std::size_t m = path.samples.size();
    std::vector<cplx> out(m);
    if (std::abs(path.v0) == 0.0) {
        std::fill(out.begin(), out.end(), w0);
        return out;
    }
    Rhs f{&metric, 2};
    double y[kMaxState] = {path.z0.real(), path.z0.imag(), path.v0.real(),
                           path.v0.imag(), w0.real(),      w0.imag(),
                           0.0,            0.0};
    out[0] = w0;
    for (std::size_t k = 1; k < m; ++k) {
        rk45_integrate(f, y, path.samples[k - 1].t, path.samples[k].t, tol);
        out[k] = {y[4], y[5]};
    }
    return out;
}

cplx exp_differential(const ModelMetric& metric, cplx z, cplx zeta, cplx h, cplx w1) {
    GeodesicPath path = geodesic_integrate(metric, z, zeta, 1.0, 65);
    JacobiState st = jacobi_integrate(metric, path, h, w1);
    // tau^{-1} v(1) = frame components as a coordinate vector at z
    const cplx e1_coord = zeta / std::abs(zeta) / metric.lambda(z);
    return st.v_frame(path.samples.size() - 1) * e1_coord;
}

GronwallReport gronwall_bound_check(const JacobiState& state, double R0) {
    const GeodesicPath& path = state.path;
    const cplx e1_coord = path.v0 / std::abs(path.v0) / path.metric.lambda(path.z0);
    const cplx f0 = state.v0 / e1_coord;
    const cplx f1 = state.v1 / e1_coord;
    const double n0 = std::abs(f0), n1 = std::abs(f1);
    const double zeta_norm = path.speed;
    const double w = std::sqrt(2.0) * R0 * zeta_norm;

    GronwallReport rep;
    rep.min_slack = 1e300;
    for (std::size_t k = 0; k < path.samples.size(); ++k) {
        const double t = path.samples[k].t;
        const cplx vt = state.v_frame(k);
        const double dev = std::abs(vt - f0 - f1 * t);
        double bound;
        if (w * t < 1e-8) {
            bound = 0.5 * n0 * w * t * w * t +
                    n1 * (w * t) * (w * t) * t / 6.0; // cosh/sinh Taylor tails
        } else {
            bound = n0 * std::cosh(w * t) + n1 / w * std::sinh(w * t) - n0 - n1 * t;
        }
        rep.max_deviation = std::max(rep.max_deviation, dev);
        rep.min_slack = std::min(rep.min_slack, bound - dev);
    }
    return rep;
}

TaylorReport taylor_expansion_check(const ModelMetric& metric, cplx z0,
                                    const std::vector<double>& ladder, int directions) {
    // holomorphic normal chart at z0 to third order:
    //   w = l0 [(z-z0) + qz (z-z0)^2 + beta (z-z0)^3],
    // qz kills the first metric derivative, beta = (qzz + 2 qz^2)/3 kills the
    // pure-holomorphic second derivative; what remains at order two is the
    // curvature term alone.
    const double l0 = metric.lambda(z0);
    const cplx qz = metric.dlog_lambda(z0);
    const cplx beta = (metric.d2log_lambda(z0) + 2.0 * qz * qz) / 3.0;
    auto chart = [&](cplx z) {
        const cplx d = z - z0;
        return l0 * (d + qz * d * d + beta * d * d * d);
    };
    // chart sanity: metric 1 at center, first derivatives killed, and the
    // remaining pure second derivative gone
    {
        const double eps = 1e-4;
        auto lam_tilde = [&](cplx w) {
            cplx z = z0 + w / l0;
            for (int it = 0; it < 30; ++it) {
                const cplx d = z - z0;
                const cplx F = l0 * (d + qz * d * d + beta * d * d * d) - w;
                const cplx dF = l0 * (1.0 + 2.0 * qz * d + 3.0 * beta * d * d);
                z -= F / dF;
            }
            const cplx d = z - z0;
            const double jac = std::abs(l0 * (1.0 + 2.0 * qz * d + 3.0 * beta * d * d));
            return metric.lambda(z) / jac;
        };
        const double center = lam_tilde({0.0, 0.0});
        const double gx = (lam_tilde({eps, 0.0}) - lam_tilde({-eps, 0.0})) / (2 * eps);
        const double gy = (lam_tilde({0.0, eps}) - lam_tilde({0.0, -eps})) / (2 * eps);
        // pure-holomorphic second derivative: Re/Im parts of
        // d^2 lam/dw^2 = (xx - yy)/4-type combinations
        const double lxx = (lam_tilde({eps, 0.0}) - 2.0 * center + lam_tilde({-eps, 0.0})) / (eps * eps);
        const double lyy = (lam_tilde({0.0, eps}) - 2.0 * center + lam_tilde({0.0, -eps})) / (eps * eps);
        const double lxy = (lam_tilde({eps, eps}) - lam_tilde({eps, -eps}) -
                            lam_tilde({-eps, eps}) + lam_tilde({-eps, -eps})) /
                           (4.0 * eps * eps);
        const cplx pure2 = 0.25 * cplx(lxx - lyy, -2.0 * lxy);
        if (std::abs(center - 1.0) > 1e-9 || std::abs(gx) > 1e-5 ||
            std::abs(gy) > 1e-5 || std::abs(pure2) > 1e-4)
            throw NormalCoordinatesFailure("chart failed to normalize the metric");
    }

    const double K = metric.curvature(z0);
    TaylorReport rep;
    for (double s : ladder) {
        double worst = 0.0;
        for (int d = 0; d < directions; ++d) {
            const double th = 2.0 * std::numbers::pi * d / directions;
            const cplx zeta_w = s * cplx(std::cos(th), std::sin(th));
            const cplx zeta_coord = zeta_w / l0;
            GeodesicPath path = geodesic_integrate(metric, z0, zeta_coord, 1.0, 17);
            const cplx w_end = chart(path.samples.back().z);
            const cplx predicted =
                zeta_w + K / 12.0 * std::norm(zeta_w) * zeta_w;
            worst = std::max(worst, std::abs(w_end - predicted));
        }
        rep.scales.push_back(s);
        rep.residuals.push_back(worst);
    }
    rep.order = fit_loglog(rep.scales, rep.residuals, 3, 1e-300).slope;
    return rep;
}

} // namespace mahl
