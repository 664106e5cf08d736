#pragma once

#include "mahl/util.hpp"

#include <array>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

namespace mahl {

using json = nlohmann::json;
using cplx = std::complex<double>;

enum class GridKind { periodic, patch };

constexpr int kMaxDim = 4; // complex dimension; desk scale stops well below

/// Discretization of the unit torus (C^n mod Z^2n) or of a unit patch chart.
/// Real coordinates are (x_1, y_1, ..., x_n, y_n); each axis has N points of
/// spacing h = 1/N (exact in binary for power-of-two N). Points are
/// enumerated row-major with y_n fastest. Patch grids are centered at the
/// origin, carry no wraparound and expose interior-only masks.
struct TorusGrid {
    int n = 1;
    int N = 8;
    double h = 0.125;
    GridKind kind = GridKind::periodic;

    int dims() const { return 2 * n; }
    std::size_t points() const {
        std::size_t p = 1;
        for (int a = 0; a < dims(); ++a) p *= std::size_t(N);
        return p;
    }
    double cell_volume() const {
        double v = 1.0;
        for (int a = 0; a < dims(); ++a) v *= h;
        return v;
    }
    bool periodic() const { return kind == GridKind::periodic; }

    // multi-index <-> linear index
    void decode(std::size_t idx, int* c) const {
        for (int a = dims() - 1; a >= 0; --a) {
            c[a] = int(idx % std::size_t(N));
            idx /= std::size_t(N);
        }
    }
    std::size_t encode(const int* c) const {
        std::size_t idx = 0;
        for (int a = 0; a < dims(); ++a) idx = idx * std::size_t(N) + std::size_t(c[a]);
        return idx;
    }
    // coordinate of axis index: periodic grids cover [0,1), patches [-1/2,1/2)
    double coord(int ci) const {
        return periodic() ? ci * h : ci * h - 0.5;
    }
    void point(std::size_t idx, double* x) const {
        int c[2 * kMaxDim];
        decode(idx, c);
        for (int a = 0; a < dims(); ++a) x[a] = coord(c[a]);
    }
    bool interior(std::size_t idx, int margin) const {
        if (periodic()) return true;
        int c[2 * kMaxDim];
        decode(idx, c);
        for (int a = 0; a < dims(); ++a)
            if (c[a] < margin || c[a] >= N - margin) return false;
        return true;
    }

    bool operator==(const TorusGrid& o) const {
        return n == o.n && N == o.N && kind == o.kind;
    }
};

TorusGrid make_grid(int n, int N, GridKind kind);

/// Flat quotient metric: per-axis minimal wrapped difference, Euclidean norm.
/// On patch grids this is the plain Euclidean distance.
double torus_distance(const TorusGrid& g, const double* a, const double* b);
double torus_distance(const TorusGrid& g, std::size_t ia, std::size_t ib);

/// Real-valued grid function. Finite everywhere by construction; statistics
/// are deterministic (pairwise summation, exact max/min).
struct ScalarField {
    TorusGrid grid;
    std::vector<double> v;

    ScalarField() = default;
    ScalarField(const TorusGrid& g, std::vector<double> values);
    static ScalarField constant(const TorusGrid& g, double value);

    double operator[](std::size_t i) const { return v[i]; }
    double& at(std::size_t i) { return v[i]; }
    std::size_t size() const { return v.size(); }

    double sup() const;
    double inf() const;
    double mean() const;
    double osc() const { return sup() - inf(); }
    /// discrete integral against Lebesgue dV (cell volume weights)
    double integral() const;
};

/// Integral of (pointwise product of fields) dV; deterministic.
double integral_product(const ScalarField& a, const ScalarField& b);

/// Constant Hermitian metric matrix g, its volume, and the curvature
/// constants used by the regularization estimates. Flat torus: g = Id,
/// A = K = 0; V_omega = det(g) in the unit-volume normalization (int omega^n
/// in form units equals n! det g; every statement exercised here is
/// invariant under that constant, so we normalize once and document it).
struct KahlerBackground {
    int n = 1;
    std::array<cplx, kMaxDim * kMaxDim> g{}; // row-major n x n
    double V_omega = 1.0;
    double det_g = 1.0;
    double A = 0.0; // lower bound for the negative part of bisectional curvature
    double K = 0.0; // monotonicity constant of t -> rho_t u + K t^2

    cplx gij(int i, int j) const { return g[std::size_t(i) * n + j]; }
};

KahlerBackground flat_background(int n);
/// Diagonal constant metric (used by the product construction).
KahlerBackground diagonal_background(int n, const std::vector<double>& diag);

/// Grid density plus a finite list of atoms. total is recomputed on
/// construction and must match integral + sum of atom masses to 1e-10.
struct GridMeasure {
    ScalarField density;
    struct Atom {
        std::size_t point;
        double mass;
    };
    std::vector<Atom> atoms;
    double total = 0.0;

    static GridMeasure from_density(ScalarField density);
    static GridMeasure with_atoms(ScalarField density, std::vector<Atom> atoms);
    bool has_atoms() const { return !atoms.empty(); }
    /// integral of density restricted to a mask, plus atoms inside it
    double mass_on(const std::vector<std::uint8_t>& mask) const;
};

// ---------------------------------------------------------------------------
// Symbolic field descriptors.  Every experiment input is a descriptor, so a
// run is reproducible from its config alone.  Singular descriptors clip at
// an explicit floor (default -1e12); clipped evaluations are counted.
// ---------------------------------------------------------------------------

struct FieldDescriptor {
    // kinds:
    //  constant         value
    //  trig             modes: list of {amp, k[2n], phase}; sum of cosines
    //  dist_power       coef * max(dist(z,center), r_floor)^exponent
    //  log_dist         max(log dist(z,center), floor)
    //  smooth_log_pole  0.5*weight*log(eps^2 + smooth_dist2(z,center))
    //  smooth_dist2     sum_j (1 - cos 2 pi (x_j - c_j)) / (2 pi^2)  (periodic |z-c|^2 analogue)
    //  radial_chi       chi(log dist(z,center)) for a radial profile (see radial_toric)
    //  ring             smoothed uniform measure on {dist = radius}, gaussian width
    //  sum / scale      combinators
    std::string kind;
    double value = 0.0;
    double coef = 1.0;
    double exponent = 0.0;
    double floor = -1e12;
    double r_floor = 0.0;
    double eps = 0.0;
    double weight = 1.0;
    double radius = 0.0;
    double width = 0.0;
    std::vector<double> center;
    struct Mode {
        double amp;
        std::vector<int> k;
        double phase;
    };
    std::vector<Mode> modes;
    std::vector<FieldDescriptor> terms; // for sum
    json profile;                       // for radial_chi

    json to_json() const;
    static FieldDescriptor from_json(const json& j);
};

struct SampleReport {
    ScalarField field;
    std::size_t clipped = 0; // points where the clip floor engaged
};

/// Pointwise evaluation of a descriptor on a grid. Deterministic; throws
/// NonFinite if a value is not finite after clipping.
SampleReport sample(const TorusGrid& g, const FieldDescriptor& d);
ScalarField sample_field(const TorusGrid& g, const FieldDescriptor& d);

// ---------------------------------------------------------------------------
// Field file format: one UTF-8 JSON header line
//   {"magic":"mahl-field","version":1,"n":...,"N":...,"kind":...}\n
// followed by raw little-endian float64 payload in row-major order.
// ---------------------------------------------------------------------------

void field_io_write(const ScalarField& f, const std::string& path);
ScalarField field_io_read(const std::string& path);

} // namespace mahl
