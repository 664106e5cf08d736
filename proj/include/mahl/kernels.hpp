#pragma once

#include "mahl/field_core.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace mahl {

// ---------------------------------------------------------------------------
// Execution policy.  Every hot grid sweep exists twice: a plain serial
// reference used by the parity tests, and an OpenMP version used by default.
// Both produce bit-identical output: per-point work is independent and all
// floating-point reductions run through the same deterministic serial
// pairwise pass, so results do not depend on the thread count or partition.
// ---------------------------------------------------------------------------

enum class Exec { serial, parallel };

Exec default_exec();
void set_default_exec(Exec e);
void set_thread_count(int k); // k >= 1; also flips default_exec to parallel

// parallel-for over [0, count) with static schedule
template <class Body>
void par_for(std::size_t count, Exec exec, const Body& body) {
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < (long long)count; ++i) body(std::size_t(i));
    } else {
        for (std::size_t i = 0; i < count; ++i) body(i);
    }
}

// ---------------------------------------------------------------------------
// Ball stencils: integer offsets with |w*h| <= radius, sorted by (|w|^2,
// lexicographic offset).  Shared by mollification, ball averages, sup
// convolution, exceptional sets and the modulus sweep.
// ---------------------------------------------------------------------------

struct BallStencil {
    TorusGrid grid;
    double radius = 0.0;
    std::vector<std::array<int, 2 * kMaxDim>> offsets;
    std::vector<double> r2;      // squared Euclidean length (in length units)
    std::vector<double> weight;  // kernel weights (uniform for plain averages)
    double weight_sum = 0.0;
    int reach = 0; // max |w_a| over axes, for patch margins

    std::size_t size() const { return offsets.size(); }
};

/// Offsets within the given radius. include_zero controls whether the center
/// point participates (mollification: yes; modulus sweep: no).
BallStencil ball_stencil(const TorusGrid& g, double radius, bool include_zero);

/// Weighted average of u over the stencil at every point (weights renormalized
/// to unit mass by the caller via stencil.weight_sum).  On patch grids only
/// points with margin >= stencil.reach are written; the rest copy u.
void stencil_average(const ScalarField& u, const BallStencil& s,
                     std::vector<double>& out, Exec exec);
void stencil_average_serial(const ScalarField& u, const BallStencil& s,
                            std::vector<double>& out);

/// Pointwise max of u over the stencil (sup convolution).
void stencil_max(const ScalarField& u, const BallStencil& s,
                 std::vector<double>& out, Exec exec);
void stencil_max_serial(const ScalarField& u, const BallStencil& s,
                        std::vector<double>& out);

/// Per-offset sup of |u(x+w) - u(x)| over all admissible x, for every offset
/// in the stencil.  The modulus of continuity at scale r is the running max
/// over offsets with |w| <= r.
void offset_sup_diff(const ScalarField& u, const BallStencil& s,
                     std::vector<double>& out, Exec exec);
void offset_sup_diff_serial(const ScalarField& u, const BallStencil& s,
                            std::vector<double>& out);

// ---------------------------------------------------------------------------
// Second-difference stencil sweeps (the discrete complex Hessian kernel).
// For each grid point and each (j,k) pair the sweep emits
// d^2 u / dz_j dz_bar_k assembled from central differences.  Output layout:
// packed upper triangle, point-major: for point p, entries
// [p*m + t] with t indexing (j<=k) pairs; diagonal entries are real.
// Patch grids: only interior points (margin 1) are written, others zero.
// ---------------------------------------------------------------------------

std::size_t herm_packed_size(int n);

void hessian_sweep(const ScalarField& u, std::vector<cplx>& out, Exec exec);
void hessian_sweep_serial(const ScalarField& u, std::vector<cplx>& out);

/// Deterministic reductions.
double reduce_sum(std::span<const double> xs); // pairwise, serial by design
struct MinLoc {
    double value;
    std::size_t index;
};
MinLoc reduce_min(std::span<const double> xs, Exec exec);
MinLoc reduce_min_serial(std::span<const double> xs);
MinLoc reduce_max(std::span<const double> xs, Exec exec);
MinLoc reduce_max_serial(std::span<const double> xs);

} // namespace mahl
