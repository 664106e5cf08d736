#pragma once

#include "mahl/field_core.hpp"
#include "mahl/kernels.hpp"

// ---------------------------------------------------------------------------
// Unit conventions (stated once, used everywhere):
//
//   * The discrete complex Hessian is H(u)_{jk} = d^2 u / dz_j dz_bar_k, so
//     H(|z|^2) = Id and H = Laplacian/4 at n = 1.
//   * The normalized MA density is det(g + H(u)) / det(g); the associated
//     measure det(g + H(u)) dV integrates to V_omega = det(g) for u = 0.
//   * Mapping to the d^c = (1/2 i pi)(d' - d'') normalization: with that
//     convention (dd^c |z|^2)^n = (2/pi)^n n! dV while det H(|z|^2) = 1, and
//     int omega^n = n! det(g) while V_omega = det(g). Every statement
//     exercised here is invariant under these constant factors; the radial
//     module calibrates the (dd^c)-unit conversion kappa_n numerically and
//     freezes it per dimension.
// ---------------------------------------------------------------------------

namespace mahl {

// ---------------------------------------------------------------------------
// Small Hermitian matrices (n <= kMaxDim), packed upper triangle.
// Eigenvalues: closed form for n = 1, 2; cyclic Jacobi beyond. Determinants
// are taken as eigenvalue products (the psh checks need the spectrum anyway,
// and this avoids sign pitfalls near the cone boundary).
// ---------------------------------------------------------------------------

/// Ascending eigenvalues of the packed Hermitian matrix a (upper triangle,
/// row-major pairs (j,k), j<=k).
void herm_eigenvalues(int n, const cplx* a, double* eig);

/// Per-point n x n complex Hermitian matrix field (omega-metric + discrete
/// complex Hessian of u lives here). Hermitian symmetry is exact by
/// construction: only the upper triangle is stored.
struct HermitianField {
    TorusGrid grid;
    int n = 1;
    std::vector<cplx> packed; // points * n(n+1)/2

    std::size_t stride() const { return herm_packed_size(n); }
    const cplx* row(std::size_t p) const { return packed.data() + p * stride(); }
};

/// Discrete complex Hessian of u: second-order central differences of
/// d^2 u / dz_j dz_bar_k, exact up to roundoff for cubic polynomials. Patch
/// grids are evaluated on the margin-1 interior, zero elsewhere.
HermitianField complex_hessian(const ScalarField& u, Exec exec = default_exec());

struct MAReport {
    ScalarField density;
    double min_eigenvalue = 0.0;
    std::size_t worst_point = 0;
    std::size_t psh_violations = 0; // points clamped (min eig < 0)
    bool clamped = false;
};

/// Normalized Monge-Ampere density det(g + H(u)) / det(g). The measure
/// MA(u) = density * det(g) dV integrates to V_omega for u = 0 exactly.
/// clamp = true floors negative eigenvalues at zero (iteration mode);
/// clamp = false throws NotOmegaPsh when the input leaves the psh cone by
/// more than tol_psh (default 10 h^2, the stencil consistency error).
MAReport ma_density(const ScalarField& u, const KahlerBackground& bg, bool clamp,
                    double tol_psh = -1.0, Exec exec = default_exec());

struct PshCheck {
    bool psh;
    double min_eigenvalue;
    std::size_t worst_point;
};

/// true iff min eigenvalue of g + H(u) >= -tol over the grid (interior mask
/// on patches).
PshCheck is_omega_psh(const ScalarField& u, const KahlerBackground& bg, double tol,
                      Exec exec = default_exec());

struct ComparisonReport {
    double mass_u = 0.0;     // int_{u > v + s} MA(u)
    double mass_v = 0.0;     // int_{u > v + s} MA(v)
    std::size_t set_points = 0;
    double tol_mass = 0.0;
    bool holds = false;      // mass_u <= mass_v + tol_mass
};

/// Comparison-principle check on {u > v + s}.
ComparisonReport comparison_check(const ScalarField& u, const ScalarField& v,
                                  const KahlerBackground& bg, double s,
                                  double tol_mass = -1.0);

/// Pullback sum scaled by binomial(n1+n2, n1)^{-1/(n1+n2)} on the product
/// grid, together with the background carrying the matching product metric.
struct ProductPotential {
    ScalarField u;
    KahlerBackground bg;
};
ProductPotential product_potential(const ScalarField& u1, const ScalarField& u2);

} // namespace mahl
