#pragma once

#include "mahl/field_core.hpp"
#include "mahl/fit.hpp"
#include "mahl/kernels.hpp"
#include "mahl/regularization.hpp"

#include <span>

namespace mahl {

// ---------------------------------------------------------------------------
// Modulus of continuity and Hoelder exponent estimation.
// ---------------------------------------------------------------------------

struct ModulusTable {
    std::vector<double> r;
    std::vector<double> omega; // sup over pairs at distance <= r of |u(x)-u(y)|
};

/// Exact neighborhood sweep at grid resolution: for each ladder scale the sup
/// runs over every grid pair within that distance.
ModulusTable modulus_of_continuity(const ScalarField& u,
                                   const std::vector<double>& ladder,
                                   Exec exec = default_exec());

struct HolderFit {
    double alpha = 0.0; // capped at 1
    double C = 0.0;
    double residual = 0.0;
    bool capped = false;
    bool drift_flag = false; // window slopes drift monotonically toward 0
    std::vector<double> scales;
    LineFit raw;
};

HolderFit holder_fit(const ScalarField& u, const std::vector<double>& ladder,
                     Exec exec = default_exec());
HolderFit holder_fit_from_table(const ModulusTable& table);

/// Default modulus ladder for a grid: >= 6 scales spanning >= 1.5 decades
/// inside (2h, diameter/4).
std::vector<double> default_modulus_ladder(const TorusGrid& g, int count = 8);

struct ExceptionalSet {
    std::vector<std::uint8_t> mask; // rho_delta u - u > delta^alpha
    double volume_fraction = 0.0;
    double delta = 0.0;
    double alpha = 0.0;
};

ExceptionalSet exceptional_set(const ScalarField& u, double delta, double alpha,
                               const KernelSpec& kernel, Exec exec = default_exec());

// ---------------------------------------------------------------------------
// Theorem 4.3 (iii): int_K [ball-avg u - u] dmu <= C int_D Laplacian(u) delta^alpha.
// ---------------------------------------------------------------------------

struct CharIIIResult {
    double alpha = 0.0;    // worst fitted exponent over the corpus
    double constant = 0.0; // fitted constant for the worst member
    double residual = 0.0;
    std::vector<double> member_alpha;
    bool pass = false;
};

/// pass iff the worst fitted exponent clears pass_alpha with residual below
/// pass_residual. Members whose left side vanishes identically fit as "no
/// constraint" and are skipped.
CharIIIResult char_iii_test(std::span<const ScalarField> corpus, const GridMeasure& mu,
                            const std::vector<std::uint8_t>& K,
                            const std::vector<double>& deltas,
                            double pass_alpha = 0.05, double pass_residual = 0.75,
                            Exec exec = default_exec());

enum class Verdict { PASS, FAIL, INCONCLUSIVE };
const char* verdict_name(Verdict v);

/// Discrimination rule over a mollification-sharpening ladder of corpora
/// (coarse to sharp): FAIL when the fitted exponent collapses or decays
/// monotonically toward zero as the poles sharpen.
Verdict char_iii_verdict(const std::vector<CharIIIResult>& by_sharpness);

// ---------------------------------------------------------------------------
// Proposition 4.1 (n = 1) equivalences.
// ---------------------------------------------------------------------------

struct Dim1Report {
    HolderFit holder;          // (i)
    double ball_mass_alpha;    // (ii) worst ball-mass exponent over centers
    double shell_alpha;        // (iii) worst shell-decay exponent for log poles
    bool consistent;
    Verdict verdict;
};

Dim1Report dim1_equivalence(const ScalarField& phi, const GridMeasure& mu,
                            const std::vector<double>& r_ladder,
                            Exec exec = default_exec());

// ---------------------------------------------------------------------------
// Remark 4.2 subharmonic growth equivalences at a center point.
// ---------------------------------------------------------------------------

struct Remark42Report {
    double sup_alpha = 0.0;   // (1)
    double mean_alpha = 0.0;  // (2)
    double mass_alpha = 0.0;  // (3), already shifted down by m-2
    bool consistent = false;  // pairwise within the 0.1 band
};

Remark42Report remark_4_2_checks(const ScalarField& u, std::size_t center,
                                 const std::vector<double>& ladder,
                                 double subharmonic_tol = -1.0,
                                 Exec exec = default_exec());

/// mu(B(a,r)) over a radius ladder for one center (shared helper).
std::vector<double> ball_masses(const GridMeasure& mu, std::size_t center,
                                const std::vector<double>& radii);

} // namespace mahl
