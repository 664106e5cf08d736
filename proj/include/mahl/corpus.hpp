#pragma once

#include "mahl/field_core.hpp"
#include "mahl/ma_operator.hpp"

namespace mahl {

// Deterministic test-field corpora. Every member is scaled into its cone with
// a fixed margin by measuring the Hessian spectrum of the raw seed field, so
// membership is certified by construction and reproducible from the seed.

/// omega-psh fields on the periodic torus: g + H(u) >= margin pointwise.
/// When subharmonic_defect >= 0 the members are additionally rescaled so that
/// Delta u >= -4 n * subharmonic_defect (the nearly-subharmonic corpus used by
/// the flat-case Kiselman-Legendre checks).
std::vector<ScalarField> corpus_omega_psh(const TorusGrid& g, const KahlerBackground& bg,
                                          int count, std::uint64_t seed,
                                          double margin = 0.1,
                                          double subharmonic_defect = -1.0);

/// genuinely psh fields on a patch grid: H(u) >= 0 with margin
/// (periodic psh fields are constant, so these live on patches only).
std::vector<ScalarField> corpus_psh_patch(const TorusGrid& g, int count,
                                          std::uint64_t seed, double margin = 0.05);

/// smooth C^2 fields for the Jensen checks (no cone constraint).
std::vector<ScalarField> corpus_c2(const TorusGrid& g, int count, std::uint64_t seed);

/// bounded psh fields normalized into [0,1] on a patch (toric battery).
std::vector<ScalarField> corpus_psh01(const TorusGrid& g, int count, std::uint64_t seed);

/// patch psh corpus with log poles mollified at the given scale, pinned at
/// given centers (char_iii sharpening ladders).
std::vector<ScalarField> corpus_log_poles(const TorusGrid& g,
                                          const std::vector<std::size_t>& centers,
                                          double moll_scale);

/// random trig field with modes up to |k| <= kmax
ScalarField random_trig_field(const TorusGrid& g, Rng& rng, int kmax, double amp);

} // namespace mahl
