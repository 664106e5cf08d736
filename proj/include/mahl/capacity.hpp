#pragma once

#include "mahl/field_core.hpp"
#include "mahl/fit.hpp"
#include "mahl/ma_operator.hpp"

namespace mahl {

struct CompactSet {
    std::vector<std::uint8_t> mask;
    std::string label;
    bool empty() const {
        for (auto b : mask)
            if (b) return false;
        return true;
    }
    std::size_t count() const {
        std::size_t c = 0;
        for (auto b : mask) c += b;
        return c;
    }
};

CompactSet ball_set(const TorusGrid& g, std::size_t center, double radius,
                    const std::string& label = "");
std::vector<CompactSet> ball_family(const TorusGrid& g, std::size_t center,
                                    const std::vector<double>& radii);
CompactSet sublevel_set(const ScalarField& u, double level,
                        const std::string& label = "");

// ---------------------------------------------------------------------------
// Relative extremal function: the largest omega-psh u with u <= 0 on X and
// u <= -1 on K. Realized with projected red-black SOR on the obstacle
// problem (n = 1 exactly: MA(u) = 0 off the contact set means
// Delta u = -4 det g; n >= 2 uses the trace condition with a post-hoc
// eigenvalue certificate). Deterministic sweep order.
// ---------------------------------------------------------------------------

struct ExtremalOptions {
    double tol = 1e-10;     // sup-change per sweep at the fixed point
    int max_sweeps = 200000;
    double omega = -1.0;    // SOR factor; default 2/(1+sin(pi h))
};

ScalarField relative_extremal(const CompactSet& K, const KahlerBackground& bg,
                              const TorusGrid& g, const ExtremalOptions& opts = {});

struct CapacityReport {
    double capacity = 0.0;
    double competitor_best = 0.0; // best dictionary competitor mass on K
    ScalarField extremal;
};

/// Cap_omega(K): Monge-Ampere mass of the shifted extremal function on K
/// (clamped density; the contact-set kinks are one-sided). Cross-checked
/// against a dictionary of admissible competitors.
CapacityReport capacity_report(const CompactSet& K, const KahlerBackground& bg,
                               const TorusGrid& g, const ExtremalOptions& opts = {});
double capacity(const CompactSet& K, const KahlerBackground& bg, const TorusGrid& g);

// ---------------------------------------------------------------------------
// H(alpha) fits: mu(K) <= C_alpha Cap(K)^{1+alpha}.
// ---------------------------------------------------------------------------

struct HAlphaFit {
    double alpha = 0.0;     // largest certified alpha = slope - 1
    double C_alpha = 0.0;
    double residual = 0.0;
    double cap_span_decades = 0.0;
    bool narrow_span = false; // capacity span below 2 decades (log-capacity
                              // regimes cannot reach it; flagged, not fatal)
    bool h_infinity_trend = false; // slope grows as the family scale shrinks
    std::vector<double> capacities;
    std::vector<double> masses;
};

HAlphaFit h_alpha_fit(const GridMeasure& mu, const std::vector<CompactSet>& family,
                      const KahlerBackground& bg);

struct DominationReport {
    HAlphaFit mu_fit;   // alpha
    HAlphaFit fmu_fit;  // beta
};

/// Two fits as in h_alpha_fit: one for mu(K), one for int_K f dmu.
DominationReport domination_check(const GridMeasure& mu, const ScalarField& f,
                                  double p, const std::vector<CompactSet>& family,
                                  const KahlerBackground& bg);

} // namespace mahl
