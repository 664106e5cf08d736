#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mahl {

struct MahlError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define MAHL_ERROR_TYPE(Name)                                                  \
    struct Name : MahlError {                                                  \
        using MahlError::MahlError;                                            \
    }

MAHL_ERROR_TYPE(InvalidResolution);
MAHL_ERROR_TYPE(NonFinite);
MAHL_ERROR_TYPE(FormatError);
MAHL_ERROR_TYPE(GridMismatch);
MAHL_ERROR_TYPE(DeltaTooSmall);
MAHL_ERROR_TYPE(PatchTooSmall);
MAHL_ERROR_TYPE(QuadratureFailure);
MAHL_ERROR_TYPE(MonotonicityViolation);
MAHL_ERROR_TYPE(TOutOfRange);
MAHL_ERROR_TYPE(NonzeroMean);
MAHL_ERROR_TYPE(MassMismatch);
MAHL_ERROR_TYPE(NonConvergence);
MAHL_ERROR_TYPE(DegenerateDensity);
MAHL_ERROR_TYPE(NotConvex);
MAHL_ERROR_TYPE(NonConvergentLadder);
MAHL_ERROR_TYPE(StripConditionFailed);
MAHL_ERROR_TYPE(HInfinityFailed);
MAHL_ERROR_TYPE(LadderOutOfRange);
MAHL_ERROR_TYPE(DegenerateFamily);
MAHL_ERROR_TYPE(NotSubharmonic);
MAHL_ERROR_TYPE(IntegratorFailure);
MAHL_ERROR_TYPE(NormalCoordinatesFailure);
MAHL_ERROR_TYPE(ConfigError);

struct NotOmegaPsh : MahlError {
    double min_eigenvalue;
    std::size_t worst_point;
    NotOmegaPsh(const std::string& msg, double eig, std::size_t pt)
        : MahlError(msg), min_eigenvalue(eig), worst_point(pt) {}
};

#undef MAHL_ERROR_TYPE

// Deterministic 64-bit generator (splitmix64). We avoid std::uniform_*
// distributions on purpose: their output is library-specific, and artifact
// byte-determinism is part of the contract.
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    // uniform in [0,1) with 53-bit resolution
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }
};

// Pairwise summation over a contiguous buffer. Deterministic for a fixed
// input order, O(log n) rounding growth. All grid integrals go through this.
double pairwise_sum(std::span<const double> xs);

// Kahan-compensated accumulator for short sequential loops.
struct KahanSum {
    double sum = 0.0, carry = 0.0;
    void add(double x) {
        double y = x - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

// Adaptive Simpson quadrature; throws QuadratureFailure when the tolerance
// cannot be reached within the depth budget.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth = 48);

} // namespace mahl
