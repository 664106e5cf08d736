#pragma once

#include "mahl/report.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace mahl {

struct SelftestCheck {
    std::string suite;
    std::string name;
    bool pass = false;
    double value = 0.0;
    double threshold = 0.0;
};

struct SelftestReport {
    std::vector<SelftestCheck> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

/// Full invariant battery at desk resolution; writes selftest.csv, a verdict
/// JSON, two field files and the run manifest into out_dir. Deterministic
/// for a fixed seed.
SelftestReport run_selftest(const std::filesystem::path& out_dir, std::uint64_t seed);

} // namespace mahl
