#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hardylab/types.hpp"

namespace hardylab {

/// One named residual check against its threshold.
struct CheckRecord {
    std::string name;
    double residual = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

/// Structured record of a theorem verification: named residual checks,
/// residual traces, and the environment that produced them.
struct VerificationReport {
    std::string scenario_id;
    std::vector<CheckRecord> checks;
    std::map<std::string, std::vector<double>> traces;
    TruncationConfig environment;
    std::uint64_t seed = 0;
    double wall_time_ms = 0.0;

    void add(const std::string& name, double residual, double threshold) {
        checks.push_back({name, residual, threshold, residual <= threshold});
    }

    /// Boolean assertion encoded as a 0/1 residual against threshold 0.5.
    void add_flag(const std::string& name, bool ok) {
        checks.push_back({name, ok ? 0.0 : 1.0, 0.5, ok});
    }

    void merge(const VerificationReport& other, const std::string& prefix = "") {
        for (const auto& c : other.checks)
            checks.push_back({prefix + c.name, c.residual, c.threshold, c.pass});
        for (const auto& [k, v] : other.traces) traces[prefix + k] = v;
    }

    bool passed() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }

    double worst_residual() const {
        double w = 0.0;
        for (const auto& c : checks) w = std::max(w, c.residual);
        return w;
    }
};

} // namespace hardylab
