#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bnmimo::selftest {

struct Options {
    std::uint64_t seed = 1;
    std::size_t instances = 2000; // random instances per property
    /// Negative control: corrupt one entry of every constructed complement.
    bool inject_fault = false;
};

struct PropertyResult {
    std::string name;
    bool passed = false;
    double worst = 0.0; // largest residual seen
    double tolerance = 0.0;
    std::size_t instances = 0;
};

struct Report {
    std::vector<PropertyResult> properties;
    std::uint64_t hash = 0; // FNV-1a of the property lines

    bool passed() const;
    /// One "PASS|FAIL name ..." line per property, then "report-hash <hex>".
    std::string text() const;
};

Report run(const Options& opts);

} // namespace bnmimo::selftest
