#pragma once

#include <cstdint>
#include <cstdlib>
#include <limits>
#include <string>

#include "error.hpp"

namespace lmdp {

/// Cap on the number of leaves an exact enumeration may visit.
struct Budget {
    std::uint64_t max_leaves = 10'000'000;

    /// Default budget, overridden by LMDP_LAB_BUDGET when set.
    static Budget from_env() {
        Budget b;
        if (const char* v = std::getenv("LMDP_LAB_BUDGET")) {
            char* end = nullptr;
            auto n = std::strtoull(v, &end, 10);
            if (end == v || *end != '\0' || n == 0)
                throw PreconditionError("LMDP_LAB_BUDGET must be a positive integer");
            b.max_leaves = n;
        }
        return b;
    }

    static Budget unlimited() { return {std::numeric_limits<std::uint64_t>::max()}; }

    /// Throws when base^exponent (times factor) exceeds the cap.
    void check_power(std::uint64_t base, int exponent, std::uint64_t factor, const std::string& what) const {
        long double n = static_cast<long double>(factor);
        for (int i = 0; i < exponent; ++i) n *= static_cast<long double>(base);
        if (n > static_cast<long double>(max_leaves))
            throw BudgetExceeded(what + ": " + std::to_string(static_cast<double>(n)) +
                                 " leaves exceeds budget " + std::to_string(max_leaves));
    }

    bool fits_power(std::uint64_t base, int exponent, std::uint64_t factor = 1) const {
        long double n = static_cast<long double>(factor);
        for (int i = 0; i < exponent; ++i) n *= static_cast<long double>(base);
        return n <= static_cast<long double>(max_leaves);
    }
};

} // namespace lmdp
