#pragma once

// Test-only two-pass statistics for 1..5 ratings. Works on exact rationals
// and rounds by counting, so it shares no arithmetic with the survey module.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace groundchat::testing {

struct OracleStats {
    std::optional<std::string> mean;
    std::optional<std::string> std_dev;
};

inline std::string oracle_fixed2(std::uint64_t hundredths) {
    std::string s = std::to_string(hundredths);
    while (s.size() < 3) s.insert(0, "0");
    s.insert(s.size() - 2, ".");
    return s;
}

inline OracleStats oracle_likert(const std::vector<int>& values) {
    OracleStats out;
    const std::int64_t n = static_cast<std::int64_t>(values.size());
    if (n == 0) return out;
    std::int64_t sum = 0;
    for (int v : values) sum += v;

    // Pass 1: mean = sum / n. Smallest k with (k + 1/2) / 100 > mean.
    std::uint64_t k = 0;
    while (static_cast<std::int64_t>(2 * k + 1) * n <= 200 * sum) ++k;
    out.mean = oracle_fixed2(k);
    if (n < 2) return out;

    // Pass 2: squared deviations scaled by n: sum (n x - sum)^2 = n^2 * SS.
    std::int64_t scaled = 0;
    for (int v : values) {
        const std::int64_t d = n * v - sum;
        scaled += d * d;
    }
    // variance = scaled / (n^2 (n - 1)); count k while (k + 1/2)^2 <= 10^4 variance.
    const std::int64_t den = n * n * (n - 1);
    std::uint64_t j = 0;
    while (static_cast<std::int64_t>((2 * j + 1) * (2 * j + 1)) * den <= 40000 * scaled) ++j;
    out.std_dev = oracle_fixed2(j);
    return out;
}

}  // namespace groundchat::testing
