#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace fleetmine {

using NGram = std::vector<std::string>;

// Occurrence counts of every contiguous subsequence of length 1..max_len.
// A sequence of length T contributes max(T - L + 1, 0) L-grams, so
// totals[L-1] is the normalization denominator for length-L proportions.
struct NGramTable {
    std::map<NGram, std::int64_t> counts;
    std::vector<std::int64_t> totals; // totals[L-1] = number of L-grams mined
    int max_len = 0;
};

inline NGramTable mine_ngrams(const std::vector<std::vector<std::string>>& sequences,
                              int max_len = 5) {
    if (max_len < 1) throw std::invalid_argument("mine_ngrams: max_len must be >= 1");
    NGramTable table;
    table.max_len = max_len;
    table.totals.assign(max_len, 0);
    for (const auto& seq : sequences) {
        const auto t = static_cast<std::int64_t>(seq.size());
        for (int len = 1; len <= max_len; ++len) {
            const std::int64_t windows = t - len + 1;
            if (windows <= 0) continue;
            table.totals[len - 1] += windows;
            for (std::int64_t start = 0; start < windows; ++start) {
                NGram g(seq.begin() + start, seq.begin() + start + len);
                ++table.counts[g];
            }
        }
    }
    return table;
}

inline std::string ngram_to_string(const NGram& g, char sep = ' ') {
    std::string out;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (i) out.push_back(sep);
        out += g[i];
    }
    return out;
}

} // namespace fleetmine
