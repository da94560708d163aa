#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace ragkit {

/// Top-k retrieval result: (chunk id, score) pairs in non-increasing
/// score order, ties broken by ascending chunk id. Never longer than the
/// requested cutoff k, but may be shorter.
struct RankedList {
    std::vector<std::pair<std::string, double>> hits;
    std::size_t k = 0;

    bool empty() const { return hits.empty(); }
    std::size_t size() const { return hits.size(); }
};

/// The shared ordering rule: score descending, chunk id ascending.
inline bool ranked_before(const std::pair<std::string, double>& a,
                          const std::pair<std::string, double>& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
}

/// Sorts scored candidates under the tie rule and truncates to k.
inline RankedList make_ranked_list(std::vector<std::pair<std::string, double>> scored,
                                   std::size_t k) {
    std::sort(scored.begin(), scored.end(), ranked_before);
    if (scored.size() > k) scored.resize(k);
    return RankedList{std::move(scored), k};
}

}  // namespace ragkit
