#ifndef ENTANGLE_PAIR_STATISTIC_HPP
#define ENTANGLE_PAIR_STATISTIC_HPP

#include "entangle/common.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace entangle {

enum class Alternative { greater, two_sided };

enum class SignFlipMode { automatic, exact, monte_carlo };

/// Shared knobs for the pairwise audits.
struct AuditConfig {
    long replicates = 10'000;
    std::uint64_t seed = 0;
    Alternative alternative = Alternative::greater;
    SignFlipMode mode = SignFlipMode::automatic;
    int exact_max_tasks = 20;
    bool bh = true;
    int threads = 1;
};

/// A pairwise score (BEI_w or CIG) with its significance.
struct PairStatistic {
    Index i = 0;
    Index j = 0;
    double score = 0.0;
    double p_raw = 1.0;
    double p_adjusted = 1.0;   // equals p_raw when no correction is applied
    long replicates = 0;       // B, or 2^T in exact mode
    std::uint64_t seed = 0;    // per-pair stream seed
    bool exact = false;
    bool degenerate = false;
    long events = -1;          // co-failure events (CIG only)
    std::optional<double> normalized_score; // CIG / events (CIG only)
};

/// All unordered pairs (i < j) in lexicographic order.
inline std::vector<std::pair<Index, Index>> all_pairs(Index m)
{
    std::vector<std::pair<Index, Index>> out;
    for (Index i = 0; i < m; ++i)
        for (Index j = i + 1; j < m; ++j)
            out.emplace_back(i, j);
    return out;
}

/// Fill p_adjusted (BH when `bh`, else a copy of p_raw) and sort by score
/// descending, ties broken by (i, j).
void finalize_pair_table(std::vector<PairStatistic>& stats, bool bh);

} // namespace entangle

#endif // ENTANGLE_PAIR_STATISTIC_HPP
