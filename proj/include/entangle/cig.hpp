#ifndef ENTANGLE_CIG_HPP
#define ENTANGLE_CIG_HPP

#include "entangle/common.hpp"
#include "entangle/ingest.hpp"
#include "entangle/pair_statistic.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace entangle {

/// Surprisal weights use the natural logarithm.
inline constexpr const char* kLogBase = "e";

/// Empirical distractor selection rates among a task's failing answers.
/// `probability` is indexed by option; the correct option always has 0.
/// Abstentions are failures but pick no distractor, so they are not counted.
struct DistractorProfile {
    VectorXd probability;
    int failing = 0; // failing answers with a selected distractor

    bool empty() const { return failing == 0; }
};

DistractorProfile distractor_profile(const ResponseDataset& ds, Index t);
std::vector<DistractorProfile> distractor_profiles(const ResponseDataset& ds);

/// c = sum_k p_k^n: chance that n independently failing models collide.
double null_collision_prob(const DistractorProfile& profile, int n = 2);

template <typename Derived>
double null_collision_prob(const Eigen::DenseBase<Derived>& probability, int n = 2)
{
    if (n < 2)
        throw InvalidArgument("null_collision_prob: need n >= 2");
    if (probability.size() == 0 || !(probability.derived().array() > 0.0).any())
        throw EmptyProfile("null_collision_prob: empty distractor profile");
    return probability.derived().array().pow(static_cast<double>(n)).sum();
}

struct CollisionEvent {
    std::string task_id;
    Index task = 0;
    int z = 0;            // 1 when both models picked the same distractor
    double c_null = 1.0;
    double weight = 0.0;  // -log c_null

    double contribution() const { return weight * (static_cast<double>(z) - c_null); }
};

CollisionEvent make_event(std::string task_id, Index task, int z, double c_null);

struct CigResult {
    double score = 0.0;
    std::vector<CollisionEvent> events;
};

/// Surprisal-weighted directional excess summed over the pair's co-failure
/// tasks. Tasks where either model abstained are skipped.
CigResult compute_cig(const ResponseDataset& ds, const std::vector<DistractorProfile>& profiles, Index i, Index j);

/// Sum of event contributions in event order.
double cig_score(const std::vector<CollisionEvent>& events);

struct CigTestResult {
    double p = 1.0;
    bool degenerate = false; // no co-failure events
};

/// Monte Carlo null: Z*_t ~ Bernoulli(c_null,t) per event.
/// p = (1 + #{CIG* >= CIG_obs}) / (1 + B).
CigTestResult cig_pvalue(const std::vector<CollisionEvent>& events, long replicates, std::uint64_t seed,
                         Alternative alternative = Alternative::greater);

/// Per-pair events kept for audit trails when requested.
struct CigAudit {
    std::vector<PairStatistic> stats;
    std::vector<std::vector<CollisionEvent>> events; // indexed like all_pairs(M)
};

CigAudit cig_audit_with_events(const ResponseDataset& ds, const AuditConfig& cfg);
std::vector<PairStatistic> cig_audit(const ResponseDataset& ds, const AuditConfig& cfg);

} // namespace entangle

#endif // ENTANGLE_CIG_HPP
