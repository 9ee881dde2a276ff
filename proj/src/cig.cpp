#include "entangle/cig.hpp"

#include "entangle/parallel.hpp"
#include "entangle/rng.hpp"

#include <cmath>

namespace entangle {

DistractorProfile distractor_profile(const ResponseDataset& ds, Index t)
{
    const TaskInfo& info = ds.task(t);
    DistractorProfile prof;
    prof.probability = VectorXd::Zero(static_cast<Index>(info.options.size()));
    for (Index m = 0; m < ds.num_models(); ++m) {
        const int s = ds.selected(t, m);
        if (s == kAbstain || s == info.correct)
            continue;
        prof.probability(s) += 1.0;
        ++prof.failing;
    }
    if (prof.failing > 0)
        prof.probability /= static_cast<double>(prof.failing);
    return prof;
}

std::vector<DistractorProfile> distractor_profiles(const ResponseDataset& ds)
{
    std::vector<DistractorProfile> out;
    out.reserve(static_cast<std::size_t>(ds.num_tasks()));
    for (Index t = 0; t < ds.num_tasks(); ++t)
        out.push_back(distractor_profile(ds, t));
    return out;
}

double null_collision_prob(const DistractorProfile& profile, int n)
{
    if (profile.empty())
        throw EmptyProfile("null_collision_prob: no failing selections on this task");
    return null_collision_prob(profile.probability, n);
}

CollisionEvent make_event(std::string task_id, Index task, int z, double c_null)
{
    CollisionEvent e;
    e.task_id = std::move(task_id);
    e.task = task;
    e.z = z;
    e.c_null = c_null;
    // -log(1) is -0.0; a forced collision carries no information either way.
    e.weight = c_null >= 1.0 ? 0.0 : -std::log(c_null);
    return e;
}

double cig_score(const std::vector<CollisionEvent>& events)
{
    double s = 0.0;
    for (const auto& e : events)
        s += e.contribution();
    return s;
}

CigResult compute_cig(const ResponseDataset& ds, const std::vector<DistractorProfile>& profiles, Index i, Index j)
{
    if (static_cast<Index>(profiles.size()) != ds.num_tasks())
        throw DimensionMismatch("compute_cig: profiles do not match the dataset");
    CigResult res;
    for (Index t = 0; t < ds.num_tasks(); ++t) {
        if (!ds.failed(t, i) || !ds.failed(t, j) || ds.abstained(t, i) || ds.abstained(t, j))
            continue;
        const double c = null_collision_prob(profiles[static_cast<std::size_t>(t)], 2);
        const int z = ds.selected(t, i) == ds.selected(t, j) ? 1 : 0;
        res.events.push_back(make_event(ds.task(t).id, t, z, c));
    }
    res.score = cig_score(res.events);
    return res;
}

CigTestResult cig_pvalue(const std::vector<CollisionEvent>& events, long replicates, std::uint64_t seed,
                         Alternative alternative)
{
    if (replicates < 1)
        throw InvalidArgument("cig_pvalue: need at least one replicate");
    CigTestResult res;
    if (events.empty()) {
        res.degenerate = true;
        return res;
    }

    const double observed = cig_score(events);
    double scale = 0.0;
    for (const auto& e : events)
        scale += std::fabs(e.contribution());
    const double tol = 1e-12 * scale;

    Engine engine(seed);
    long hits = 0;
    for (long b = 0; b < replicates; ++b) {
        double s = 0.0;
        for (const auto& e : events) {
            // zero-weight events still consume a draw so streams stay aligned
            const int z = uniform01(engine) < e.c_null ? 1 : 0;
            s += e.weight * (static_cast<double>(z) - e.c_null);
        }
        const bool hit = alternative == Alternative::two_sided ? std::fabs(s) >= std::fabs(observed) - tol
                                                               : s >= observed - tol;
        if (hit)
            ++hits;
    }
    res.p = (1.0 + static_cast<double>(hits)) / (1.0 + static_cast<double>(replicates));
    return res;
}

CigAudit cig_audit_with_events(const ResponseDataset& ds, const AuditConfig& cfg)
{
    const auto profiles = distractor_profiles(ds);
    const auto pairs = all_pairs(ds.num_models());
    CigAudit audit;
    audit.stats.resize(pairs.size());
    audit.events.resize(pairs.size());
    parallel_for(pairs.size(), cfg.threads, [&](std::size_t k) {
        const auto [i, j] = pairs[k];
        CigResult r = compute_cig(ds, profiles, i, j);
        const std::uint64_t seed
            = derive_seed(cfg.seed, {stream::kCig, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)});
        const CigTestResult test = cig_pvalue(r.events, cfg.replicates, seed, cfg.alternative);

        PairStatistic& s = audit.stats[k];
        s.i = i;
        s.j = j;
        s.score = r.score;
        s.p_raw = test.p;
        s.degenerate = test.degenerate;
        s.replicates = cfg.replicates;
        s.seed = seed;
        s.events = static_cast<long>(r.events.size());
        if (!r.events.empty())
            s.normalized_score = r.score / static_cast<double>(r.events.size());
        audit.events[k] = std::move(r.events);
    });
    finalize_pair_table(audit.stats, cfg.bh);
    return audit;
}

std::vector<PairStatistic> cig_audit(const ResponseDataset& ds, const AuditConfig& cfg)
{
    return cig_audit_with_events(ds, cfg).stats;
}

} // namespace entangle
