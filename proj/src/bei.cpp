#include "entangle/bei.hpp"

#include "entangle/parallel.hpp"
#include "entangle/stats.hpp"

#include <algorithm>
#include <cmath>

namespace entangle {

void finalize_pair_table(std::vector<PairStatistic>& stats, bool bh)
{
    if (bh) {
        std::vector<double> p;
        p.reserve(stats.size());
        for (const auto& s : stats)
            p.push_back(s.p_raw);
        const auto adj = benjamini_hochberg(p);
        for (std::size_t k = 0; k < stats.size(); ++k)
            stats[k].p_adjusted = adj[k];
    } else {
        for (auto& s : stats)
            s.p_adjusted = s.p_raw;
    }
    std::stable_sort(stats.begin(), stats.end(), [](const PairStatistic& a, const PairStatistic& b) {
        if (a.score != b.score)
            return a.score > b.score;
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
}

namespace {

// Summation order matches the replicate loops, so the all-plus sign vector
// reproduces the observed value bit for bit.
double signed_mean(const ArrayXd& xi)
{
    double s = 0.0;
    for (Index t = 0; t < xi.size(); ++t)
        s += xi(t);
    return s / static_cast<double>(xi.size());
}

bool at_least(double replicate, double observed, double tol, Alternative alt)
{
    if (alt == Alternative::two_sided)
        return std::fabs(replicate) >= std::fabs(observed) - tol;
    return replicate >= observed - tol;
}

} // namespace

SignFlipResult signflip_test(const ArrayXd& xi, const SignFlipOptions& opts)
{
    const Index T = xi.size();
    if (T == 0)
        throw EmptyInput("signflip_test: no task contributions");
    if (opts.replicates < 1 && opts.mode != SignFlipMode::exact)
        throw InvalidArgument("signflip_test: need at least one replicate");

    SignFlipResult res;
    res.observed = signed_mean(xi);
    const double scale = xi.abs().sum() / static_cast<double>(T);
    const double tol = 1e-12 * scale;
    const auto n = static_cast<double>(T);

    const bool exact = opts.mode == SignFlipMode::exact
        || (opts.mode == SignFlipMode::automatic && T <= opts.exact_max_tasks);
    if (exact) {
        if (T > 30)
            throw InvalidArgument("signflip_test: exact enumeration limited to T <= 30");
        const std::uint64_t count = std::uint64_t{1} << T;
        std::uint64_t hits = 0;
        for (std::uint64_t mask = 0; mask < count; ++mask) {
            double s = 0.0;
            // bit set = sign flipped; mask 0 is the observed arrangement
            for (Index t = 0; t < T; ++t)
                s += ((mask >> t) & 1U) ? -xi(t) : xi(t);
            if (at_least(s / n, res.observed, tol, opts.alternative))
                ++hits;
        }
        res.exact = true;
        res.replicates = static_cast<long>(count);
        res.p = static_cast<double>(hits) / static_cast<double>(count);
        return res;
    }

    Engine engine(opts.seed);
    long hits = 0;
    for (long b = 0; b < opts.replicates; ++b) {
        double s = 0.0;
        std::uint64_t bits = 0;
        for (Index t = 0; t < T; ++t) {
            if ((t & 63) == 0)
                bits = engine();
            s += (bits & 1U) ? -xi(t) : xi(t);
            bits >>= 1;
        }
        if (at_least(s / n, res.observed, tol, opts.alternative))
            ++hits;
    }
    res.replicates = opts.replicates;
    res.p = (1.0 + static_cast<double>(hits)) / (1.0 + static_cast<double>(opts.replicates));
    return res;
}

std::vector<PairStatistic> bei_audit(const ResponseDataset& ds, const MatrixXd& residuals,
                                     const DifficultyProfile& profile, const AuditConfig& cfg)
{
    if (residuals.rows() != ds.num_tasks() || residuals.cols() != ds.num_models()
        || profile.easiness.size() != ds.num_tasks())
        throw DimensionMismatch("bei_audit: residuals/profile do not match the dataset");

    const auto pairs = all_pairs(ds.num_models());
    std::vector<PairStatistic> out(pairs.size());
    parallel_for(pairs.size(), cfg.threads, [&](std::size_t k) {
        const auto [i, j] = pairs[k];
        const ArrayXd xi = pair_contributions(residuals.col(i), residuals.col(j), profile.easiness);

        SignFlipOptions opts;
        opts.replicates = cfg.replicates;
        opts.seed = derive_seed(cfg.seed, {stream::kBei, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)});
        opts.mode = cfg.mode;
        opts.alternative = cfg.alternative;
        opts.exact_max_tasks = cfg.exact_max_tasks;
        const SignFlipResult r = signflip_test(xi, opts);

        PairStatistic& s = out[k];
        s.i = i;
        s.j = j;
        s.score = compute_bei(residuals.col(i), residuals.col(j), profile.easiness);
        s.p_raw = r.p;
        s.replicates = r.replicates;
        s.seed = opts.seed;
        s.exact = r.exact;
    });
    finalize_pair_table(out, cfg.bh);
    return out;
}

} // namespace entangle
