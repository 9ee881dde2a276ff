#ifndef ENTANGLE_BEI_HPP
#define ENTANGLE_BEI_HPP

#include "entangle/common.hpp"
#include "entangle/difficulty.hpp"
#include "entangle/ingest.hpp"
#include "entangle/pair_statistic.hpp"
#include "entangle/rng.hpp"

#include <cstdint>
#include <vector>

namespace entangle {

/// Task-level contributions a_t * R_i,t * R_j,t.
template <typename DerivedI, typename DerivedJ, typename DerivedA>
Array<typename DerivedI::Scalar> pair_contributions(const Eigen::DenseBase<DerivedI>& ri,
                                                    const Eigen::DenseBase<DerivedJ>& rj,
                                                    const Eigen::DenseBase<DerivedA>& a)
{
    if (ri.size() != rj.size() || ri.size() != a.size())
        throw DimensionMismatch("pair_contributions: residual and easiness lengths differ");
    if (ri.size() == 0)
        throw EmptyInput("pair_contributions: no tasks");
    // R_i * R_j first so the result is exactly symmetric in (i, j)
    return a.derived().array() * (ri.derived().array() * rj.derived().array());
}

/// Easiness-weighted entanglement index: (1/T) sum_t a_t R_i,t R_j,t.
/// Large positive values mean the pair fails together beyond what task
/// difficulty explains, with failures on easy tasks counting most.
template <typename DerivedI, typename DerivedJ, typename DerivedA>
typename DerivedI::Scalar compute_bei(const Eigen::DenseBase<DerivedI>& ri, const Eigen::DenseBase<DerivedJ>& rj,
                                      const Eigen::DenseBase<DerivedA>& a)
{
    const auto xi = pair_contributions(ri, rj, a);
    return xi.sum() / static_cast<typename DerivedI::Scalar>(xi.size());
}

struct SignFlipOptions {
    long replicates = 10'000;
    std::uint64_t seed = 0;
    SignFlipMode mode = SignFlipMode::automatic;
    Alternative alternative = Alternative::greater;
    int exact_max_tasks = 20;
};

struct SignFlipResult {
    double p = 1.0;
    double observed = 0.0;
    bool exact = false;
    long replicates = 0;
};

/// Sign-flip randomization test on the mean of `xi`.
///
/// Monte Carlo: p = (1 + #{S_b >= S}) / (1 + B). Exact (T <= exact_max_tasks,
/// or forced): p = #{sign vectors with S~ >= S} / 2^T. Replicates tying the
/// observed value count as exceeding it.
SignFlipResult signflip_test(const ArrayXd& xi, const SignFlipOptions& opts);

inline double signflip_pvalue(const ArrayXd& xi, long replicates, std::uint64_t seed)
{
    SignFlipOptions o;
    o.replicates = replicates;
    o.seed = seed;
    return signflip_test(xi, o).p;
}

/// BEI_w and sign-flip p-value for every unordered model pair.
std::vector<PairStatistic> bei_audit(const ResponseDataset& ds, const MatrixXd& residuals,
                                     const DifficultyProfile& profile, const AuditConfig& cfg);

} // namespace entangle

#endif // ENTANGLE_BEI_HPP
