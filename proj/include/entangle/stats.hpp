#ifndef ENTANGLE_STATS_HPP
#define ENTANGLE_STATS_HPP

#include "entangle/common.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

namespace entangle {

/// 1-based ranks with ties given the mean of the ranks they span.
template <typename Derived>
ArrayXd midranks(const Eigen::DenseBase<Derived>& x)
{
    const Index n = x.size();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return x(a) < x(b); });

    ArrayXd r(n);
    Index i = 0;
    while (i < n) {
        Index j = i;
        while (j + 1 < n && x(order[static_cast<std::size_t>(j + 1)]) == x(order[static_cast<std::size_t>(i)]))
            ++j;
        const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
        for (Index k = i; k <= j; ++k)
            r(order[static_cast<std::size_t>(k)]) = mid;
        i = j + 1;
    }
    return r;
}

/// Area under the ROC curve of `scores` against binary `labels` (nonzero =
/// positive), via the Mann-Whitney rank sum with tie midpoints. Returns NaN
/// when one class is empty.
template <typename DerivedS, typename DerivedL>
double roc_auc(const Eigen::DenseBase<DerivedS>& scores, const Eigen::DenseBase<DerivedL>& labels)
{
    if (scores.size() != labels.size())
        throw DimensionMismatch("roc_auc: scores and labels differ in length");
    const ArrayXd r = midranks(scores);
    double rank_sum = 0.0;
    double n_pos = 0.0;
    for (Index i = 0; i < r.size(); ++i) {
        if (labels(i) != 0) {
            rank_sum += r(i);
            n_pos += 1.0;
        }
    }
    const double n_neg = static_cast<double>(r.size()) - n_pos;
    if (n_pos == 0.0 || n_neg == 0.0)
        return std::numeric_limits<double>::quiet_NaN();
    return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// P(|T| >= |t|) for Student's t with `dof` degrees of freedom.
double student_t_two_sided(double t, double dof);

/// Benjamini-Hochberg step-up adjusted p-values, in input order.
std::vector<double> benjamini_hochberg(const std::vector<double>& p);

} // namespace entangle

#endif // ENTANGLE_STATS_HPP
