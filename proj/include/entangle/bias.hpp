#ifndef ENTANGLE_BIAS_HPP
#define ENTANGLE_BIAS_HPP

#include "entangle/common.hpp"
#include "entangle/ingest.hpp"
#include "entangle/stats.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace entangle {

enum class PrecisionStatus { ok, no_endorsements, no_model_endorsements };

const char* to_string(PrecisionStatus s);

/// Global minus model-specific precision of one judge. Positive delta means
/// the judge over-endorses that model relative to its overall calibration.
struct PrecisionDeviation {
    std::string judge;
    std::string model;
    PrecisionStatus status = PrecisionStatus::ok;
    std::optional<double> global_precision;
    std::optional<double> model_precision;
    std::optional<double> delta;
    int global_endorsements = 0;
    int model_endorsements = 0;

    bool defined() const { return status == PrecisionStatus::ok; }
};

PrecisionDeviation delta_precision(const JudgmentDataset& js, const std::string& judge, const std::string& model);

enum class AssociationMethod { t_approximation, exact_permutation };

const char* to_string(AssociationMethod m);

struct AssociationResult {
    double rho = 0.0;
    double p_value = 1.0;           // two-sided
    double p_value_greater = 1.0;   // one-sided, rho > 0
    Index n = 0;
    AssociationMethod method = AssociationMethod::t_approximation;
};

/// Spearman correlation of mid-ranks. p-values: exact permutation for
/// n <= 10, Student t with n - 2 dof above that.
AssociationResult spearman(const ArrayXd& xs, const ArrayXd& ys);

template <typename DerivedX, typename DerivedY>
AssociationResult spearman(const Eigen::DenseBase<DerivedX>& xs, const Eigen::DenseBase<DerivedY>& ys)
{
    return spearman(ArrayXd(xs.derived().template cast<double>().array()),
                    ArrayXd(ys.derived().template cast<double>().array()));
}

/// "***" p<0.001, "**" p<0.01, "*" p<0.05, "·" p<0.1, else "".
std::string significance_stars(double p);

/// Entanglement scores keyed by unordered model pair, as read from an audit.
class PairScores {
public:
    void set(const std::string& a, const std::string& b, double score);
    std::optional<double> get(const std::string& a, const std::string& b) const;
    bool empty() const { return scores_.empty(); }

private:
    static std::pair<std::string, std::string> key(const std::string& a, const std::string& b);
    std::map<std::pair<std::string, std::string>, double> scores_;
};

struct BiasRow {
    PrecisionDeviation precision;
    std::optional<double> bei;
    std::optional<double> cig;
    std::string flag; // empty, or why the row is excluded
};

struct JudgeAssociation {
    std::string judge;  // "*" for the pooled correlation
    std::string metric; // "bei" or "cig"
    std::optional<AssociationResult> result;
    std::string stars;
    std::string flag;   // "InsufficientPairs", "ConstantInput" or empty
};

struct BiasReport {
    std::vector<BiasRow> rows;
    std::vector<JudgeAssociation> associations;
};

struct BiasOptions {
    bool pooled = false; // also correlate across all (judge, model) pairs
};

/// One row per (judge, answered model); one Spearman per judge and metric.
BiasReport bias_report(const JudgmentDataset& js, const PairScores& bei, const PairScores& cig,
                       const BiasOptions& opts = {});

} // namespace entangle

#endif // ENTANGLE_BIAS_HPP
