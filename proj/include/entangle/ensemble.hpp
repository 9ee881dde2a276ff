#ifndef ENTANGLE_ENSEMBLE_HPP
#define ENTANGLE_ENSEMBLE_HPP

#include "entangle/common.hpp"
#include "entangle/ingest.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace entangle {

/// One audited pair as consumed by the ensemble: names, raw score and the
/// adjusted p-value that decides whether it is significant.
struct ScoredPair {
    std::string model_1;
    std::string model_2;
    double score = 0.0;
    double p_adjusted = 1.0;
};

struct EntanglementOptions {
    double lambda1 = 0.5;
    bool significant_only = true;
    double alpha = 0.05;
};

/// Symmetric blended pair score E(i, j) = lambda1 * bei~ + (1 - lambda1) * cig~,
/// each metric min-max normalised over the audited pair family. Diagonal is NaN.
struct EntanglementMatrix {
    std::vector<std::string> models;
    MatrixXd values;
    double bei_min = 0.0, bei_max = 0.0;
    double cig_min = 0.0, cig_max = 0.0;
    bool bei_degenerate = false; // all pairs equal; normalised values set to 0
    bool cig_degenerate = false;
    double lambda1 = 0.5;

    Index index_of(const std::string& model) const;
    double operator()(const std::string& a, const std::string& b) const;
};

/// Either list may be empty when its weight is zero (lambda1 = 0 or 1).
EntanglementMatrix pair_entanglement(const std::vector<ScoredPair>& bei, const std::vector<ScoredPair>& cig,
                                     const EntanglementOptions& opts = {});

struct DependencyPenalties {
    VectorXd internal; // mean E to the other verifiers
    VectorXd target;   // E to the evaluated model
};

DependencyPenalties dependency_penalties(const EntanglementMatrix& e, const std::vector<std::string>& verifiers,
                                         const std::string& target);

inline constexpr double kCompetenceFloor = 1e-3;

struct WeightParams {
    double kappa = 1.0;
    double eta1 = 1.0;
    double eta2 = 1.0;
};

/// softmax_m(kappa * log q_m - eta1 * internal_m - eta2 * target_m), with q
/// clamped to [1e-3, 1] first.
VectorXd verifier_weights(const VectorXd& q, const VectorXd& internal, const VectorXd& target,
                          const WeightParams& params);

/// Verdict accuracy of each verifier on a calibration set.
VectorXd competence(const JudgmentDataset& calibration, const std::vector<std::string>& verifiers);

enum class Strategy { majority, accuracy_reweight, entangle_reweight };

const char* to_string(Strategy s);

/// target -> verifier weights in pool order.
struct WeightTable {
    std::vector<std::string> verifiers;
    std::map<std::string, VectorXd> by_target;
};

struct VerifierWeightRow {
    std::string target;
    std::string verifier;
    double q = 0.0;
    double delta_in = 0.0;
    double delta_tar = 0.0;
    double weight = 0.0;
};

struct VerifierWeighting {
    WeightTable table;
    std::vector<VerifierWeightRow> rows;
    WeightParams params;
    double lambda1 = 0.5;
};

/// Full de-entangled weights for every target.
VerifierWeighting entangle_weights(const VectorXd& q, const EntanglementMatrix& e,
                                   const std::vector<std::string>& verifiers,
                                   const std::vector<std::string>& targets, const WeightParams& params);

WeightTable equal_weights(const std::vector<std::string>& verifiers, const std::vector<std::string>& targets);

struct Metrics {
    double accuracy = 0.0;
    std::optional<double> precision; // absent without accepts
    std::optional<double> f1;        // absent without accepts
    long decisions = 0;
};

struct AggregationOutcome {
    Strategy strategy = Strategy::majority;
    std::vector<std::string> targets;
    std::vector<std::string> tasks;
    std::vector<int> decisions; // 1 = accept, row-major over (target, task)
    Metrics metrics;
    std::optional<double> delta_accuracy; // vs the majority baseline
};

/// Weighted vote per (target, task): accept iff sum_m w_m * verdict_m > 0.5.
AggregationOutcome aggregate_and_evaluate(const JudgmentDataset& js, const WeightTable& weights, Strategy strategy);

struct EnsembleOptions {
    double lambda1 = 0.5;
    WeightParams params;
    bool significant_only = true;
    double alpha = 0.05;
    bool grid_search = false;
};

struct EnsembleComparison {
    std::vector<AggregationOutcome> outcomes; // majority, accuracy, entangle
    VerifierWeighting weighting;
    std::vector<std::string> verifiers;
    std::vector<std::string> targets;
    double lambda1 = 0.5;
};

/// Runs all three strategies. Verifiers are the judges of `evaluation`,
/// targets its answered models; competence comes from `calibration`.
EnsembleComparison compare_strategies(const JudgmentDataset& calibration, const JudgmentDataset& evaluation,
                                      const std::vector<ScoredPair>& bei, const std::vector<ScoredPair>& cig,
                                      const EnsembleOptions& opts);

} // namespace entangle

#endif // ENTANGLE_ENSEMBLE_HPP
