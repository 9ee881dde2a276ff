#ifndef ENTANGLE_SYNTHGEN_HPP
#define ENTANGLE_SYNTHGEN_HPP

#include "entangle/common.hpp"
#include "entangle/ingest.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace entangle {

/// A planted dependence between models i and j. With probability rho_fail
/// model j reuses model i's failure draw for the task; when both fail, with
/// probability rho_dir model j copies model i's distractor.
struct PlantedPair {
    Index i = 0;
    Index j = 1;
    double rho_fail = 0.0;
    double rho_dir = 0.0;
};

struct SynthConfig {
    Index models = 6;
    Index tasks = 500;
    int options = 4;
    /// Per-model failure curve sigmoid(alpha + beta * u); empty = defaults.
    std::vector<double> alpha;
    std::vector<double> beta;
    double difficulty_low = 0.0;   // latent u ~ U(low, high)
    double difficulty_high = 1.0;
    std::vector<PlantedPair> planted;
    double concentration = 1.0;    // symmetric Dirichlet for distractor appeal
    double abstain_rate = 0.0;     // share of failures recorded as ABSTAIN
    std::vector<std::string> names; // empty = "m0", "m1", ...
    std::string task_prefix = "t";

    // judgments
    std::vector<Index> judges;
    std::vector<Index> targets;    // answered models; empty = all non-judges
    double p_tp = 0.9;             // endorsement rate of correct answers
    double p_fp = 0.2;             // endorsement rate of wrong answers
    double judge_coupling = 0.0;   // false-positive inflation for planted pairs

    std::uint64_t seed = 0;

    /// Throws InvalidConfig.
    void validate() const;
    std::vector<std::string> model_names() const;
    double alpha_of(Index m) const;
    double beta_of(Index m) const;
};

struct SynthTruth {
    std::vector<PlantedPair> planted;
    VectorXd latent_difficulty;
    std::vector<VectorXd> attractiveness; // per task, indexed by option
    std::vector<double> alpha;
    std::vector<double> beta;
    std::uint64_t seed = 0;
};

struct SynthResponses {
    ResponseDataset dataset;
    SynthTruth truth;
};

SynthResponses generate_responses(const SynthConfig& cfg);

/// Judges endorse correct answers at p_tp and wrong answers at
/// p_fp + (1 - p_fp) * judge_coupling * s, where s is the strongest planted
/// coupling between the judge and the answering model (0 when unplanted).
JudgmentDataset generate_judgments(const SynthConfig& cfg, const ResponseDataset& responses);

nlohmann::json to_json(const SynthConfig& cfg);
SynthConfig synth_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SynthTruth& truth, const std::vector<std::string>& names);

} // namespace entangle

#endif // ENTANGLE_SYNTHGEN_HPP
