#ifndef ENTANGLE_REPORT_HPP
#define ENTANGLE_REPORT_HPP

#include "entangle/bias.hpp"
#include "entangle/cig.hpp"
#include "entangle/difficulty.hpp"
#include "entangle/ensemble.hpp"
#include "entangle/ingest.hpp"
#include "entangle/pair_statistic.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace entangle {

enum class AuditLevel { bei, cig, both };

const char* to_string(AuditLevel level);
AuditLevel audit_level_from_string(const std::string& s);

struct PairRow {
    std::string model_1;
    std::string model_2;
    double score = 0.0;
    double p_raw = 1.0;
    double p_adjusted = 1.0;
    long replicates = 0;
    bool exact = false;
    bool degenerate = false;
    long events = -1;
    std::optional<double> normalized_score;

    bool operator==(const PairRow&) const = default;
};

struct CalibrationRow {
    std::string model;
    double alpha = 0.0;
    double beta = 0.0;
    std::optional<double> auc;
    int iterations = 0;
    bool converged = true;
    bool degenerate = false;

    bool operator==(const CalibrationRow&) const = default;
};

struct ReportMetadata {
    std::string tool = "entangle";
    std::string version = kVersion;
    std::string dataset_hash;
    std::uint64_t seed = 0;
    long replicates = 0;
    double alpha = 0.05;
    bool bh = true;
    std::string level = "both";
    std::string alternative = "greater";
    std::string log_base = kLogBase;
    std::optional<std::string> generated_at;

    bool operator==(const ReportMetadata&) const = default;
};

struct AuditReport {
    ReportMetadata metadata;
    std::vector<std::string> models;
    Index n_tasks = 0;
    std::vector<CalibrationRow> calibration;
    std::optional<std::vector<PairRow>> bei;
    std::optional<std::vector<PairRow>> cig;

    bool operator==(const AuditReport&) const = default;
};

struct AuditOptions {
    AuditLevel level = AuditLevel::both;
    AuditConfig config;
    double alpha = 0.05;
};

struct AuditRun {
    AuditReport report;
    std::vector<std::vector<CollisionEvent>> events; // indexed like all_pairs(M); empty without CIG
};

AuditRun run_audit(const ResponseDataset& ds, const AuditOptions& opts);

std::vector<PairRow> pair_rows(const std::vector<PairStatistic>& stats, const std::vector<std::string>& models);

nlohmann::ordered_json to_json(const AuditReport& report);
AuditReport audit_report_from_json(const nlohmann::json& j);

/// "%.2E", e.g. 1.00E-04.
std::string format_pvalue(double p);

void write_markdown(std::ostream& out, const AuditReport& report);
void write_csv(std::ostream& out, const AuditReport& report);
void write_json(std::ostream& out, const AuditReport& report);

/// Parses one markdown table row (| m1 | m2 | score | p | [p-adj |]) or one
/// CSV data row (level,m1,m2,score,p_raw,p_adjusted). Throws ParseError.
PairRow parse_pair_row(const std::string& line);

/// Format chosen by extension: .json, .csv, .md.
AuditReport load_audit_report(const std::filesystem::path& path);

struct GraphEdge {
    std::string level;
    std::string model_1;
    std::string model_2;
    double weight = 0.0;
    double p_adjusted = 1.0;
};

/// Pairs with p_adjusted < alpha, BEI table first.
std::vector<GraphEdge> significant_edges(const AuditReport& report, double alpha);

void write_dot(std::ostream& out, const AuditReport& report, double alpha);
void write_graph_json(std::ostream& out, const AuditReport& report, double alpha);

void write_events_jsonl(std::ostream& out, const std::vector<std::string>& models,
                        const std::vector<std::vector<CollisionEvent>>& events);
void write_calibration_json(std::ostream& out, const AuditReport& report);

std::vector<ScoredPair> scored_pairs(const std::vector<PairRow>& rows);
PairScores pair_scores(const std::vector<PairRow>& rows);

nlohmann::ordered_json to_json(const BiasReport& report);
void write_bias_markdown(std::ostream& out, const BiasReport& report);
void write_bias_csv(std::ostream& out, const BiasReport& report);

/// Columns strategy,acc,f1,precision,delta_acc.
void write_ensemble_csv(std::ostream& out, const EnsembleComparison& cmp);
/// Columns target,verifier,q,delta_in,delta_tar,weight.
void write_weights_csv(std::ostream& out, const VerifierWeighting& weighting);

} // namespace entangle

#endif // ENTANGLE_REPORT_HPP
