#ifndef ENTANGLE_INGEST_HPP
#define ENTANGLE_INGEST_HPP

#include "entangle/common.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace entangle {

/// Option index used for an abstained (or unparseable) answer.
inline constexpr int kAbstain = -1;

struct TaskInfo {
    std::string id;
    std::vector<std::string> options;
    int correct = 0; // index into options

    int option_index(const std::string& label) const;
    bool operator==(const TaskInfo&) const = default;
};

/// One (task, model) answer, expressed with labels as read from disk.
struct ResponseRecord {
    std::string task_id;
    std::string model_id;
    std::vector<std::string> options;
    std::string correct_option;
    std::optional<std::string> selected_option; // nullopt = ABSTAIN
    std::size_t line = 0;                       // source line, 0 if not from a file
};

/// Complete T x M answer grid. Immutable once built.
///
/// `selected(t, m)` holds the option index chosen by model m on task t, or
/// kAbstain. Models and tasks keep their first-appearance order.
class ResponseDataset {
public:
    ResponseDataset() = default;
    ResponseDataset(std::vector<std::string> models, std::vector<TaskInfo> tasks,
                    Eigen::MatrixXi selected);

    Index num_models() const { return static_cast<Index>(models_.size()); }
    Index num_tasks() const { return static_cast<Index>(tasks_.size()); }

    const std::vector<std::string>& models() const { return models_; }
    const std::vector<TaskInfo>& tasks() const { return tasks_; }
    const TaskInfo& task(Index t) const { return tasks_[static_cast<std::size_t>(t)]; }
    const Eigen::MatrixXi& selected() const { return selected_; }
    int selected(Index t, Index m) const { return selected_(t, m); }

    bool failed(Index t, Index m) const { return selected_(t, m) != tasks_[static_cast<std::size_t>(t)].correct; }
    bool abstained(Index t, Index m) const { return selected_(t, m) == kAbstain; }

    /// T x M matrix of error indicators Y (1 = wrong or abstained).
    MatrixXd errors() const;

    std::optional<Index> model_index(const std::string& id) const;

    ResponseRecord record(Index t, Index m) const;

    bool operator==(const ResponseDataset& other) const;

private:
    std::vector<std::string> models_;
    std::vector<TaskInfo> tasks_;
    Eigen::MatrixXi selected_;
    std::unordered_map<std::string, Index> model_lookup_;
};

enum class ResponseFormat { jsonl, csv };

/// RFC 4180 field splitting and quoting.
std::vector<std::string> split_csv_line(const std::string& line, std::size_t lineno);
std::string csv_escape(const std::string& s);

ResponseFormat format_from_path(const std::filesystem::path& path);

/// Build a dataset from records, enforcing uniqueness, completeness and
/// per-task consistency. Record order only affects model/task ordering.
ResponseDataset build_dataset(const std::vector<ResponseRecord>& records);

std::vector<ResponseRecord> parse_responses(std::istream& in, ResponseFormat format);
ResponseDataset load_responses(const std::filesystem::path& path, ResponseFormat format);
ResponseDataset load_responses(const std::filesystem::path& path);

void write_responses(std::ostream& out, const ResponseDataset& ds, ResponseFormat format);
void save_responses(const std::filesystem::path& path, const ResponseDataset& ds, ResponseFormat format);

/// FNV-1a 64 over the canonical JSONL serialization, as 16 hex digits.
std::string dataset_hash(const ResponseDataset& ds);

struct ValidationReport {
    std::vector<int> options_per_task;
    std::vector<int> failures_per_model;
    int abstain_count = 0;
    std::vector<std::string> issues;

    bool ok() const { return issues.empty(); }
};

ValidationReport validate_dataset(const ResponseDataset& ds);

// ---------------------------------------------------------------------------
// Judgments

struct JudgmentRecord {
    std::string task_id;
    std::string judge_id;
    std::string model_id;
    int verdict = 0; // 1 = judged correct
    int truth = 0;   // 1 = actually correct
    std::optional<int> reasoning_quality;

    bool operator==(const JudgmentRecord&) const = default;
};

class JudgmentDataset {
public:
    JudgmentDataset() = default;
    explicit JudgmentDataset(std::vector<JudgmentRecord> records);

    const std::vector<JudgmentRecord>& records() const { return records_; }
    const std::vector<std::string>& judges() const { return judges_; }
    const std::vector<std::string>& models() const { return models_; }
    const std::vector<std::string>& tasks() const { return tasks_; }

    /// Verdict of `judge` on `model`'s answer to `task`, if recorded.
    std::optional<int> verdict(const std::string& task, const std::string& judge, const std::string& model) const;
    std::optional<int> truth(const std::string& task, const std::string& model) const;

    bool operator==(const JudgmentDataset& other) const { return records_ == other.records_; }

private:
    std::vector<JudgmentRecord> records_;
    std::vector<std::string> judges_;
    std::vector<std::string> models_;
    std::vector<std::string> tasks_;
    std::unordered_map<std::string, std::size_t> index_; // task\x1fjudge\x1fmodel
    std::unordered_map<std::string, int> truth_;          // task\x1fmodel
};

std::vector<JudgmentRecord> parse_judgments(std::istream& in);
JudgmentDataset load_judgments(const std::filesystem::path& path);
void write_judgments(std::ostream& out, const JudgmentDataset& js);
void save_judgments(const std::filesystem::path& path, const JudgmentDataset& js);

} // namespace entangle

#endif // ENTANGLE_INGEST_HPP
