#include "entangle/ingest.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

namespace entangle {

using ordered_json = nlohmann::ordered_json;

int TaskInfo::option_index(const std::string& label) const
{
    auto it = std::find(options.begin(), options.end(), label);
    return it == options.end() ? kAbstain : static_cast<int>(it - options.begin());
}

ResponseDataset::ResponseDataset(std::vector<std::string> models, std::vector<TaskInfo> tasks,
                                 Eigen::MatrixXi selected)
    : models_(std::move(models)), tasks_(std::move(tasks)), selected_(std::move(selected))
{
    if (selected_.rows() != static_cast<Index>(tasks_.size()) || selected_.cols() != static_cast<Index>(models_.size()))
        throw DimensionMismatch("selection grid does not match task/model counts");
    for (std::size_t m = 0; m < models_.size(); ++m)
        if (!model_lookup_.emplace(models_[m], static_cast<Index>(m)).second)
            throw DuplicateRecord("model listed twice: " + models_[m]);
}

MatrixXd ResponseDataset::errors() const
{
    MatrixXd y(num_tasks(), num_models());
    for (Index t = 0; t < num_tasks(); ++t)
        for (Index m = 0; m < num_models(); ++m)
            y(t, m) = failed(t, m) ? 1.0 : 0.0;
    return y;
}

std::optional<Index> ResponseDataset::model_index(const std::string& id) const
{
    auto it = model_lookup_.find(id);
    if (it == model_lookup_.end())
        return std::nullopt;
    return it->second;
}

ResponseRecord ResponseDataset::record(Index t, Index m) const
{
    const TaskInfo& info = task(t);
    ResponseRecord r;
    r.task_id = info.id;
    r.model_id = models_[static_cast<std::size_t>(m)];
    r.options = info.options;
    r.correct_option = info.options[static_cast<std::size_t>(info.correct)];
    int s = selected_(t, m);
    if (s != kAbstain)
        r.selected_option = info.options[static_cast<std::size_t>(s)];
    return r;
}

bool ResponseDataset::operator==(const ResponseDataset& other) const
{
    return models_ == other.models_ && tasks_ == other.tasks_ && selected_ == other.selected_;
}

ResponseFormat format_from_path(const std::filesystem::path& path)
{
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".csv" ? ResponseFormat::csv : ResponseFormat::jsonl;
}

ResponseDataset build_dataset(const std::vector<ResponseRecord>& records)
{
    std::vector<std::string> models;
    std::vector<TaskInfo> tasks;
    std::unordered_map<std::string, std::size_t> model_pos, task_pos;

    for (const auto& r : records) {
        if (model_pos.emplace(r.model_id, models.size()).second)
            models.push_back(r.model_id);
        auto [it, inserted] = task_pos.emplace(r.task_id, tasks.size());
        if (inserted) {
            TaskInfo info;
            info.id = r.task_id;
            info.options = r.options;
            info.correct = info.option_index(r.correct_option);
            tasks.push_back(std::move(info));
        } else {
            const TaskInfo& info = tasks[it->second];
            if (info.options != r.options || info.options[static_cast<std::size_t>(info.correct)] != r.correct_option)
                throw InconsistentTask("task " + r.task_id + " has conflicting options or correct answer"
                                       + (r.line ? " (line " + std::to_string(r.line) + ")" : std::string()));
        }
    }

    Eigen::MatrixXi selected = Eigen::MatrixXi::Constant(static_cast<Index>(tasks.size()),
                                                         static_cast<Index>(models.size()), kAbstain - 1);
    for (const auto& r : records) {
        auto t = static_cast<Index>(task_pos[r.task_id]);
        auto m = static_cast<Index>(model_pos[r.model_id]);
        if (selected(t, m) != kAbstain - 1)
            throw DuplicateRecord("duplicate record for task " + r.task_id + ", model " + r.model_id
                                  + (r.line ? " (line " + std::to_string(r.line) + ")" : std::string()));
        selected(t, m) = r.selected_option ? tasks[static_cast<std::size_t>(t)].option_index(*r.selected_option) : kAbstain;
    }

    for (Index t = 0; t < selected.rows(); ++t)
        for (Index m = 0; m < selected.cols(); ++m)
            if (selected(t, m) == kAbstain - 1)
                throw IncompleteGrid("missing record for task " + tasks[static_cast<std::size_t>(t)].id + ", model "
                                     + models[static_cast<std::size_t>(m)]);

    return ResponseDataset(std::move(models), std::move(tasks), std::move(selected));
}

// RFC 4180 style field splitting; fields may be quoted with "" escapes.
std::vector<std::string> split_csv_line(const std::string& line, std::size_t lineno)
{
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (quoted)
        throw ParseError(lineno, "unterminated quoted field");
    fields.push_back(std::move(cur));
    return fields;
}

std::string csv_escape(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += "\"\"";
        else
            out.push_back(c);
    }
    return out + "\"";
}

namespace {

void check_record(const ResponseRecord& r)
{
    if (r.options.empty())
        throw ParseError(r.line, "empty option list");
    if (std::find(r.options.begin(), r.options.end(), r.correct_option) == r.options.end())
        throw ParseError(r.line, "correct option '" + r.correct_option + "' is not among the options");
    if (r.selected_option
        && std::find(r.options.begin(), r.options.end(), *r.selected_option) == r.options.end())
        throw ParseError(r.line, "selected option '" + *r.selected_option + "' is not among the options");
    std::vector<std::string> sorted = r.options;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw ParseError(r.line, "repeated option label");
}

template <typename Json>
const Json& require(const Json& obj, const char* key, std::size_t line)
{
    auto it = obj.find(key);
    if (it == obj.end())
        throw SchemaError("line " + std::to_string(line) + ": missing field '" + key + "'");
    return *it;
}

template <typename Json>
std::string require_string(const Json& obj, const char* key, std::size_t line)
{
    const auto& v = require(obj, key, line);
    if (!v.is_string())
        throw SchemaError("line " + std::to_string(line) + ": field '" + key + "' must be a string");
    return v.template get<std::string>();
}

ResponseRecord parse_jsonl_record(const std::string& text, std::size_t line)
{
    nlohmann::json obj;
    try {
        obj = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(line, e.what());
    }
    if (!obj.is_object())
        throw ParseError(line, "record is not a JSON object");

    ResponseRecord r;
    r.line = line;
    r.task_id = require_string(obj, "task_id", line);
    r.model_id = require_string(obj, "model", line);
    r.correct_option = require_string(obj, "correct", line);
    const auto& opts = require(obj, "options", line);
    if (!opts.is_array())
        throw SchemaError("line " + std::to_string(line) + ": field 'options' must be an array");
    for (const auto& o : opts) {
        if (!o.is_string())
            throw SchemaError("line " + std::to_string(line) + ": option labels must be strings");
        r.options.push_back(o.get<std::string>());
    }
    const auto& sel = require(obj, "selected", line);
    if (sel.is_string())
        r.selected_option = sel.get<std::string>();
    else if (!sel.is_null())
        throw SchemaError("line " + std::to_string(line) + ": field 'selected' must be a string or null");
    return r;
}

std::vector<std::string> split_pipe(const std::string& s)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == '|') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(std::move(cur));
    return out;
}

std::vector<ResponseRecord> parse_csv(std::istream& in)
{
    static const char* const kColumns[] = {"task_id", "model", "correct", "selected", "options"};
    std::vector<ResponseRecord> records;
    std::string text;
    std::size_t lineno = 0;
    std::map<std::string, std::size_t> col;
    std::size_t width = 0;

    while (std::getline(in, text)) {
        ++lineno;
        if (!text.empty() && text.back() == '\r')
            text.pop_back();
        if (text.empty())
            continue;
        auto fields = split_csv_line(text, lineno);
        if (col.empty()) {
            for (std::size_t i = 0; i < fields.size(); ++i)
                col[fields[i]] = i;
            for (const char* c : kColumns)
                if (!col.count(c))
                    throw SchemaError("CSV header lacks column '" + std::string(c) + "'");
            width = fields.size();
            continue;
        }
        if (fields.size() != width)
            throw ParseError(lineno, "expected " + std::to_string(width) + " fields, got " + std::to_string(fields.size()));
        ResponseRecord r;
        r.line = lineno;
        r.task_id = fields[col["task_id"]];
        r.model_id = fields[col["model"]];
        r.correct_option = fields[col["correct"]];
        const std::string& sel = fields[col["selected"]];
        if (!sel.empty())
            r.selected_option = sel;
        r.options = split_pipe(fields[col["options"]]);
        if (r.task_id.empty() || r.model_id.empty())
            throw SchemaError("line " + std::to_string(lineno) + ": empty task_id or model");
        records.push_back(std::move(r));
    }
    if (col.empty())
        throw SchemaError("CSV input has no header row");
    return records;
}

} // namespace

std::vector<ResponseRecord> parse_responses(std::istream& in, ResponseFormat format)
{
    std::vector<ResponseRecord> records;
    if (format == ResponseFormat::csv) {
        records = parse_csv(in);
    } else {
        std::string text;
        std::size_t lineno = 0;
        while (std::getline(in, text)) {
            ++lineno;
            if (text.find_first_not_of(" \t\r") == std::string::npos)
                continue;
            records.push_back(parse_jsonl_record(text, lineno));
        }
    }
    for (const auto& r : records)
        check_record(r);
    return records;
}

ResponseDataset load_responses(const std::filesystem::path& path, ResponseFormat format)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open " + path.string());
    return build_dataset(parse_responses(in, format));
}

ResponseDataset load_responses(const std::filesystem::path& path)
{
    return load_responses(path, format_from_path(path));
}

void write_responses(std::ostream& out, const ResponseDataset& ds, ResponseFormat format)
{
    if (format == ResponseFormat::csv)
        out << "task_id,model,correct,selected,options\n";
    for (Index t = 0; t < ds.num_tasks(); ++t) {
        const TaskInfo& info = ds.task(t);
        for (Index m = 0; m < ds.num_models(); ++m) {
            int s = ds.selected(t, m);
            const std::string& model = ds.models()[static_cast<std::size_t>(m)];
            const std::string& correct = info.options[static_cast<std::size_t>(info.correct)];
            if (format == ResponseFormat::csv) {
                std::string opts;
                for (std::size_t k = 0; k < info.options.size(); ++k) {
                    if (info.options[k].find('|') != std::string::npos)
                        throw SchemaError("option label '" + info.options[k] + "' contains '|'; use JSONL");
                    opts += (k ? "|" : "") + info.options[k];
                }
                out << csv_escape(info.id) << ',' << csv_escape(model) << ',' << csv_escape(correct) << ','
                    << (s == kAbstain ? std::string() : csv_escape(info.options[static_cast<std::size_t>(s)])) << ','
                    << csv_escape(opts) << '\n';
            } else {
                ordered_json j;
                j["task_id"] = info.id;
                j["model"] = model;
                j["options"] = info.options;
                j["correct"] = correct;
                if (s == kAbstain)
                    j["selected"] = nullptr;
                else
                    j["selected"] = info.options[static_cast<std::size_t>(s)];
                out << j.dump() << '\n';
            }
        }
    }
}

void save_responses(const std::filesystem::path& path, const ResponseDataset& ds, ResponseFormat format)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path.string());
    write_responses(out, ds, format);
}

std::string dataset_hash(const ResponseDataset& ds)
{
    std::ostringstream os;
    write_responses(os, ds, ResponseFormat::jsonl);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : os.str()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ValidationReport validate_dataset(const ResponseDataset& ds)
{
    ValidationReport rep;
    rep.failures_per_model.assign(static_cast<std::size_t>(ds.num_models()), 0);
    for (Index t = 0; t < ds.num_tasks(); ++t) {
        const TaskInfo& info = ds.task(t);
        int k = static_cast<int>(info.options.size());
        rep.options_per_task.push_back(k);
        if (k < 2)
            rep.issues.push_back("task " + info.id + ": K < 2 (" + std::to_string(k) + " option)");
        for (Index m = 0; m < ds.num_models(); ++m) {
            if (ds.failed(t, m))
                ++rep.failures_per_model[static_cast<std::size_t>(m)];
            if (ds.abstained(t, m))
                ++rep.abstain_count;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------

namespace {

std::string key3(const std::string& a, const std::string& b, const std::string& c)
{
    return a + '\x1f' + b + '\x1f' + c;
}

std::string key2(const std::string& a, const std::string& b)
{
    return a + '\x1f' + b;
}

int read_binary(const nlohmann::json& obj, const char* key, std::size_t line)
{
    const auto& v = require(obj, key, line);
    int x = -1;
    if (v.is_boolean())
        x = v.get<bool>() ? 1 : 0;
    else if (v.is_number_integer())
        x = v.get<int>();
    else
        throw SchemaError("line " + std::to_string(line) + ": field '" + key + "' must be 0/1");
    if (x != 0 && x != 1)
        throw SchemaError("line " + std::to_string(line) + ": field '" + key + "' must be 0 or 1");
    return x;
}

} // namespace

JudgmentDataset::JudgmentDataset(std::vector<JudgmentRecord> records) : records_(std::move(records))
{
    std::unordered_map<std::string, bool> seen_judge, seen_model, seen_task;
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& r = records_[i];
        if (r.verdict != 0 && r.verdict != 1)
            throw SchemaError("verdict must be 0 or 1");
        if (r.truth != 0 && r.truth != 1)
            throw SchemaError("truth must be 0 or 1");
        if (r.reasoning_quality && (*r.reasoning_quality < 0 || *r.reasoning_quality > 5))
            throw SchemaError("reasoning_quality must lie in 0..5");
        if (!index_.emplace(key3(r.task_id, r.judge_id, r.model_id), i).second)
            throw DuplicateRecord("duplicate judgment for task " + r.task_id + ", judge " + r.judge_id + ", model "
                                  + r.model_id);
        auto [it, inserted] = truth_.emplace(key2(r.task_id, r.model_id), r.truth);
        if (!inserted && it->second != r.truth)
            throw InconsistentTask("conflicting truth for task " + r.task_id + ", model " + r.model_id);
        if (seen_judge.emplace(r.judge_id, true).second)
            judges_.push_back(r.judge_id);
        if (seen_model.emplace(r.model_id, true).second)
            models_.push_back(r.model_id);
        if (seen_task.emplace(r.task_id, true).second)
            tasks_.push_back(r.task_id);
    }
}

std::optional<int> JudgmentDataset::verdict(const std::string& task, const std::string& judge,
                                            const std::string& model) const
{
    auto it = index_.find(key3(task, judge, model));
    if (it == index_.end())
        return std::nullopt;
    return records_[it->second].verdict;
}

std::optional<int> JudgmentDataset::truth(const std::string& task, const std::string& model) const
{
    auto it = truth_.find(key2(task, model));
    if (it == truth_.end())
        return std::nullopt;
    return it->second;
}

std::vector<JudgmentRecord> parse_judgments(std::istream& in)
{
    std::vector<JudgmentRecord> out;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(line, e.what());
        }
        if (!obj.is_object())
            throw ParseError(line, "record is not a JSON object");
        JudgmentRecord r;
        r.task_id = require_string(obj, "task_id", line);
        r.judge_id = require_string(obj, "judge", line);
        r.model_id = require_string(obj, "model", line);
        r.verdict = read_binary(obj, "verdict", line);
        r.truth = read_binary(obj, "truth", line);
        if (auto it = obj.find("reasoning_quality"); it != obj.end() && !it->is_null()) {
            if (!it->is_number_integer())
                throw SchemaError("line " + std::to_string(line) + ": reasoning_quality must be an integer");
            int q = it->get<int>();
            if (q < 0 || q > 5)
                throw SchemaError("line " + std::to_string(line) + ": reasoning_quality must lie in 0..5");
            r.reasoning_quality = q;
        }
        out.push_back(std::move(r));
    }
    return out;
}

JudgmentDataset load_judgments(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open " + path.string());
    return JudgmentDataset(parse_judgments(in));
}

void write_judgments(std::ostream& out, const JudgmentDataset& js)
{
    for (const auto& r : js.records()) {
        ordered_json j;
        j["task_id"] = r.task_id;
        j["judge"] = r.judge_id;
        j["model"] = r.model_id;
        j["verdict"] = r.verdict;
        j["truth"] = r.truth;
        if (r.reasoning_quality)
            j["reasoning_quality"] = *r.reasoning_quality;
        else
            j["reasoning_quality"] = nullptr;
        out << j.dump() << '\n';
    }
}

void save_judgments(const std::filesystem::path& path, const JudgmentDataset& js)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path.string());
    write_judgments(out, js);
}

} // namespace entangle
