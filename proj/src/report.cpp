#include "entangle/report.hpp"

#include "entangle/bei.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace entangle {

const char* to_string(AuditLevel level)
{
    switch (level) {
    case AuditLevel::bei: return "bei";
    case AuditLevel::cig: return "cig";
    case AuditLevel::both: return "both";
    }
    return "both";
}

AuditLevel audit_level_from_string(const std::string& s)
{
    if (s == "bei")
        return AuditLevel::bei;
    if (s == "cig")
        return AuditLevel::cig;
    if (s == "both")
        return AuditLevel::both;
    throw InvalidArgument("unknown audit level '" + s + "'");
}

namespace {

// Shortest round-trip representation.
std::string num(double x)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string fixed(double x, int digits)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

std::string opt_num(const std::optional<double>& x)
{
    return x ? num(*x) : std::string();
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& s, const std::string& what, std::size_t lineno)
{
    const std::string t = trim(s);
    try {
        std::size_t used = 0;
        double v = std::stod(t, &used);
        if (used == t.size())
            return v;
    } catch (const std::exception&) {
    }
    throw ParseError(lineno, "bad " + what + " '" + t + "'");
}

template <typename J>
J optional_json(const std::optional<double>& x)
{
    return x ? J(*x) : J(nullptr);
}

std::optional<double> json_optional(const nlohmann::json& j, const char* key)
{
    if (!j.contains(key) || j[key].is_null())
        return std::nullopt;
    return j[key].get<double>();
}

nlohmann::ordered_json pair_json(const PairRow& r, bool cig)
{
    nlohmann::ordered_json j;
    j["model_1"] = r.model_1;
    j["model_2"] = r.model_2;
    j["score"] = r.score;
    j["p_raw"] = r.p_raw;
    j["p_adjusted"] = r.p_adjusted;
    j["replicates"] = r.replicates;
    j["exact"] = r.exact;
    j["degenerate"] = r.degenerate;
    if (cig) {
        j["events"] = r.events;
        j["normalized_score"] = optional_json<nlohmann::ordered_json>(r.normalized_score);
    }
    return j;
}

PairRow pair_from_json(const nlohmann::json& j)
{
    PairRow r;
    r.model_1 = j.at("model_1").get<std::string>();
    r.model_2 = j.at("model_2").get<std::string>();
    r.score = j.at("score").get<double>();
    r.p_raw = j.at("p_raw").get<double>();
    r.p_adjusted = j.at("p_adjusted").get<double>();
    r.replicates = j.value("replicates", 0L);
    r.exact = j.value("exact", false);
    r.degenerate = j.value("degenerate", false);
    r.events = j.value("events", -1L);
    r.normalized_score = json_optional(j, "normalized_score");
    return r;
}

} // namespace

std::vector<PairRow> pair_rows(const std::vector<PairStatistic>& stats, const std::vector<std::string>& models)
{
    std::vector<PairRow> rows;
    rows.reserve(stats.size());
    for (const auto& s : stats) {
        PairRow r;
        r.model_1 = models[static_cast<std::size_t>(s.i)];
        r.model_2 = models[static_cast<std::size_t>(s.j)];
        r.score = s.score;
        r.p_raw = s.p_raw;
        r.p_adjusted = s.p_adjusted;
        r.replicates = s.replicates;
        r.exact = s.exact;
        r.degenerate = s.degenerate;
        r.events = s.events;
        r.normalized_score = s.normalized_score;
        rows.push_back(std::move(r));
    }
    return rows;
}

AuditRun run_audit(const ResponseDataset& ds, const AuditOptions& opts)
{
    if (ds.num_models() < 2)
        throw EmptyInput("audit needs at least two models");
    AuditRun run;
    AuditReport& rep = run.report;
    rep.metadata.dataset_hash = dataset_hash(ds);
    rep.metadata.seed = opts.config.seed;
    rep.metadata.replicates = opts.config.replicates;
    rep.metadata.alpha = opts.alpha;
    rep.metadata.bh = opts.config.bh;
    rep.metadata.level = to_string(opts.level);
    rep.metadata.alternative = opts.config.alternative == Alternative::greater ? "greater" : "two-sided";
    rep.models = ds.models();
    rep.n_tasks = ds.num_tasks();

    const DifficultyProfile profile = compute_difficulty(ds);
    const CalibrationModel cal = fit_calibration(ds, profile);
    for (std::size_t m = 0; m < cal.fits.size(); ++m) {
        const LogisticFit& f = cal.fits[m];
        rep.calibration.push_back({cal.models[m], f.alpha, f.beta, f.auc, f.iterations, f.converged, f.degenerate});
    }

    if (opts.level != AuditLevel::cig) {
        const MatrixXd residuals = compute_residuals(ds, cal, profile);
        rep.bei = pair_rows(bei_audit(ds, residuals, profile, opts.config), ds.models());
    }
    if (opts.level != AuditLevel::bei) {
        CigAudit audit = cig_audit_with_events(ds, opts.config);
        rep.cig = pair_rows(audit.stats, ds.models());
        run.events = std::move(audit.events);
    }
    return run;
}

nlohmann::ordered_json to_json(const AuditReport& report)
{
    using nlohmann::ordered_json;
    ordered_json meta;
    const ReportMetadata& m = report.metadata;
    meta["tool"] = m.tool;
    meta["version"] = m.version;
    meta["dataset_hash"] = m.dataset_hash;
    meta["seed"] = m.seed;
    meta["replicates"] = m.replicates;
    meta["alpha"] = m.alpha;
    meta["bh"] = m.bh;
    meta["level"] = m.level;
    meta["alternative"] = m.alternative;
    meta["log_base"] = m.log_base;
    if (m.generated_at)
        meta["generated_at"] = *m.generated_at;

    ordered_json j;
    j["metadata"] = meta;
    j["models"] = report.models;
    j["n_tasks"] = report.n_tasks;
    j["calibration"] = ordered_json::array();
    for (const auto& c : report.calibration) {
        ordered_json row;
        row["model"] = c.model;
        row["alpha"] = c.alpha;
        row["beta"] = c.beta;
        row["auc"] = optional_json<ordered_json>(c.auc);
        row["iterations"] = c.iterations;
        row["converged"] = c.converged;
        row["degenerate"] = c.degenerate;
        j["calibration"].push_back(row);
    }
    if (report.bei) {
        j["bei"] = ordered_json::array();
        for (const auto& r : *report.bei)
            j["bei"].push_back(pair_json(r, false));
    }
    if (report.cig) {
        j["cig"] = ordered_json::array();
        for (const auto& r : *report.cig)
            j["cig"].push_back(pair_json(r, true));
    }
    return j;
}

AuditReport audit_report_from_json(const nlohmann::json& j)
{
    AuditReport rep;
    try {
        const auto& meta = j.at("metadata");
        ReportMetadata& m = rep.metadata;
        m.tool = meta.value("tool", m.tool);
        m.version = meta.value("version", m.version);
        m.dataset_hash = meta.value("dataset_hash", std::string());
        m.seed = meta.value("seed", std::uint64_t{0});
        m.replicates = meta.value("replicates", 0L);
        m.alpha = meta.value("alpha", 0.05);
        m.bh = meta.value("bh", true);
        m.level = meta.value("level", m.level);
        m.alternative = meta.value("alternative", m.alternative);
        m.log_base = meta.value("log_base", m.log_base);
        if (meta.contains("generated_at"))
            m.generated_at = meta["generated_at"].get<std::string>();
        rep.models = j.value("models", std::vector<std::string>{});
        rep.n_tasks = j.value("n_tasks", Index{0});
        if (j.contains("calibration"))
            for (const auto& c : j["calibration"])
                rep.calibration.push_back({c.at("model").get<std::string>(), c.value("alpha", 0.0),
                                           c.value("beta", 0.0), json_optional(c, "auc"), c.value("iterations", 0),
                                           c.value("converged", true), c.value("degenerate", false)});
        for (const char* level : {"bei", "cig"}) {
            if (!j.contains(level))
                continue;
            std::vector<PairRow> rows;
            for (const auto& r : j[level])
                rows.push_back(pair_from_json(r));
            (std::string(level) == "bei" ? rep.bei : rep.cig) = std::move(rows);
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("audit report: ") + e.what());
    }
    return rep;
}

std::string format_pvalue(double p)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2E", p);
    return buf;
}

void write_json(std::ostream& out, const AuditReport& report)
{
    out << to_json(report).dump(2) << '\n';
}

void write_markdown(std::ostream& out, const AuditReport& report)
{
    const ReportMetadata& m = report.metadata;
    out << "# Entanglement audit\n\n";
    out << "- tool: " << m.tool << ' ' << m.version << '\n';
    out << "- dataset_hash: " << m.dataset_hash << '\n';
    out << "- seed: " << m.seed << '\n';
    out << "- replicates: " << m.replicates << '\n';
    out << "- alpha: " << num(m.alpha) << '\n';
    out << "- bh: " << (m.bh ? "true" : "false") << '\n';
    out << "- level: " << m.level << '\n';
    out << "- alternative: " << m.alternative << '\n';
    out << "- log_base: " << m.log_base << '\n';
    if (m.generated_at)
        out << "- generated_at: " << *m.generated_at << '\n';
    out << "- models: " << report.models.size() << '\n';
    out << "- tasks: " << report.n_tasks << "\n\n";

    out << "## Calibration\n\n| Model | alpha | beta | AUC | converged |\n|---|---|---|---|---|\n";
    for (const auto& c : report.calibration)
        out << "| " << c.model << " | " << fixed(c.alpha, 4) << " | " << fixed(c.beta, 4) << " | "
            << (c.auc ? fixed(*c.auc, 4) : std::string("n/a")) << " | " << (c.converged ? "yes" : "no") << " |\n";

    auto table = [&](const char* title, const char* col, const std::vector<PairRow>& rows, int digits) {
        out << "\n## " << title << "\n\n| Model 1 | Model 2 | " << col << " | p-value | p-adjusted |\n|---|---|---|---|---|\n";
        for (const auto& r : rows)
            out << "| " << r.model_1 << " | " << r.model_2 << " | " << fixed(r.score, digits) << " | "
                << format_pvalue(r.p_raw) << " | " << format_pvalue(r.p_adjusted) << " |\n";
    };
    if (report.bei)
        table("BEI", "BEI", *report.bei, 4);
    if (report.cig)
        table("CIG", "CIG", *report.cig, 2);
}

void write_csv(std::ostream& out, const AuditReport& report)
{
    const ReportMetadata& m = report.metadata;
    out << "# tool: " << m.tool << '\n';
    out << "# version: " << m.version << '\n';
    out << "# dataset_hash: " << m.dataset_hash << '\n';
    out << "# seed: " << m.seed << '\n';
    out << "# replicates: " << m.replicates << '\n';
    out << "# alpha: " << num(m.alpha) << '\n';
    out << "# bh: " << (m.bh ? "true" : "false") << '\n';
    out << "# level: " << m.level << '\n';
    out << "# alternative: " << m.alternative << '\n';
    out << "# log_base: " << m.log_base << '\n';
    if (m.generated_at)
        out << "# generated_at: " << *m.generated_at << '\n';
    out << "level,model_1,model_2,score,p_raw,p_adjusted\n";
    auto rows = [&](const char* level, const std::vector<PairRow>& rs) {
        for (const auto& r : rs)
            out << level << ',' << csv_escape(r.model_1) << ',' << csv_escape(r.model_2) << ',' << num(r.score) << ','
                << num(r.p_raw) << ',' << num(r.p_adjusted) << '\n';
    };
    if (report.bei)
        rows("bei", *report.bei);
    if (report.cig)
        rows("cig", *report.cig);
}

namespace {

PairRow parse_pair_row_at(const std::string& line, std::size_t lineno)
{
    PairRow r;
    if (line.find('|') != std::string::npos) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, '|'))
            cells.push_back(trim(cell));
        if (!cells.empty() && cells.front().empty())
            cells.erase(cells.begin());
        if (!cells.empty() && cells.back().empty())
            cells.pop_back();
        if (cells.size() < 4 || cells.size() > 5)
            throw ParseError(lineno, "pair row needs 4 or 5 cells: '" + line + "'");
        r.model_1 = cells[0];
        r.model_2 = cells[1];
        r.score = parse_number(cells[2], "score", lineno);
        r.p_raw = parse_number(cells[3], "p-value", lineno);
        r.p_adjusted = cells.size() == 5 ? parse_number(cells[4], "p-adjusted", lineno) : r.p_raw;
        return r;
    }
    const auto fields = split_csv_line(trim(line), lineno);
    if (fields.size() != 6 || (fields[0] != "bei" && fields[0] != "cig"))
        throw ParseError(lineno, "pair row needs level,model_1,model_2,score,p_raw,p_adjusted: '" + line + "'");
    r.model_1 = fields[1];
    r.model_2 = fields[2];
    r.score = parse_number(fields[3], "score", lineno);
    r.p_raw = parse_number(fields[4], "p_raw", lineno);
    r.p_adjusted = parse_number(fields[5], "p_adjusted", lineno);
    return r;
}

} // namespace

PairRow parse_pair_row(const std::string& line)
{
    return parse_pair_row_at(line, 0);
}

namespace {

void apply_metadata(ReportMetadata& m, const std::string& key, const std::string& value)
{
    if (key == "tool") {
        auto sp = value.find(' ');
        m.tool = value.substr(0, sp);
        if (sp != std::string::npos)
            m.version = value.substr(sp + 1);
    } else if (key == "version") {
        m.version = value;
    } else if (key == "dataset_hash") {
        m.dataset_hash = value;
    } else if (key == "seed") {
        m.seed = std::stoull(value);
    } else if (key == "replicates") {
        m.replicates = std::stol(value);
    } else if (key == "alpha") {
        m.alpha = std::stod(value);
    } else if (key == "bh") {
        m.bh = value == "true";
    } else if (key == "level") {
        m.level = value;
    } else if (key == "alternative") {
        m.alternative = value;
    } else if (key == "log_base") {
        m.log_base = value;
    } else if (key == "generated_at") {
        m.generated_at = value;
    }
}

std::pair<std::string, std::string> key_value(const std::string& s)
{
    auto colon = s.find(':');
    if (colon == std::string::npos)
        return {};
    return {trim(s.substr(0, colon)), trim(s.substr(colon + 1))};
}

void note_models(AuditReport& rep, const PairRow& r)
{
    for (const auto* name : {&r.model_1, &r.model_2})
        if (std::find(rep.models.begin(), rep.models.end(), *name) == rep.models.end())
            rep.models.push_back(*name);
}

AuditReport load_csv_report(std::istream& in)
{
    AuditReport rep;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty())
            continue;
        if (t[0] == '#') {
            auto [k, v] = key_value(t.substr(1));
            apply_metadata(rep.metadata, k, v);
            continue;
        }
        if (!header) {
            if (t != "level,model_1,model_2,score,p_raw,p_adjusted")
                throw ParseError(lineno, "unexpected CSV header");
            header = true;
            continue;
        }
        PairRow r = parse_pair_row_at(t, lineno);
        note_models(rep, r);
        auto& table = t.rfind("bei,", 0) == 0 ? rep.bei : rep.cig;
        if (!table)
            table.emplace();
        table->push_back(std::move(r));
    }
    return rep;
}

AuditReport load_markdown_report(std::istream& in)
{
    AuditReport rep;
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.rfind("## ", 0) == 0) {
            section = trim(t.substr(3));
            if (section == "BEI")
                rep.bei.emplace();
            else if (section == "CIG")
                rep.cig.emplace();
            continue;
        }
        if (section.empty() && t.rfind("- ", 0) == 0) {
            auto [k, v] = key_value(t.substr(2));
            if (k == "tasks")
                rep.n_tasks = std::stol(v);
            else
                apply_metadata(rep.metadata, k, v);
            continue;
        }
        if ((section != "BEI" && section != "CIG") || t.empty() || t[0] != '|')
            continue;
        if (t.rfind("| Model 1", 0) == 0 || t.rfind("|---", 0) == 0)
            continue;
        PairRow r = parse_pair_row_at(t, lineno);
        note_models(rep, r);
        (section == "BEI" ? rep.bei : rep.cig)->push_back(std::move(r));
    }
    return rep;
}

} // namespace

AuditReport load_audit_report(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open audit report " + path.string());
    const std::string ext = path.extension().string();
    if (ext == ".csv")
        return load_csv_report(in);
    if (ext == ".md")
        return load_markdown_report(in);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(0, std::string("audit report: ") + e.what());
    }
    return audit_report_from_json(j);
}

std::vector<GraphEdge> significant_edges(const AuditReport& report, double alpha)
{
    std::vector<GraphEdge> edges;
    auto add = [&](const char* level, const std::optional<std::vector<PairRow>>& rows) {
        if (!rows)
            return;
        for (const auto& r : *rows)
            if (r.p_adjusted < alpha)
                edges.push_back({level, r.model_1, r.model_2, r.score, r.p_adjusted});
    };
    add("bei", report.bei);
    add("cig", report.cig);
    return edges;
}

namespace {

std::string dot_quote(const std::string& s)
{
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\')
            out.push_back('\\');
        out.push_back(c);
    }
    return out + "\"";
}

} // namespace

void write_dot(std::ostream& out, const AuditReport& report, double alpha)
{
    out << "graph entanglement {\n";
    for (const auto& m : report.models)
        out << "  " << dot_quote(m) << ";\n";
    for (const auto& e : significant_edges(report, alpha))
        out << "  " << dot_quote(e.model_1) << " -- " << dot_quote(e.model_2) << " [level=" << e.level
            << ", weight=" << num(e.weight) << ", p_adjusted=" << num(e.p_adjusted) << "];\n";
    out << "}\n";
}

void write_graph_json(std::ostream& out, const AuditReport& report, double alpha)
{
    using nlohmann::ordered_json;
    ordered_json j;
    j["directed"] = false;
    j["alpha"] = alpha;
    j["nodes"] = report.models;
    ordered_json adjacency = ordered_json::object();
    for (const auto& m : report.models)
        adjacency[m] = ordered_json::array();
    ordered_json edges = ordered_json::array();
    for (const auto& e : significant_edges(report, alpha)) {
        edges.push_back({{"source", e.model_1},
                         {"target", e.model_2},
                         {"level", e.level},
                         {"weight", e.weight},
                         {"p_adjusted", e.p_adjusted}});
        adjacency[e.model_1].push_back({{"node", e.model_2}, {"level", e.level}, {"weight", e.weight}});
        adjacency[e.model_2].push_back({{"node", e.model_1}, {"level", e.level}, {"weight", e.weight}});
    }
    j["edges"] = edges;
    j["adjacency"] = adjacency;
    out << j.dump(2) << '\n';
}

void write_events_jsonl(std::ostream& out, const std::vector<std::string>& models,
                        const std::vector<std::vector<CollisionEvent>>& events)
{
    const auto pairs = all_pairs(static_cast<Index>(models.size()));
    for (std::size_t k = 0; k < events.size() && k < pairs.size(); ++k) {
        for (const auto& e : events[k]) {
            nlohmann::ordered_json j;
            j["model_1"] = models[static_cast<std::size_t>(pairs[k].first)];
            j["model_2"] = models[static_cast<std::size_t>(pairs[k].second)];
            j["task_id"] = e.task_id;
            j["z"] = e.z;
            j["c_null"] = e.c_null;
            j["weight"] = e.weight;
            j["contribution"] = e.contribution();
            out << j.dump() << '\n';
        }
    }
}

void write_calibration_json(std::ostream& out, const AuditReport& report)
{
    nlohmann::ordered_json j;
    j["dataset_hash"] = report.metadata.dataset_hash;
    j["calibration"] = to_json(report)["calibration"];
    out << j.dump(2) << '\n';
}

std::vector<ScoredPair> scored_pairs(const std::vector<PairRow>& rows)
{
    std::vector<ScoredPair> out;
    out.reserve(rows.size());
    for (const auto& r : rows)
        out.push_back({r.model_1, r.model_2, r.score, r.p_adjusted});
    return out;
}

PairScores pair_scores(const std::vector<PairRow>& rows)
{
    PairScores s;
    for (const auto& r : rows)
        s.set(r.model_1, r.model_2, r.score);
    return s;
}

nlohmann::ordered_json to_json(const BiasReport& report)
{
    using nlohmann::ordered_json;
    ordered_json j;
    j["rows"] = ordered_json::array();
    for (const auto& r : report.rows) {
        const PrecisionDeviation& p = r.precision;
        ordered_json row;
        row["judge"] = p.judge;
        row["model"] = p.model;
        row["status"] = to_string(p.status);
        row["global_precision"] = optional_json<ordered_json>(p.global_precision);
        row["model_precision"] = optional_json<ordered_json>(p.model_precision);
        row["delta_precision"] = optional_json<ordered_json>(p.delta);
        row["global_endorsements"] = p.global_endorsements;
        row["model_endorsements"] = p.model_endorsements;
        row["bei"] = optional_json<ordered_json>(r.bei);
        row["cig"] = optional_json<ordered_json>(r.cig);
        row["flag"] = r.flag;
        j["rows"].push_back(row);
    }
    j["associations"] = ordered_json::array();
    for (const auto& a : report.associations) {
        ordered_json row;
        row["judge"] = a.judge;
        row["metric"] = a.metric;
        if (a.result) {
            row["n"] = a.result->n;
            row["rho"] = a.result->rho;
            row["p_value"] = a.result->p_value;
            row["p_value_greater"] = a.result->p_value_greater;
            row["method"] = to_string(a.result->method);
        } else {
            row["n"] = nullptr;
            row["rho"] = nullptr;
            row["p_value"] = nullptr;
            row["p_value_greater"] = nullptr;
            row["method"] = nullptr;
        }
        row["stars"] = a.stars;
        row["flag"] = a.flag;
        j["associations"].push_back(row);
    }
    return j;
}

void write_bias_markdown(std::ostream& out, const BiasReport& report)
{
    out << "## Judge precision deviation\n\n| Judge | Model | Global precision | Model precision | ΔPrec | BEI | CIG | Flag |\n"
        << "|---|---|---|---|---|---|---|---|\n";
    auto cell = [](const std::optional<double>& x, int digits) { return x ? fixed(*x, digits) : std::string("n/a"); };
    for (const auto& r : report.rows)
        out << "| " << r.precision.judge << " | " << r.precision.model << " | "
            << cell(r.precision.global_precision, 4) << " | " << cell(r.precision.model_precision, 4) << " | "
            << cell(r.precision.delta, 4) << " | " << cell(r.bei, 4) << " | " << cell(r.cig, 2) << " | " << r.flag
            << " |\n";
    out << "\n## Association\n\n| Judge | Metric | n | rho | p-value | Flag |\n|---|---|---|---|---|---|\n";
    for (const auto& a : report.associations) {
        out << "| " << a.judge << " | " << a.metric << " | ";
        if (a.result)
            out << a.result->n << " | " << fixed(a.result->rho, 2) << a.stars << " | "
                << format_pvalue(a.result->p_value);
        else
            out << " | n/a | n/a";
        out << " | " << a.flag << " |\n";
    }
}

void write_bias_csv(std::ostream& out, const BiasReport& report)
{
    out << "judge,model,global_precision,model_precision,delta_precision,bei,cig,flag\n";
    for (const auto& r : report.rows)
        out << csv_escape(r.precision.judge) << ',' << csv_escape(r.precision.model) << ','
            << opt_num(r.precision.global_precision) << ',' << opt_num(r.precision.model_precision) << ','
            << opt_num(r.precision.delta) << ',' << opt_num(r.bei) << ',' << opt_num(r.cig) << ',' << r.flag
            << '\n';
    out << "\njudge,metric,n,rho,p_value,p_value_greater,method,stars,flag\n";
    for (const auto& a : report.associations) {
        out << csv_escape(a.judge) << ',' << a.metric << ',';
        if (a.result)
            out << a.result->n << ',' << num(a.result->rho) << ',' << num(a.result->p_value) << ','
                << num(a.result->p_value_greater) << ',' << to_string(a.result->method);
        else
            out << ",,,,";
        out << ',' << a.stars << ',' << a.flag << '\n';
    }
}

void write_ensemble_csv(std::ostream& out, const EnsembleComparison& cmp)
{
    out << "strategy,acc,f1,precision,delta_acc\n";
    for (const auto& o : cmp.outcomes)
        out << to_string(o.strategy) << ',' << num(o.metrics.accuracy) << ',' << opt_num(o.metrics.f1) << ','
            << opt_num(o.metrics.precision) << ',' << opt_num(o.delta_accuracy) << '\n';
}

void write_weights_csv(std::ostream& out, const VerifierWeighting& weighting)
{
    out << "target,verifier,q,delta_in,delta_tar,weight\n";
    for (const auto& r : weighting.rows)
        out << csv_escape(r.target) << ',' << csv_escape(r.verifier) << ',' << num(r.q) << ',' << num(r.delta_in)
            << ',' << num(r.delta_tar) << ',' << num(r.weight) << '\n';
}

} // namespace entangle
