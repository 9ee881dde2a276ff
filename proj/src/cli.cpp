#include "entangle/cli.hpp"

#include "entangle/parallel.hpp"
#include "entangle/report.hpp"
#include "entangle/synthgen.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

namespace entangle {

namespace {

void write_to(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& fn)
{
    if (path.empty() || path == "-") {
        fn(fallback);
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw Error("cannot write " + path);
    fn(f);
    if (!f)
        throw Error("write failed for " + path);
}

std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

PlantedPair parse_plant(const std::string& spec)
{
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ':'))
        parts.push_back(part);
    if (parts.size() < 3 || parts.size() > 4)
        throw InvalidArgument("--plant expects i:j:rho_fail[:rho_dir], got '" + spec + "'");
    try {
        PlantedPair p;
        p.i = std::stol(parts[0]);
        p.j = std::stol(parts[1]);
        p.rho_fail = std::stod(parts[2]);
        p.rho_dir = parts.size() == 4 ? std::stod(parts[3]) : 0.0;
        return p;
    } catch (const std::logic_error&) {
        throw InvalidArgument("--plant expects numbers, got '" + spec + "'");
    }
}

ResponseFormat response_format(const std::string& name, const std::string& path)
{
    if (name == "jsonl")
        return ResponseFormat::jsonl;
    if (name == "csv")
        return ResponseFormat::csv;
    return format_from_path(path);
}

struct GenerateArgs {
    std::string config, output, truth, judgments, format = "auto";
    Index models = 6, tasks = 500;
    int options = 4;
    std::uint64_t seed = 0;
    std::vector<std::string> plants;
    double concentration = 1.0, abstain_rate = 0.0, p_tp = 0.9, p_fp = 0.2, judge_coupling = 0.0;
    std::vector<Index> judges, targets;
};

struct AuditArgs {
    std::string responses, level = "both", format = "md", graph = "none", graph_output, output, events,
                calibration_output, mode = "auto", input_format = "auto";
    long replicates = 10'000;
    std::uint64_t seed = 0;
    double alpha = 0.05;
    bool bh = true, two_sided = false, timestamp = false;
    int threads = 1;
};

struct BiasArgs {
    std::string judgments, audit, responses, format = "md", output;
    bool pooled = false;
};

struct EnsembleArgs {
    std::string judgments, calibration, audit, output, weights_output;
    double lambda1 = 0.5, kappa = 1.0, eta1 = 1.0, eta2 = 1.0, alpha = -1.0;
    bool raw_scores = false, grid_search = false;
};

struct ValidateArgs {
    std::string responses, judgments, format = "auto";
};

void cmd_generate(const GenerateArgs& a, const CLI::App& sub, std::ostream& out)
{
    SynthConfig cfg;
    if (!a.config.empty()) {
        std::ifstream in(a.config);
        if (!in)
            throw Error("cannot open config " + a.config);
        try {
            cfg = synth_config_from_json(nlohmann::json::parse(in));
        } catch (const nlohmann::json::parse_error& e) {
            throw InvalidConfig(std::string("config: ") + e.what());
        }
    }
    auto given = [&](const char* name) { return sub.get_option(name)->count() > 0; };
    if (given("--models"))
        cfg.models = a.models;
    if (given("--tasks"))
        cfg.tasks = a.tasks;
    if (given("--options"))
        cfg.options = a.options;
    if (given("--seed"))
        cfg.seed = a.seed;
    if (given("--plant")) {
        cfg.planted.clear();
        for (const auto& s : a.plants)
            cfg.planted.push_back(parse_plant(s));
    }
    if (given("--concentration"))
        cfg.concentration = a.concentration;
    if (given("--abstain-rate"))
        cfg.abstain_rate = a.abstain_rate;
    if (given("--judges"))
        cfg.judges = a.judges;
    if (given("--targets"))
        cfg.targets = a.targets;
    if (given("--p-tp"))
        cfg.p_tp = a.p_tp;
    if (given("--p-fp"))
        cfg.p_fp = a.p_fp;
    if (given("--judge-coupling"))
        cfg.judge_coupling = a.judge_coupling;

    const SynthResponses gen = generate_responses(cfg);
    write_to(a.output, out,
             [&](std::ostream& o) { write_responses(o, gen.dataset, response_format(a.format, a.output)); });
    if (!a.truth.empty())
        write_to(a.truth, out, [&](std::ostream& o) {
            nlohmann::json j = to_json(gen.truth, gen.dataset.models());
            j["config"] = to_json(cfg);
            o << j.dump(2) << '\n';
        });
    if (!a.judgments.empty()) {
        const JudgmentDataset js = generate_judgments(cfg, gen.dataset);
        write_to(a.judgments, out, [&](std::ostream& o) { write_judgments(o, js); });
    }
}

int cmd_validate(const ValidateArgs& a, std::ostream& out, std::ostream& err)
{
    if (a.responses.empty() && a.judgments.empty())
        throw InvalidArgument("validate needs --responses and/or --judgments");
    bool ok = true;
    if (!a.responses.empty()) {
        const ResponseDataset ds = load_responses(a.responses, response_format(a.format, a.responses));
        const ValidationReport rep = validate_dataset(ds);
        out << "responses: " << a.responses << '\n';
        out << "  models: " << ds.num_models() << '\n';
        out << "  tasks: " << ds.num_tasks() << '\n';
        out << "  abstentions: " << rep.abstain_count << '\n';
        out << "  dataset_hash: " << dataset_hash(ds) << '\n';
        for (std::size_t m = 0; m < rep.failures_per_model.size(); ++m)
            out << "  failures[" << ds.models()[m] << "]: " << rep.failures_per_model[m] << '\n';
        for (const auto& issue : rep.issues)
            err << "issue: " << issue << '\n';
        ok = ok && rep.ok();
    }
    if (!a.judgments.empty()) {
        const JudgmentDataset js = load_judgments(a.judgments);
        out << "judgments: " << a.judgments << '\n';
        out << "  records: " << js.records().size() << '\n';
        out << "  judges: " << js.judges().size() << '\n';
        out << "  models: " << js.models().size() << '\n';
        out << "  tasks: " << js.tasks().size() << '\n';
    }
    return ok ? 0 : 1;
}

void cmd_audit(const AuditArgs& a, std::ostream& out)
{
    const ResponseDataset ds = load_responses(a.responses, response_format(a.input_format, a.responses));
    if (a.replicates < 1)
        throw InvalidArgument("--replicates must be positive");
    if (!(a.alpha > 0.0 && a.alpha < 1.0))
        throw InvalidArgument("--alpha must lie in (0, 1)");

    AuditOptions opts;
    opts.level = audit_level_from_string(a.level);
    opts.alpha = a.alpha;
    opts.config.replicates = a.replicates;
    opts.config.seed = a.seed;
    opts.config.bh = a.bh;
    opts.config.alternative = a.two_sided ? Alternative::two_sided : Alternative::greater;
    opts.config.mode = a.mode == "exact" ? SignFlipMode::exact
                       : a.mode == "mc"  ? SignFlipMode::monte_carlo
                                         : SignFlipMode::automatic;
    opts.config.threads = a.threads;

    AuditRun run = run_audit(ds, opts);
    if (a.timestamp)
        run.report.metadata.generated_at = utc_timestamp();

    write_to(a.output, out, [&](std::ostream& o) {
        if (a.format == "json")
            write_json(o, run.report);
        else if (a.format == "csv")
            write_csv(o, run.report);
        else
            write_markdown(o, run.report);
    });
    if (a.graph != "none") {
        if (a.graph_output.empty())
            throw InvalidArgument("--graph needs --graph-output");
        write_to(a.graph_output, out, [&](std::ostream& o) {
            if (a.graph == "dot")
                write_dot(o, run.report, a.alpha);
            else
                write_graph_json(o, run.report, a.alpha);
        });
    }
    if (!a.events.empty()) {
        if (!run.report.cig)
            throw InvalidArgument("--events needs the CIG level");
        write_to(a.events, out, [&](std::ostream& o) { write_events_jsonl(o, run.report.models, run.events); });
    }
    if (!a.calibration_output.empty())
        write_to(a.calibration_output, out, [&](std::ostream& o) { write_calibration_json(o, run.report); });
}

void cmd_bias(const BiasArgs& a, std::ostream& out)
{
    const JudgmentDataset js = load_judgments(a.judgments);
    const AuditReport audit = load_audit_report(a.audit);
    if (!a.responses.empty()) {
        const std::string hash = dataset_hash(load_responses(a.responses));
        if (hash != audit.metadata.dataset_hash)
            throw Error("audit report was computed on a different dataset (hash " + audit.metadata.dataset_hash
                        + ", responses " + hash + ")");
    }
    if (!audit.bei && !audit.cig)
        throw Error("audit report has no pair tables");
    const PairScores bei = audit.bei ? pair_scores(*audit.bei) : PairScores{};
    const PairScores cig = audit.cig ? pair_scores(*audit.cig) : PairScores{};
    const BiasReport rep = bias_report(js, bei, cig, {a.pooled});
    write_to(a.output, out, [&](std::ostream& o) {
        if (a.format == "json") {
            nlohmann::ordered_json j;
            j["metadata"] = {{"tool", "entangle"},
                             {"version", kVersion},
                             {"dataset_hash", audit.metadata.dataset_hash},
                             {"seed", audit.metadata.seed},
                             {"replicates", audit.metadata.replicates},
                             {"alpha", audit.metadata.alpha}};
            const auto body = to_json(rep);
            j["rows"] = body["rows"];
            j["associations"] = body["associations"];
            o << j.dump(2) << '\n';
        } else if (a.format == "csv") {
            write_bias_csv(o, rep);
        } else {
            write_bias_markdown(o, rep);
        }
    });
}

void cmd_ensemble(const EnsembleArgs& a, std::ostream& out)
{
    const JudgmentDataset evaluation = load_judgments(a.judgments);
    const JudgmentDataset calibration = load_judgments(a.calibration);
    const AuditReport audit = load_audit_report(a.audit);

    EnsembleOptions opts;
    opts.lambda1 = a.lambda1;
    opts.params = {a.kappa, a.eta1, a.eta2};
    opts.significant_only = !a.raw_scores;
    opts.alpha = a.alpha > 0.0 ? a.alpha : audit.metadata.alpha;
    opts.grid_search = a.grid_search;

    const auto bei = audit.bei ? scored_pairs(*audit.bei) : std::vector<ScoredPair>{};
    const auto cig = audit.cig ? scored_pairs(*audit.cig) : std::vector<ScoredPair>{};
    const EnsembleComparison cmp = compare_strategies(calibration, evaluation, bei, cig, opts);
    write_to(a.output, out, [&](std::ostream& o) { write_ensemble_csv(o, cmp); });
    if (!a.weights_output.empty())
        write_to(a.weights_output, out, [&](std::ostream& o) { write_weights_csv(o, cmp.weighting); });
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Behavioral entanglement auditing for model populations", "entangle"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Write a synthetic response set with planted dependence");
    g->add_option("--config", gen.config, "JSON generator config; flags override it")->check(CLI::ExistingFile);
    g->add_option("--output,-o", gen.output, "Responses file")->required();
    g->add_option("--truth", gen.truth, "Sidecar truth file (JSON)");
    g->add_option("--judgments", gen.judgments, "Also write judge verdicts here");
    g->add_option("--format", gen.format, "Responses format")->check(CLI::IsMember({"auto", "jsonl", "csv"}));
    g->add_option("--models", gen.models)->check(CLI::PositiveNumber);
    g->add_option("--tasks", gen.tasks)->check(CLI::PositiveNumber);
    g->add_option("--options", gen.options)->check(CLI::Range(2, 1000));
    g->add_option("--seed", gen.seed);
    g->add_option("--plant", gen.plants, "Planted pair i:j:rho_fail[:rho_dir]; repeatable");
    g->add_option("--concentration", gen.concentration);
    g->add_option("--abstain-rate", gen.abstain_rate);
    g->add_option("--judges", gen.judges, "Judge model indices")->delimiter(',');
    g->add_option("--targets", gen.targets, "Judged model indices (default: all non-judges)")->delimiter(',');
    g->add_option("--p-tp", gen.p_tp);
    g->add_option("--p-fp", gen.p_fp);
    g->add_option("--judge-coupling", gen.judge_coupling);

    ValidateArgs val;
    auto* v = app.add_subcommand("validate", "Check a response or judgment file");
    v->add_option("--responses", val.responses)->check(CLI::ExistingFile);
    v->add_option("--judgments", val.judgments)->check(CLI::ExistingFile);
    v->add_option("--format", val.format)->check(CLI::IsMember({"auto", "jsonl", "csv"}));

    AuditArgs au;
    au.threads = default_thread_count();
    auto* a = app.add_subcommand("audit", "Rank model pairs by BEI and CIG");
    a->add_option("--responses", au.responses)->required()->check(CLI::ExistingFile);
    a->add_option("--input-format", au.input_format)->check(CLI::IsMember({"auto", "jsonl", "csv"}));
    a->add_option("--level", au.level)->check(CLI::IsMember({"bei", "cig", "both"}));
    a->add_option("--replicates,-B", au.replicates);
    a->add_option("--seed", au.seed);
    a->add_option("--alpha", au.alpha);
    a->add_flag("--bh,!--no-bh", au.bh, "Benjamini-Hochberg adjustment (default on)");
    a->add_flag("--two-sided", au.two_sided);
    a->add_option("--mode", au.mode, "Sign-flip reference distribution")
        ->check(CLI::IsMember({"auto", "exact", "mc"}));
    a->add_option("--format", au.format)->check(CLI::IsMember({"md", "json", "csv"}));
    a->add_option("--output,-o", au.output, "Report file (default: stdout)");
    a->add_option("--graph", au.graph)->check(CLI::IsMember({"dot", "json", "none"}));
    a->add_option("--graph-output", au.graph_output);
    a->add_option("--events", au.events, "CIG collision events (JSONL)");
    a->add_option("--calibration-output", au.calibration_output);
    a->add_option("--threads", au.threads)->check(CLI::PositiveNumber);
    a->add_flag("--timestamp", au.timestamp, "Record generation time in metadata");

    BiasArgs bi;
    auto* b = app.add_subcommand("bias", "Judge over-endorsement versus entanglement");
    b->add_option("--judgments", bi.judgments)->required()->check(CLI::ExistingFile);
    b->add_option("--audit", bi.audit, "Audit report (json, csv or md)")->required()->check(CLI::ExistingFile);
    b->add_option("--responses", bi.responses, "Check the audit hash against this dataset")
        ->check(CLI::ExistingFile);
    b->add_flag("--pooled", bi.pooled, "Also correlate across all judges");
    b->add_option("--format", bi.format)->check(CLI::IsMember({"md", "json", "csv"}));
    b->add_option("--output,-o", bi.output);

    EnsembleArgs en;
    auto* e = app.add_subcommand("ensemble", "Compare verifier aggregation strategies");
    e->add_option("--judgments", en.judgments, "Evaluation verdicts")->required()->check(CLI::ExistingFile);
    e->add_option("--calibration", en.calibration, "Calibration verdicts for competence")
        ->required()
        ->check(CLI::ExistingFile);
    e->add_option("--audit", en.audit)->required()->check(CLI::ExistingFile);
    e->add_option("--lambda1", en.lambda1)->check(CLI::Range(0.0, 1.0));
    e->add_option("--kappa", en.kappa);
    e->add_option("--eta1", en.eta1);
    e->add_option("--eta2", en.eta2);
    e->add_option("--alpha", en.alpha, "Significance level (default: the audit's)");
    e->add_flag("--raw-scores", en.raw_scores, "Keep non-significant pairs in the blend");
    e->add_flag("--grid-search", en.grid_search, "Tune lambda1, kappa, eta on the calibration set");
    e->add_option("--output,-o", en.output);
    e->add_option("--weights-output", en.weights_output);

    std::vector<const char*> argv{"entangle"};
    for (const auto& s : args)
        argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& ex) {
        return app.exit(ex, out, err) == 0 ? 0 : 1;
    }

    try {
        if (g->parsed())
            cmd_generate(gen, *g, out);
        else if (v->parsed())
            return cmd_validate(val, out, err);
        else if (a->parsed())
            cmd_audit(au, out);
        else if (b->parsed())
            cmd_bias(bi, out);
        else if (e->parsed())
            cmd_ensemble(en, out);
    } catch (const std::exception& ex) {
        err << "entangle: error: " << ex.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace entangle
