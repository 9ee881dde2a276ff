#include "entangle/synthgen.hpp"

#include "entangle/rng.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace entangle {

void SynthConfig::validate() const
{
    if (models < 1 || tasks < 1)
        throw InvalidConfig("need at least one model and one task");
    if (options < 2)
        throw InvalidConfig("need K >= 2 options");
    if (!alpha.empty() && static_cast<Index>(alpha.size()) != models)
        throw InvalidConfig("alpha must list one value per model");
    if (!beta.empty() && static_cast<Index>(beta.size()) != models)
        throw InvalidConfig("beta must list one value per model");
    if (!names.empty() && static_cast<Index>(names.size()) != models)
        throw InvalidConfig("names must list one value per model");
    if (!(difficulty_high >= difficulty_low))
        throw InvalidConfig("difficulty range is empty");
    if (!(concentration > 0.0))
        throw InvalidConfig("concentration must be positive");
    auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (!unit(abstain_rate) || !unit(p_tp) || !unit(p_fp) || !unit(judge_coupling))
        throw InvalidConfig("rates must lie in [0, 1]");
    for (const auto& p : planted) {
        if (p.i < 0 || p.j < 0 || p.i >= models || p.j >= models || p.i == p.j)
            throw InvalidConfig("planted pair references invalid model indices");
        if (!unit(p.rho_fail) || !unit(p.rho_dir))
            throw InvalidConfig("planted rho values must lie in [0, 1]");
    }
    for (Index j : judges)
        if (j < 0 || j >= models)
            throw InvalidConfig("judge index out of range");
    for (Index t : targets)
        if (t < 0 || t >= models || std::find(judges.begin(), judges.end(), t) != judges.end())
            throw InvalidConfig("target index out of range or also a judge");
}

std::vector<std::string> SynthConfig::model_names() const
{
    if (!names.empty())
        return names;
    std::vector<std::string> out;
    for (Index m = 0; m < models; ++m)
        out.push_back("m" + std::to_string(m));
    return out;
}

// Default curves cross 1/2 near mid difficulty, with a small ability spread.
double SynthConfig::beta_of(Index m) const
{
    return beta.empty() ? 5.0 : beta[static_cast<std::size_t>(m)];
}

double SynthConfig::alpha_of(Index m) const
{
    if (!alpha.empty())
        return alpha[static_cast<std::size_t>(m)];
    const double spread = models > 1 ? static_cast<double>(m) / static_cast<double>(models - 1) - 0.5 : 0.0;
    return -0.5 * beta_of(m) + 0.8 * spread;
}

namespace {

std::vector<std::string> option_labels(int k)
{
    std::vector<std::string> out;
    for (int i = 0; i < k; ++i)
        out.push_back(k <= 26 ? std::string(1, static_cast<char>('A' + i)) : "o" + std::to_string(i + 1));
    return out;
}

int categorical(const VectorXd& p, double u)
{
    double acc = 0.0;
    int last = -1;
    for (Index k = 0; k < p.size(); ++k) {
        if (p(k) <= 0.0)
            continue;
        acc += p(k);
        last = static_cast<int>(k);
        if (u < acc)
            return last;
    }
    return last;
}

} // namespace

SynthResponses generate_responses(const SynthConfig& cfg)
{
    cfg.validate();
    const Index M = cfg.models;
    const Index T = cfg.tasks;
    const int K = cfg.options;

    Engine engine(derive_seed(cfg.seed, {stream::kResponses}));
    std::gamma_distribution<double> gamma(cfg.concentration, 1.0);

    SynthResponses out;
    SynthTruth& truth = out.truth;
    truth.planted = cfg.planted;
    truth.seed = cfg.seed;
    truth.latent_difficulty.resize(T);
    for (Index m = 0; m < M; ++m) {
        truth.alpha.push_back(cfg.alpha_of(m));
        truth.beta.push_back(cfg.beta_of(m));
    }

    const auto labels = option_labels(K);
    std::vector<TaskInfo> tasks;
    tasks.reserve(static_cast<std::size_t>(T));
    Eigen::MatrixXi selected(T, M);
    std::vector<double> u(static_cast<std::size_t>(M));
    std::vector<int> pick(static_cast<std::size_t>(M));

    for (Index t = 0; t < T; ++t) {
        const double ut = cfg.difficulty_low + (cfg.difficulty_high - cfg.difficulty_low) * uniform01(engine);
        truth.latent_difficulty(t) = ut;

        TaskInfo info;
        info.id = cfg.task_prefix + std::to_string(t + 1);
        info.options = labels;
        info.correct = std::min(K - 1, static_cast<int>(uniform01(engine) * K));

        VectorXd appeal = VectorXd::Zero(K);
        for (int k = 0; k < K; ++k)
            if (k != info.correct)
                appeal(k) = gamma(engine);
        if (!(appeal.sum() > 0.0))
            appeal = VectorXd::Ones(K), appeal(info.correct) = 0.0;
        appeal /= appeal.sum();

        // Fixed draw counts per task keep the stream aligned across configs.
        for (Index m = 0; m < M; ++m)
            u[static_cast<std::size_t>(m)] = uniform01(engine);
        for (const auto& p : cfg.planted) {
            const double coin = uniform01(engine);
            if (coin < p.rho_fail)
                u[static_cast<std::size_t>(p.j)] = u[static_cast<std::size_t>(p.i)];
        }
        for (Index m = 0; m < M; ++m) {
            const double pi = 1.0 / (1.0 + std::exp(-(cfg.alpha_of(m) + cfg.beta_of(m) * ut)));
            const double choice = uniform01(engine);
            const double abstain = uniform01(engine);
            const bool fail = u[static_cast<std::size_t>(m)] < pi;
            if (!fail)
                pick[static_cast<std::size_t>(m)] = info.correct;
            else if (abstain < cfg.abstain_rate)
                pick[static_cast<std::size_t>(m)] = kAbstain;
            else
                pick[static_cast<std::size_t>(m)] = categorical(appeal, choice);
        }
        for (const auto& p : cfg.planted) {
            const double coin = uniform01(engine);
            int& si = pick[static_cast<std::size_t>(p.i)];
            int& sj = pick[static_cast<std::size_t>(p.j)];
            const bool both_chose_distractor
                = si != info.correct && sj != info.correct && si != kAbstain && sj != kAbstain;
            if (both_chose_distractor && coin < p.rho_dir)
                sj = si;
        }
        for (Index m = 0; m < M; ++m)
            selected(t, m) = pick[static_cast<std::size_t>(m)];

        truth.attractiveness.push_back(appeal);
        tasks.push_back(std::move(info));
    }

    out.dataset = ResponseDataset(cfg.model_names(), std::move(tasks), std::move(selected));
    return out;
}

JudgmentDataset generate_judgments(const SynthConfig& cfg, const ResponseDataset& responses)
{
    cfg.validate();
    if (responses.num_models() != cfg.models)
        throw InvalidConfig("responses do not match the configured model count");
    if (cfg.judges.empty())
        throw InvalidConfig("no judges configured");

    std::vector<Index> targets = cfg.targets;
    if (targets.empty())
        for (Index m = 0; m < cfg.models; ++m)
            if (std::find(cfg.judges.begin(), cfg.judges.end(), m) == cfg.judges.end())
                targets.push_back(m);

    auto coupling = [&](Index a, Index b) {
        double s = 0.0;
        for (const auto& p : cfg.planted)
            if ((p.i == a && p.j == b) || (p.i == b && p.j == a))
                s = std::max({s, p.rho_fail, p.rho_dir});
        return s;
    };

    Engine engine(derive_seed(cfg.seed, {stream::kJudgments}));
    const auto& names = responses.models();
    std::vector<JudgmentRecord> records;
    records.reserve(static_cast<std::size_t>(responses.num_tasks()) * targets.size() * cfg.judges.size());
    for (Index t = 0; t < responses.num_tasks(); ++t) {
        for (Index target : targets) {
            const int correct = responses.failed(t, target) ? 0 : 1;
            for (Index judge : cfg.judges) {
                const double fp = cfg.p_fp + (1.0 - cfg.p_fp) * cfg.judge_coupling * coupling(judge, target);
                const double rate = correct ? cfg.p_tp : fp;
                const double draw = uniform01(engine);
                const double quality = uniform01(engine);
                JudgmentRecord r;
                r.task_id = responses.task(t).id;
                r.judge_id = names[static_cast<std::size_t>(judge)];
                r.model_id = names[static_cast<std::size_t>(target)];
                r.verdict = draw < rate ? 1 : 0;
                r.truth = correct;
                r.reasoning_quality = correct ? 3 + static_cast<int>(quality * 3.0) : static_cast<int>(quality * 4.0);
                records.push_back(std::move(r));
            }
        }
    }
    return JudgmentDataset(std::move(records));
}

nlohmann::json to_json(const SynthConfig& cfg)
{
    nlohmann::json j;
    j["models"] = cfg.models;
    j["tasks"] = cfg.tasks;
    j["options"] = cfg.options;
    j["alpha"] = cfg.alpha;
    j["beta"] = cfg.beta;
    j["difficulty"] = {{"low", cfg.difficulty_low}, {"high", cfg.difficulty_high}};
    j["planted"] = nlohmann::json::array();
    for (const auto& p : cfg.planted)
        j["planted"].push_back({{"i", p.i}, {"j", p.j}, {"rho_fail", p.rho_fail}, {"rho_dir", p.rho_dir}});
    j["concentration"] = cfg.concentration;
    j["abstain_rate"] = cfg.abstain_rate;
    j["names"] = cfg.names;
    j["task_prefix"] = cfg.task_prefix;
    j["judges"] = cfg.judges;
    j["targets"] = cfg.targets;
    j["p_tp"] = cfg.p_tp;
    j["p_fp"] = cfg.p_fp;
    j["judge_coupling"] = cfg.judge_coupling;
    j["seed"] = cfg.seed;
    return j;
}

SynthConfig synth_config_from_json(const nlohmann::json& j)
{
    SynthConfig cfg;
    try {
        cfg.models = j.value("models", cfg.models);
        cfg.tasks = j.value("tasks", cfg.tasks);
        cfg.options = j.value("options", cfg.options);
        cfg.alpha = j.value("alpha", cfg.alpha);
        cfg.beta = j.value("beta", cfg.beta);
        if (j.contains("difficulty")) {
            cfg.difficulty_low = j["difficulty"].value("low", cfg.difficulty_low);
            cfg.difficulty_high = j["difficulty"].value("high", cfg.difficulty_high);
        }
        if (j.contains("planted"))
            for (const auto& p : j["planted"])
                cfg.planted.push_back({p.at("i").get<Index>(), p.at("j").get<Index>(), p.value("rho_fail", 0.0),
                                       p.value("rho_dir", 0.0)});
        cfg.concentration = j.value("concentration", cfg.concentration);
        cfg.abstain_rate = j.value("abstain_rate", cfg.abstain_rate);
        cfg.names = j.value("names", cfg.names);
        cfg.task_prefix = j.value("task_prefix", cfg.task_prefix);
        cfg.judges = j.value("judges", cfg.judges);
        cfg.targets = j.value("targets", cfg.targets);
        cfg.p_tp = j.value("p_tp", cfg.p_tp);
        cfg.p_fp = j.value("p_fp", cfg.p_fp);
        cfg.judge_coupling = j.value("judge_coupling", cfg.judge_coupling);
        cfg.seed = j.value("seed", cfg.seed);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidConfig(std::string("bad synth config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

nlohmann::json to_json(const SynthTruth& truth, const std::vector<std::string>& names)
{
    nlohmann::json j;
    j["seed"] = truth.seed;
    j["models"] = names;
    j["alpha"] = truth.alpha;
    j["beta"] = truth.beta;
    j["planted"] = nlohmann::json::array();
    for (const auto& p : truth.planted)
        j["planted"].push_back({{"model_1", names[static_cast<std::size_t>(p.i)]},
                                {"model_2", names[static_cast<std::size_t>(p.j)]},
                                {"rho_fail", p.rho_fail},
                                {"rho_dir", p.rho_dir}});
    j["latent_difficulty"] = std::vector<double>(truth.latent_difficulty.data(),
                                                 truth.latent_difficulty.data() + truth.latent_difficulty.size());
    j["attractiveness"] = nlohmann::json::array();
    for (const auto& a : truth.attractiveness)
        j["attractiveness"].push_back(std::vector<double>(a.data(), a.data() + a.size()));
    return j;
}

} // namespace entangle
