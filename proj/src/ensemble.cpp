#include "entangle/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

namespace entangle {

Index EntanglementMatrix::index_of(const std::string& model) const
{
    auto it = std::find(models.begin(), models.end(), model);
    if (it == models.end())
        throw InvalidArgument("no entanglement scores for model " + model);
    return static_cast<Index>(it - models.begin());
}

double EntanglementMatrix::operator()(const std::string& a, const std::string& b) const
{
    return values(index_of(a), index_of(b));
}

namespace {

using PairKey = std::pair<std::string, std::string>;

PairKey key_of(const ScoredPair& p)
{
    return p.model_1 < p.model_2 ? PairKey{p.model_1, p.model_2} : PairKey{p.model_2, p.model_1};
}

std::set<PairKey> key_set(const std::vector<ScoredPair>& v)
{
    std::set<PairKey> s;
    for (const auto& p : v)
        if (!s.insert(key_of(p)).second)
            throw PairSetMismatch("pair listed twice: " + p.model_1 + " / " + p.model_2);
    return s;
}

// Min-max normalise `pairs` into `out`, honouring the significance mask.
void accumulate(const std::vector<ScoredPair>& pairs, double weight, const EntanglementOptions& opts,
                EntanglementMatrix& e, double& lo, double& hi, bool& degenerate)
{
    if (pairs.empty())
        return;
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (const auto& p : pairs) {
        lo = std::min(lo, p.score);
        hi = std::max(hi, p.score);
    }
    degenerate = !(hi > lo);
    for (const auto& p : pairs) {
        double v = degenerate ? 0.0 : (p.score - lo) / (hi - lo);
        if (opts.significant_only && !(p.p_adjusted < opts.alpha))
            v = 0.0;
        const Index a = e.index_of(p.model_1);
        const Index b = e.index_of(p.model_2);
        e.values(a, b) += weight * v;
        e.values(b, a) = e.values(a, b);
    }
}

} // namespace

EntanglementMatrix pair_entanglement(const std::vector<ScoredPair>& bei, const std::vector<ScoredPair>& cig,
                                     const EntanglementOptions& opts)
{
    if (!(opts.lambda1 >= 0.0 && opts.lambda1 <= 1.0))
        throw InvalidArgument("lambda1 must lie in [0, 1]");
    const bool need_bei = opts.lambda1 > 0.0;
    const bool need_cig = opts.lambda1 < 1.0;
    if ((need_bei && bei.empty()) || (need_cig && cig.empty()))
        throw PairSetMismatch("lambda1 requires both BEI and CIG scores");
    const auto bei_keys = key_set(bei);
    const auto cig_keys = key_set(cig);
    if (!bei.empty() && !cig.empty() && bei_keys != cig_keys)
        throw PairSetMismatch("BEI and CIG tables cover different pairs");

    EntanglementMatrix e;
    e.lambda1 = opts.lambda1;
    for (const auto* list : {&bei, &cig})
        for (const auto& p : *list)
            for (const auto* name : {&p.model_1, &p.model_2})
                if (std::find(e.models.begin(), e.models.end(), *name) == e.models.end())
                    e.models.push_back(*name);
    const auto n = static_cast<Index>(e.models.size());
    e.values = MatrixXd::Zero(n, n);

    accumulate(need_bei ? bei : std::vector<ScoredPair>{}, opts.lambda1, opts, e, e.bei_min, e.bei_max,
               e.bei_degenerate);
    accumulate(need_cig ? cig : std::vector<ScoredPair>{}, 1.0 - opts.lambda1, opts, e, e.cig_min, e.cig_max,
               e.cig_degenerate);
    e.values.diagonal().setConstant(std::numeric_limits<double>::quiet_NaN());
    return e;
}

DependencyPenalties dependency_penalties(const EntanglementMatrix& e, const std::vector<std::string>& verifiers,
                                         const std::string& target)
{
    if (verifiers.size() < 2)
        throw SingletonPool("internal dependence needs at least two verifiers");
    if (std::find(verifiers.begin(), verifiers.end(), target) != verifiers.end())
        throw InvalidArgument("target " + target + " is also a verifier");

    const auto n = static_cast<Index>(verifiers.size());
    DependencyPenalties pen;
    pen.internal = VectorXd::Zero(n);
    pen.target = VectorXd::Zero(n);
    for (Index m = 0; m < n; ++m) {
        const auto& vm = verifiers[static_cast<std::size_t>(m)];
        double sum = 0.0;
        for (Index j = 0; j < n; ++j)
            if (j != m)
                sum += e(vm, verifiers[static_cast<std::size_t>(j)]);
        pen.internal(m) = sum / static_cast<double>(n - 1);
        pen.target(m) = e(vm, target);
    }
    return pen;
}

VectorXd verifier_weights(const VectorXd& q, const VectorXd& internal, const VectorXd& target,
                          const WeightParams& params)
{
    if (q.size() != internal.size() || q.size() != target.size())
        throw DimensionMismatch("verifier_weights: inputs differ in length");
    if (q.size() == 0)
        throw EmptyPool("verifier_weights: empty pool");
    if (!(params.kappa > 0.0) || params.eta1 < 0.0 || params.eta2 < 0.0)
        throw InvalidArgument("verifier_weights: need kappa > 0 and eta >= 0");

    const ArrayXd logits = params.kappa * q.array().max(kCompetenceFloor).min(1.0).log()
        - params.eta1 * internal.array() - params.eta2 * target.array();
    const ArrayXd ex = (logits - logits.maxCoeff()).exp();
    return (ex / ex.sum()).matrix();
}

VectorXd competence(const JudgmentDataset& calibration, const std::vector<std::string>& verifiers)
{
    VectorXd q = VectorXd::Zero(static_cast<Index>(verifiers.size()));
    std::unordered_map<std::string, std::pair<long, long>> tally; // correct, total
    for (const auto& r : calibration.records()) {
        auto& t = tally[r.judge_id];
        t.first += r.verdict == r.truth ? 1 : 0;
        t.second += 1;
    }
    for (std::size_t m = 0; m < verifiers.size(); ++m) {
        auto it = tally.find(verifiers[m]);
        if (it == tally.end() || it->second.second == 0)
            throw MissingVerdict("calibration set has no verdicts from " + verifiers[m]);
        q(static_cast<Index>(m)) = static_cast<double>(it->second.first) / static_cast<double>(it->second.second);
    }
    return q.array().max(kCompetenceFloor).min(1.0).matrix();
}

const char* to_string(Strategy s)
{
    switch (s) {
    case Strategy::majority: return "majority";
    case Strategy::accuracy_reweight: return "accuracy_reweight";
    case Strategy::entangle_reweight: return "entangle_reweight";
    }
    return "unknown";
}

WeightTable equal_weights(const std::vector<std::string>& verifiers, const std::vector<std::string>& targets)
{
    if (verifiers.empty())
        throw EmptyPool("no verifiers");
    WeightTable w;
    w.verifiers = verifiers;
    const auto n = static_cast<Index>(verifiers.size());
    for (const auto& t : targets)
        w.by_target[t] = VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    return w;
}

VerifierWeighting entangle_weights(const VectorXd& q, const EntanglementMatrix& e,
                                   const std::vector<std::string>& verifiers,
                                   const std::vector<std::string>& targets, const WeightParams& params)
{
    VerifierWeighting vw;
    vw.params = params;
    vw.lambda1 = e.lambda1;
    vw.table.verifiers = verifiers;
    for (const auto& target : targets) {
        const DependencyPenalties pen = dependency_penalties(e, verifiers, target);
        VectorXd w = verifier_weights(q, pen.internal, pen.target, params);
        for (std::size_t m = 0; m < verifiers.size(); ++m) {
            const auto k = static_cast<Index>(m);
            vw.rows.push_back({target, verifiers[m], q(k), pen.internal(k), pen.target(k), w(k)});
        }
        vw.table.by_target[target] = std::move(w);
    }
    return vw;
}

AggregationOutcome aggregate_and_evaluate(const JudgmentDataset& js, const WeightTable& weights, Strategy strategy)
{
    if (weights.verifiers.empty())
        throw EmptyPool("aggregate_and_evaluate: empty verifier pool");

    AggregationOutcome out;
    out.strategy = strategy;
    out.tasks = js.tasks();
    for (const auto& m : js.models())
        if (std::find(weights.verifiers.begin(), weights.verifiers.end(), m) == weights.verifiers.end())
            out.targets.push_back(m);

    long tp = 0, fp = 0, tn = 0, fn = 0;
    for (const auto& target : out.targets) {
        auto wit = weights.by_target.find(target);
        if (wit == weights.by_target.end())
            throw InvalidArgument("no verifier weights for target " + target);
        const VectorXd& w = wit->second;
        for (const auto& task : out.tasks) {
            const auto truth = js.truth(task, target);
            if (!truth)
                continue;
            double s = 0.0;
            for (std::size_t m = 0; m < weights.verifiers.size(); ++m) {
                const auto v = js.verdict(task, weights.verifiers[m], target);
                if (!v)
                    throw MissingVerdict("no verdict from " + weights.verifiers[m] + " on " + target + " / " + task);
                s += w(static_cast<Index>(m)) * *v;
            }
            const int accept = s > 0.5 ? 1 : 0;
            out.decisions.push_back(accept);
            if (accept && *truth)
                ++tp;
            else if (accept)
                ++fp;
            else if (*truth)
                ++fn;
            else
                ++tn;
        }
    }

    Metrics& m = out.metrics;
    m.decisions = tp + fp + tn + fn;
    if (m.decisions == 0)
        throw EmptyInput("aggregate_and_evaluate: no (target, task) decisions");
    m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(m.decisions);
    if (tp + fp > 0) {
        m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        m.f1 = 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
    }
    return out;
}

namespace {

std::vector<std::string> answered_models(const JudgmentDataset& js, const std::vector<std::string>& verifiers)
{
    std::vector<std::string> out;
    for (const auto& m : js.models())
        if (std::find(verifiers.begin(), verifiers.end(), m) == verifiers.end())
            out.push_back(m);
    return out;
}

struct GridChoice {
    double lambda1;
    WeightParams params;
};

GridChoice grid_search(const JudgmentDataset& calibration, const VectorXd& q, const std::vector<ScoredPair>& bei,
                       const std::vector<ScoredPair>& cig, const std::vector<std::string>& verifiers,
                       const EnsembleOptions& opts)
{
    const std::vector<std::string> targets = answered_models(calibration, verifiers);
    GridChoice best{opts.lambda1, opts.params};
    double best_acc = -1.0;
    for (double lambda1 : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        if ((lambda1 > 0.0 && bei.empty()) || (lambda1 < 1.0 && cig.empty()))
            continue;
        EntanglementOptions eo{lambda1, opts.significant_only, opts.alpha};
        const EntanglementMatrix e = pair_entanglement(bei, cig, eo);
        for (double kappa : {0.5, 1.0, 2.0})
            for (double eta1 : {0.0, 0.5, 1.0, 2.0})
                for (double eta2 : {0.0, 0.5, 1.0, 2.0}) {
                    WeightParams p{kappa, eta1, eta2};
                    const auto vw = entangle_weights(q, e, verifiers, targets, p);
                    const double acc
                        = aggregate_and_evaluate(calibration, vw.table, Strategy::entangle_reweight).metrics.accuracy;
                    if (acc > best_acc) {
                        best_acc = acc;
                        best = {lambda1, p};
                    }
                }
    }
    return best;
}

} // namespace

EnsembleComparison compare_strategies(const JudgmentDataset& calibration, const JudgmentDataset& evaluation,
                                      const std::vector<ScoredPair>& bei, const std::vector<ScoredPair>& cig,
                                      const EnsembleOptions& opts)
{
    EnsembleComparison cmp;
    cmp.verifiers = evaluation.judges();
    if (cmp.verifiers.empty())
        throw EmptyPool("evaluation set has no verifiers");
    cmp.targets = answered_models(evaluation, cmp.verifiers);

    const VectorXd q = competence(calibration, cmp.verifiers);

    double lambda1 = opts.lambda1;
    WeightParams params = opts.params;
    if (opts.grid_search) {
        const GridChoice g = grid_search(calibration, q, bei, cig, cmp.verifiers, opts);
        lambda1 = g.lambda1;
        params = g.params;
    }
    cmp.lambda1 = lambda1;

    EntanglementOptions eo{lambda1, opts.significant_only, opts.alpha};
    const EntanglementMatrix e = pair_entanglement(bei, cig, eo);

    WeightParams accuracy_only = params;
    accuracy_only.eta1 = 0.0;
    accuracy_only.eta2 = 0.0;

    const WeightTable majority = equal_weights(cmp.verifiers, cmp.targets);
    const VerifierWeighting acc_w = entangle_weights(q, e, cmp.verifiers, cmp.targets, accuracy_only);
    cmp.weighting = entangle_weights(q, e, cmp.verifiers, cmp.targets, params);

    cmp.outcomes.push_back(aggregate_and_evaluate(evaluation, majority, Strategy::majority));
    cmp.outcomes.push_back(aggregate_and_evaluate(evaluation, acc_w.table, Strategy::accuracy_reweight));
    cmp.outcomes.push_back(aggregate_and_evaluate(evaluation, cmp.weighting.table, Strategy::entangle_reweight));
    const double base = cmp.outcomes.front().metrics.accuracy;
    for (auto& o : cmp.outcomes)
        o.delta_accuracy = o.metrics.accuracy - base;
    return cmp;
}

} // namespace entangle
