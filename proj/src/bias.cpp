#include "entangle/bias.hpp"

#include <algorithm>
#include <numeric>

namespace entangle {

const char* to_string(PrecisionStatus s)
{
    switch (s) {
    case PrecisionStatus::ok: return "ok";
    case PrecisionStatus::no_endorsements: return "NoEndorsements";
    case PrecisionStatus::no_model_endorsements: return "NoModelEndorsements";
    }
    return "unknown";
}

const char* to_string(AssociationMethod m)
{
    return m == AssociationMethod::exact_permutation ? "exact-permutation" : "t-approximation";
}

PrecisionDeviation delta_precision(const JudgmentDataset& js, const std::string& judge, const std::string& model)
{
    PrecisionDeviation d;
    d.judge = judge;
    d.model = model;
    int global_correct = 0;
    int model_correct = 0;
    for (const auto& r : js.records()) {
        if (r.judge_id != judge || r.verdict != 1)
            continue;
        ++d.global_endorsements;
        global_correct += r.truth;
        if (r.model_id == model) {
            ++d.model_endorsements;
            model_correct += r.truth;
        }
    }
    if (d.global_endorsements == 0) {
        d.status = PrecisionStatus::no_endorsements;
        return d;
    }
    d.global_precision = static_cast<double>(global_correct) / d.global_endorsements;
    if (d.model_endorsements == 0) {
        d.status = PrecisionStatus::no_model_endorsements;
        return d;
    }
    d.model_precision = static_cast<double>(model_correct) / d.model_endorsements;
    d.delta = *d.global_precision - *d.model_precision;
    return d;
}

namespace {

double centered_cross(const ArrayXd& a, const ArrayXd& b)
{
    return ((a - a.mean()) * (b - b.mean())).sum();
}

} // namespace

AssociationResult spearman(const ArrayXd& xs, const ArrayXd& ys)
{
    if (xs.size() != ys.size())
        throw DimensionMismatch("spearman: vectors differ in length");
    const Index n = xs.size();
    if (n < 3)
        throw InvalidArgument("spearman: need at least 3 observations");

    const ArrayXd rx = midranks(xs);
    const ArrayXd ry = midranks(ys);
    const double sxx = centered_cross(rx, rx);
    const double syy = centered_cross(ry, ry);
    if (sxx <= 0.0 || syy <= 0.0)
        throw ConstantInput("spearman: a vector has no rank variation");

    AssociationResult res;
    res.n = n;
    const double denom = std::sqrt(sxx * syy);
    res.rho = std::clamp(centered_cross(rx, ry) / denom, -1.0, 1.0);

    if (n <= 10) {
        res.method = AssociationMethod::exact_permutation;
        // Only sum(rx * ry_perm) varies across permutations.
        const ArrayXd cx = rx - rx.mean();
        std::vector<double> perm(ry.data(), ry.data() + n);
        std::sort(perm.begin(), perm.end());
        const double tol = 1e-12;
        long total = 0, two = 0, greater = 0;
        do {
            double s = 0.0;
            for (Index k = 0; k < n; ++k)
                s += cx(k) * perm[static_cast<std::size_t>(k)];
            const double r = s / denom;
            ++total;
            if (std::fabs(r) >= std::fabs(res.rho) - tol)
                ++two;
            if (r >= res.rho - tol)
                ++greater;
        } while (std::next_permutation(perm.begin(), perm.end()));
        // next_permutation visits distinct arrangements of tied ranks once each;
        // every distinct arrangement has the same multiplicity, so ratios are exact.
        res.p_value = static_cast<double>(two) / static_cast<double>(total);
        res.p_value_greater = static_cast<double>(greater) / static_cast<double>(total);
    } else {
        res.method = AssociationMethod::t_approximation;
        const double dof = static_cast<double>(n - 2);
        if (std::fabs(res.rho) >= 1.0) {
            res.p_value = 0.0;
            res.p_value_greater = res.rho > 0 ? 0.0 : 1.0;
        } else {
            const double t = res.rho * std::sqrt(dof / (1.0 - res.rho * res.rho));
            res.p_value = student_t_two_sided(t, dof);
            res.p_value_greater = res.rho > 0 ? 0.5 * res.p_value : 1.0 - 0.5 * res.p_value;
        }
    }
    return res;
}

std::string significance_stars(double p)
{
    if (p < 0.001)
        return "***";
    if (p < 0.01)
        return "**";
    if (p < 0.05)
        return "*";
    if (p < 0.1)
        return "·";
    return "";
}

std::pair<std::string, std::string> PairScores::key(const std::string& a, const std::string& b)
{
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

void PairScores::set(const std::string& a, const std::string& b, double score)
{
    scores_[key(a, b)] = score;
}

std::optional<double> PairScores::get(const std::string& a, const std::string& b) const
{
    auto it = scores_.find(key(a, b));
    if (it == scores_.end())
        return std::nullopt;
    return it->second;
}

namespace {

JudgeAssociation associate(const std::string& judge, const std::string& metric, const std::vector<double>& scores,
                           const std::vector<double>& deltas)
{
    JudgeAssociation a;
    a.judge = judge;
    a.metric = metric;
    if (scores.size() < 3) {
        a.flag = "InsufficientPairs";
        return a;
    }
    try {
        a.result = spearman(Eigen::Map<const ArrayXd>(scores.data(), static_cast<Index>(scores.size())),
                            Eigen::Map<const ArrayXd>(deltas.data(), static_cast<Index>(deltas.size())));
        a.stars = significance_stars(a.result->p_value);
    } catch (const ConstantInput&) {
        a.flag = "ConstantInput";
    }
    return a;
}

} // namespace

BiasReport bias_report(const JudgmentDataset& js, const PairScores& bei, const PairScores& cig,
                       const BiasOptions& opts)
{
    BiasReport rep;
    for (const auto& judge : js.judges()) {
        for (const auto& model : js.models()) {
            if (model == judge)
                continue;
            bool judged = false;
            for (const auto& r : js.records())
                if (r.judge_id == judge && r.model_id == model) {
                    judged = true;
                    break;
                }
            if (!judged)
                continue;
            BiasRow row;
            row.precision = delta_precision(js, judge, model);
            row.bei = bei.get(judge, model);
            row.cig = cig.get(judge, model);
            if (!row.precision.defined())
                row.flag = to_string(row.precision.status);
            else if (!row.bei && !row.cig)
                row.flag = "NoScore";
            rep.rows.push_back(std::move(row));
        }
    }

    const std::pair<const char*, const PairScores*> metrics[] = {{"bei", &bei}, {"cig", &cig}};
    auto collect = [&](const std::string* judge, const char* metric) {
        std::vector<double> s, d;
        for (const auto& row : rep.rows) {
            if (judge && row.precision.judge != *judge)
                continue;
            const auto& score = std::string(metric) == "bei" ? row.bei : row.cig;
            if (!row.precision.defined() || !score)
                continue;
            s.push_back(*score);
            d.push_back(*row.precision.delta);
        }
        return std::make_pair(s, d);
    };

    for (const auto& [metric, scores] : metrics) {
        if (scores->empty())
            continue;
        for (const auto& judge : js.judges()) {
            auto [s, d] = collect(&judge, metric);
            rep.associations.push_back(associate(judge, metric, s, d));
        }
        if (opts.pooled) {
            auto [s, d] = collect(nullptr, metric);
            rep.associations.push_back(associate("*", metric, s, d));
        }
    }
    return rep;
}

} // namespace entangle
