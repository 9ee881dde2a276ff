// Acceptance checks. Run with a check name, or with no argument to run them all.
// Each check prints one PASS/FAIL line and the binary exits non-zero if any failed.

#include "entangle/bei.hpp"
#include "entangle/bias.hpp"
#include "entangle/cig.hpp"
#include "entangle/cli.hpp"
#include "entangle/difficulty.hpp"
#include "entangle/ensemble.hpp"
#include "entangle/report.hpp"
#include "entangle/synthgen.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace entangle;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Exhaustive sign-flip p-value: share of the 2^T flips whose mean is at least the observed one.
double enumerate_signflip(const std::vector<double>& xi)
{
    const std::size_t n = xi.size();
    double observed = 0.0, scale = 0.0;
    for (double x : xi) {
        observed += x;
        scale += std::abs(x);
    }
    const double tol = 1e-12 * std::max(scale, 1.0);
    long hits = 0;
    const long total = 1L << n;
    for (long mask = 0; mask < total; ++mask) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            s += (mask >> k & 1) ? -xi[k] : xi[k];
        if (s >= observed - tol)
            ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(total);
}

Outcome signflip_oracle()
{
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(20240611);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_int_distribution<int> len(4, 12), grid(-2, 2);
    const long B = 100'000;
    int agree = 0;
    double worst = 0.0;
    for (int c = 0; c < 50; ++c) {
        const int T = len(rng);
        const double shift = 0.15 * (c % 5);
        std::vector<double> xi(static_cast<std::size_t>(T));
        for (auto& x : xi)
            x = c % 4 == 3 ? 0.25 * grid(rng) : gauss(rng) + shift; // every fourth case has ties
        const double exact = enumerate_signflip(xi);
        SignFlipOptions o;
        o.replicates = B;
        o.seed = static_cast<std::uint64_t>(c);
        o.mode = SignFlipMode::monte_carlo;
        const double mc = signflip_test(Eigen::Map<const ArrayXd>(xi.data(), T), o).p;
        const double band = 3.0 * std::sqrt(exact * (1.0 - exact) / static_cast<double>(B));
        const double excess = std::abs(mc - exact) - band;
        worst = std::max(worst, excess);
        if (excess <= 0.0)
            ++agree;
    }
    const double elapsed = seconds_since(t0);
    return {agree == 50 && elapsed < 30.0,
            fmt("%d/50 cases inside 3 sd, worst excess %.2e, %.1fs", agree, worst, elapsed)};
}

Outcome hand_values()
{
    ArrayXd ri(2), rj(2), a(2);
    ri << 0.5, -0.5;
    rj << 0.5, 0.5;
    a << 1.0, 0.5;
    const double bei = compute_bei(ri, rj, a);
    const double cig = cig_score({make_event("t", 0, 1, 0.5)});
    VectorXd prof(2);
    prof << 2.0 / 3.0, 1.0 / 3.0;
    const double c = null_collision_prob(prof, 2);
    const bool ok = std::abs(bei - 0.0625) <= 1e-12 && std::abs(cig - 0.346574) <= 1e-6
                    && std::abs(cig - std::log(2.0) * 0.5) <= 1e-9 && std::abs(c - 5.0 / 9.0) <= 1e-12;
    return {ok, fmt("bei %.15g, cig %.9f, c %.15g", bei, cig, c)};
}

// Kolmogorov distance of a sample of p-values from U(0,1).
double ks_uniform(std::vector<double> p)
{
    std::sort(p.begin(), p.end());
    const double n = static_cast<double>(p.size());
    double d = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        d = std::max(d, static_cast<double>(k + 1) / n - p[k]);
        d = std::max(d, p[k] - static_cast<double>(k) / n);
    }
    return d;
}

double rate_below(const std::vector<double>& p, double alpha)
{
    return static_cast<double>(std::count_if(p.begin(), p.end(), [&](double x) { return x < alpha; }))
           / static_cast<double>(p.size());
}

Outcome null_calibration()
{
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<double> bei_p, cig_p;
    for (std::uint64_t seed = 0; bei_p.size() < 210; ++seed) {
        SynthConfig cfg;
        cfg.models = 6;
        cfg.tasks = 500;
        cfg.seed = 500 + seed;
        const auto ds = generate_responses(cfg).dataset;
        AuditConfig ac;
        ac.seed = seed;
        ac.bh = false;
        ac.threads = 4;
        const auto prof = compute_difficulty(ds);
        const auto resid = compute_residuals(ds, fit_calibration(ds, prof), prof);
        for (const auto& s : bei_audit(ds, resid, prof, ac))
            bei_p.push_back(s.p_raw);
        for (const auto& s : cig_audit(ds, ac))
            if (!s.degenerate)
                cig_p.push_back(s.p_raw);
    }
    const double bf = rate_below(bei_p, 0.05), cf = rate_below(cig_p, 0.05);
    const double bk = ks_uniform(bei_p), ck = ks_uniform(cig_p);
    const double elapsed = seconds_since(t0);
    const bool ok = bf >= 0.02 && bf <= 0.09 && cf >= 0.02 && cf <= 0.09 && bk < 0.08 && ck < 0.08
                    && cig_p.size() >= 200 && elapsed < 60.0;
    return {ok, fmt("%zu BEI tests: FPR %.3f KS %.3f; %zu CIG tests: FPR %.3f KS %.3f; %.1fs", bei_p.size(), bf,
                    bk, cig_p.size(), cf, ck, elapsed)};
}

// p-values of the planted pair (0, 1) alone, through the same per-pair tests the audit uses.
struct PairP {
    double bei;
    double cig;
};

PairP planted_pair_p(const SynthConfig& cfg, std::uint64_t test_seed)
{
    const auto ds = generate_responses(cfg).dataset;
    const auto prof = compute_difficulty(ds);
    const auto resid = compute_residuals(ds, fit_calibration(ds, prof), prof);
    const ArrayXd xi = pair_contributions(resid.col(0).array(), resid.col(1).array(), prof.easiness.array());
    SignFlipOptions o;
    o.seed = test_seed;
    const double pb = signflip_test(xi, o).p;
    const auto cig = compute_cig(ds, distractor_profiles(ds), 0, 1);
    const double pc = cig_pvalue(cig.events, 10'000, test_seed).p;
    return {pb, pc};
}

Outcome power()
{
    const auto t0 = std::chrono::steady_clock::now();
    int bei_hits = 0, cig_hits = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        SynthConfig cfg;
        cfg.models = 6;
        cfg.tasks = 1000;
        cfg.seed = 2000 + s;
        cfg.planted = {{0, 1, 0.5, 0.0}};
        if (planted_pair_p(cfg, s).bei < 0.05)
            ++bei_hits;
        cfg.planted = {{0, 1, 0.0, 0.6}};
        if (planted_pair_p(cfg, s).cig < 0.05)
            ++cig_hits;
    }
    const double elapsed = seconds_since(t0);
    return {bei_hits >= 90 && cig_hits >= 90 && elapsed < 120.0,
            fmt("BEI %d/100, CIG %d/100, %.1fs", bei_hits, cig_hits, elapsed)};
}

Outcome level_separation()
{
    int fires = 0, bei_fires = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        SynthConfig cfg;
        cfg.models = 6;
        cfg.tasks = 1000;
        cfg.seed = 3000 + s;
        cfg.planted = {{0, 1, 0.5, 0.0}};
        const auto p = planted_pair_p(cfg, s);
        if (p.cig < 0.05)
            ++fires;
        if (p.bei < 0.05)
            ++bei_fires;
    }
    const double fpr = fires / 100.0;
    return {fpr <= 0.09, fmt("CIG fires on %.2f of co-failure-only pairs (BEI fires on %.2f)", fpr, bei_fires / 100.0)};
}

Outcome calibration_auc()
{
    double worst_monotone = 1.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        SynthConfig cfg;
        cfg.models = 6;
        cfg.tasks = 500;
        cfg.seed = 4000 + s;
        const auto ds = generate_responses(cfg).dataset;
        for (const auto& f : fit_calibration(ds, compute_difficulty(ds)).fits)
            worst_monotone = std::min(worst_monotone, f.auc.value_or(0.0));
    }
    // Two coin-flip models sit in a pool of sixteen monotone ones. Their own errors still feed the
    // difficulty estimate, which lifts single-seed AUCs above 0.5, so the mean over seeds is judged.
    const Index pool = 18;
    double lo = 1.0, hi = 0.0, mean = 0.0;
    int n = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        SynthConfig cfg;
        cfg.models = pool;
        cfg.tasks = 500;
        cfg.seed = 5000 + s;
        for (Index m = 0; m < pool; ++m) {
            const bool coin = m >= pool - 2;
            cfg.beta.push_back(coin ? 0.0 : 5.0);
            cfg.alpha.push_back(coin ? 0.0 : -2.5 + 0.2 * (static_cast<double>(m) - 7.5));
        }
        const auto ds = generate_responses(cfg).dataset;
        const auto cal = fit_calibration(ds, compute_difficulty(ds));
        for (Index m = pool - 2; m < pool; ++m) {
            const double auc = cal.fits[static_cast<std::size_t>(m)].auc.value_or(0.0);
            lo = std::min(lo, auc);
            hi = std::max(hi, auc);
            mean += auc;
            ++n;
        }
    }
    mean /= n;
    const bool ok = worst_monotone >= 0.8 && std::abs(mean - 0.5) <= 0.1;
    return {ok, fmt("monotone min AUC %.3f; coin-flip mean AUC %.3f (single seeds %.3f to %.3f)", worst_monotone,
                    mean, lo, hi)};
}

Outcome bias_association()
{
    // m0 judges m1..m12; model k shares failures and distractors with m0 at strength 0.05 (k - 1).
    const Index targets = 12;
    SynthConfig cfg;
    cfg.models = targets + 1;
    cfg.tasks = 1000;
    cfg.judges = {0};
    cfg.judge_coupling = 1.0;
    for (Index k = 2; k <= targets; ++k)
        cfg.planted.push_back({0, k, 0.05 * static_cast<double>(k - 1), 0.05 * static_cast<double>(k - 1)});
    int hits = 0;
    double rho_sum = 0.0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        cfg.seed = 6000 + 2 * s;
        const auto audit_set = generate_responses(cfg).dataset;
        cfg.seed = 6001 + 2 * s;
        const auto eval_set = generate_responses(cfg).dataset;
        const auto js = generate_judgments(cfg, eval_set);
        AuditOptions ao;
        ao.level = AuditLevel::bei;
        ao.config.replicates = 200;
        ao.config.seed = s;
        const auto rep = run_audit(audit_set, ao).report;
        const auto br = bias_report(js, pair_scores(*rep.bei), PairScores{});
        for (const auto& a : br.associations)
            if (a.judge == "m0" && a.metric == "bei" && a.result) {
                rho_sum += a.result->rho;
                if (a.result->rho > 0.5 && a.result->p_value < 0.05)
                    ++hits;
            }
    }
    return {hits >= 80, fmt("%d/100 seeds with rho > 0.5 and p < 0.05, mean rho %.3f", hits, rho_sum / 100.0)};
}

Outcome ensemble_gain()
{
    const auto t0 = std::chrono::steady_clock::now();
    // Judges m1..m5 grade targets m0, m6, m7. m1 and m2 form a clique with target m0.
    SynthConfig cfg;
    cfg.models = 8;
    cfg.tasks = 600;
    cfg.judges = {1, 2, 3, 4, 5};
    cfg.judge_coupling = 1.0;
    cfg.planted = {{0, 1, 0.8, 0.8}, {0, 2, 0.8, 0.8}, {1, 2, 0.8, 0.8}};
    double acc[3] = {0.0, 0.0, 0.0};
    for (std::uint64_t s = 0; s < 50; ++s) {
        cfg.seed = 7000 + 2 * s;
        const auto cal_set = generate_responses(cfg).dataset;
        const auto cal_js = generate_judgments(cfg, cal_set);
        cfg.seed = 7001 + 2 * s;
        const auto ev_js = generate_judgments(cfg, generate_responses(cfg).dataset);
        AuditOptions ao;
        ao.config.replicates = 1000;
        ao.config.seed = s;
        const auto rep = run_audit(cal_set, ao).report;
        const auto cmp = compare_strategies(cal_js, ev_js, scored_pairs(*rep.bei), scored_pairs(*rep.cig), {});
        for (int k = 0; k < 3; ++k)
            acc[k] += cmp.outcomes[static_cast<std::size_t>(k)].metrics.accuracy / 50.0;
    }
    const double elapsed = seconds_since(t0);
    const bool ok = acc[2] >= acc[1] && acc[1] >= acc[0] && acc[2] - acc[0] >= 0.02 && elapsed < 60.0;
    return {ok, fmt("majority %.4f, accuracy %.4f, entangle %.4f, gain %+.4f, %.1fs", acc[0], acc[1], acc[2],
                    acc[2] - acc[0], elapsed)};
}

std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism()
{
    const auto dir = std::filesystem::temp_directory_path() / "entangle_acceptance";
    std::filesystem::create_directories(dir);
    auto path = [&](const std::string& name) { return (dir / name).string(); };
    auto cli = [](std::vector<std::string> args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return code == 0 ? out.str() : "exit " + std::to_string(code) + ": " + err.str();
    };

    // Each entry writes to stdout and to a named file; both are compared between two runs.
    using Command = std::function<std::vector<std::string>(const std::string&)>;
    std::vector<std::pair<std::string, Command>> commands;
    for (const char* name : {"a", "b"})
        commands.push_back({std::string("generate-") + name, [&, name](const std::string& tag) {
                                return std::vector<std::string>{
                                    "generate", "-o", path(tag + name + ".jsonl"), "--judgments",
                                    path(tag + name + ".judg.jsonl"), "--models", "7", "--tasks", "300", "--seed",
                                    name[0] == 'a' ? "1" : "2", "--plant", "0:1:0.7:0.7", "--judges", "1,2,3",
                                    "--judge-coupling", "1"};
                            }});
    for (const char* threads : {"1", "8"})
        for (const char* format : {"json", "csv", "md"})
            commands.push_back({std::string("audit-") + format + "-t" + threads, [&, threads, format](
                                                                                      const std::string& tag) {
                                    return std::vector<std::string>{
                                        "audit", "--responses", path(tag + "a.jsonl"), "--seed", "9", "-B", "2000",
                                        "--threads", threads, "--format", format, "-o",
                                        path(tag + "audit" + threads + "." + format), "--events",
                                        path(tag + "ev" + threads + ".jsonl"), "--graph", "json", "--graph-output",
                                        path(tag + "graph" + threads + ".json")};
                                }});
    commands.push_back({"bias", [&](const std::string& tag) {
                            return std::vector<std::string>{"bias", "--judgments", path(tag + "b.judg.jsonl"),
                                                            "--audit", path(tag + "audit1.json"), "--pooled",
                                                            "--format", "json", "-o", path(tag + "bias.json")};
                        }});
    commands.push_back({"ensemble", [&](const std::string& tag) {
                            return std::vector<std::string>{"ensemble", "--judgments", path(tag + "b.judg.jsonl"),
                                                            "--calibration", path(tag + "a.judg.jsonl"), "--audit",
                                                            path(tag + "audit8.json"), "-o", path(tag + "ens.csv"),
                                                            "--weights-output", path(tag + "w.csv")};
                        }});

    int compared = 0;
    std::string mismatch;
    for (const auto& [name, make] : commands) {
        const auto first = make("r1-");
        const auto second = make("r2-");
        const std::string out1 = cli(first), out2 = cli(second);
        if (out1.rfind("exit ", 0) == 0)
            return {false, name + " failed: " + out1};
        ++compared;
        if (out1 != out2 && mismatch.empty())
            mismatch = name + " stdout";
        for (std::size_t k = 0; k < first.size(); ++k) {
            const auto& a = first[k];
            if (a.find("r1-") == std::string::npos || !std::filesystem::exists(a))
                continue;
            const auto& b = second[k];
            ++compared;
            if (read_file(a) != read_file(b) && mismatch.empty())
                mismatch = name + " " + std::filesystem::path(a).filename().string();
        }
    }
    // Thread count must not change the audit body either.
    for (const char* ext : {"json", "csv", "md"}) {
        ++compared;
        if (read_file(path(std::string("r1-audit1.") + ext)) != read_file(path(std::string("r1-audit8.") + ext))
            && mismatch.empty())
            mismatch = std::string("audit threads 1 vs 8 (") + ext + ")";
    }
    std::filesystem::remove_all(dir);
    return {mismatch.empty(), mismatch.empty() ? fmt("%d outputs byte-identical", compared)
                                               : "differs: " + mismatch};
}

Outcome softmax_identities()
{
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_prop = 0.0, worst_sum = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
        const Index n = 2 + rep % 9;
        VectorXd q(n), in(n), tar(n);
        for (Index k = 0; k < n; ++k) {
            q(k) = kCompetenceFloor + (1.0 - kCompetenceFloor) * u(rng);
            in(k) = u(rng);
            tar(k) = u(rng);
        }
        const VectorXd plain = verifier_weights(q, in, tar, {1.0, 0.0, 0.0});
        worst_prop = std::max(worst_prop, (plain - q / q.sum()).cwiseAbs().maxCoeff());
        worst_sum = std::max(worst_sum, std::abs(plain.sum() - 1.0));
        const VectorXd general = verifier_weights(q, in, tar, {0.1 + 4.0 * u(rng), 3.0 * u(rng), 3.0 * u(rng)});
        worst_sum = std::max(worst_sum, std::abs(general.sum() - 1.0));
    }
    return {worst_prop <= 1e-12 && worst_sum <= 1e-12,
            fmt("max |w - q/sum q| %.2e, max |sum w - 1| %.2e", worst_prop, worst_sum)};
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> checks = {
        {"signflip_oracle", signflip_oracle},   {"hand_values", hand_values},
        {"null_calibration", null_calibration}, {"power", power},
        {"level_separation", level_separation}, {"calibration_auc", calibration_auc},
        {"bias_association", bias_association}, {"ensemble_gain", ensemble_gain},
        {"determinism", determinism},           {"softmax_identities", softmax_identities},
    };
    std::vector<std::string> wanted(argv + 1, argv + argc);
    int failed = 0, ran = 0;
    for (const auto& [name, check] : checks) {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), name) == wanted.end())
            continue;
        ++ran;
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
        if (!o.pass)
            ++failed;
    }
    if (ran == 0) {
        std::cerr << "unknown check\n";
        return 2;
    }
    return failed == 0 ? 0 : 1;
}
