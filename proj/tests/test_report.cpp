#include "fixtures.hpp"

#include "entangle/report.hpp"
#include "entangle/synthgen.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace entangle;

namespace {

AuditRun small_audit(Index models, std::uint64_t seed, std::vector<PlantedPair> planted = {})
{
    SynthConfig cfg;
    cfg.models = models;
    cfg.tasks = 300;
    cfg.seed = seed;
    cfg.planted = std::move(planted);
    AuditOptions opts;
    opts.config.replicates = 999;
    opts.config.seed = seed;
    return run_audit(generate_responses(cfg).dataset, opts);
}

std::size_t count(const std::string& text, const std::string& needle)
{
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1))
        ++n;
    return n;
}

} // namespace

TEST_SUITE("report")
{
    TEST_CASE("p-value formatting")
    {
        CHECK(format_pvalue(1e-4) == "1.00E-04");
        CHECK(format_pvalue(0.0446) == "4.46E-02");
        CHECK(format_pvalue(1.0) == "1.00E+00");
    }

    TEST_CASE("markdown pair rows parse")
    {
        auto bei = parse_pair_row("Llama-3-70B | Llama-3_1-70B | 0.0446 | 1.00E-04");
        CHECK(bei.model_1 == "Llama-3-70B");
        CHECK(bei.model_2 == "Llama-3_1-70B");
        CHECK(bei.score == doctest::Approx(0.0446));
        CHECK(bei.p_raw == doctest::Approx(1e-4));
        CHECK(bei.p_adjusted == bei.p_raw);

        auto cig = parse_pair_row("| Llama-3-70B | Llama-3_1-70B | 403.37 | 1.00E-04 | 3.00E-03 |");
        CHECK(cig.score == doctest::Approx(403.37));
        CHECK(cig.p_adjusted == doctest::Approx(3e-3));

        auto csv = parse_pair_row("cig,\"a,b\",c,1.5,0.01,0.02");
        CHECK(csv.model_1 == "a,b");
        CHECK(csv.p_adjusted == doctest::Approx(0.02));

        CHECK_THROWS_AS(parse_pair_row("| a | b | x | 1 |"), ParseError);
        CHECK_THROWS_AS(parse_pair_row("foo,a,b,1,1,1"), ParseError);
    }

    TEST_CASE("markdown table layout")
    {
        AuditReport rep;
        rep.models = {"Llama-3-70B", "Llama-3_1-70B"};
        rep.bei = std::vector<PairRow>{{"Llama-3-70B", "Llama-3_1-70B", 0.0446, 1e-4, 1e-4}};
        rep.cig = std::vector<PairRow>{{"Llama-3-70B", "Llama-3_1-70B", 403.37, 1e-4, 1e-4}};
        std::stringstream ss;
        write_markdown(ss, rep);
        const std::string md = ss.str();
        CHECK(md.find("| Model 1 | Model 2 | BEI | p-value | p-adjusted |") != std::string::npos);
        CHECK(md.find("| Llama-3-70B | Llama-3_1-70B | 0.0446 | 1.00E-04 | 1.00E-04 |") != std::string::npos);
        CHECK(md.find("| Llama-3-70B | Llama-3_1-70B | 403.37 | 1.00E-04 | 1.00E-04 |") != std::string::npos);
    }

    TEST_CASE("four models give six rows per level")
    {
        auto run = small_audit(4, 1);
        REQUIRE(run.report.bei);
        REQUIRE(run.report.cig);
        CHECK(run.report.bei->size() == 6);
        CHECK(run.report.cig->size() == 6);
        CHECK(run.report.calibration.size() == 4);
        CHECK(run.events.size() == 6);
    }

    TEST_CASE("json, csv and markdown reload")
    {
        auto run = small_audit(4, 2, {{0, 1, 0.6, 0.6}});
        const AuditReport& rep = run.report;

        auto back = audit_report_from_json(nlohmann::json::parse(to_json(rep).dump()));
        CHECK(back == rep);

        auto p = fixtures::scratch("report.csv");
        {
            std::ofstream f(p);
            write_csv(f, rep);
        }
        auto csv = load_audit_report(p);
        CHECK(csv.metadata.dataset_hash == rep.metadata.dataset_hash);
        CHECK(csv.metadata.seed == rep.metadata.seed);
        REQUIRE(csv.bei);
        REQUIRE(csv.bei->size() == rep.bei->size());
        for (std::size_t k = 0; k < csv.bei->size(); ++k) {
            CHECK((*csv.bei)[k].score == (*rep.bei)[k].score);
            CHECK((*csv.bei)[k].p_adjusted == (*rep.bei)[k].p_adjusted);
        }

        auto mdp = fixtures::scratch("report.md");
        {
            std::ofstream f(mdp);
            write_markdown(f, rep);
        }
        auto md = load_audit_report(mdp);
        CHECK(md.metadata.dataset_hash == rep.metadata.dataset_hash);
        CHECK(md.metadata.replicates == rep.metadata.replicates);
        REQUIRE(md.cig);
        CHECK(md.cig->size() == rep.cig->size());
        CHECK((*md.cig)[0].model_1 == (*rep.cig)[0].model_1);
        CHECK((*md.cig)[0].score == doctest::Approx((*rep.cig)[0].score).epsilon(1e-3));
    }

    TEST_CASE("graph edges are exactly the significant pairs")
    {
        auto run = small_audit(5, 3, {{2, 4, 0.7, 0.7}});
        const double alpha = 0.05;
        std::size_t expected = 0;
        for (const auto* table : {&*run.report.bei, &*run.report.cig})
            for (const auto& r : *table)
                if (r.p_adjusted < alpha)
                    ++expected;
        REQUIRE(expected >= 1);
        auto edges = significant_edges(run.report, alpha);
        CHECK(edges.size() == expected);

        std::stringstream dot, js;
        write_dot(dot, run.report, alpha);
        CHECK(count(dot.str(), " -- ") == expected);
        write_graph_json(js, run.report, alpha);
        auto j = nlohmann::json::parse(js.str());
        CHECK(j["edges"].size() == expected);
        CHECK(j["nodes"].size() == 5);
        std::size_t degree = 0;
        for (const auto& [k, v] : j["adjacency"].items())
            degree += v.size();
        CHECK(degree == 2 * expected);
    }

    TEST_CASE("events and calibration sidecars")
    {
        auto run = small_audit(3, 4);
        std::stringstream ev;
        write_events_jsonl(ev, run.report.models, run.events);
        std::size_t lines = 0;
        for (std::string l; std::getline(ev, l);) {
            auto j = nlohmann::json::parse(l);
            CHECK(j.contains("c_null"));
            ++lines;
        }
        std::size_t total = 0;
        for (const auto& r : *run.report.cig)
            total += static_cast<std::size_t>(r.events);
        CHECK(lines == total);

        std::stringstream cal;
        write_calibration_json(cal, run.report);
        CHECK(nlohmann::json::parse(cal.str())["calibration"].size() == 3);
    }

    TEST_CASE("metadata carries seed, replicates and alpha without a timestamp")
    {
        auto run = small_audit(3, 5);
        auto j = to_json(run.report);
        CHECK(j["metadata"]["seed"] == 5);
        CHECK(j["metadata"]["replicates"] == 999);
        CHECK(j["metadata"]["alpha"] == 0.05);
        CHECK(j["metadata"]["log_base"] == "e");
        CHECK_FALSE(j["metadata"].contains("generated_at"));
    }
}
