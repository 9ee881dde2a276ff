#include "fixtures.hpp"

#include "entangle/ingest.hpp"
#include "entangle/synthgen.hpp"

#include <doctest.h>

#include <algorithm>
#include <sstream>

using namespace entangle;

namespace {

ResponseDataset parse_jsonl(const std::string& text)
{
    std::istringstream in(text);
    return build_dataset(parse_responses(in, ResponseFormat::jsonl));
}

std::string line(const std::string& task, const std::string& model, const std::string& selected)
{
    return R"({"task_id":")" + task + R"(","model":")" + model + R"(","options":["a","b","c"],"correct":"b","selected":)"
           + selected + "}\n";
}

} // namespace

TEST_SUITE("ingest")
{
    TEST_CASE("correct answer gives error indicator 0")
    {
        auto ds = parse_jsonl(line("t1", "A", "\"b\""));
        CHECK(ds.num_models() == 1);
        CHECK(ds.num_tasks() == 1);
        CHECK(ds.errors()(0, 0) == 0.0);
    }

    TEST_CASE("wrong answer gives error indicator 1 and keeps the selection")
    {
        auto ds = parse_jsonl(line("t1", "A", "\"c\""));
        CHECK(ds.errors()(0, 0) == 1.0);
        CHECK(ds.task(0).options[static_cast<std::size_t>(ds.selected(0, 0))] == "c");
    }

    TEST_CASE("abstain is a failure and is counted")
    {
        auto ds = parse_jsonl(line("t1", "A", "null") + line("t1", "B", "\"b\""));
        CHECK(ds.abstained(0, 0));
        CHECK(ds.errors()(0, 0) == 1.0);
        CHECK(validate_dataset(ds).abstain_count == 1);
    }

    TEST_CASE("duplicate task and model is rejected")
    {
        CHECK_THROWS_AS(parse_jsonl(line("t1", "A", "\"b\"") + line("t1", "A", "\"c\"")), DuplicateRecord);
    }

    TEST_CASE("complete grid validates cleanly")
    {
        std::string text;
        for (const char* t : {"t1", "t2"})
            for (const char* m : {"A", "B", "C"})
                text += line(t, m, "\"a\"");
        auto ds = parse_jsonl(text);
        auto rep = validate_dataset(ds);
        CHECK(rep.issues.empty());
        CHECK(rep.ok());
        CHECK(rep.failures_per_model == std::vector<int>{2, 2, 2});
    }

    TEST_CASE("single-option task is flagged")
    {
        auto ds = parse_jsonl(R"({"task_id":"t1","model":"A","options":["a"],"correct":"a","selected":"a"})");
        auto rep = validate_dataset(ds);
        REQUIRE(rep.issues.size() == 1);
        CHECK(rep.issues[0].find("K < 2") != std::string::npos);
    }

    TEST_CASE("missing grid cell")
    {
        CHECK_THROWS_AS(parse_jsonl(line("t1", "A", "\"b\"") + line("t1", "B", "\"b\"") + line("t2", "A", "\"b\"")),
                        IncompleteGrid);
    }

    TEST_CASE("malformed records")
    {
        SUBCASE("bad json reports its line")
        {
            try {
                parse_jsonl(line("t1", "A", "\"b\"") + "{not json\n");
                FAIL("expected ParseError");
            } catch (const ParseError& e) {
                CHECK(e.line() == 2);
            }
        }
        SUBCASE("missing field")
        {
            CHECK_THROWS_AS(parse_jsonl(R"({"task_id":"t1","model":"A","options":["a","b"],"selected":"a"})"),
                            SchemaError);
        }
        SUBCASE("selection outside options")
        {
            CHECK_THROWS_AS(parse_jsonl(line("t1", "A", "\"z\"")), ParseError);
        }
        SUBCASE("conflicting option lists")
        {
            CHECK_THROWS_AS(parse_jsonl(line("t1", "A", "\"b\"")
                                        + R"({"task_id":"t1","model":"B","options":["a","b"],"correct":"b","selected":"b"})"),
                            InconsistentTask);
        }
    }

    TEST_CASE("indices depend only on content")
    {
        const std::string text = line("t2", "B", "\"a\"") + line("t2", "A", "\"b\"") + line("t1", "B", "\"c\"")
                                 + line("t1", "A", "\"b\"");
        auto a = parse_jsonl(text);
        auto b = parse_jsonl(text);
        CHECK(a == b);
        CHECK(a.models() == std::vector<std::string>{"B", "A"});
        CHECK(a.task(0).id == "t2");
        CHECK(dataset_hash(a) == dataset_hash(b));
        CHECK(dataset_hash(a).size() == 16);
    }

    TEST_CASE("round trip through both formats")
    {
        SynthConfig cfg;
        cfg.models = 4;
        cfg.tasks = 60;
        cfg.options = 5;
        cfg.abstain_rate = 0.2;
        cfg.seed = 99;
        const auto ds = generate_responses(cfg).dataset;
        REQUIRE(validate_dataset(ds).abstain_count > 0);
        for (auto fmt : {ResponseFormat::jsonl, ResponseFormat::csv}) {
            std::stringstream ss;
            write_responses(ss, ds, fmt);
            auto back = build_dataset(parse_responses(ss, fmt));
            CHECK(back == ds);
            CHECK(dataset_hash(back) == dataset_hash(ds));
        }
    }

    TEST_CASE("csv quoting survives awkward labels")
    {
        auto ds = fixtures::grid({"m,1", "m\"2"}, {{"x,y", "z\"w"}}, {"x,y"}, {{"x,y", "z\"w"}});
        std::stringstream ss;
        write_responses(ss, ds, ResponseFormat::csv);
        auto back = build_dataset(parse_responses(ss, ResponseFormat::csv));
        CHECK(back == ds);

        auto piped = fixtures::grid({"A"}, {{"a", "b|c"}}, {"a"}, {{"a"}});
        std::stringstream bad;
        CHECK_THROWS_AS(write_responses(bad, piped, ResponseFormat::csv), SchemaError);
    }

    TEST_CASE("csv empty selection is an abstain")
    {
        std::istringstream in("task_id,model,correct,selected,options\nt1,A,a,,a|b\nt1,B,a,b,a|b\n");
        auto ds = build_dataset(parse_responses(in, ResponseFormat::csv));
        CHECK(ds.abstained(0, 0));
        CHECK(ds.failed(0, 1));
    }

    TEST_CASE("file round trip picks the format from the extension")
    {
        auto ds = fixtures::grid({"A", "B"}, {{"a", "b"}, {"a", "b"}}, {"a", "b"}, {{"a", ""}, {"a", "b"}});
        for (const char* name : {"rt.jsonl", "rt.csv"}) {
            auto p = fixtures::scratch(name);
            save_responses(p, ds, format_from_path(p));
            CHECK(load_responses(p) == ds);
        }
    }

    TEST_CASE("judgments")
    {
        const std::string text = R"({"task_id":"t1","judge":"J","model":"A","verdict":1,"truth":0,"reasoning_quality":2}
{"task_id":"t1","judge":"J","model":"B","verdict":true,"truth":true}
{"task_id":"t2","judge":"K","model":"A","verdict":0,"truth":1}
)";
        std::istringstream in(text);
        JudgmentDataset js(parse_judgments(in));
        CHECK(js.records().size() == 3);
        CHECK(js.judges() == std::vector<std::string>{"J", "K"});
        CHECK(js.models() == std::vector<std::string>{"A", "B"});
        CHECK(js.verdict("t1", "J", "A") == 1);
        CHECK(js.truth("t2", "A") == 1);
        CHECK_FALSE(js.verdict("t2", "J", "A").has_value());

        std::stringstream ss;
        write_judgments(ss, js);
        CHECK(JudgmentDataset(parse_judgments(ss)) == js);
    }

    TEST_CASE("judgment errors")
    {
        auto parse = [](const std::string& text) {
            std::istringstream in(text);
            return JudgmentDataset(parse_judgments(in));
        };
        CHECK_THROWS_AS(parse(R"({"task_id":"t1","judge":"J","model":"A","verdict":1,"truth":0}
{"task_id":"t1","judge":"J","model":"A","verdict":0,"truth":0})"),
                        DuplicateRecord);
        CHECK_THROWS_AS(parse(R"({"task_id":"t1","judge":"J","model":"A","verdict":1,"truth":0}
{"task_id":"t1","judge":"K","model":"A","verdict":0,"truth":1})"),
                        InconsistentTask);
        CHECK_THROWS_AS(parse(R"({"task_id":"t1","judge":"J","model":"A","verdict":2,"truth":0})"), Error);
        CHECK_THROWS_AS(parse(R"({"task_id":"t1","judge":"J","model":"A","truth":0})"), SchemaError);
    }
}
