#include "fter/config.hpp"

#include <doctest.h>

using namespace fter;

TEST_CASE("run config with a synthetic dataset") {
    const auto c = parse_run_config(R"({
        "dataset": {"synthetic": {"records": 30, "entities": 5, "seed": 4}},
        "noise": {"fp": 0.1, "fn": 0.2, "seed": 9},
        "strategy": "urs", "discipline": "cer", "mode": "par",
        "quorum": 4, "edge_budget": 12, "cer_votes": 7, "repetitions": 3,
        "trace": "out/trace.tsv"
    })",
                                    "/data");
    REQUIRE(c.synthetic);
    CHECK(c.synthetic->num_records == 30);
    CHECK(c.synthetic->num_entities == 5);
    CHECK(c.experiment.crowd == CrowdKind::synthetic);
    CHECK(c.experiment.noise.false_positive == 0.1);
    CHECK(c.experiment.noise.false_negative == 0.2);
    CHECK(c.experiment.engine.strategy == StrategyKind::urs);
    CHECK(c.experiment.engine.discipline.mode == Discipline::consensus);
    CHECK(c.experiment.engine.batched);
    CHECK(c.experiment.engine.discipline.quorum == 4);
    CHECK(c.experiment.engine.discipline.cer_votes == 7);
    CHECK(c.experiment.repetitions == 3);
    CHECK(*c.trace_out == std::filesystem::path("/data/out/trace.tsv"));
    CHECK_FALSE(c.live);
    CHECK(load_dataset(c).graph.num_records() == 30);
}

TEST_CASE("manifest datasets default to replay") {
    const auto c = parse_run_config(R"({"dataset": "m.json"})", "/x");
    CHECK(*c.manifest == std::filesystem::path("/x/m.json"));
    CHECK(c.experiment.crowd == CrowdKind::replay);
    CHECK(parse_run_config(R"({"dataset": "m.json", "crowd": "live"})").live);
}

TEST_CASE("bad run configs") {
    CHECK_THROWS_AS(parse_run_config("{"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("{}"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"dataset": "m.json", "colour": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"dataset": "m.json", "strategy": "best"})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"dataset": "m.json", "quorum": "three"})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"dataset": "m.json", "quorum": 12})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"dataset": "m.json", "repetitions": 0})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"dataset": "m.json", "mode": "fast"})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"dataset": "m.json", "prefilter": {"lower": 0.9, "upper": 0.1}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"dataset": "m.json", "prefilter": {"lower": 0.1}})"), ConfigError);
    CHECK_THROWS_AS(load_dataset(parse_run_config(R"({"dataset": {"synthetic": {"records": 3, "entities": 5}}})")),
                    ConfigError);
    CHECK_THROWS_AS(load_run_config("/nonexistent/config.json"), ConfigError);
}
